//! Map helpers for the data-parallel sweeps (per-seed models, per-covector
//! symbol checks, per-t trace grids). With the `parallel` feature the work
//! fans out over rayon; without it the same call runs sequentially. Each
//! item's computation keeps its own fixed summation order, so results do not
//! depend on the scheduling.

#[cfg(feature = "parallel")]
pub fn map_vec<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync + Send,
{
    use rayon::prelude::*;
    items.into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_vec<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    F: Fn(T) -> U,
{
    items.into_iter().map(f).collect()
}

/// Always-sequential variant, kept for benchmarking against `map_vec`.
pub fn map_vec_seq<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    F: Fn(T) -> U,
{
    items.into_iter().map(f).collect()
}

#[cfg(test)]
mod tests {
    #[test]
    fn par_and_seq_agree() {
        let items: Vec<u64> = (0..100).collect();
        let a = super::map_vec(items.clone(), |x| x * x + 1);
        let b = super::map_vec_seq(items, |x| x * x + 1);
        assert_eq!(a, b);
    }
}
