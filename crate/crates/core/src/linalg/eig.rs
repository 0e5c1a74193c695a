//! Generalized eigenstructure: clustered eigenvalues, algebraic
//! multiplicities, Jordan block sizes and spectral projectors, computed from
//! an ordered Schur form (invariant-subspace method).  A resolvent contour
//! quadrature is kept alongside as an independent cross-check.

use super::{ComplexMatrix, LinalgError, Schur, Svd, C64};

/// One generalized eigenvalue with its Jordan data and spectral projector.
#[derive(Debug, Clone)]
pub struct SpectralDatum {
    pub value: C64,
    pub alg_mult: usize,
    /// Jordan block sizes, ascending, summing to `alg_mult`.
    pub jordan_blocks: Vec<usize>,
    /// Idempotent onto the generalized eigenspace, commuting with the matrix.
    pub projector: ComplexMatrix,
}

/// Clusters the spectrum of `m` with relative tolerance `tol * max(1, |λ|)`
/// and returns one datum per cluster, sorted by (re, im) of the value.
pub fn generalized_eigenspaces(
    m: &ComplexMatrix,
    tol: f64,
) -> Result<Vec<SpectralDatum>, LinalgError> {
    if !m.is_square() {
        return Err(LinalgError::NotSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    let n = m.rows();
    if n == 0 {
        return Ok(vec![]);
    }
    let schur = Schur::new(m)?;
    let evs = schur.eigenvalues();
    let clusters = cluster_eigenvalues(&evs, tol);

    let mut data: Vec<SpectralDatum> = Vec::with_capacity(clusters.len());
    for members in &clusters {
        let mut mean = C64::new(0.0, 0.0);
        for &i in members {
            mean += evs[i];
        }
        mean /= members.len() as f64;

        let mut selected = vec![false; n];
        for &i in members {
            selected[i] = true;
        }
        let mut s = schur.clone();
        let k = s.reorder_to_front(&selected);
        debug_assert_eq!(k, members.len());

        let projector = if k == n {
            ComplexMatrix::identity(n)
        } else {
            let t11 = s.t.submatrix(0, k, 0, k);
            let t12 = s.t.submatrix(0, k, k, n);
            let t22 = s.t.submatrix(k, n, k, n);
            let x = solve_triangular_sylvester(&t11, &t22, &t12)?;
            // P = Q [[I, X], [0, 0]] Q^H
            let mut core = ComplexMatrix::zeros(n, n);
            for i in 0..k {
                core[(i, i)] = C64::new(1.0, 0.0);
                for j in 0..n - k {
                    core[(i, k + j)] = x[(i, j)];
                }
            }
            s.q.mul(&core).mul(&s.q.adjoint())
        };

        let t11 = s.t.submatrix(0, k, 0, k);
        let jordan_blocks = jordan_block_sizes(&t11, mean, tol);

        data.push(SpectralDatum {
            value: mean,
            alg_mult: k,
            jordan_blocks,
            projector,
        });
    }
    data.sort_by(|a, b| {
        (a.value.re, a.value.im)
            .partial_cmp(&(b.value.re, b.value.im))
            .unwrap()
    });
    Ok(data)
}

/// Union-find clustering of eigenvalues: i ~ j when
/// |λi - λj| <= tol * max(1, |λi|, |λj|).
fn cluster_eigenvalues(evs: &[C64], tol: f64) -> Vec<Vec<usize>> {
    let n = evs.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, i: usize) -> usize {
        let mut r = i;
        while parent[r] != r {
            r = parent[r];
        }
        let mut c = i;
        while parent[c] != r {
            let next = parent[c];
            parent[c] = r;
            c = next;
        }
        r
    }
    for i in 0..n {
        for j in i + 1..n {
            let scale = 1.0f64.max(evs[i].norm()).max(evs[j].norm());
            if (evs[i] - evs[j]).norm() <= tol * scale {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri] = rj;
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut root_of_group: Vec<usize> = Vec::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        match root_of_group.iter().position(|&g| g == r) {
            Some(gi) => groups[gi].push(i),
            None => {
                root_of_group.push(r);
                groups.push(vec![i]);
            }
        }
    }
    groups
}

/// Solves `T11 X - X T22 = T12` with both `T11`, `T22` upper triangular and
/// disjoint spectra, column by column.
fn solve_triangular_sylvester(
    t11: &ComplexMatrix,
    t22: &ComplexMatrix,
    t12: &ComplexMatrix,
) -> Result<ComplexMatrix, LinalgError> {
    let k = t11.rows();
    let l = t22.rows();
    let mut x = ComplexMatrix::zeros(k, l);
    for j in 0..l {
        // rhs = T12[:, j] + sum_{i<j} X[:, i] T22[i, j]
        let mut rhs = vec![C64::new(0.0, 0.0); k];
        for r in 0..k {
            rhs[r] = t12[(r, j)];
        }
        for i in 0..j {
            let f = t22[(i, j)];
            if f.norm_sqr() == 0.0 {
                continue;
            }
            for r in 0..k {
                rhs[r] += x[(r, i)] * f;
            }
        }
        // (T11 - T22[j,j] I) xj = rhs, back substitution
        let shift = t22[(j, j)];
        for r in (0..k).rev() {
            let mut acc = rhs[r];
            for c in r + 1..k {
                acc -= t11[(r, c)] * x[(c, j)];
            }
            let diag = t11[(r, r)] - shift;
            if diag.norm() == 0.0 {
                return Err(LinalgError::Singular("sylvester"));
            }
            x[(r, j)] = acc / diag;
        }
    }
    Ok(x)
}

/// Jordan block sizes of the cluster block `t11` around `value`, from kernel
/// dimensions of powers of the shifted block.
fn jordan_block_sizes(t11: &ComplexMatrix, value: C64, tol: f64) -> Vec<usize> {
    let k = t11.rows();
    if k == 0 {
        return vec![];
    }
    let mut shifted = t11.clone();
    for i in 0..k {
        shifted[(i, i)] -= value;
    }
    let scale = shifted.max_abs().max(tol.max(1e-14) * 1.0f64.max(value.norm()));
    // kernel dims d_j = dim ker(N^j), capped at the block size
    let mut d = vec![0usize];
    let mut power = ComplexMatrix::identity(k);
    let rank_tol = |j: usize| -> f64 {
        // perturbations of size ~ tol propagate through j-1 extra factors
        10.0 * (k as f64) * tol.max(1e-13) * 1.0f64.max(value.norm()) * scale.powi(j as i32 - 1)
    };
    for j in 1..=k {
        power = power.mul(&shifted);
        let rank = Svd::new(&power)
            .expect("finite block")
            .rank(rank_tol(j));
        let dj = k - rank;
        d.push(dj);
        if dj == k {
            break;
        }
    }
    // ensure the chain terminates at full kernel even if rank stagnated
    if *d.last().unwrap() < k {
        d.push(k);
    }
    // number of blocks of size >= j is d[j] - d[j-1]
    let mut at_least: Vec<usize> = Vec::new();
    for j in 1..d.len() {
        at_least.push(d[j].saturating_sub(d[j - 1]));
    }
    let mut sizes: Vec<usize> = Vec::new();
    for j in 0..at_least.len() {
        let here = at_least[j];
        let next = if j + 1 < at_least.len() {
            at_least[j + 1]
        } else {
            0
        };
        for _ in 0..here.saturating_sub(next) {
            sizes.push(j + 1);
        }
    }
    sizes.sort_unstable();
    if sizes.is_empty() {
        // numerically indistinguishable from a full single block
        sizes.push(k);
    }
    debug_assert_eq!(sizes.iter().sum::<usize>(), k);
    sizes
}

/// Spectral projector by trapezoid quadrature of the resolvent over the
/// circle `|z - center| = radius`. Independent of the Schur path; used as a
/// cross-check oracle.
pub fn contour_projector(
    a: &ComplexMatrix,
    center: C64,
    radius: f64,
    nodes: usize,
) -> Result<ComplexMatrix, LinalgError> {
    let n = a.rows();
    let mut p = ComplexMatrix::zeros(n, n);
    for k in 0..nodes {
        let theta = 2.0 * std::f64::consts::PI * (k as f64) / (nodes as f64);
        let w = C64::new(radius * theta.cos(), radius * theta.sin());
        let z = center + w;
        let mut zi_minus_a = a.scale(C64::new(-1.0, 0.0));
        for i in 0..n {
            zi_minus_a[(i, i)] += z;
        }
        let resolvent = zi_minus_a.solve(&ComplexMatrix::identity(n))?;
        // (1/2πi) ∮ (zI - A)^{-1} dz, dz = i w dθ
        p = p.add(&resolvent.scale(w / nodes as f64));
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn diagonal_case() {
        let a = ComplexMatrix::diag(&[c(2.0, 0.0), c(2.0, 0.0), c(5.0, 0.0)]);
        let data = generalized_eigenspaces(&a, 1e-8).unwrap();
        assert_eq!(data.len(), 2);
        assert_eq!(data[0].alg_mult, 2);
        assert_eq!(data[0].jordan_blocks, vec![1, 1]);
        assert!((data[0].value - c(2.0, 0.0)).norm() < 1e-12);
        assert_eq!(data[1].alg_mult, 1);
        assert_eq!(data[1].jordan_blocks, vec![1]);
    }

    #[test]
    fn nilpotent_jordan_block() {
        let a = ComplexMatrix::from_real_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]);
        let data = generalized_eigenspaces(&a, 1e-8).unwrap();
        assert_eq!(data.len(), 1);
        assert_eq!(data[0].alg_mult, 2);
        assert_eq!(data[0].jordan_blocks, vec![2]);
        assert!(data[0].value.norm() < 1e-12);
        // projector must be the identity here
        assert!(
            data[0]
                .projector
                .sub(&ComplexMatrix::identity(2))
                .max_abs()
                < 1e-12
        );
    }

    fn random_invertible(rng: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
        loop {
            let s = ComplexMatrix::from_fn(n, n, |_, _| {
                C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
            });
            let svd = Svd::new(&s).unwrap();
            if svd.sigma[n - 1] > 0.2 {
                return s;
            }
        }
    }

    #[test]
    fn recovers_planted_jordan_structure() {
        // S (J2(1+i) ⊕ J1(1+i) ⊕ J3(-2)) S^{-1}
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let lam1 = c(1.0, 1.0);
        let lam2 = c(-2.0, 0.0);
        let mut j = ComplexMatrix::zeros(6, 6);
        j[(0, 0)] = lam1;
        j[(0, 1)] = c(1.0, 0.0);
        j[(1, 1)] = lam1;
        j[(2, 2)] = lam1;
        j[(3, 3)] = lam2;
        j[(3, 4)] = c(1.0, 0.0);
        j[(4, 4)] = lam2;
        j[(4, 5)] = c(1.0, 0.0);
        j[(5, 5)] = lam2;
        let s = random_invertible(&mut rng, 6);
        let a = s.mul(&j).mul(&s.inverse().unwrap());
        // a defective eigenvalue of block size b scatters by O(eps^(1/b))
        // under similarity, so the clustering tolerance must sit above that
        let data = generalized_eigenspaces(&a, 1e-4).unwrap();
        assert_eq!(data.len(), 2);
        let d_neg = &data[0]; // sorted by re: -2 first
        let d_pos = &data[1];
        assert!((d_neg.value - lam2).norm() < 1e-8);
        assert_eq!(d_neg.alg_mult, 3);
        assert_eq!(d_neg.jordan_blocks, vec![3]);
        assert!((d_pos.value - lam1).norm() < 1e-8);
        assert_eq!(d_pos.alg_mult, 3);
        assert_eq!(d_pos.jordan_blocks, vec![1, 2]);
    }

    #[test]
    fn projectors_resolve_identity_and_commute() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let a = ComplexMatrix::from_fn(7, 7, |_, _| {
            C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        let data = generalized_eigenspaces(&a, 1e-8).unwrap();
        let mut sum = ComplexMatrix::zeros(7, 7);
        let mut mult_total = 0;
        for d in &data {
            mult_total += d.alg_mult;
            sum = sum.add(&d.projector);
            // idempotent
            let p2 = d.projector.mul(&d.projector);
            assert!(p2.sub(&d.projector).max_abs() < 1e-9);
            // commutes with a
            let ap = a.mul(&d.projector);
            let pa = d.projector.mul(&a);
            assert!(ap.sub(&pa).max_abs() < 1e-9);
            // rank equals algebraic multiplicity
            let r = Svd::new(&d.projector).unwrap().rank(0.5);
            assert_eq!(r, d.alg_mult);
            // (A - value)^max_block annihilates the image
            let mut nil = a.clone();
            for i in 0..7 {
                nil[(i, i)] -= d.value;
            }
            let mut pow = d.projector.clone();
            for _ in 0..*d.jordan_blocks.iter().max().unwrap() {
                pow = nil.mul(&pow);
            }
            assert!(pow.max_abs() < 1e-7 * a.max_abs().max(1.0));
        }
        assert_eq!(mult_total, 7);
        assert!(sum.sub(&ComplexMatrix::identity(7)).max_abs() < 1e-9);
    }

    #[test]
    fn contour_oracle_matches_schur_projector() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        // well-separated spectrum: J2(0.3) ⊕ diag(4, 5i)
        let mut j = ComplexMatrix::zeros(4, 4);
        j[(0, 0)] = c(0.3, 0.0);
        j[(0, 1)] = c(1.0, 0.0);
        j[(1, 1)] = c(0.3, 0.0);
        j[(2, 2)] = c(4.0, 0.0);
        j[(3, 3)] = c(0.0, 5.0);
        let s = random_invertible(&mut rng, 4);
        let a = s.mul(&j).mul(&s.inverse().unwrap());
        let data = generalized_eigenspaces(&a, 1e-6).unwrap();
        let d0 = data
            .iter()
            .find(|d| (d.value - c(0.3, 0.0)).norm() < 1e-6)
            .unwrap();
        let oracle = contour_projector(&a, c(0.3, 0.0), 1.5, 256).unwrap();
        assert!(oracle.sub(&d0.projector).max_abs() < 1e-8);
    }

    #[test]
    fn rejects_non_square() {
        let a = ComplexMatrix::zeros(2, 3);
        assert!(matches!(
            generalized_eigenspaces(&a, 1e-8),
            Err(LinalgError::NotSquare { .. })
        ));
    }
}
