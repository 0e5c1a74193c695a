//! Principal-symbol calculus on Λ•(R^{m-1}) ⊗ C^n and the Seeley
//! well-posedness check for the boundary projections.
//!
//! The fiber of the boundary restriction splits into a tangential and a
//! normal slot, so symbols act on two copies of Λ•(R^{m-1}) ⊗ C^n. The basis
//! of Λ• is indexed by lexicographically ordered index subsets, which fixes
//! every matrix representation and sign.

use crate::linalg::{ComplexMatrix, Svd, C64};
use crate::par;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Fiber data: boundary dimension `m - 1` and flat bundle rank `n`.
#[derive(Debug, Clone, Copy)]
pub struct SymbolSpace {
    pub base_dim: usize,
    pub bundle_rank: usize,
}

/// Which boundary projection symbol to test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProjectionSide {
    /// σ_L(P₋): orthogonal projection onto { ξ∧ω : ξ⌟ω = 0 }, doubled.
    Minus,
    /// σ_L(P₊): orthogonal projection onto { ω : ξ⌟ω = 0 }, doubled.
    Plus,
}

/// Real cotangent covector on the boundary.
#[derive(Debug, Clone)]
pub struct Covector {
    pub components: Vec<f64>,
}

impl Covector {
    pub fn new(components: Vec<f64>) -> Self {
        Covector { components }
    }

    pub fn axis(dim: usize, i: usize) -> Self {
        let mut c = vec![0.0; dim];
        c[i] = 1.0;
        Covector { components: c }
    }

    pub fn norm(&self) -> f64 {
        self.components.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn random_unit(dim: usize, rng: &mut impl Rng) -> Self {
        loop {
            let c: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let n = c.iter().map(|x| x * x).sum::<f64>().sqrt();
            if n > 1e-3 {
                return Covector {
                    components: c.iter().map(|x| x / n).collect(),
                };
            }
        }
    }
}

impl SymbolSpace {
    pub fn new(base_dim: usize, bundle_rank: usize) -> Self {
        assert!(base_dim >= 1);
        assert!(bundle_rank >= 1);
        SymbolSpace {
            base_dim,
            bundle_rank,
        }
    }

    /// dim Λ•(R^{m-1}) ⊗ C^n.
    pub fn lambda_dim(&self) -> usize {
        (1usize << self.base_dim) * self.bundle_rank
    }

    /// Doubled fiber: tangential ⊕ normal slot.
    pub fn fiber_dim(&self) -> usize {
        2 * self.lambda_dim()
    }

    /// Index subsets of {0, .., base_dim-1} in lexicographic order.
    pub fn basis_subsets(&self) -> Vec<Vec<usize>> {
        fn rec(start: usize, d: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            out.push(prefix.clone());
            for i in start..d {
                prefix.push(i);
                rec(i + 1, d, prefix, out);
                prefix.pop();
            }
        }
        let mut out = Vec::new();
        rec(0, self.base_dim, &mut Vec::new(), &mut out);
        out
    }

    fn subset_index_map(&self) -> std::collections::HashMap<u64, usize> {
        self.basis_subsets()
            .iter()
            .enumerate()
            .map(|(i, s)| (mask_of(s), i))
            .collect()
    }

    /// Matrix of ω ↦ ξ∧ω on Λ•(R^{m-1}) (bundle factor not yet attached).
    fn wedge_raw(&self, xi: &Covector) -> ComplexMatrix {
        assert_eq!(xi.components.len(), self.base_dim);
        let subsets = self.basis_subsets();
        let index = self.subset_index_map();
        let dim = subsets.len();
        let mut m = ComplexMatrix::zeros(dim, dim);
        for (j, s) in subsets.iter().enumerate() {
            let mask = mask_of(s);
            for i in 0..self.base_dim {
                if mask & (1 << i) != 0 {
                    continue;
                }
                let sign = if s.iter().filter(|x| **x < i).count() % 2 == 0 {
                    1.0
                } else {
                    -1.0
                };
                let target = index[&(mask | (1 << i))];
                m[(target, j)] += C64::new(sign * xi.components[i], 0.0);
            }
        }
        m
    }

    /// Matrix of ω ↦ ξ⌟ω.
    fn contract_raw(&self, xi: &Covector) -> ComplexMatrix {
        assert_eq!(xi.components.len(), self.base_dim);
        let subsets = self.basis_subsets();
        let index = self.subset_index_map();
        let dim = subsets.len();
        let mut m = ComplexMatrix::zeros(dim, dim);
        for (j, s) in subsets.iter().enumerate() {
            let mask = mask_of(s);
            for &i in s {
                let sign = if s.iter().filter(|x| **x < i).count() % 2 == 0 {
                    1.0
                } else {
                    -1.0
                };
                let target = index[&(mask & !(1 << i))];
                m[(target, j)] += C64::new(sign * xi.components[i], 0.0);
            }
        }
        m
    }

    /// σ_L(∇^Y)(ξ) = i ξ∧ on Λ• ⊗ C^n.
    pub fn wedge_symbol(&self, xi: &Covector) -> ComplexMatrix {
        self.wedge_raw(xi)
            .scale(C64::new(0.0, 1.0))
            .kron(&ComplexMatrix::identity(self.bundle_rank))
    }

    /// σ_L(Γ^Y ∇^Y Γ^Y)(ξ) = -i ξ⌟ on Λ• ⊗ C^n.
    pub fn contract_symbol(&self, xi: &Covector) -> ComplexMatrix {
        self.contract_raw(xi)
            .scale(C64::new(0.0, -1.0))
            .kron(&ComplexMatrix::identity(self.bundle_rank))
    }

    /// σ_L(A)(ξ): off-diagonal blocks -i(ξ∧ - ξ⌟) on the doubled fiber.
    pub fn tangential_symbol(&self, xi: &Covector) -> ComplexMatrix {
        assert!(xi.norm() > 0.0, "tangential symbol needs a nonzero covector");
        let block = self
            .wedge_raw(xi)
            .sub(&self.contract_raw(xi))
            .scale(C64::new(0.0, -1.0))
            .kron(&ComplexMatrix::identity(self.bundle_rank));
        let l = self.lambda_dim();
        let mut m = ComplexMatrix::zeros(2 * l, 2 * l);
        for i in 0..l {
            for j in 0..l {
                m[(i, l + j)] = block[(i, j)];
                m[(l + i, j)] = block[(i, j)];
            }
        }
        m
    }

    /// Orthonormal basis of { ω : ξ⌟ω = 0 } in Λ• ⊗ C^n.
    fn contraction_kernel(&self, xi: &Covector) -> ComplexMatrix {
        let c = self.contract_symbol(xi);
        Svd::new(&c)
            .expect("finite symbol")
            .kernel_basis(1e-12 * xi.norm().max(1.0))
    }

    /// Basis of the Cauchy data symbol space N₊(ξ): the positive eigenspace
    /// of σ_L(A)(ξ), spanned by (‖ξ‖ω - iξ∧ω, ‖ξ‖ω - iξ∧ω) and
    /// (‖ξ‖ω + iξ∧ω, -‖ξ‖ω - iξ∧ω) over ω with ξ⌟ω = 0.
    pub fn cauchy_symbol_space(&self, xi: &Covector) -> ComplexMatrix {
        let norm = xi.norm();
        assert!(norm > 0.0, "Cauchy symbol space needs a nonzero covector");
        let omega = self.contraction_kernel(xi);
        let l = self.lambda_dim();
        let wedge = self.wedge_symbol(xi); // iξ∧
        let k = omega.cols();
        let mut out = ComplexMatrix::zeros(2 * l, 2 * k);
        for j in 0..k {
            let w = omega.col(j);
            let iw = wedge.mul_vec(&w); // wedge carries the factor i already
            for i in 0..l {
                let a = C64::new(norm, 0.0) * w[i] - iw[i]; // ‖ξ‖ω - iξ∧ω
                let b = C64::new(norm, 0.0) * w[i] + iw[i]; // ‖ξ‖ω + iξ∧ω
                out[(i, j)] = a;
                out[(l + i, j)] = a;
                out[(i, k + j)] = b;
                out[(l + i, k + j)] = -b;
            }
        }
        // normalize columns
        for j in 0..out.cols() {
            let col = out.col(j);
            let n = col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if n > 0.0 {
                for i in 0..out.rows() {
                    out[(i, j)] = out[(i, j)] / C64::new(n, 0.0);
                }
            }
        }
        out
    }

    /// σ_L(P∓)(ξ) on the doubled fiber.
    pub fn projection_symbol(&self, xi: &Covector, side: ProjectionSide) -> ComplexMatrix {
        let omega = self.contraction_kernel(xi);
        let single = match side {
            ProjectionSide::Plus => {
                // orthonormal columns already
                omega.mul(&omega.adjoint())
            }
            ProjectionSide::Minus => {
                let wedged = self.wedge_symbol(xi).mul(&omega);
                let basis = Svd::new(&wedged)
                    .expect("finite symbol")
                    .image_basis(1e-12 * xi.norm().max(1.0));
                basis.mul(&basis.adjoint())
            }
        };
        ComplexMatrix::block_diag(&[&single, &single])
    }

    /// Seeley well-posedness check: σ_L(P)(ξ) restricted to N₊(ξ) is injective
    /// with image equal to the full symbol range.
    pub fn wellposedness_check(&self, xi: &Covector, side: ProjectionSide) -> WellposednessReport {
        let p = self.projection_symbol(xi, side);
        let cauchy = self.cauchy_symbol_space(xi);
        let tol = 1e-10;
        let pn = p.mul(&cauchy);
        let rank_on_cauchy = Svd::new(&pn).expect("finite").rank(tol);
        let rank_p = Svd::new(&p).expect("finite").rank(0.5);
        let dim_cauchy = cauchy.cols();
        WellposednessReport {
            wellposed: rank_on_cauchy == dim_cauchy && rank_on_cauchy == rank_p,
            rank_on_cauchy,
            rank_p,
            dim_cauchy,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct WellposednessReport {
    pub wellposed: bool,
    pub rank_on_cauchy: usize,
    pub rank_p: usize,
    pub dim_cauchy: usize,
}

fn mask_of(s: &[usize]) -> u64 {
    s.iter().fold(0u64, |m, i| m | (1 << i))
}

/// Sweeps `count` random unit covectors for both projections; returns the
/// number of failures (expected 0: both projections are well-posed).
pub fn wellposedness_sweep(space: SymbolSpace, count: usize, seed: u64) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let covectors: Vec<Covector> = (0..count)
        .map(|_| Covector::random_unit(space.base_dim, &mut rng))
        .collect();
    let results = par::map_vec(covectors, move |xi| {
        let a = space.wellposedness_check(&xi, ProjectionSide::Minus).wellposed;
        let b = space.wellposedness_check(&xi, ProjectionSide::Plus).wellposed;
        a && b
    });
    results.iter().filter(|ok| !**ok).count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::generalized_eigenspaces;

    #[test]
    fn wedge_and_contract_single_axis() {
        // d = 2, n = 1, ξ = e1: wedge maps the empty subset to i·e1,
        // contraction maps e1 to -i·1
        let sp = SymbolSpace::new(2, 1);
        let xi = Covector::axis(2, 0);
        let w = sp.wedge_symbol(&xi);
        let subsets = sp.basis_subsets();
        let idx_empty = subsets.iter().position(|s| s.is_empty()).unwrap();
        let idx_e1 = subsets.iter().position(|s| s == &vec![0]).unwrap();
        assert!((w[(idx_e1, idx_empty)] - C64::new(0.0, 1.0)).norm() < 1e-15);
        let c = sp.contract_symbol(&xi);
        assert!((c[(idx_empty, idx_e1)] - C64::new(0.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn clifford_anticommutator() {
        let sp = SymbolSpace::new(3, 2);
        let xi = Covector::new(vec![0.3, -1.2, 0.4]);
        let w = sp.wedge_symbol(&xi);
        let c = sp.contract_symbol(&xi);
        let anti = w.mul(&c).add(&c.mul(&w));
        let expect = ComplexMatrix::identity(sp.lambda_dim()).scale(C64::new(xi.norm().powi(2), 0.0));
        assert!(anti.sub(&expect).max_abs() < 1e-12);
    }

    #[test]
    fn tangential_symbol_spectrum_unit_covector() {
        let sp = SymbolSpace::new(2, 1);
        let xi = Covector::axis(2, 0);
        let a = sp.tangential_symbol(&xi);
        // symbol squared is the identity
        let sq = a.mul(&a);
        assert!(sq.sub(&ComplexMatrix::identity(8)).max_abs() < 1e-12);
        let data = generalized_eigenspaces(&a, 1e-8).unwrap();
        assert_eq!(data.len(), 2);
        assert!((data[0].value + C64::new(1.0, 0.0)).norm() < 1e-9);
        assert_eq!(data[0].alg_mult, 4);
        assert!((data[1].value - C64::new(1.0, 0.0)).norm() < 1e-9);
        assert_eq!(data[1].alg_mult, 4);
    }

    #[test]
    fn tangential_symbol_scales_linearly() {
        let sp = SymbolSpace::new(3, 1);
        let xi = Covector::new(vec![0.5, 0.1, -0.7]);
        let scaled = Covector::new(vec![1.5, 0.3, -2.1]);
        let a = sp.tangential_symbol(&xi).scale(C64::new(3.0, 0.0));
        let b = sp.tangential_symbol(&scaled);
        assert!(a.sub(&b).max_abs() < 1e-12);
    }

    #[test]
    fn cauchy_space_dimension_and_eigenvectors() {
        let sp = SymbolSpace::new(2, 1);
        let xi = Covector::axis(2, 0);
        let n_plus = sp.cauchy_symbol_space(&xi);
        assert_eq!(n_plus.cols(), 4);
        assert_eq!(n_plus.cols(), sp.fiber_dim() / 2);
        let a = sp.tangential_symbol(&xi);
        let av = a.mul(&n_plus);
        assert!(av.sub(&n_plus).max_abs() < 1e-12, "columns not +1 eigenvectors");
    }

    #[test]
    fn cauchy_space_general_covector() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..5 {
            let sp = SymbolSpace::new(3, 2);
            let xi = Covector::random_unit(3, &mut rng);
            let n_plus = sp.cauchy_symbol_space(&xi);
            assert_eq!(n_plus.cols(), sp.fiber_dim() / 2);
            let a = sp.tangential_symbol(&xi);
            let av = a.mul(&n_plus);
            assert!(av.sub(&n_plus).max_abs() < 1e-11);
        }
    }

    #[test]
    fn projection_symbols_complement() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let sp = SymbolSpace::new(2, 2);
        let xi = Covector::random_unit(2, &mut rng);
        let pm = sp.projection_symbol(&xi, ProjectionSide::Minus);
        let pp = sp.projection_symbol(&xi, ProjectionSide::Plus);
        let sum = pm.add(&pp);
        assert!(sum.sub(&ComplexMatrix::identity(sp.fiber_dim())).max_abs() < 1e-12);
        assert!(pm.mul(&pm).sub(&pm).max_abs() < 1e-12);
        assert!(pp.mul(&pp).sub(&pp).max_abs() < 1e-12);
        assert!(pm.mul(&pp).max_abs() < 1e-12);
    }

    #[test]
    fn wellposed_axis_covector() {
        let sp = SymbolSpace::new(2, 1);
        let xi = Covector::axis(2, 0);
        let rep_minus = sp.wellposedness_check(&xi, ProjectionSide::Minus);
        assert!(rep_minus.wellposed);
        assert_eq!(rep_minus.rank_on_cauchy, 4);
        let rep_plus = sp.wellposedness_check(&xi, ProjectionSide::Plus);
        assert!(rep_plus.wellposed);
    }

    #[test]
    fn wellposed_small_sweep() {
        assert_eq!(wellposedness_sweep(SymbolSpace::new(2, 1), 10, 3), 0);
        assert_eq!(wellposedness_sweep(SymbolSpace::new(4, 1), 5, 4), 0);
    }
}
