//! Singular value decomposition by one-sided (Hestenes) Jacobi rotations.
//!
//! Column rotations act directly on A, so small singular values come out with
//! high relative accuracy. That matters because rank decisions elsewhere use
//! thresholds like 1e-10 * ||A||.

use super::{ComplexMatrix, LinalgError, C64};

const MAX_SWEEPS: usize = 64;

/// Full SVD `A = U diag(sigma) V^H` with `U` (m x m) and `V` (n x n) unitary
/// and `sigma` descending of length `min(m, n)`.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: ComplexMatrix,
    pub sigma: Vec<f64>,
    pub v: ComplexMatrix,
}

impl Svd {
    pub fn new(a: &ComplexMatrix) -> Result<Svd, LinalgError> {
        a.check_finite()?;
        let (m, n) = (a.rows(), a.cols());
        if m == 0 || n == 0 {
            return Ok(Svd {
                u: ComplexMatrix::identity(m),
                sigma: vec![],
                v: ComplexMatrix::identity(n),
            });
        }
        if m >= n {
            let (u, sigma, v) = jacobi_tall(a);
            Ok(Svd { u, sigma, v })
        } else {
            let (u, sigma, v) = jacobi_tall(&a.adjoint());
            Ok(Svd {
                u: v,
                sigma,
                v: u,
            })
        }
    }

    pub fn rank(&self, tol: f64) -> usize {
        self.sigma.iter().filter(|s| **s > tol).count()
    }

    /// Orthonormal basis of the image (columns of U for sigma > tol).
    pub fn image_basis(&self, tol: f64) -> ComplexMatrix {
        let r = self.rank(tol);
        self.u.submatrix(0, self.u.rows(), 0, r)
    }

    /// Orthonormal basis of the kernel (trailing columns of V).
    pub fn kernel_basis(&self, tol: f64) -> ComplexMatrix {
        let r = self.rank(tol);
        self.v.submatrix(0, self.v.rows(), r, self.v.cols())
    }

    pub fn pinv(&self, tol: f64) -> ComplexMatrix {
        let (m, n) = (self.u.rows(), self.v.rows());
        let mut s_inv = ComplexMatrix::zeros(n, m);
        for (i, s) in self.sigma.iter().enumerate() {
            if *s > tol {
                s_inv[(i, i)] = C64::new(1.0 / s, 0.0);
            }
        }
        self.v.mul(&s_inv).mul(&self.u.adjoint())
    }
}

/// One-sided Jacobi on a tall matrix (m >= n).
fn jacobi_tall(a: &ComplexMatrix) -> (ComplexMatrix, Vec<f64>, ComplexMatrix) {
    let (m, n) = (a.rows(), a.cols());
    let mut w = a.clone();
    let mut v = ComplexMatrix::identity(n);
    let scale = a.max_abs().max(1e-300);
    let eps = f64::EPSILON;

    for _sweep in 0..MAX_SWEEPS {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in p + 1..n {
                let mut app = 0.0f64;
                let mut aqq = 0.0f64;
                let mut apq = C64::new(0.0, 0.0);
                for i in 0..m {
                    let wp = w[(i, p)];
                    let wq = w[(i, q)];
                    app += wp.norm_sqr();
                    aqq += wq.norm_sqr();
                    apq += wp.conj() * wq;
                }
                let denom = (app * aqq).sqrt();
                if denom <= (scale * scale) * 1e-300 || apq.norm() <= eps * denom {
                    continue;
                }
                off = off.max(apq.norm() / denom.max(1e-300));
                // phase so the off-diagonal Gram entry becomes real positive
                let g = apq.norm();
                let phase = apq / g;
                let beta = (aqq - app) / (2.0 * g);
                let t = {
                    let sgn = if beta >= 0.0 { 1.0 } else { -1.0 };
                    sgn / (beta.abs() + (1.0 + beta * beta).sqrt())
                };
                let cr = 1.0 / (1.0 + t * t).sqrt();
                let sr = cr * t;
                let ph = phase.conj();
                for i in 0..m {
                    let wp = w[(i, p)];
                    let wq = w[(i, q)] * ph;
                    w[(i, p)] = wp * cr - wq * sr;
                    w[(i, q)] = wp * sr + wq * cr;
                }
                for i in 0..n {
                    let vp = v[(i, p)];
                    let vq = v[(i, q)] * ph;
                    v[(i, p)] = vp * cr - vq * sr;
                    v[(i, q)] = vp * sr + vq * cr;
                }
            }
        }
        if off <= eps * 4.0 {
            break;
        }
    }

    // singular values and column ordering
    let mut sig: Vec<(f64, usize)> = (0..n)
        .map(|j| {
            let mut s = 0.0;
            for i in 0..m {
                s += w[(i, j)].norm_sqr();
            }
            (s.sqrt(), j)
        })
        .collect();
    sig.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));

    let sigma: Vec<f64> = sig.iter().map(|(s, _)| *s).collect();
    let mut v_sorted = ComplexMatrix::zeros(n, n);
    let mut u_thin = ComplexMatrix::zeros(m, n);
    for (new_j, (s, old_j)) in sig.iter().enumerate() {
        for i in 0..n {
            v_sorted[(i, new_j)] = v[(i, *old_j)];
        }
        if *s > 0.0 {
            for i in 0..m {
                u_thin[(i, new_j)] = w[(i, *old_j)] / C64::new(*s, 0.0);
            }
        }
    }

    // drop columns that belong to (numerically) zero singular values, then
    // complete U to a full unitary
    let cutoff = sigma.first().copied().unwrap_or(0.0) * eps * (m.max(n) as f64);
    let solid = sigma.iter().filter(|s| **s > cutoff).count();
    let u_solid = u_thin.submatrix(0, m, 0, solid);
    let u = complete_orthonormal(&u_solid, m);
    (u, sigma, v_sorted)
}

/// Extends orthonormal columns to a full orthonormal basis of C^dim by
/// greedily picking, at each step, the standard basis vector with the
/// largest residual after projection (always at least √((dim-k)/dim) by
/// dimension counting, so the procedure cannot stall).
pub fn complete_orthonormal(cols: &ComplexMatrix, dim: usize) -> ComplexMatrix {
    assert_eq!(cols.rows(), dim);
    let mut basis: Vec<Vec<C64>> = (0..cols.cols()).map(|j| cols.col(j)).collect();
    let project = |basis: &[Vec<C64>], v: &mut Vec<C64>| {
        for _pass in 0..2 {
            for b in basis {
                let mut proj = C64::new(0.0, 0.0);
                for i in 0..dim {
                    proj += b[i].conj() * v[i];
                }
                for i in 0..dim {
                    v[i] -= proj * b[i];
                }
            }
        }
    };
    while basis.len() < dim {
        let mut best: Option<(f64, Vec<C64>)> = None;
        for cand in 0..dim {
            let mut v = vec![C64::new(0.0, 0.0); dim];
            v[cand] = C64::new(1.0, 0.0);
            project(&basis, &mut v);
            let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if best.as_ref().map_or(true, |(bn, _)| norm > *bn) {
                best = Some((norm, v));
            }
        }
        let (norm, mut v) = best.expect("dim > 0");
        assert!(
            norm > 1e-8,
            "orthonormal completion stalled (residual {norm})"
        );
        for z in v.iter_mut() {
            *z /= C64::new(norm, 0.0);
        }
        basis.push(v);
    }
    let mut out = ComplexMatrix::zeros(dim, dim);
    for (j, b) in basis.iter().enumerate() {
        for i in 0..dim {
            out[(i, j)] = b[i];
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(rng: &mut ChaCha8Rng, m: usize, n: usize) -> ComplexMatrix {
        ComplexMatrix::from_fn(m, n, |_, _| {
            C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        })
    }

    fn assert_unitary(u: &ComplexMatrix, tol: f64) {
        let g = u.adjoint().mul(u);
        let d = g.sub(&ComplexMatrix::identity(u.cols()));
        assert!(d.max_abs() < tol, "not unitary: {}", d.max_abs());
    }

    #[test]
    fn svd_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for &(m, n) in &[(5usize, 5usize), (8, 3), (3, 8), (1, 4), (6, 1)] {
            let a = random_matrix(&mut rng, m, n);
            let svd = Svd::new(&a).unwrap();
            assert_unitary(&svd.u, 1e-12);
            assert_unitary(&svd.v, 1e-12);
            let k = m.min(n);
            let mut s = ComplexMatrix::zeros(m, n);
            for i in 0..k {
                s[(i, i)] = C64::new(svd.sigma[i], 0.0);
            }
            let rec = svd.u.mul(&s).mul(&svd.v.adjoint());
            assert!(rec.sub(&a).max_abs() < 1e-12 * a.max_abs().max(1.0));
        }
    }

    #[test]
    fn svd_rank_deficient_kernel() {
        // rank-1 outer product: kernel has dimension n-1 and A * kernel = 0
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let u = random_matrix(&mut rng, 6, 1);
        let v = random_matrix(&mut rng, 4, 1);
        let a = u.mul(&v.adjoint());
        let svd = Svd::new(&a).unwrap();
        assert_eq!(svd.rank(1e-10), 1);
        let ker = svd.kernel_basis(1e-10);
        assert_eq!(ker.cols(), 3);
        assert!(a.mul(&ker).max_abs() < 1e-12);
    }

    #[test]
    fn tiny_singular_values_are_accurate() {
        // diag(1, 1e-12) hidden by a unitary; one-sided Jacobi should recover
        // the small value to near machine relative accuracy
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let q = Svd::new(&random_matrix(&mut rng, 2, 2)).unwrap().u;
        let d = ComplexMatrix::diag(&[C64::new(1.0, 0.0), C64::new(1e-12, 0.0)]);
        let a = q.mul(&d);
        let svd = Svd::new(&a).unwrap();
        assert!((svd.sigma[0] - 1.0).abs() < 1e-13);
        assert!((svd.sigma[1] - 1e-12).abs() < 1e-24 / f64::EPSILON);
    }

    #[test]
    fn pinv_projects() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = random_matrix(&mut rng, 5, 3);
        let svd = Svd::new(&a).unwrap();
        let p = svd.pinv(1e-12);
        let apa = a.mul(&p).mul(&a);
        assert!(apa.sub(&a).max_abs() < 1e-11);
    }
}
