//! Agmon-angle branch of the logarithm, graded log-determinants over finite
//! spectra, and the operator (spectral) norm.

use super::{ComplexMatrix, LinalgError, SpectralDatum, Svd, C64};

/// Branch-cut direction for first-order operators: θ in (-π/2, 0).
/// The squared operator uses the doubled cut `2θ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgmonAngle {
    theta: f64,
}

impl AgmonAngle {
    pub fn new(theta: f64) -> Result<AgmonAngle, String> {
        if theta > -std::f64::consts::FRAC_PI_2 && theta < 0.0 {
            Ok(AgmonAngle { theta })
        } else {
            Err(format!(
                "Agmon angle must lie in (-pi/2, 0), got {theta}"
            ))
        }
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Cut direction for the squared operator.
    pub fn doubled(&self) -> f64 {
        2.0 * self.theta
    }
}

/// Argument of `z` in the window `(cut, cut + 2π)`.
/// Fails when `z` sits on the cut ray (within an absolute angle of 1e-12).
pub fn arg_in_cut(z: C64, cut: f64) -> Result<f64, LinalgError> {
    let mut a = z.arg(); // (-π, π]
    if a <= cut {
        a += 2.0 * std::f64::consts::PI;
    }
    let dist = (a - cut).min(cut + 2.0 * std::f64::consts::PI - a);
    if dist < 1e-12 {
        return Err(LinalgError::OnCutRay(z));
    }
    Ok(a)
}

/// `Σ mult · (ln|λ| + i·arg_cut λ)` over the spectrum, with the branch of the
/// argument taken in `(cut, cut + 2π)`.
pub fn log_det_cut(spectrum: &[SpectralDatum], cut: f64) -> Result<C64, LinalgError> {
    let mut acc = C64::new(0.0, 0.0);
    for d in spectrum {
        if d.value.norm() == 0.0 {
            return Err(LinalgError::ZeroEigenvalue);
        }
        let a = arg_in_cut(d.value, cut)?;
        acc += C64::new(d.value.norm().ln(), a) * (d.alg_mult as f64);
    }
    Ok(acc)
}

/// Same over a plain eigenvalue list (each with multiplicity one).
pub fn log_det_cut_values(values: &[C64], cut: f64) -> Result<C64, LinalgError> {
    let mut acc = C64::new(0.0, 0.0);
    for v in values {
        if v.norm() == 0.0 {
            return Err(LinalgError::ZeroEigenvalue);
        }
        let a = arg_in_cut(*v, cut)?;
        acc += C64::new(v.norm().ln(), a);
    }
    Ok(acc)
}

pub fn log_det_agmon(spectrum: &[SpectralDatum], theta: AgmonAngle) -> Result<C64, LinalgError> {
    log_det_cut(spectrum, theta.theta())
}

/// Largest singular value; 0 for an empty matrix.
pub fn operator_norm(m: &ComplexMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    Svd::new(m)
        .expect("finite matrix")
        .sigma
        .first()
        .copied()
        .unwrap_or(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::generalized_eigenspaces;
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn datum(value: C64, mult: usize) -> SpectralDatum {
        SpectralDatum {
            value,
            alg_mult: mult,
            jordan_blocks: vec![1; mult],
            projector: ComplexMatrix::identity(0),
        }
    }

    #[test]
    fn log_of_one_is_zero() {
        let spec = vec![datum(c(1.0, 0.0), 2)];
        let ld = log_det_cut(&spec, -PI / 2.0).unwrap();
        assert!(ld.norm() < 1e-14);
    }

    #[test]
    fn log_of_minus_one_quarter_cut() {
        // arg_{-π/4}(-1) = π by the branch definition
        let spec = vec![datum(c(-1.0, 0.0), 1)];
        let ld = log_det_cut(&spec, -PI / 4.0).unwrap();
        assert!((ld - c(0.0, PI)).norm() < 1e-14);
    }

    #[test]
    fn log_of_i_half_cut() {
        let spec = vec![datum(c(0.0, 1.0), 1)];
        let ld = log_det_cut(&spec, -PI / 2.0).unwrap();
        assert!((ld - c(0.0, PI / 2.0)).norm() < 1e-14);
    }

    #[test]
    fn zero_eigenvalue_rejected() {
        let spec = vec![datum(c(0.0, 0.0), 1)];
        assert!(matches!(
            log_det_cut(&spec, -PI / 2.0),
            Err(LinalgError::ZeroEigenvalue)
        ));
    }

    #[test]
    fn on_ray_rejected() {
        let spec = vec![datum(c(0.0, -2.0), 1)];
        assert!(matches!(
            log_det_cut(&spec, -PI / 2.0),
            Err(LinalgError::OnCutRay(_))
        ));
    }

    #[test]
    fn branch_difference_is_2pi_i_integer() {
        // eigenvalues scattered around the plane: swapping the cut changes
        // the log-determinant by 2πi times the number of swept eigenvalues
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let spec: Vec<SpectralDatum> = (0..12)
            .map(|_| {
                datum(
                    c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)),
                    rng.gen_range(1..3),
                )
            })
            .collect();
        let cut_a = -PI / 3.0;
        let cut_b = -0.1;
        let la = log_det_cut(&spec, cut_a).unwrap();
        let lb = log_det_cut(&spec, cut_b).unwrap();
        let diff = (la - lb) / c(0.0, 2.0 * PI);
        assert!(diff.im.abs() < 1e-12);
        assert!((diff.re - diff.re.round()).abs() < 1e-12);
        // exact expected count: eigenvalues with principal arg in (cut_a, cut_b]
        let expected: i64 = spec
            .iter()
            .map(|d| {
                let a = d.value.arg();
                if a > cut_a && a <= cut_b {
                    d.alg_mult as i64
                } else {
                    0
                }
            })
            .sum();
        assert_eq!(diff.re.round() as i64, expected);
    }

    #[test]
    fn exp_log_det_matches_plain_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = ComplexMatrix::from_fn(6, 6, |_, _| {
            C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        let data = generalized_eigenspaces(&a, 1e-9).unwrap();
        let ld = log_det_cut(&data, -PI / 2.0 + 0.05).unwrap();
        let det_via_log = ld.exp();
        let det_direct = a.det().unwrap();
        assert!(
            (det_via_log - det_direct).norm() <= 1e-9 * det_direct.norm().max(1.0),
            "{det_via_log} vs {det_direct}"
        );
    }

    #[test]
    fn operator_norm_examples() {
        assert!((operator_norm(&ComplexMatrix::identity(3)) - 1.0).abs() < 1e-14);
        let a = ComplexMatrix::from_real_rows(&[vec![0.0, 2.0], vec![0.0, 0.0]]);
        assert!((operator_norm(&a) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn operator_norm_vs_power_iteration() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let a = ComplexMatrix::from_fn(8, 8, |_, _| {
            C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        // power iteration on A^H A as an independent oracle
        let aha = a.adjoint().mul(&a);
        let mut v: Vec<C64> = (0..8)
            .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let mut lam = 0.0;
        for _ in 0..8000 {
            let w = aha.mul_vec(&v);
            let n = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            lam = n;
            v = w.into_iter().map(|z| z / C64::new(n, 0.0)).collect();
        }
        assert!((operator_norm(&a) - lam.sqrt()).abs() < 1e-10);
    }
}
