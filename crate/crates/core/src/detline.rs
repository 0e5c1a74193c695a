//! Determinant lines of finite chirality complexes. Elements are stored as a
//! single complex coefficient against the fixed reference wedge: standard
//! basis vectors per degree, degree q entering with exponent (-1)^q.

use crate::graded::{GradedChainComplex, GradedError};
use crate::linalg::{ComplexMatrix, Svd, C64};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DetLineError {
    #[error("zero element of a determinant line")]
    ZeroElement,
    #[error("cohomology basis inconsistent at degree {0}: {1}")]
    InconsistentBasis(usize, String),
    #[error(transparent)]
    Graded(#[from] GradedError),
    #[error(transparent)]
    Linalg(#[from] crate::linalg::LinalgError),
}

/// Coefficient against the reference wedge of `Det(C^•)` (or `Det(H^•)` once
/// a cohomology basis has been fixed).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetLineElement {
    pub coeff: C64,
}

impl DetLineElement {
    pub fn one() -> Self {
        DetLineElement {
            coeff: C64::new(1.0, 0.0),
        }
    }

    pub fn scaled(&self, s: C64) -> Self {
        DetLineElement {
            coeff: self.coeff * s,
        }
    }
}

/// Per-degree cocycle representatives whose classes form a basis of H^q.
#[derive(Debug, Clone)]
pub struct CohomologyBasis {
    /// reps[q]: dims[q] x b_q matrix of representatives.
    pub reps: Vec<ComplexMatrix>,
}

impl CohomologyBasis {
    pub fn betti(&self) -> Vec<usize> {
        self.reps.iter().map(|r| r.cols()).collect()
    }
}

/// Extends the chirality operator to determinant lines: a degree-q wedge with
/// coefficient `c` maps to the degree-(m-q) wedge with coefficient
/// `c · det(Γ_q)`.
pub fn chirality_extend(chi_q: &ComplexMatrix, c: DetLineElement) -> Result<DetLineElement, DetLineError> {
    let det = chi_q.det()?;
    Ok(DetLineElement { coeff: c.coeff * det })
}

/// Normalization exponent R(C^•) = ½ Σ_{q<r} n_q (n_q + (-1)^{r+q}).
pub fn normalization_exponent(dims: &[usize]) -> i64 {
    let m = dims.len() - 1;
    let r = (m + 1) / 2;
    let mut twice = 0i64;
    for q in 0..r {
        let n = dims[q] as i64;
        let sign = if (r + q) % 2 == 0 { 1 } else { -1 };
        twice += n * (n + sign);
    }
    debug_assert!(twice % 2 == 0);
    twice / 2
}

/// The chirality element c_Γ of Det(C^•): built from arbitrary nonzero
/// choices c_q for q ≤ r-1 together with their Γ-images; the choices cancel.
pub fn c_gamma(
    complex: &GradedChainComplex,
    choices: Option<&[C64]>,
) -> Result<DetLineElement, DetLineError> {
    complex.require_valid()?;
    let m = complex.top_degree();
    let r = (m + 1) / 2;
    let picks: Vec<C64> = match choices {
        Some(c) => {
            assert_eq!(c.len(), r, "one choice per degree below r");
            c.to_vec()
        }
        None => vec![C64::new(1.0, 0.0); r],
    };
    let mut coeff = if normalization_exponent(&complex.dims) % 2 == 0 {
        C64::new(1.0, 0.0)
    } else {
        C64::new(-1.0, 0.0)
    };
    for q in 0..r {
        let c_q = picks[q];
        if c_q.norm() == 0.0 {
            return Err(DetLineError::ZeroElement);
        }
        // slot at degree q: exponent (-1)^q; slot at degree m-q holds the
        // image (Γ c_q) with exponent (-1)^{m-q} = -(-1)^q
        let gamma_cq = chirality_extend(&complex.chi[q], DetLineElement { coeff: c_q })?.coeff;
        if gamma_cq.norm() == 0.0 {
            return Err(DetLineError::ZeroElement);
        }
        if q % 2 == 0 {
            coeff = coeff * c_q / gamma_cq;
        } else {
            coeff = coeff / c_q * gamma_cq;
        }
    }
    Ok(DetLineElement { coeff })
}

/// Deterministic complements A^q of ker ∇_q: the leading right-singular
/// vectors of ∇_q.
pub fn canonical_complements(complex: &GradedChainComplex) -> Result<Vec<ComplexMatrix>, DetLineError> {
    let m = complex.top_degree();
    let scale = complex
        .diff
        .iter()
        .map(|d| d.max_abs())
        .fold(1.0f64, f64::max);
    let tol = 1e-10 * scale;
    let mut out = Vec::with_capacity(m + 1);
    for q in 0..=m {
        if q < m {
            let svd = Svd::new(&complex.diff[q])?;
            let r = svd.rank(tol);
            out.push(svd.v.submatrix(0, svd.v.rows(), 0, r));
        } else {
            out.push(ComplexMatrix::zeros(complex.dims[m], 0));
        }
    }
    Ok(out)
}

/// Deterministic cohomology representatives: the part of ker ∇_q orthogonal
/// to Im ∇_{q-1}.
pub fn canonical_cohomology_basis(
    complex: &GradedChainComplex,
) -> Result<CohomologyBasis, DetLineError> {
    let m = complex.top_degree();
    let scale = complex
        .diff
        .iter()
        .map(|d| d.max_abs())
        .fold(1.0f64, f64::max);
    let tol = 1e-10 * scale;
    let mut reps = Vec::with_capacity(m + 1);
    for q in 0..=m {
        let n_q = complex.dims[q];
        let kernel = if q < m {
            Svd::new(&complex.diff[q])?.kernel_basis(tol)
        } else {
            ComplexMatrix::identity(n_q)
        };
        let harm = if q > 0 {
            let img = Svd::new(&complex.diff[q - 1])?.image_basis(tol);
            let proj = img.mul(&img.adjoint());
            let co = ComplexMatrix::identity(n_q).sub(&proj);
            let shaved = co.mul(&kernel);
            Svd::new(&shaved)?.image_basis(1e-9)
        } else {
            kernel
        };
        reps.push(harm);
    }
    Ok(CohomologyBasis { reps })
}

/// The fusion isomorphism φ: Det(C^•) → Det(H^•). Per degree the square
/// matrix [∇A^{q-1} | h_q | A^q] contributes det^{(-1)^{q+1}}, and the whole
/// map carries the sign (-1)^{N(C^•)} with
/// N(C^•) = ½ Σ_q d_q (d_q + (-1)^q), d_q = rank ∇_{q-1}.
/// The convention is pinned by two facts: φ(e_0 ⊗ e_1^{-1}) = det ∂ for the
/// one-dimensional two-term complex, and the product identity
/// ρ = Det_gr(B^{(λ,∞)}) ρ_{[0,λ]} must not depend on the window cut.
pub fn phi_iso_with_complements(
    complex: &GradedChainComplex,
    element: DetLineElement,
    h: &CohomologyBasis,
    complements: &[ComplexMatrix],
) -> Result<DetLineElement, DetLineError> {
    let m = complex.top_degree();
    let mut coeff = element.coeff;
    let mut twice_n = 0i64;
    for q in 0..=m {
        let n_q = complex.dims[q];
        let image_block = if q > 0 {
            complex.diff[q - 1].mul(&complements[q - 1])
        } else {
            ComplexMatrix::zeros(n_q, 0)
        };
        let d_q = image_block.cols() as i64;
        let eps = if q % 2 == 0 { 1 } else { -1 };
        twice_n += d_q * (d_q + eps);
        if n_q == 0 {
            continue;
        }
        let h_block = &h.reps[q];
        let a_block = &complements[q];
        if image_block.cols() + h_block.cols() + a_block.cols() != n_q {
            return Err(DetLineError::InconsistentBasis(
                q,
                format!(
                    "blocks {} + {} + {} do not fill dimension {}",
                    image_block.cols(),
                    h_block.cols(),
                    a_block.cols(),
                    n_q
                ),
            ));
        }
        let stacked = ComplexMatrix::hcat(&[&image_block, h_block, a_block]);
        let det_q = stacked.det()?;
        if det_q.norm() == 0.0 {
            return Err(DetLineError::InconsistentBasis(
                q,
                "degenerate basis (zero determinant)".to_string(),
            ));
        }
        if q % 2 == 0 {
            coeff /= det_q;
        } else {
            coeff *= det_q;
        }
    }
    debug_assert!(twice_n % 2 == 0);
    if (twice_n / 2) % 2 != 0 {
        coeff = -coeff;
    }
    Ok(DetLineElement { coeff })
}

pub fn phi_iso(
    complex: &GradedChainComplex,
    element: DetLineElement,
    h: &CohomologyBasis,
) -> Result<DetLineElement, DetLineError> {
    let complements = canonical_complements(complex)?;
    phi_iso_with_complements(complex, element, h, &complements)
}

/// ρ_Γ = φ(c_Γ) against the supplied cohomology representatives.
pub fn refined_torsion_in_basis(
    complex: &GradedChainComplex,
    h: &CohomologyBasis,
) -> Result<DetLineElement, DetLineError> {
    let c = c_gamma(complex, None)?;
    phi_iso(complex, c, h)
}

/// ρ_Γ against the canonical (deterministic) cohomology basis.
pub fn refined_torsion_element(
    complex: &GradedChainComplex,
) -> Result<(DetLineElement, CohomologyBasis), DetLineError> {
    let h = canonical_cohomology_basis(complex)?;
    let rho = refined_torsion_in_basis(complex, &h)?;
    Ok((rho, h))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models;
    use rand::Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn segment(a: C64) -> GradedChainComplex {
        GradedChainComplex {
            dims: vec![1, 1],
            diff: vec![ComplexMatrix::from_rows(&[vec![a]])],
            chi: vec![ComplexMatrix::identity(1), ComplexMatrix::identity(1)],
            inner: None,
        }
    }

    /// Cofactor-expansion determinant, the independent oracle for
    /// chirality_extend on small blocks.
    fn cofactor_det(m: &ComplexMatrix) -> C64 {
        let n = m.rows();
        if n == 0 {
            return c(1.0, 0.0);
        }
        if n == 1 {
            return m[(0, 0)];
        }
        let mut acc = c(0.0, 0.0);
        for j in 0..n {
            let minor = ComplexMatrix::from_fn(n - 1, n - 1, |r, s| {
                m[(r + 1, if s < j { s } else { s + 1 })]
            });
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            acc += m[(0, j)] * cofactor_det(&minor) * c(sign, 0.0);
        }
        acc
    }

    #[test]
    fn chirality_extend_scaling() {
        let two = ComplexMatrix::from_rows(&[vec![c(2.0, 0.0)]]);
        let out = chirality_extend(&two, DetLineElement::one()).unwrap();
        assert!((out.coeff - c(2.0, 0.0)).norm() < 1e-15);
        let id = ComplexMatrix::identity(3);
        let out = chirality_extend(&id, DetLineElement::one()).unwrap();
        assert!((out.coeff - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn chirality_extend_matches_cofactor_oracle() {
        let mut rng = models::rng_from_seed(3);
        for n in [2usize, 3, 4] {
            let block = models::random_matrix(&mut rng, n, n);
            let out = chirality_extend(&block, DetLineElement::one()).unwrap();
            let oracle = cofactor_det(&block);
            assert!((out.coeff - oracle).norm() < 1e-10 * oracle.norm().max(1.0));
        }
    }

    #[test]
    fn normalization_exponent_examples() {
        assert_eq!(normalization_exponent(&[1, 1]), 0);
        assert_eq!(normalization_exponent(&[1, 2, 2, 1]), 2);
    }

    #[test]
    fn c_gamma_ignores_choices() {
        let mut rng = models::rng_from_seed(11);
        for m in [1usize, 3, 5] {
            let cx = models::random_chirality_complex(m, 3, 17 + m as u64);
            let base = c_gamma(&cx, None).unwrap();
            let r = (m + 1) / 2;
            for _ in 0..5 {
                let picks: Vec<C64> = (0..r)
                    .map(|_| c(rng.gen_range(0.3..2.0), rng.gen_range(-1.0..1.0)))
                    .collect();
                let other = c_gamma(&cx, Some(&picks)).unwrap();
                assert!((other.coeff - base.coeff).norm() < 1e-10 * base.coeff.norm());
            }
        }
    }

    #[test]
    fn phi_identity_for_zero_differential() {
        let cx = GradedChainComplex {
            dims: vec![2, 2],
            diff: vec![ComplexMatrix::zeros(2, 2)],
            chi: vec![ComplexMatrix::identity(2), ComplexMatrix::identity(2)],
            inner: None,
        };
        let h = canonical_cohomology_basis(&cx).unwrap();
        // canonical representatives are the standard basis, so φ = identity
        let out = phi_iso(&cx, DetLineElement { coeff: c(2.5, 1.0) }, &h).unwrap();
        assert!((out.coeff - c(2.5, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn two_term_normalization() {
        let cx = segment(c(3.0, -1.0));
        let h = canonical_cohomology_basis(&cx).unwrap();
        assert_eq!(h.betti(), vec![0, 0]);
        let out = phi_iso(&cx, DetLineElement::one(), &h).unwrap();
        assert!((out.coeff - c(3.0, -1.0)).norm() < 1e-12);
    }

    #[test]
    fn two_term_normalization_matrix_case() {
        // n-dimensional two-term complex: φ = (-1)^{n(n-1)/2} det ∂ (the
        // rank-sign factor, trivial in the one-dimensional case)
        let mut rng = models::rng_from_seed(5);
        for n in [1usize, 2, 3, 4] {
            let a = models::random_matrix(&mut rng, n, n);
            let cx = GradedChainComplex {
                dims: vec![n, n],
                diff: vec![a.clone()],
                chi: vec![ComplexMatrix::identity(n), ComplexMatrix::identity(n)],
                inner: None,
            };
            let h = canonical_cohomology_basis(&cx).unwrap();
            let out = phi_iso(&cx, DetLineElement::one(), &h).unwrap();
            let sign = if (n * (n - 1) / 2) % 2 == 0 { 1.0 } else { -1.0 };
            let det = a.det().unwrap() * sign;
            assert!(
                (out.coeff - det).norm() < 1e-10 * det.norm().max(1.0),
                "n = {n}: {} vs {det}",
                out.coeff
            );
        }
    }

    #[test]
    fn phi_independent_of_complement_choice() {
        let mut rng = models::rng_from_seed(29);
        for seed in 0..5 {
            let cx = models::random_chirality_complex(3, 3, 400 + seed);
            let h = canonical_cohomology_basis(&cx).unwrap();
            let canonical = canonical_complements(&cx).unwrap();
            let base = phi_iso_with_complements(&cx, DetLineElement::one(), &h, &canonical).unwrap();
            // perturb each complement by an invertible mix plus kernel junk
            let m = cx.top_degree();
            let mut perturbed: Vec<ComplexMatrix> = Vec::new();
            for q in 0..=m {
                let a = &canonical[q];
                if a.cols() == 0 {
                    perturbed.push(a.clone());
                    continue;
                }
                let mix = loop {
                    let t = models::random_matrix(&mut rng, a.cols(), a.cols());
                    if t.det().unwrap().norm() > 0.2 {
                        break t;
                    }
                };
                let kernel = if q < m {
                    Svd::new(&cx.diff[q]).unwrap().kernel_basis(1e-10)
                } else {
                    ComplexMatrix::identity(cx.dims[m])
                };
                let junk = if kernel.cols() > 0 {
                    kernel.mul(&models::random_matrix(&mut rng, kernel.cols(), a.cols()))
                } else {
                    ComplexMatrix::zeros(a.rows(), a.cols())
                };
                perturbed.push(a.mul(&mix).add(&junk));
            }
            let other =
                phi_iso_with_complements(&cx, DetLineElement::one(), &h, &perturbed).unwrap();
            assert!(
                (other.coeff - base.coeff).norm() < 1e-10 * base.coeff.norm().max(1.0),
                "seed {seed}: {} vs {}",
                other.coeff,
                base.coeff
            );
        }
    }

    #[test]
    fn rho_gamma_acyclic_segment() {
        let cx = segment(c(2.0, 0.0));
        let (rho, h) = refined_torsion_element(&cx).unwrap();
        assert!(h.betti().iter().all(|b| *b == 0));
        assert!((rho.coeff - c(2.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn rho_gamma_zero_differential_is_c_gamma() {
        let mut rng = models::rng_from_seed(7);
        let u = models::random_unitary(&mut rng, 2);
        let cx = GradedChainComplex {
            dims: vec![2, 2],
            diff: vec![ComplexMatrix::zeros(2, 2)],
            chi: vec![u.clone(), u.adjoint()],
            inner: None,
        };
        let (rho, _) = refined_torsion_element(&cx).unwrap();
        let cg = c_gamma(&cx, None).unwrap();
        assert!((rho.coeff - cg.coeff).norm() < 1e-12);
        // unitary chirality with orthonormal references: unit modulus
        assert!((rho.coeff.norm() - 1.0).abs() < 1e-10);
    }
}
