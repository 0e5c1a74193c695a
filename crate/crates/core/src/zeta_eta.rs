//! Eta invariants, graded determinants and the log-determinant identity, the
//! determinant-line torsion element ρ and its normalized variant, and the
//! Ray-Singer norm for Hermitian models.

use crate::boundary::BoundaryError;
use crate::cylinder::{BoundarySpectralModel, BoundarySide};
use crate::detline::{
    canonical_cohomology_basis, c_gamma, phi_iso, CohomologyBasis, DetLineError,
};
use crate::graded::{
    pm_splitting, signature_operator, take, window_split, GradedChainComplex,
    GradedError, PmSplitting, SignatureOperator, SubComplex,
};
use crate::linalg::{
    generalized_eigenspaces, log_det_cut, ComplexMatrix, LinalgError, SpectralDatum, Svd, C64,
};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ZetaEtaError {
    #[error("operator is not invertible: found a zero generalized eigenvalue")]
    NotInvertible,
    #[error("Hermitian structure required: {0}")]
    NotHermitian(String),
    #[error(transparent)]
    Graded(#[from] GradedError),
    #[error(transparent)]
    DetLine(#[from] DetLineError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Boundary(#[from] BoundaryError),
}

/// Spectrum classification for the eta invariant: real-part signs for the
/// off-imaginary eigenvalues, pure-imaginary counts L±, generalized zero L0.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EtaClassification {
    pub re_positive: usize,
    pub re_negative: usize,
    pub l_plus: usize,
    pub l_minus: usize,
    pub l_zero: usize,
}

impl EtaClassification {
    pub fn total(&self) -> usize {
        self.re_positive + self.re_negative + self.l_plus + self.l_minus + self.l_zero
    }
}

pub fn classify_spectrum(spectrum: &[SpectralDatum]) -> EtaClassification {
    let scale = spectrum
        .iter()
        .map(|d| d.value.norm())
        .fold(1.0f64, f64::max);
    let zero_tol = 1e-10 * scale;
    let mut out = EtaClassification {
        re_positive: 0,
        re_negative: 0,
        l_plus: 0,
        l_minus: 0,
        l_zero: 0,
    };
    for d in spectrum {
        let v = d.value;
        let m = d.alg_mult;
        if v.norm() <= zero_tol {
            out.l_zero += m;
        } else if v.re.abs() <= 1e-10 * v.norm() {
            if v.im > 0.0 {
                out.l_plus += m;
            } else {
                out.l_minus += m;
            }
        } else if v.re > 0.0 {
            out.re_positive += m;
        } else {
            out.re_negative += m;
        }
    }
    out
}

/// η = ½ (η(0) + L⁺ - L⁻ + L⁰) with η(0) = #(Re>0) - #(Re<0) for a finite
/// spectrum (each term of the eta series equals 1 at s = 0).
pub fn eta_invariant(spectrum: &[SpectralDatum]) -> f64 {
    let c = classify_spectrum(spectrum);
    0.5 * ((c.re_positive as f64 - c.re_negative as f64) + c.l_plus as f64 - c.l_minus as f64
        + c.l_zero as f64)
}

fn negated(spectrum: &[SpectralDatum]) -> Vec<SpectralDatum> {
    spectrum
        .iter()
        .map(|d| SpectralDatum {
            value: -d.value,
            alg_mult: d.alg_mult,
            jordan_blocks: d.jordan_blocks.clone(),
            projector: ComplexMatrix::identity(0),
        })
        .collect()
}

fn require_invertible(spectrum: &[SpectralDatum]) -> Result<(), ZetaEtaError> {
    let scale = spectrum
        .iter()
        .map(|d| d.value.norm())
        .fold(1.0f64, f64::max);
    if spectrum.iter().any(|d| d.value.norm() <= 1e-12 * scale) {
        return Err(ZetaEtaError::NotInvertible);
    }
    Ok(())
}

/// log of Det_gr,θ = Det_θ(B⁺_even) / Det_θ(-B⁻_even) over a ± splitting.
pub fn log_graded_determinant(split: &PmSplitting, theta: f64) -> Result<C64, ZetaEtaError> {
    let plus = generalized_eigenspaces(&split.b_plus_even, 1e-9)?;
    let minus = generalized_eigenspaces(&split.b_minus_even, 1e-9)?;
    require_invertible(&plus)?;
    require_invertible(&minus)?;
    let num = log_det_cut(&plus, theta)?;
    let den = log_det_cut(&negated(&minus), theta)?;
    Ok(num - den)
}

pub fn graded_determinant(split: &PmSplitting, theta: f64) -> Result<C64, ZetaEtaError> {
    Ok(log_graded_determinant(split, theta)?.exp())
}

/// Distance from z to the lattice 2πi Z (log-space identities are defined
/// modulo 2πi).
pub fn residual_mod_2pi_i(z: C64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let k = (z.im / two_pi).round();
    let shifted = C64::new(z.re, z.im - k * two_pi);
    shifted.norm()
}

#[derive(Debug, Clone)]
pub struct LogdetIdentityReport {
    pub lhs: C64,
    pub rhs: C64,
    pub residual: f64,
    pub eta: f64,
}

/// Graded log-determinant identity: log Det_gr,θ(B_even) equals
/// ½ Σ (-1)^{q+1} q log Det_{2θ} B²_q - iπ η(B_even)
/// + (πi/2) Σ (-1)^{q+1} q ζ_{B²_q}(0), modulo 2πi, where ζ(0) counts the
/// nonzero eigenvalues (all of them, under invertibility).
pub fn logdet_identity_check(
    complex: &GradedChainComplex,
    theta: f64,
) -> Result<LogdetIdentityReport, ZetaEtaError> {
    let sig = signature_operator(complex)?;
    let split = pm_splitting(complex)?;
    let lhs = log_graded_determinant(&split, theta)?;

    let even_spec = generalized_eigenspaces(&sig.b_even, 1e-9)?;
    require_invertible(&even_spec)?;
    let eta = eta_invariant(&even_spec);

    let m = complex.top_degree();
    let mut logdet_sum = C64::new(0.0, 0.0);
    let mut zeta0_sum = 0.0f64;
    for q in 0..=m {
        let idx = complex.degree_indices(q);
        if idx.is_empty() {
            continue;
        }
        let b2_q = take(&sig.b_squared, &idx, &idx);
        let spec = generalized_eigenspaces(&b2_q, 1e-9)?;
        require_invertible(&spec)?;
        let sign = if q % 2 == 0 { -1.0 } else { 1.0 }; // (-1)^{q+1}
        let weight = sign * q as f64;
        logdet_sum += log_det_cut(&spec, 2.0 * theta)? * weight;
        zeta0_sum += weight * complex.dims[q] as f64;
    }
    let pi = std::f64::consts::PI;
    let rhs = logdet_sum * 0.5 + C64::new(0.0, -pi * eta) + C64::new(0.0, 0.5 * pi * zeta0_sum);
    let residual = residual_mod_2pi_i(lhs - rhs);
    Ok(LogdetIdentityReport {
        lhs,
        rhs,
        residual,
        eta,
    })
}

#[derive(Debug, Clone)]
pub struct EtaParityReport {
    /// The designated part's spectrum is symmetric under negation.
    pub symmetric_part_ok: bool,
    /// After removing the middle-degree block, the carrier part is symmetric.
    pub concentration_ok: bool,
    pub r_parity_even: bool,
}

/// Sorted multiset subtraction with tolerance; None when b is not contained.
fn multiset_subtract(a: &[C64], b: &[C64], tol: f64) -> Option<Vec<C64>> {
    let mut rest: Vec<C64> = a.to_vec();
    for needle in b {
        let mut best: Option<(usize, f64)> = None;
        for (i, cand) in rest.iter().enumerate() {
            let d = (cand - needle).norm();
            if best.map_or(true, |(_, bd)| d < bd) {
                best = Some((i, d));
            }
        }
        match best {
            Some((i, d)) if d <= tol => {
                rest.remove(i);
            }
            _ => return None,
        }
    }
    Some(rest)
}

fn negation_symmetric(values: &[C64], tol: f64) -> bool {
    let negs: Vec<C64> = values.iter().map(|v| -v).collect();
    crate::graded::multiset_close(values, &negs, tol)
}

/// Parity structure of the even-form spectrum. For r odd the minus part of B_even has a
/// negation-symmetric spectrum and the plus part concentrates on degree r-1;
/// for r even the roles swap (plus symmetric, minus concentrates on degree
/// r).
pub fn eta_parity_check(complex: &GradedChainComplex) -> Result<EtaParityReport, ZetaEtaError> {
    let r = complex.half_r();
    let r_even = r % 2 == 0;
    // with ∇ = 0 the signature operator vanishes and every part is trivially
    // negation symmetric (the ± splitting itself degenerates)
    let pre_sig = signature_operator(complex)?;
    if pre_sig.b.max_abs() <= 1e-14 {
        return Ok(EtaParityReport {
            symmetric_part_ok: true,
            concentration_ok: true,
            r_parity_even: r_even,
        });
    }
    let split = pm_splitting(complex)?;
    let sym_part = if r_even {
        &split.b_plus_even
    } else {
        &split.b_minus_even
    };
    let carrier = if r_even {
        &split.b_minus_even
    } else {
        &split.b_plus_even
    };
    let scale = sym_part.max_abs().max(carrier.max_abs()).max(1.0);
    let tol = 1e-9 * scale;

    let sym_spec = crate::graded::eigenvalue_multiset(sym_part)?;
    let symmetric_part_ok = negation_symmetric(&sym_spec, tol);

    // middle block of the carrier: degree r-1 when r is odd, r when even
    let sig = signature_operator(complex)?;
    let q_mid = if r_even { r } else { r - 1 };
    let bases = if r_even {
        &split.minus_bases
    } else {
        &split.plus_bases
    };
    let local = &bases[q_mid];
    let mid_spec = if local.cols() == 0 {
        vec![]
    } else {
        let mut full = ComplexMatrix::zeros(complex.total_dim(), local.cols());
        let off = complex.offset(q_mid);
        for i in 0..local.rows() {
            for j in 0..local.cols() {
                full[(off + i, j)] = local[(i, j)];
            }
        }
        let coords = Svd::new(&full)?.pinv(1e-12).mul(&sig.b.mul(&full));
        crate::graded::eigenvalue_multiset(&coords)?
    };
    let carrier_spec = crate::graded::eigenvalue_multiset(carrier)?;
    let concentration_ok = match multiset_subtract(&carrier_spec, &mid_spec, tol) {
        Some(rest) => negation_symmetric(&rest, tol),
        None => false,
    };
    Ok(EtaParityReport {
        symmetric_part_ok,
        concentration_ok,
        r_parity_even: r_even,
    })
}

/// Refined analytic torsion under invertibility:
/// Det_gr,θ(B_even) · exp(iπ/2 · rank_E · η_trivial).
pub fn refined_torsion_scalar(
    complex: &GradedChainComplex,
    theta: f64,
    eta_trivial: f64,
    rank_e: usize,
) -> Result<C64, ZetaEtaError> {
    let split = pm_splitting(complex)?;
    let det = graded_determinant(&split, theta)?;
    let phase = C64::new(0.0, 0.5 * std::f64::consts::PI * rank_e as f64 * eta_trivial).exp();
    Ok(det * phase)
}

/// Trivial-connection eta normalization applied to a determinant-line
/// coefficient.
pub fn rho_an(rho: C64, eta_trivial: f64, rank_e: usize) -> C64 {
    rho * C64::new(0.0, 0.5 * std::f64::consts::PI * rank_e as f64 * eta_trivial).exp()
}

/// The pieces of ρ = Det_gr,θ(B^{(λ,∞)}_even) · ρ_{[0,λ]} with everything
/// expressed against the canonical cohomology basis of the full complex.
#[derive(Debug, Clone)]
pub struct RhoParts {
    pub log_det_gr_out: C64,
    /// ρ_{[0,λ]} as a coefficient in Det(H•(full complex)).
    pub rho_window: C64,
    /// The product: the λ-independent element.
    pub rho: C64,
    /// dim Ω^q_{(0,λ]} per degree.
    pub window_nonzero_dims: Vec<usize>,
    /// dim of the generalized zero eigenspace of B²_q per degree.
    pub kernel_dims: Vec<usize>,
    pub h_basis: CohomologyBasis,
    pub inside: SubComplex,
    pub outside: SubComplex,
}

/// Computes ρ(λ): the refined torsion of the [0, λ] window complex times the
/// graded determinant of the (λ, ∞) part; the product does not depend on
/// the window cut.
pub fn rho_element(
    complex: &GradedChainComplex,
    lambda: f64,
    theta: f64,
    tol: f64,
) -> Result<RhoParts, ZetaEtaError> {
    let sig = signature_operator(complex)?;
    let (inside, outside) = window_split(complex, &sig, lambda, tol)?;

    // graded determinant of the complement part
    let log_det_gr_out = if outside.complex.total_dim() == 0 {
        C64::new(0.0, 0.0)
    } else {
        let split_out = pm_splitting(&outside.complex)?;
        log_graded_determinant(&split_out, theta)?
    };

    // refined torsion of the window complex against its own canonical basis
    let h_inside = canonical_cohomology_basis(&inside.complex)?;
    let c_in = c_gamma(&inside.complex, None)?;
    let rho_in = phi_iso(&inside.complex, c_in, &h_inside)?;

    // convert to the canonical cohomology basis of the full complex: the
    // inclusion of the window complex induces the isomorphism on H•
    let h_full = canonical_cohomology_basis(complex)?;
    let mut conversion = C64::new(1.0, 0.0);
    let m = complex.top_degree();
    for q in 0..=m {
        let b_q = h_full.reps[q].cols();
        if b_q == 0 {
            continue;
        }
        // ambient representatives of the window classes
        let ambient = inside.bases[q].mul(&h_inside.reps[q]);
        let chg = class_change_of_basis(complex, q, &ambient, &h_full.reps[q])?;
        let det = chg.det()?;
        if det.norm() == 0.0 {
            return Err(ZetaEtaError::DetLine(DetLineError::InconsistentBasis(
                q,
                "window cohomology does not span the full cohomology".to_string(),
            )));
        }
        if q % 2 == 0 {
            conversion *= det;
        } else {
            conversion /= det;
        }
    }
    let rho_window = rho_in.coeff * conversion;
    let rho = log_det_gr_out.exp() * rho_window;

    let kernel_dims = kernel_dims_per_degree(complex, &sig, tol)?;
    let window_nonzero_dims: Vec<usize> = (0..=m)
        .map(|q| inside.complex.dims[q] - kernel_dims[q])
        .collect();
    Ok(RhoParts {
        log_det_gr_out,
        rho_window,
        rho,
        window_nonzero_dims,
        kernel_dims,
        h_basis: h_full,
        inside,
        outside,
    })
}

/// Coordinates of `classes` (cocycle columns) against the classes of `reference`
/// in H^q: both are expressed modulo Im ∇_{q-1}.
fn class_change_of_basis(
    complex: &GradedChainComplex,
    q: usize,
    classes: &ComplexMatrix,
    reference: &ComplexMatrix,
) -> Result<ComplexMatrix, ZetaEtaError> {
    let scale = complex
        .diff
        .iter()
        .map(|d| d.max_abs())
        .fold(1.0f64, f64::max);
    let img = if q > 0 {
        Svd::new(&complex.diff[q - 1])?.image_basis(1e-10 * scale)
    } else {
        ComplexMatrix::zeros(complex.dims[q], 0)
    };
    let frame = ComplexMatrix::hcat(&[reference, &img]);
    let coords = Svd::new(&frame)?.pinv(1e-12).mul(classes);
    let residual = frame.mul(&coords).sub(classes).max_abs();
    if residual > 1e-7 * classes.max_abs().max(1.0) {
        return Err(ZetaEtaError::DetLine(DetLineError::InconsistentBasis(
            q,
            format!("classes do not reduce to the reference basis (residual {residual:.2e})"),
        )));
    }
    Ok(coords.submatrix(0, reference.cols(), 0, classes.cols()))
}

fn kernel_dims_per_degree(
    complex: &GradedChainComplex,
    sig: &SignatureOperator,
    tol: f64,
) -> Result<Vec<usize>, ZetaEtaError> {
    let m = complex.top_degree();
    let mut out = Vec::with_capacity(m + 1);
    for q in 0..=m {
        let idx = complex.degree_indices(q);
        if idx.is_empty() {
            out.push(0);
            continue;
        }
        let b2_q = take(&sig.b_squared, &idx, &idx);
        let data = generalized_eigenspaces(&b2_q, tol)?;
        let scale = data.iter().map(|d| d.value.norm()).fold(1.0f64, f64::max);
        let k = data
            .iter()
            .filter(|d| d.value.norm() <= 1e-9 * scale)
            .map(|d| d.alg_mult)
            .sum();
        out.push(k);
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct WindowDecompositionReport {
    pub rho: C64,
    pub reassembled: C64,
    pub relative_residual: f64,
    pub xi_lambda: C64,
    pub eta_out: f64,
    /// The counting correction used in the exponent.
    pub correction: f64,
    /// Boundary mode only: the per-degree cylinder route for the same
    /// correction, and its distance to the closed form.
    pub boundary_route_residual: Option<f64>,
}

/// Window decomposition of ρ: reassembles it from ρ_{[0,λ]}, ξ_λ, the eta
/// invariant of the (λ,∞) part and the counting exponent, then compares with
/// the direct ρ. Without a boundary model the counting correction is
/// Σ (-1)^{q+1} q (ζ_{B²_q}(0) + k_q) with ζ(0) = #nonzero eigenvalues; with
/// one it is the cylinder closed form ¼ Σ ζ_{B²_{Y,q}}(0) + Σ (r-1-q)(l⁺-l⁻).
pub fn window_decomposition_check(
    complex: &GradedChainComplex,
    lambda: f64,
    theta: f64,
    tol: f64,
    boundary: Option<&BoundarySpectralModel>,
) -> Result<WindowDecompositionReport, ZetaEtaError> {
    let parts = rho_element(complex, lambda, theta, tol)?;
    let m = complex.top_degree();

    // ξ_λ = ½ Σ (-1)^{q+1} q log Det_{2θ} B²_q on the (λ,∞) part
    let sig_out = signature_operator(&parts.outside.complex)?;
    let mut xi = C64::new(0.0, 0.0);
    for q in 0..=m {
        let idx = parts.outside.complex.degree_indices(q);
        if idx.is_empty() {
            continue;
        }
        let b2_q = take(&sig_out.b_squared, &idx, &idx);
        let spec = generalized_eigenspaces(&b2_q, 1e-9)?;
        require_invertible(&spec)?;
        let sign = if q % 2 == 0 { -1.0 } else { 1.0 };
        xi += log_det_cut(&spec, 2.0 * theta)? * (0.5 * sign * q as f64);
    }

    let eta_out = eta_invariant(&generalized_eigenspaces(&sig_out.b_even, 1e-9)?);

    let mut window_term = 0.0f64;
    let mut kernel_term = 0.0f64;
    for q in 0..=m {
        let sign = if q % 2 == 0 { -1.0 } else { 1.0 };
        window_term += sign * q as f64 * parts.window_nonzero_dims[q] as f64;
        kernel_term += sign * q as f64 * parts.kernel_dims[q] as f64;
    }
    let (correction, boundary_route_residual) = match boundary {
        None => {
            // Σ (-1)^{q+1} q (ζ(0) + k_q) = Σ (-1)^{q+1} q n_q
            let mut c = 0.0;
            for q in 0..=m {
                let sign = if q % 2 == 0 { -1.0 } else { 1.0 };
                c += sign * q as f64 * complex.dims[q] as f64;
            }
            (c, None)
        }
        Some(model) => {
            let mm = model.interior_m();
            let r = (mm + 1) / 2;
            // closed form of the weighted zeta sum over the boundary
            let mut c = 0.0;
            for q in 0..mm {
                let d = &model.degrees[q];
                let nonzero: f64 = d
                    .minus
                    .iter()
                    .chain(d.plus.iter())
                    .map(|e| e.multiplicity as f64)
                    .sum();
                c += 0.25 * nonzero;
            }
            for q in 0..=r.saturating_sub(2) {
                if r >= 2 && q <= r - 2 {
                    let d = &model.degrees[q];
                    c += (r - 1 - q) as f64 * (d.harmonic_plus as f64 - d.harmonic_minus as f64);
                }
            }
            // per-degree route: -Σ q A_q over the per-condition values
            let mut via_per_degree = 0.0;
            for q in 0..=mm {
                via_per_degree -=
                    q as f64 * crate::cylinder::zeta0_plus_k(q, model, BoundarySide::MinusL0);
            }
            (c, Some((via_per_degree - c).abs()))
        }
    };

    let pi = std::f64::consts::PI;
    let exponent = xi + C64::new(0.0, -pi * eta_out)
        + C64::new(0.0, 0.5 * pi * (-window_term - kernel_term + correction));
    let reassembled = parts.rho_window * exponent.exp();
    let denom = parts.rho.norm().max(1e-300);
    let relative_residual = (reassembled - parts.rho).norm() / denom;
    Ok(WindowDecompositionReport {
        rho: parts.rho,
        reassembled,
        relative_residual,
        xi_lambda: xi,
        eta_out,
        correction,
        boundary_route_residual,
    })
}

/// Ray-Singer norm of ρ_an for Hermitian models (Γ unitary, B self-adjoint):
/// ‖ρ‖_λ · exp(½ Σ (-1)^q q log Det_{-π} B²_q^{(λ,∞)}). Defined so that the
/// result is independent of λ; equal to one by the unitarity of Γ.
pub fn ray_singer_norm(
    complex: &GradedChainComplex,
    lambda: f64,
    theta: f64,
    tol: f64,
) -> Result<f64, ZetaEtaError> {
    let sig = signature_operator(complex)?;
    let scale = sig.b.max_abs().max(1.0);
    if !sig.b.is_hermitian(1e-9 * scale) {
        return Err(ZetaEtaError::NotHermitian(
            "the odd signature operator must be self-adjoint".to_string(),
        ));
    }
    let chi = complex.flat_chi();
    let uni = chi.adjoint().mul(&chi);
    if uni
        .sub(&ComplexMatrix::identity(complex.total_dim()))
        .max_abs()
        > 1e-9
    {
        return Err(ZetaEtaError::NotHermitian(
            "the chirality must be unitary".to_string(),
        ));
    }
    let parts = rho_element(complex, lambda, theta, tol)?;

    // ‖ρ‖_λ: the λ-metric on Det(H•) makes φ_λ an isometry, and the window
    // bases are L²-orthonormal, so the unit-volume element of the window
    // complex maps to φ(vol). Measuring ρ against it leaves
    // ‖ρ‖_λ = |Det_gr,out| · |c_Γ(window)| (all fusion determinants cancel).
    let c_in = c_gamma(&parts.inside.complex, None)?;
    let norm_lambda = parts.log_det_gr_out.exp().norm() * c_in.coeff.norm();

    // T^RS = exp(½ Σ (-1)^q q log Det_{-π} B²_q on the complement part):
    // eigenvalues are positive reals, so the principal branch applies
    let m = complex.top_degree();
    let sig_out = signature_operator(&parts.outside.complex)?;
    let mut log_t = 0.0f64;
    for q in 0..=m {
        let idx = parts.outside.complex.degree_indices(q);
        if idx.is_empty() {
            continue;
        }
        let b2_q = take(&sig_out.b_squared, &idx, &idx);
        let spec = generalized_eigenspaces(&b2_q, 1e-9)?;
        for d in &spec {
            if d.value.re <= 0.0 {
                return Err(ZetaEtaError::NotHermitian(format!(
                    "B² eigenvalue {} is not positive",
                    d.value
                )));
            }
            let sign = if q % 2 == 0 { 1.0 } else { -1.0 }; // (-1)^q
            log_t += 0.5 * sign * q as f64 * d.alg_mult as f64 * d.value.re.ln();
        }
    }
    Ok(norm_lambda * log_t.exp())
}

/// Transition duality: Spec(B^{2,+} at q) = Spec(B^{2,-} at q+1) as
/// multisets (∇ intertwines the two restrictions).
pub fn det_duality_residual(complex: &GradedChainComplex) -> Result<f64, ZetaEtaError> {
    let sig = signature_operator(complex)?;
    let split = pm_splitting(complex)?;
    let m = complex.top_degree();
    let scale = sig.b_squared.max_abs().max(1.0);
    let mut worst = 0.0f64;
    for q in 0..m {
        let plus_q = split.b2_part(complex, &sig, q, true);
        let minus_q1 = split.b2_part(complex, &sig, q + 1, false);
        let a = crate::graded::eigenvalue_multiset(&plus_q)?;
        let b = crate::graded::eigenvalue_multiset(&minus_q1)?;
        if a.len() != b.len() {
            return Ok(f64::INFINITY);
        }
        let mut sa = a.clone();
        let mut sb = b.clone();
        let key = |z: &C64| (z.re, z.im);
        sa.sort_by(|x, y| key(x).partial_cmp(&key(y)).unwrap());
        sb.sort_by(|x, y| key(x).partial_cmp(&key(y)).unwrap());
        for (x, y) in sa.iter().zip(sb.iter()) {
            worst = worst.max((x - y).norm() / scale);
        }
    }
    Ok(worst)
}

/// Chirality duality: Γ intertwines B and maps the even/± parts onto the odd/∓
/// parts, so their spectra agree as multisets.
pub fn parity_duality_residual(complex: &GradedChainComplex) -> Result<f64, ZetaEtaError> {
    let split = pm_splitting(complex)?;
    let sig = signature_operator(complex)?;
    let m = complex.top_degree();
    let embed = |bases: &Vec<ComplexMatrix>, even: bool| -> ComplexMatrix {
        let mut cols: Vec<ComplexMatrix> = Vec::new();
        for q in 0..=m {
            if (q % 2 == 0) != even {
                continue;
            }
            let local = &bases[q];
            if local.cols() == 0 {
                continue;
            }
            let mut full = ComplexMatrix::zeros(complex.total_dim(), local.cols());
            let off = complex.offset(q);
            for i in 0..local.rows() {
                for j in 0..local.cols() {
                    full[(off + i, j)] = local[(i, j)];
                }
            }
            cols.push(full);
        }
        let refs: Vec<&ComplexMatrix> = cols.iter().collect();
        if refs.is_empty() {
            ComplexMatrix::zeros(complex.total_dim(), 0)
        } else {
            ComplexMatrix::hcat(&refs)
        }
    };
    let restrict = |v: &ComplexMatrix| -> Result<Vec<C64>, ZetaEtaError> {
        if v.cols() == 0 {
            return Ok(vec![]);
        }
        let coords = Svd::new(v)?.pinv(1e-12).mul(&sig.b.mul(v));
        Ok(crate::graded::eigenvalue_multiset(&coords)?)
    };
    let scale = sig.b.max_abs().max(1.0);
    let plus_even = restrict(&embed(&split.plus_bases, true))?;
    let minus_odd = restrict(&embed(&split.minus_bases, false))?;
    let minus_even = restrict(&embed(&split.minus_bases, true))?;
    let plus_odd = restrict(&embed(&split.plus_bases, false))?;
    let residual = |a: &[C64], b: &[C64]| -> f64 {
        if a.len() != b.len() {
            return f64::INFINITY;
        }
        let key = |z: &C64| (z.re, z.im);
        let mut sa = a.to_vec();
        let mut sb = b.to_vec();
        sa.sort_by(|x, y| key(x).partial_cmp(&key(y)).unwrap());
        sb.sort_by(|x, y| key(x).partial_cmp(&key(y)).unwrap());
        sa.iter()
            .zip(sb.iter())
            .map(|(x, y)| (x - y).norm() / scale)
            .fold(0.0, f64::max)
    };
    Ok(residual(&plus_even, &minus_odd).max(residual(&minus_even, &plus_odd)))
}

/// Bundles the workbench outputs for one complex.
#[derive(Debug, Clone)]
pub struct TorsionReport {
    pub log_det_gr_out: C64,
    pub rho_window: C64,
    pub rho: C64,
    pub rho_an: C64,
    pub eta_even: f64,
    pub eta_out: f64,
    pub xi_lambda: C64,
    pub window_nonzero_dims: Vec<usize>,
    pub kernel_dims: Vec<usize>,
    pub betti: Vec<usize>,
    pub window_residual: f64,
    pub ray_singer_norm: Option<f64>,
    pub eta_trivial: f64,
    pub rank_e: usize,
}

/// Full pipeline: ρ(λ), the window reassembly residual, the normalized
/// ρ_an, and (for Hermitian inputs) the Ray-Singer norm.
pub fn torsion_report(
    complex: &GradedChainComplex,
    lambda: f64,
    theta: f64,
    tol: f64,
    eta_trivial: f64,
    rank_e: usize,
) -> Result<TorsionReport, ZetaEtaError> {
    let sig = signature_operator(complex)?;
    let even_spec = generalized_eigenspaces(&sig.b_even, 1e-9)?;
    let eta_even = eta_invariant(&even_spec);
    let window = window_decomposition_check(complex, lambda, theta, tol, None)?;
    let parts = rho_element(complex, lambda, theta, tol)?;
    let rho_an_val = rho_an(parts.rho, eta_trivial, rank_e);
    let rs = ray_singer_norm(complex, lambda, theta, tol).ok();
    Ok(TorsionReport {
        log_det_gr_out: parts.log_det_gr_out,
        rho_window: parts.rho_window,
        rho: parts.rho,
        rho_an: rho_an_val,
        eta_even,
        eta_out: window.eta_out,
        xi_lambda: window.xi_lambda,
        window_nonzero_dims: parts.window_nonzero_dims,
        kernel_dims: parts.kernel_dims,
        betti: parts.h_basis.betti(),
        window_residual: window.relative_residual,
        ray_singer_norm: rs,
        eta_trivial,
        rank_e,
    })
}

/// Multiplicativity over a window split: Det_gr(B^{(λ,∞)}) =
/// Det_gr(B^{(λ,μ]}) · Det_gr(B^{(μ,∞)}) as plain finite products.
pub fn window_multiplicativity_residual(
    complex: &GradedChainComplex,
    lambda: f64,
    mu: f64,
    theta: f64,
    tol: f64,
) -> Result<f64, ZetaEtaError> {
    assert!(lambda < mu);
    let a = rho_element(complex, lambda, theta, tol)?;
    let b = rho_element(complex, mu, theta, tol)?;
    // the middle band (λ, μ] as the complement of λ inside the μ window
    let sig_mid = signature_operator(&b.inside.complex)?;
    let (_, band) = window_split(&b.inside.complex, &sig_mid, lambda, tol)?;
    let log_band = if band.complex.total_dim() == 0 {
        C64::new(0.0, 0.0)
    } else {
        let split = pm_splitting(&band.complex)?;
        log_graded_determinant(&split, theta)?
    };
    let lhs = a.log_det_gr_out.exp();
    let rhs = log_band.exp() * b.log_det_gr_out.exp();
    Ok((lhs - rhs).norm() / lhs.norm().max(1e-300))
}
