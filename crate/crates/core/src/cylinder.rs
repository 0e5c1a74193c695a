//! Closed-form heat traces on the half-infinite cylinder [0, ∞) × Y from
//! boundary spectral data: smooth cutoffs, the Gaussian cutoff integral, the
//! per-degree trace sums, the ζ(0)+k values of the two boundary conditions
//! with an independent Mellin-limit oracle, and the small-time expansion fit.

use crate::boundary::{restrict_operator, side_domains, BoundaryError, BoundaryModel, LagrangianData};
use crate::linalg::{generalized_eigenspaces, ComplexMatrix, LinalgError, C64};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CylinderError {
    #[error("quadrature did not converge")]
    QuadratureFailure,
    #[error("integral of this cutoff over [0, ∞) diverges")]
    DivergentMass,
    #[error("expansion fit needs samples spanning a decade below 1e-2")]
    BadSampleRange,
    #[error("biorthogonal pairing is singular")]
    SingularPairing,
    #[error(transparent)]
    Boundary(#[from] BoundaryError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Which boundary condition the cylinder zeta values refer to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundarySide {
    MinusL0,
    PlusL1,
}

/// One generalized eigenvalue of B_Y^{2,±} restricted to a side domain.
#[derive(Debug, Clone)]
pub struct SpectralEntry {
    pub value: C64,
    pub multiplicity: usize,
    pub jordan_blocks: Vec<usize>,
}

/// Per-degree spectral data of the two side restrictions, plus harmonic dims.
#[derive(Debug, Clone, Default)]
pub struct DegreeSpectrum {
    /// Nonzero generalized eigenvalues of B_Y^{2,-} on Im ∇ ⊕ K.
    pub minus: Vec<SpectralEntry>,
    /// Nonzero generalized eigenvalues of B_Y^{2,+} on Im Γ∇Γ ⊕ Γ^Y K.
    pub plus: Vec<SpectralEntry>,
    /// l_q^- = dim(K ∩ Ω^q).
    pub harmonic_minus: usize,
    /// l_q^+ = dim(Γ^Y K ∩ Ω^q).
    pub harmonic_plus: usize,
}

/// Truncated boundary spectrum for interior dimension m: degrees 0..=m-1.
#[derive(Debug, Clone)]
pub struct BoundarySpectralModel {
    pub degrees: Vec<DegreeSpectrum>,
}

impl BoundarySpectralModel {
    pub fn interior_m(&self) -> usize {
        self.degrees.len()
    }

    fn zeta0(&self, q: isize, plus: bool) -> f64 {
        if q < 0 || q as usize >= self.degrees.len() {
            return 0.0;
        }
        let d = &self.degrees[q as usize];
        let list = if plus { &d.plus } else { &d.minus };
        list.iter().map(|e| e.multiplicity as f64).sum()
    }

    fn harmonic(&self, q: isize, plus: bool) -> f64 {
        if q < 0 || q as usize >= self.degrees.len() {
            return 0.0;
        }
        let d = &self.degrees[q as usize];
        (if plus { d.harmonic_plus } else { d.harmonic_minus }) as f64
    }

    /// Tr e^{-t B_Y^{2,±}} at one degree, harmonics included. Jordan blocks
    /// do not enter: the dual-basis pairing kills the off-diagonal terms.
    pub fn side_trace(&self, q: isize, plus: bool, t: f64) -> C64 {
        if q < 0 || q as usize >= self.degrees.len() {
            return C64::new(0.0, 0.0);
        }
        let d = &self.degrees[q as usize];
        let list = if plus { &d.plus } else { &d.minus };
        let mut acc = C64::new(self.harmonic(q, plus), 0.0);
        for e in list {
            acc += (e.value * (-t)).exp() * (e.multiplicity as f64);
        }
        acc
    }
}

/// Smooth step s(x) = f(x) / (f(x) + f(1-x)) with f(x) = exp(-1/x) for x > 0.
fn smooth_step(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let f = (-1.0 / x).exp();
    let g = (-1.0 / (1.0 - x)).exp();
    f / (f + g)
}

/// The paper's cutoff family: ρ(a, b) rises from 0 to 1 over (a, b); the
/// standard knots live on sevenths of the collar.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffFunction {
    pub lower: f64,
    pub upper: f64,
    /// true: 1 - ρ(a, b) (decreasing); false: ρ(a, b) (increasing).
    pub complement: bool,
    /// identically one (the no-cutoff limit used in closed-form checks)
    pub constant_one: bool,
}

impl CutoffFunction {
    pub fn rho(a: f64, b: f64) -> Self {
        assert!(a < b);
        CutoffFunction {
            lower: a,
            upper: b,
            complement: false,
            constant_one: false,
        }
    }

    pub fn one_minus_rho(a: f64, b: f64) -> Self {
        assert!(a < b);
        CutoffFunction {
            lower: a,
            upper: b,
            complement: true,
            constant_one: false,
        }
    }

    /// ψ₁ = 1 - ρ(3/7, 4/7).
    pub fn psi1() -> Self {
        Self::one_minus_rho(3.0 / 7.0, 4.0 / 7.0)
    }

    /// ψ₂ = ρ(3/7, 4/7).
    pub fn psi2() -> Self {
        Self::rho(3.0 / 7.0, 4.0 / 7.0)
    }

    /// φ₁ = 1 - ρ(5/7, 6/7).
    pub fn phi1() -> Self {
        Self::one_minus_rho(5.0 / 7.0, 6.0 / 7.0)
    }

    /// φ₂ = ρ(1/7, 2/7).
    pub fn phi2() -> Self {
        Self::rho(1.0 / 7.0, 2.0 / 7.0)
    }

    pub fn one() -> Self {
        CutoffFunction {
            lower: 0.0,
            upper: 1.0,
            complement: false,
            constant_one: true,
        }
    }

    pub fn eval(&self, u: f64) -> f64 {
        if self.constant_one {
            return 1.0;
        }
        let s = smooth_step((u - self.lower) / (self.upper - self.lower));
        if self.complement {
            1.0 - s
        } else {
            s
        }
    }

    fn is_decreasing(&self) -> bool {
        self.complement && !self.constant_one
    }
}

fn adaptive_simpson<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    tol: f64,
    depth: usize,
) -> Result<f64, CylinderError> {
    fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
        let m = 0.5 * (a + b);
        (b - a) / 6.0 * (f(a) + 4.0 * f(m) + f(b))
    }
    fn rec<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        whole: f64,
        tol: f64,
        depth: usize,
    ) -> Result<f64, CylinderError> {
        if depth == 0 {
            return Err(CylinderError::QuadratureFailure);
        }
        let m = 0.5 * (a + b);
        let left = simpson(f, a, m);
        let right = simpson(f, m, b);
        if (left + right - whole).abs() <= 15.0 * tol {
            Ok(left + right + (left + right - whole) / 15.0)
        } else {
            let l = rec(f, a, m, left, tol * 0.5, depth - 1)?;
            let r = rec(f, m, b, right, tol * 0.5, depth - 1)?;
            Ok(l + r)
        }
    }
    if a >= b {
        return Ok(0.0);
    }
    rec(f, a, b, simpson(f, a, b), tol, depth)
}

/// ∫₀^∞ e^{-u²/t} ψ(u) du. Exact Gaussian when the cutoff is identically one.
pub fn gaussian_cutoff_integral(t: f64, cutoff: &CutoffFunction) -> Result<f64, CylinderError> {
    assert!(t > 0.0, "time must be positive");
    if cutoff.constant_one {
        return Ok(0.5 * (std::f64::consts::PI * t).sqrt());
    }
    // the Gaussian is below 1e-20 once u² ≥ 46 t
    let reach = (46.0 * t).sqrt();
    let upper = if cutoff.is_decreasing() {
        cutoff.upper.min(reach.max(cutoff.lower))
    } else {
        reach.max(cutoff.upper)
    };
    let f = |u: f64| (-u * u / t).exp() * cutoff.eval(u);
    adaptive_simpson(&f, 0.0, upper.max(1e-12), 1e-13, 48)
}

/// ∫₀^∞ ψ(u) du for a decreasing cutoff.
pub fn cutoff_mass(cutoff: &CutoffFunction) -> Result<f64, CylinderError> {
    if !cutoff.is_decreasing() {
        return Err(CylinderError::DivergentMass);
    }
    adaptive_simpson(&|u| cutoff.eval(u), 0.0, cutoff.upper, 1e-13, 48)
}

/// Jordan heat coefficients at one block: lower-triangular with entry
/// (j, j-r) = e^{-tλ} (-1)^r t^r / r!.
pub fn jordan_heat_action(lambda: C64, block_size: usize, t: f64) -> ComplexMatrix {
    let e = (lambda * (-t)).exp();
    let mut m = ComplexMatrix::zeros(block_size, block_size);
    for i in 0..block_size {
        let mut factor = C64::new(1.0, 0.0);
        for r in 0..=i {
            if r > 0 {
                factor *= C64::new(-t / r as f64, 0.0);
            }
            m[(i, i - r)] = e * factor;
        }
    }
    m
}

/// Cylinder heat trace at interior degree q:
/// Σ_{deg ∈ {q, q-1}} [ Tr⁻(t) (Cψ - I(t)) + Tr⁺(t) (Cψ + I(t)) ] / √(4πt).
pub fn cylinder_trace(
    q: usize,
    t: f64,
    model: &BoundarySpectralModel,
    cutoff: &CutoffFunction,
) -> Result<C64, CylinderError> {
    assert!(t > 0.0);
    let mass = cutoff_mass(cutoff)?;
    let gauss = gaussian_cutoff_integral(t, cutoff)?;
    let norm = 1.0 / (4.0 * std::f64::consts::PI * t).sqrt();
    let mut acc = C64::new(0.0, 0.0);
    for deg in [q as isize, q as isize - 1] {
        let tr_minus = model.side_trace(deg, false, t);
        let tr_plus = model.side_trace(deg, true, t);
        acc += tr_minus * (mass - gauss) + tr_plus * (mass + gauss);
    }
    Ok(acc * norm)
}

/// Closed form of ζ_{B²_{q, P∓}}(0) + k_q for the chosen boundary
/// condition. For finite spectra ζ(0) counts nonzero eigenvalues.
pub fn zeta0_plus_k(q: usize, model: &BoundarySpectralModel, side: BoundarySide) -> f64 {
    let qi = q as isize;
    let value = 0.25
        * (model.zeta0(qi, true) - model.zeta0(qi - 1, false) + model.harmonic(qi, true)
            - model.harmonic(qi, false)
            + model.harmonic(qi - 1, true)
            - model.harmonic(qi - 1, false));
    match side {
        BoundarySide::MinusL0 => value,
        BoundarySide::PlusL1 => -value,
    }
}

/// Lanczos approximation of Γ(x) for x > 0.5, used only near x = 1.
fn gamma_fn(x: f64) -> f64 {
    const G: f64 = 7.0;
    const C: [f64; 9] = [
        0.999_999_999_999_809_93,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_13,
        -176.615_029_162_140_59,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_571_6e-6,
        1.505_632_735_149_311_6e-7,
    ];
    let z = x - 1.0;
    let mut a = C[0];
    for (i, c) in C.iter().enumerate().skip(1) {
        a += c / (z + i as f64);
    }
    let t = z + G + 0.5;
    (2.0 * std::f64::consts::PI).sqrt() * t.powf(z + 0.5) * (-t).exp() * a
}

/// Independent Mellin-limit oracle for `zeta0_plus_k`:
/// lim_{s→0} (1/Γ(s)) ∫₀¹ t^{s-1} D(t) I(t)/√(4πt) dt, with
/// D(t) = Tr⁺_q - Tr⁻_q + Tr⁺_{q-1} - Tr⁻_{q-1} (all heat traces) and I(t)
/// the Gaussian cutoff integral. Evaluated by log-substitution quadrature at
/// two small s and Richardson extrapolation; negated for the P₊ condition.
pub fn zeta0_mellin_oracle(
    q: usize,
    model: &BoundarySpectralModel,
    side: BoundarySide,
    cutoff: &CutoffFunction,
) -> Result<f64, CylinderError> {
    let qi = q as isize;
    let d_of = |t: f64| -> C64 {
        model.side_trace(qi, true, t) - model.side_trace(qi, false, t)
            + model.side_trace(qi - 1, true, t)
            - model.side_trace(qi - 1, false, t)
    };
    let f_of = |t: f64| -> Result<C64, CylinderError> {
        let i_t = gaussian_cutoff_integral(t, cutoff)?;
        Ok(d_of(t) * (i_t / (4.0 * std::f64::consts::PI * t).sqrt()))
    };
    // F(0+) = ¼ D(0): the cutoff integral behaves like √(πt)/2
    let d0 = d_of(0.0);
    let f0 = d0 * 0.25;

    let val_at = |s: f64| -> Result<C64, CylinderError> {
        // ∫₀¹ t^{s-1} F dt = F0/s + ∫₀^∞ e^{-sx}(F(e^{-x}) - F0) dx
        let x_max = 90.0f64;
        let integrand_re = |x: f64| -> f64 {
            let t = (-x).exp();
            let f = f_of(t).unwrap_or(f0);
            ((f - f0) * (-s * x).exp()).re
        };
        let integrand_im = |x: f64| -> f64 {
            let t = (-x).exp();
            let f = f_of(t).unwrap_or(f0);
            ((f - f0) * (-s * x).exp()).im
        };
        let r_re = adaptive_simpson(&integrand_re, 0.0, x_max, 1e-10, 48)?;
        let r_im = adaptive_simpson(&integrand_im, 0.0, x_max, 1e-10, 48)?;
        let r = C64::new(r_re, r_im);
        // (1/Γ(s)) (F0/s + R) = (F0 + s R) / Γ(s+1)
        Ok((f0 + r * s) / gamma_fn(s + 1.0))
    };
    let s1 = 5e-4;
    let v1 = val_at(s1)?;
    let v2 = val_at(2.0 * s1)?;
    let extrapolated = v1 * 2.0 - v2;
    let sign = match side {
        BoundarySide::MinusL0 => 1.0,
        BoundarySide::PlusL1 => -1.0,
    };
    Ok(sign * extrapolated.re)
}

/// Least-squares fit of trace samples against { t^{-(mm-j)/2} : j = 0..=mm }.
/// Returns the coefficients and the worst absolute misfit.
pub fn small_time_expansion(
    samples: &[(f64, f64)],
    mm: usize,
) -> Result<(Vec<f64>, f64), CylinderError> {
    if samples.is_empty() {
        return Ok((vec![0.0; mm + 1], 0.0));
    }
    let tmin = samples.iter().map(|(t, _)| *t).fold(f64::INFINITY, f64::min);
    let tmax = samples.iter().map(|(t, _)| *t).fold(0.0f64, f64::max);
    if !(tmin < 1e-2 && tmax / tmin >= 10.0) {
        return Err(CylinderError::BadSampleRange);
    }
    if samples.len() < mm + 1 {
        return Err(CylinderError::BadSampleRange);
    }
    let rows = samples.len();
    let cols = mm + 1;
    let design = ComplexMatrix::from_fn(rows, cols, |i, j| {
        let t = samples[i].0;
        C64::new(t.powf(-((mm as f64 - j as f64) / 2.0)), 0.0)
    });
    // column scaling keeps the normal problem well conditioned
    let mut scales = vec![0.0f64; cols];
    for j in 0..cols {
        let mut s = 0.0;
        for i in 0..rows {
            s += design[(i, j)].norm_sqr();
        }
        scales[j] = s.sqrt().max(1e-300);
    }
    let scaled = ComplexMatrix::from_fn(rows, cols, |i, j| design[(i, j)] / scales[j]);
    let rhs = ComplexMatrix::from_fn(rows, 1, |i, _| C64::new(samples[i].1, 0.0));
    let pinv = crate::linalg::Svd::new(&scaled)?.pinv(1e-12);
    let sol = pinv.mul(&rhs);
    let coeffs: Vec<f64> = (0..cols).map(|j| sol[(j, 0)].re / scales[j]).collect();
    let mut worst = 0.0f64;
    for (t, v) in samples {
        let mut fit = 0.0;
        for (j, c) in coeffs.iter().enumerate() {
            fit += c * t.powf(-((mm as f64 - j as f64) / 2.0));
        }
        worst = worst.max((fit - v).abs());
    }
    Ok((coeffs, worst))
}

/// exp(-t M) through the generalized eigenstructure (finite sum per cluster).
fn heat_operator(m: &ComplexMatrix, t: f64, tol: f64) -> Result<ComplexMatrix, CylinderError> {
    let n = m.rows();
    if n == 0 {
        return Ok(ComplexMatrix::identity(0));
    }
    let data = generalized_eigenspaces(m, tol)?;
    let mut out = ComplexMatrix::zeros(n, n);
    for d in &data {
        let mut shifted = m.clone();
        for i in 0..n {
            shifted[(i, i)] -= d.value;
        }
        let max_block = d.jordan_blocks.iter().max().copied().unwrap_or(1);
        let mut term = d.projector.clone();
        let mut acc = d.projector.clone();
        let mut factor = 1.0;
        for r in 1..max_block {
            term = shifted.mul(&term);
            factor *= -t / r as f64;
            acc = acc.add(&term.scale(C64::new(factor, 0.0)));
        }
        out = out.add(&acc.scale((d.value * (-t)).exp()));
    }
    Ok(out)
}

/// Extracts the truncated spectral model of a boundary model: per degree and
/// side, the generalized eigenvalues of B² restricted to the side domain.
pub fn spectral_model(
    model: &BoundaryModel,
    data: &LagrangianData,
) -> Result<BoundarySpectralModel, CylinderError> {
    let domains = side_domains(model, data)?;
    let b = model.b_y();
    let b2 = b.mul(&b);
    let scale = b2.max_abs().max(1.0);
    let mut degrees = Vec::with_capacity(model.top_degree() + 1);
    for q in 0..=model.top_degree() {
        let spec_of = |basis: &ComplexMatrix| -> Result<Vec<SpectralEntry>, CylinderError> {
            if basis.cols() == 0 {
                return Ok(vec![]);
            }
            let full = model.embed_per_degree(
                &(0..=model.top_degree())
                    .map(|p| {
                        if p == q {
                            basis.clone()
                        } else {
                            ComplexMatrix::zeros(model.dims[p], 0)
                        }
                    })
                    .collect::<Vec<_>>(),
            );
            let restricted = restrict_operator(&b2, &full)?;
            let data = generalized_eigenspaces(&restricted, 1e-8)?;
            Ok(data
                .iter()
                .filter(|d| d.value.norm() > 1e-8 * scale)
                .map(|d| SpectralEntry {
                    value: d.value,
                    multiplicity: d.alg_mult,
                    jordan_blocks: d.jordan_blocks.clone(),
                })
                .collect())
        };
        let minus = spec_of(&domains.minus[q])?;
        let plus = spec_of(&domains.plus[q])?;
        degrees.push(DegreeSpectrum {
            minus,
            plus,
            harmonic_minus: domains.l_minus[q],
            harmonic_plus: domains.l_plus[q],
        });
    }
    Ok(BoundarySpectralModel { degrees })
}

/// Finite check of the B_even cylinder trace vanishing: the fiber traces of
/// both pieces of B_cyl against the biorthogonal heat kernels are zero. The
/// ∂u piece reduces to pairings ⟨βΓ^Y φ, φ*⟩ which vanish because Γ^Y swaps
/// the two side domains; the tangential piece pairs different degrees.
pub fn bseries_trace_vanishes(
    model: &BoundaryModel,
    data: &LagrangianData,
    t: f64,
) -> Result<f64, CylinderError> {
    let domains = side_domains(model, data)?;
    let b = model.b_y();
    let b2 = b.mul(&b);
    let g = model.flat_inner();
    let chi = model.flat_chi();
    let beta = model.flat_beta();
    let d = model.flat_diff();
    let gdg = chi.mul(&d).mul(&chi);

    let kernel_op = |bases: &[ComplexMatrix], duals: &[ComplexMatrix]| -> Result<ComplexMatrix, CylinderError> {
        let u = model.embed_per_degree(bases);
        let v = model.embed_per_degree(duals);
        if u.cols() == 0 {
            return Ok(ComplexMatrix::zeros(model.total_dim(), model.total_dim()));
        }
        let m = restrict_operator(&b2, &u)?;
        let h = heat_operator(&m, t, 1e-8)?;
        let pairing = v.adjoint().mul(&g).mul(&u);
        let inv = pairing
            .inverse()
            .map_err(|_| CylinderError::SingularPairing)?;
        Ok(u.mul(&h).mul(&inv).mul(&v.adjoint()).mul(&g))
    };
    let k_minus = kernel_op(&domains.minus, &domains.minus_dual)?;
    let k_plus = kernel_op(&domains.plus, &domains.plus_dual)?;

    let scale = model.total_dim() as f64;
    let bg = beta.mul(&chi);
    // ∂u piece: Tr(βΓ^Y ∘ K^∓(t)) must vanish by the domain swap
    let r_minus = bg.mul(&k_minus).trace().norm();
    let r_plus = bg.mul(&k_plus).trace().norm();
    // tangential piece: degree-diagonal part of βΓ^Y(∇ + Γ∇Γ) ∘ K; kept as a
    // bookkeeping check (it vanishes degree by degree)
    let tangential = bg.mul(&d.add(&gdg));
    let k_total = k_minus.add(&k_plus);
    let mut r_tan = 0.0f64;
    for q in 0..=model.top_degree() {
        let rows = model.degree_rows(q);
        let block = crate::graded::take(&tangential.mul(&k_total), &rows, &rows);
        r_tan = r_tan.max(block.trace().norm());
    }
    Ok(r_minus.max(r_plus).max(r_tan) / scale.max(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::lagrangian_split;
    use crate::models;
    use rand::Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn smooth_step_profile() {
        let psi1 = CutoffFunction::psi1();
        assert_eq!(psi1.eval(0.0), 1.0);
        assert_eq!(psi1.eval(3.0 / 7.0), 1.0);
        assert_eq!(psi1.eval(4.0 / 7.0), 0.0);
        assert_eq!(psi1.eval(1.0), 0.0);
        let mid = psi1.eval(0.5);
        assert!(mid > 0.0 && mid < 1.0);
        // ψ₁ + ψ₂ = 1
        let psi2 = CutoffFunction::psi2();
        for u in [0.1, 0.45, 0.5, 0.55, 0.9] {
            assert!((psi1.eval(u) + psi2.eval(u) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn gaussian_integral_small_time() {
        // remainder O(e^{-a²/t}) with a = 3/7: at t = 0.01 the exact
        // remainder is 1.0824e-12 (high-precision quadrature)
        let psi1 = CutoffFunction::psi1();
        let t = 0.01;
        let exact = 0.5 * (std::f64::consts::PI * t).sqrt();
        let val = gaussian_cutoff_integral(t, &psi1).unwrap();
        let diff = (val - exact).abs();
        assert!(diff < 1.2e-12, "{diff}");
        assert!((diff - 1.0824e-12).abs() < 1e-14, "{diff}");
    }

    #[test]
    fn gaussian_integral_monotone_in_t() {
        let psi1 = CutoffFunction::psi1();
        let mut prev = 0.0;
        for t in [1e-4, 1e-3, 1e-2, 1e-1] {
            let v = gaussian_cutoff_integral(t, &psi1).unwrap();
            assert!(v > prev);
            prev = v;
        }
    }

    #[test]
    fn gaussian_integral_constant_one_exact() {
        let one = CutoffFunction::one();
        for t in [0.3, 1.0, 2.5] {
            let v = gaussian_cutoff_integral(t, &one).unwrap();
            assert_eq!(v, 0.5 * (std::f64::consts::PI * t).sqrt());
        }
    }

    #[test]
    fn cutoff_remainder_bound() {
        // |I(t) - √(πt)/2| ≤ e^{-0.17/t} for the ψ₁ knots (0.17 < (3/7)²)
        let psi1 = CutoffFunction::psi1();
        for t in [0.1, 0.05, 0.01] {
            let exact = 0.5 * (std::f64::consts::PI * t).sqrt();
            let val = gaussian_cutoff_integral(t, &psi1).unwrap();
            assert!((val - exact).abs() <= (-0.17 / t).exp());
        }
    }

    #[test]
    fn jordan_heat_entries() {
        let lam = c(0.7, -0.2);
        let t = 0.3;
        let m1 = jordan_heat_action(lam, 1, t);
        assert!((m1[(0, 0)] - (lam * (-t)).exp()).norm() < 1e-15);
        let m2 = jordan_heat_action(lam, 2, t);
        let e = (lam * (-t)).exp();
        assert!((m2[(1, 0)] - e * (-t)).norm() < 1e-15);
        assert!((m2[(0, 1)]).norm() == 0.0);
        // trace = l e^{-tλ}
        assert!((m2.trace() - e * 2.0).norm() < 1e-15);
    }

    fn single_entry(v: C64, mult: usize) -> Vec<SpectralEntry> {
        vec![SpectralEntry {
            value: v,
            multiplicity: mult,
            jordan_blocks: vec![1; mult],
        }]
    }

    #[test]
    fn cylinder_trace_single_eigenvalues() {
        let m = 3;
        let mut degrees = vec![DegreeSpectrum::default(); m];
        let lam = c(1.3, 0.0);
        degrees[1].minus = single_entry(lam, 1);
        let model = BoundarySpectralModel { degrees };
        let psi1 = CutoffFunction::psi1();
        let t = 0.05;
        let mass = cutoff_mass(&psi1).unwrap();
        let gauss = gaussian_cutoff_integral(t, &psi1).unwrap();
        let norm = 1.0 / (4.0 * std::f64::consts::PI * t).sqrt();
        // the degree-1 minus entry feeds interior degrees 1 and 2
        let expect = (lam * (-t)).exp() * ((mass - gauss) * norm);
        let got = cylinder_trace(1, t, &model, &psi1).unwrap();
        assert!((got - expect).norm() < 1e-12);
        let got2 = cylinder_trace(2, t, &model, &psi1).unwrap();
        assert!((got2 - expect).norm() < 1e-12);
        // plus side flips the sign of the Gaussian part
        let mut degrees = vec![DegreeSpectrum::default(); m];
        degrees[1].plus = single_entry(lam, 1);
        let model = BoundarySpectralModel { degrees };
        let expect_plus = (lam * (-t)).exp() * ((mass + gauss) * norm);
        let got = cylinder_trace(1, t, &model, &psi1).unwrap();
        assert!((got - expect_plus).norm() < 1e-12);
    }

    #[test]
    fn empty_model_traces_vanish() {
        let model = BoundarySpectralModel {
            degrees: vec![DegreeSpectrum::default(); 3],
        };
        let psi1 = CutoffFunction::psi1();
        assert_eq!(
            cylinder_trace(1, 0.2, &model, &psi1).unwrap(),
            c(0.0, 0.0)
        );
        assert_eq!(zeta0_plus_k(1, &model, BoundarySide::MinusL0), 0.0);
    }

    #[test]
    fn jordan_blocks_do_not_change_traces() {
        let m = 3;
        let lam = c(0.9, 0.1);
        let mut a = vec![DegreeSpectrum::default(); m];
        a[1].minus = vec![SpectralEntry {
            value: lam,
            multiplicity: 3,
            jordan_blocks: vec![3],
        }];
        let mut b = vec![DegreeSpectrum::default(); m];
        b[1].minus = vec![SpectralEntry {
            value: lam,
            multiplicity: 3,
            jordan_blocks: vec![1, 1, 1],
        }];
        let ma = BoundarySpectralModel { degrees: a };
        let mb = BoundarySpectralModel { degrees: b };
        let psi1 = CutoffFunction::psi1();
        for t in [0.02, 0.3, 1.1] {
            let ta = cylinder_trace(1, t, &ma, &psi1).unwrap();
            let tb = cylinder_trace(1, t, &mb, &psi1).unwrap();
            assert!((ta - tb).norm() < 1e-14);
        }
    }

    #[test]
    fn quarter_fixture_closed_form() {
        let model = models::quarter_fixture();
        assert!((zeta0_plus_k(2, &model, BoundarySide::MinusL0) - 0.25).abs() < 1e-15);
        assert!((zeta0_plus_k(2, &model, BoundarySide::PlusL1) + 0.25).abs() < 1e-15);
    }

    #[test]
    fn quarter_fixture_mellin_oracle() {
        let model = models::quarter_fixture();
        let psi1 = CutoffFunction::psi1();
        let oracle = zeta0_mellin_oracle(2, &model, BoundarySide::MinusL0, &psi1).unwrap();
        assert!(
            (oracle - 0.25).abs() < 1e-6,
            "oracle {oracle} vs closed form 0.25"
        );
    }

    #[test]
    fn mellin_oracle_random_models() {
        for seed in 0..3 {
            let model = models::random_boundary_spectrum(3, seed, true);
            let psi1 = CutoffFunction::psi1();
            for q in 0..=3usize {
                let closed = zeta0_plus_k(q, &model, BoundarySide::MinusL0);
                let oracle =
                    zeta0_mellin_oracle(q, &model, BoundarySide::MinusL0, &psi1).unwrap();
                assert!(
                    (closed - oracle).abs() < 1e-6,
                    "seed {seed} q {q}: closed {closed} oracle {oracle}"
                );
            }
        }
    }

    #[test]
    fn expansion_fit_single_power() {
        // const / √(4πt): leading coefficient const / √(4π), rest ≈ 0
        let mut rng = models::rng_from_seed(4);
        let konst: f64 = rng.gen_range(0.5..2.0);
        let samples: Vec<(f64, f64)> = (0..25)
            .map(|i| {
                let t = 1e-4 * 10f64.powf(i as f64 / 8.0);
                (t, konst / (4.0 * std::f64::consts::PI * t).sqrt())
            })
            .collect();
        let (coeffs, residual) = small_time_expansion(&samples, 1).unwrap();
        assert!(residual < 1e-9);
        assert!(
            (coeffs[0] - konst / (4.0 * std::f64::consts::PI).sqrt()).abs() < 1e-9,
            "{coeffs:?}"
        );
        assert!(coeffs[1].abs() < 1e-9);
    }

    #[test]
    fn expansion_fit_zero_samples() {
        let samples: Vec<(f64, f64)> = (0..20)
            .map(|i| (1e-4 * 10f64.powf(i as f64 / 6.0), 0.0))
            .collect();
        let (coeffs, _) = small_time_expansion(&samples, 2).unwrap();
        assert!(coeffs.iter().all(|c| c.abs() < 1e-12));
    }

    #[test]
    fn expansion_fit_cylinder_and_beven_traces() {
        // the degree-q cylinder trace follows Cψ·Tr(t)/√(4πt) to leading
        // order, so the fitted t^{-1/2} coefficient is Cψ·α/√(4π); the
        // B_even cylinder trace vanishes identically, so every coefficient
        // of its fit is zero (in particular t^{-1/2}, the b_m = 0 oracle)
        let m = 3;
        let lam = c(0.5, 0.0);
        let mut degrees = vec![DegreeSpectrum::default(); m];
        degrees[1].minus = single_entry(lam, 2);
        let model = BoundarySpectralModel { degrees };
        let psi1 = CutoffFunction::psi1();
        let mass = cutoff_mass(&psi1).unwrap();
        let samples: Vec<(f64, f64)> = (0..33)
            .map(|i| {
                let t = 1e-5 * 10f64.powf(i as f64 / 10.0);
                (t, cylinder_trace(1, t, &model, &psi1).unwrap().re)
            })
            .collect();
        let (coeffs, _) = small_time_expansion(&samples, 3).unwrap();
        let expect = 2.0 * mass / (4.0 * std::f64::consts::PI).sqrt();
        assert!(
            (coeffs[2] - expect).abs() < 1e-3 * expect,
            "t^(-1/2) coefficient {} vs {expect}",
            coeffs[2]
        );
        assert!(coeffs[0].abs() < 1e-6 && coeffs[1].abs() < 1e-4, "{coeffs:?}");

        // B_even trace samples from a real boundary model: identically zero
        let bm = models::random_boundary_model(3, 2, 1, 0, 55);
        let data = lagrangian_split(&bm).unwrap();
        let zero_samples: Vec<(f64, f64)> = (0..25)
            .map(|i| {
                let t = 1e-4 * 10f64.powf(i as f64 / 8.0);
                (t, bseries_trace_vanishes(&bm, &data, t).unwrap())
            })
            .collect();
        let (zero_coeffs, _) = small_time_expansion(&zero_samples, 4).unwrap();
        // index m = 4 - 3 = 1 carries t^{-(m+1-j)/2} = t^{-1/2} here; all
        // coefficients must vanish
        assert!(
            zero_coeffs.iter().all(|c| c.abs() < 1e-9),
            "{zero_coeffs:?}"
        );
    }

    #[test]
    fn expansion_fit_rejects_narrow_range() {
        let samples: Vec<(f64, f64)> = (0..10).map(|i| (1e-3 + i as f64 * 1e-5, 1.0)).collect();
        assert!(matches!(
            small_time_expansion(&samples, 1),
            Err(CylinderError::BadSampleRange)
        ));
    }

    #[test]
    fn bseries_vanishes_on_random_models() {
        for seed in 0..4 {
            let model = models::random_boundary_model(3, 2, 1, 1, 400 + seed);
            let data = lagrangian_split(&model).unwrap();
            for t in [0.1, 0.7] {
                let res = bseries_trace_vanishes(&model, &data, t).unwrap();
                assert!(res <= 1e-12, "seed {seed} t {t}: residual {res}");
            }
        }
    }

    #[test]
    fn spectral_model_extraction_counts() {
        let model = models::random_boundary_model(3, 2, 1, 1, 900);
        let data = lagrangian_split(&model).unwrap();
        let spec = spectral_model(&model, &data).unwrap();
        assert_eq!(spec.interior_m(), 3);
        // harmonic dims match the Lagrangian split
        let total_minus: usize = spec.degrees.iter().map(|d| d.harmonic_minus).sum();
        let total_plus: usize = spec.degrees.iter().map(|d| d.harmonic_plus).sum();
        assert_eq!(total_minus, data.k_basis.cols());
        assert_eq!(total_plus, data.gamma_k_basis.cols());
    }

    #[test]
    fn bseries_trace_on_fully_harmonic_model() {
        let model = models::random_boundary_model(3, 2, 1, 0, 31);
        let zeroed = BoundaryModel {
            diff: model
                .diff
                .iter()
                .map(|d| ComplexMatrix::zeros(d.rows(), d.cols()))
                .collect(),
            ..model
        };
        let data = lagrangian_split(&zeroed).unwrap();
        let res = bseries_trace_vanishes(&zeroed, &data, 0.5).unwrap();
        assert!(res <= 1e-12, "residual {res}");
    }
}
