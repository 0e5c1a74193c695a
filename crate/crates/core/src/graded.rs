//! Finite graded cochain complexes with chirality: the odd signature operator
//! B = Γ∇ + ∇Γ, its even/odd and ± restrictions, spectral windows, and the
//! sector bounds that locate the spectrum near the real axis.

use crate::linalg::{
    contour_projector, generalized_eigenspaces, log_det_cut, operator_norm, ComplexMatrix,
    LinalgError, Schur, SpectralDatum, Svd, C64,
};
use thiserror::Error;

pub const DEFAULT_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum GradedError {
    #[error("invalid complex: {0}")]
    Invalid(String),
    #[error("splitting unavailable: ker ∇ ∩ ker Γ∇Γ is nonzero at degree {0}")]
    SplitFailure(usize),
    #[error("generalized eigenvalue {0} sits on the spectral window |μ| = {1}")]
    WindowBoundary(C64, f64),
    #[error("sector model precondition violated: {0}")]
    SectorPrecondition(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Cochain complex 0 → C^0 → ... → C^m → 0 with chirality Γ_q : C^q → C^{m-q}
/// and optional Hermitian inner products per degree.
#[derive(Debug, Clone)]
pub struct GradedChainComplex {
    pub dims: Vec<usize>,
    /// diff[q] : C^q → C^{q+1}, a dims[q+1] x dims[q] matrix, q = 0..m.
    pub diff: Vec<ComplexMatrix>,
    /// chi[q] : C^q → C^{m-q}, a dims[m-q] x dims[q] matrix.
    pub chi: Vec<ComplexMatrix>,
    /// Optional Hermitian positive inner product Gram matrix per degree.
    pub inner: Option<Vec<ComplexMatrix>>,
}

#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub violations: Vec<String>,
}

impl ValidationReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl GradedChainComplex {
    /// Top degree m = 2r - 1.
    pub fn top_degree(&self) -> usize {
        self.dims.len() - 1
    }

    pub fn half_r(&self) -> usize {
        (self.top_degree() + 1) / 2
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().sum()
    }

    pub fn offset(&self, q: usize) -> usize {
        self.dims[..q].iter().sum()
    }

    pub fn degree_indices(&self, q: usize) -> Vec<usize> {
        let o = self.offset(q);
        (o..o + self.dims[q]).collect()
    }

    pub fn parity_indices(&self, even: bool) -> Vec<usize> {
        let mut idx = Vec::new();
        for q in 0..=self.top_degree() {
            if (q % 2 == 0) == even {
                idx.extend(self.degree_indices(q));
            }
        }
        idx
    }

    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        let m = self.top_degree();
        if m % 2 == 0 {
            violations.push(format!("top degree m = {m} must be odd"));
        }
        if self.diff.len() != m {
            violations.push(format!(
                "expected {} differentials, found {}",
                m,
                self.diff.len()
            ));
            return ValidationReport { violations };
        }
        if self.chi.len() != m + 1 {
            violations.push(format!(
                "expected {} chirality maps, found {}",
                m + 1,
                self.chi.len()
            ));
            return ValidationReport { violations };
        }
        for q in 0..m {
            let d = &self.diff[q];
            if d.rows() != self.dims[q + 1] || d.cols() != self.dims[q] {
                violations.push(format!("differential at degree {q} has the wrong shape"));
            }
            if d.check_finite().is_err() {
                violations.push(format!("differential at degree {q} has non-finite entries"));
            }
        }
        for q in 0..=m {
            let g = &self.chi[q];
            if g.rows() != self.dims[m - q] || g.cols() != self.dims[q] {
                violations.push(format!("chirality at degree {q} has the wrong shape"));
            }
        }
        if !violations.is_empty() {
            return ValidationReport { violations };
        }
        let scale = self
            .diff
            .iter()
            .map(|d| d.max_abs())
            .fold(1.0f64, f64::max);
        for q in 0..m.saturating_sub(1) {
            let dd = self.diff[q + 1].mul(&self.diff[q]);
            if dd.max_abs() > DEFAULT_TOL * scale * scale {
                violations.push(format!(
                    "∇∇ ≠ 0 between degrees {q} and {} (residual {:.2e})",
                    q + 2,
                    dd.max_abs()
                ));
            }
        }
        let chi_scale = self.chi.iter().map(|c| c.max_abs()).fold(1.0f64, f64::max);
        for q in 0..=m {
            if self.dims[q] == 0 {
                continue;
            }
            let gg = self.chi[m - q].mul(&self.chi[q]);
            let res = gg.sub(&ComplexMatrix::identity(self.dims[q])).max_abs();
            if res > DEFAULT_TOL * chi_scale * chi_scale {
                violations.push(format!(
                    "chirality not involutive at degree {q} (residual {res:.2e})"
                ));
            }
        }
        if let Some(gs) = &self.inner {
            if gs.len() != m + 1 {
                violations.push("inner products must cover every degree".to_string());
            } else {
                for (q, g) in gs.iter().enumerate() {
                    if g.rows() != self.dims[q] || g.cols() != self.dims[q] {
                        violations.push(format!("inner product at degree {q} has the wrong shape"));
                    } else if !g.is_hermitian(1e-10 * g.max_abs().max(1.0)) {
                        violations.push(format!("inner product at degree {q} is not Hermitian"));
                    }
                }
            }
        }
        ValidationReport { violations }
    }

    pub fn require_valid(&self) -> Result<(), GradedError> {
        let rep = self.validate();
        if rep.ok() {
            Ok(())
        } else {
            Err(GradedError::Invalid(rep.violations.join("; ")))
        }
    }

    /// Flattened differential on ⊕_q C^q.
    pub fn flat_diff(&self) -> ComplexMatrix {
        let n = self.total_dim();
        let mut out = ComplexMatrix::zeros(n, n);
        for q in 0..self.top_degree() {
            let (ro, co) = (self.offset(q + 1), self.offset(q));
            let d = &self.diff[q];
            for i in 0..d.rows() {
                for j in 0..d.cols() {
                    out[(ro + i, co + j)] = d[(i, j)];
                }
            }
        }
        out
    }

    /// Flattened chirality on ⊕_q C^q.
    pub fn flat_chi(&self) -> ComplexMatrix {
        let n = self.total_dim();
        let m = self.top_degree();
        let mut out = ComplexMatrix::zeros(n, n);
        for q in 0..=m {
            let (ro, co) = (self.offset(m - q), self.offset(q));
            let g = &self.chi[q];
            for i in 0..g.rows() {
                for j in 0..g.cols() {
                    out[(ro + i, co + j)] = g[(i, j)];
                }
            }
        }
        out
    }

    /// Flattened inner product (identity when none is stored).
    pub fn flat_inner(&self) -> ComplexMatrix {
        match &self.inner {
            None => ComplexMatrix::identity(self.total_dim()),
            Some(gs) => {
                let refs: Vec<&ComplexMatrix> = gs.iter().collect();
                ComplexMatrix::block_diag(&refs)
            }
        }
    }

    /// Cohomology dimensions dim ker ∇_q − rank ∇_{q−1}.
    pub fn cohomology_dims(&self) -> Vec<usize> {
        let m = self.top_degree();
        let scale = self
            .diff
            .iter()
            .map(operator_norm)
            .fold(1e-300f64, f64::max)
            .max(1.0);
        let tol = DEFAULT_TOL * scale;
        (0..=m)
            .map(|q| {
                let rank_out = if q < m {
                    Svd::new(&self.diff[q]).expect("finite").rank(tol)
                } else {
                    0
                };
                let rank_in = if q > 0 {
                    Svd::new(&self.diff[q - 1]).expect("finite").rank(tol)
                } else {
                    0
                };
                self.dims[q] - rank_out - rank_in
            })
            .collect()
    }
}

/// Submatrix over explicit row/column index sets.
pub fn take(m: &ComplexMatrix, rows: &[usize], cols: &[usize]) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows.len(), cols.len(), |i, j| m[(rows[i], cols[j])])
}

/// The odd signature operator and its parity restrictions.
#[derive(Debug, Clone)]
pub struct SignatureOperator {
    pub b: ComplexMatrix,
    pub b_even: ComplexMatrix,
    pub b_odd: ComplexMatrix,
    pub b_squared: ComplexMatrix,
}

pub fn signature_operator(complex: &GradedChainComplex) -> Result<SignatureOperator, GradedError> {
    complex.require_valid()?;
    let d = complex.flat_diff();
    let g = complex.flat_chi();
    let b = g.mul(&d).add(&d.mul(&g));
    let even_idx = complex.parity_indices(true);
    let odd_idx = complex.parity_indices(false);
    // B preserves parity because m is odd; check a residual anyway
    let b_even = take(&b, &even_idx, &even_idx);
    let b_odd = take(&b, &odd_idx, &odd_idx);
    let cross = take(&b, &odd_idx, &even_idx);
    if cross.max_abs() > 1e-9 * b.max_abs().max(1.0) {
        return Err(GradedError::Invalid(
            "odd signature operator does not preserve parity".to_string(),
        ));
    }
    let b_squared = b.mul(&b);
    Ok(SignatureOperator {
        b,
        b_even,
        b_odd,
        b_squared,
    })
}

/// Per-degree bases of ker(Γ∇Γ) (plus) and ker ∇ (minus), with the matrices
/// of B on the even parts in those bases.
#[derive(Debug, Clone)]
pub struct PmSplitting {
    /// Per degree: orthonormal basis of ker(Γ∇Γ) ∩ C^q as local columns.
    pub plus_bases: Vec<ComplexMatrix>,
    /// Per degree: orthonormal basis of ker ∇ ∩ C^q as local columns.
    pub minus_bases: Vec<ComplexMatrix>,
    pub b_plus_even: ComplexMatrix,
    pub b_minus_even: ComplexMatrix,
}

pub fn pm_splitting(complex: &GradedChainComplex) -> Result<PmSplitting, GradedError> {
    complex.require_valid()?;
    let m = complex.top_degree();
    let d = complex.flat_diff();
    let g = complex.flat_chi();
    let gdg = g.mul(&d).mul(&g);
    let scale = operator_norm(&d).max(1.0);
    let tol = DEFAULT_TOL * scale;

    let mut plus_bases = Vec::with_capacity(m + 1);
    let mut minus_bases = Vec::with_capacity(m + 1);
    for q in 0..=m {
        let idx = complex.degree_indices(q);
        let all: Vec<usize> = (0..complex.total_dim()).collect();
        let d_q = take(&d, &all, &idx);
        let gdg_q = take(&gdg, &all, &idx);
        let minus = Svd::new(&d_q)?.kernel_basis(tol);
        let plus = Svd::new(&gdg_q)?.kernel_basis(tol);
        if minus.cols() + plus.cols() != complex.dims[q] {
            return Err(GradedError::SplitFailure(q));
        }
        let joint = ComplexMatrix::hcat(&[&minus, &plus]);
        if !joint.is_empty() && Svd::new(&joint)?.rank(1e-8) != complex.dims[q] {
            return Err(GradedError::SplitFailure(q));
        }
        minus_bases.push(minus);
        plus_bases.push(plus);
    }

    let b = g.mul(&d).add(&d.mul(&g));
    let embed = |bases: &[ComplexMatrix], even: bool| -> ComplexMatrix {
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

    let restrict = |v: &ComplexMatrix| -> Result<ComplexMatrix, GradedError> {
        if v.cols() == 0 {
            return Ok(ComplexMatrix::zeros(0, 0));
        }
        let bv = b.mul(v);
        let coords = Svd::new(v)?.pinv(1e-12).mul(&bv);
        let res = v.mul(&coords).sub(&bv).max_abs();
        if res > 1e-7 * b.max_abs().max(1.0) {
            return Err(GradedError::Invalid(format!(
                "B does not preserve a splitting subspace (residual {res:.2e})"
            )));
        }
        Ok(coords)
    };

    let v_plus_even = embed(&plus_bases, true);
    let v_minus_even = embed(&minus_bases, true);
    let b_plus_even = restrict(&v_plus_even)?;
    let b_minus_even = restrict(&v_minus_even)?;
    Ok(PmSplitting {
        plus_bases,
        minus_bases,
        b_plus_even,
        b_minus_even,
    })
}

impl PmSplitting {
    /// Matrix of B² on the ± part of a single degree.
    pub fn b2_part(
        &self,
        complex: &GradedChainComplex,
        sig: &SignatureOperator,
        q: usize,
        plus: bool,
    ) -> ComplexMatrix {
        let local = if plus {
            &self.plus_bases[q]
        } else {
            &self.minus_bases[q]
        };
        if local.cols() == 0 {
            return ComplexMatrix::zeros(0, 0);
        }
        let idx = complex.degree_indices(q);
        let b2_q = take(&sig.b_squared, &idx, &idx);
        let target = b2_q.mul(local);
        local.adjoint().mul(&target)
    }
}

/// Spectral window projector Π_{[0,λ]} of a degree-preserving square matrix.
/// Fails when a generalized eigenvalue sits on |μ| = λ within the gap rule.
pub fn spectral_window(
    b2: &ComplexMatrix,
    lambda: f64,
    tol: f64,
) -> Result<ComplexMatrix, GradedError> {
    let data = generalized_eigenspaces(b2, tol)?;
    let n = b2.rows();
    let mut proj = ComplexMatrix::zeros(n, n);
    for d in &data {
        let dist = (d.value.norm() - lambda).abs();
        if dist <= 1e-9 * 1.0f64.max(lambda).max(d.value.norm()) {
            return Err(GradedError::WindowBoundary(d.value, lambda));
        }
        if d.value.norm() <= lambda {
            proj = proj.add(&d.projector);
        }
    }
    Ok(proj)
}

/// A subcomplex cut out by per-degree spanning columns of the ambient complex.
#[derive(Debug, Clone)]
pub struct SubComplex {
    /// Per degree: local columns (dims[q] x k_q) spanning the subspace.
    pub bases: Vec<ComplexMatrix>,
    pub complex: GradedChainComplex,
}

/// Splits the complex into the [0, λ] spectral window of B² and its
/// complement, each as a chirality subcomplex in its own basis.
pub fn window_split(
    complex: &GradedChainComplex,
    sig: &SignatureOperator,
    lambda: f64,
    tol: f64,
) -> Result<(SubComplex, SubComplex), GradedError> {
    let m = complex.top_degree();
    let mut inside_bases = Vec::with_capacity(m + 1);
    let mut outside_bases = Vec::with_capacity(m + 1);
    for q in 0..=m {
        let idx = complex.degree_indices(q);
        let b2_q = take(&sig.b_squared, &idx, &idx);
        if b2_q.rows() == 0 {
            inside_bases.push(ComplexMatrix::zeros(0, 0));
            outside_bases.push(ComplexMatrix::zeros(0, 0));
            continue;
        }
        let proj = spectral_window(&b2_q, lambda, tol)?;
        let inside = Svd::new(&proj)?.image_basis(0.5);
        let co_proj = ComplexMatrix::identity(b2_q.rows()).sub(&proj);
        let outside = Svd::new(&co_proj)?.image_basis(0.5);
        inside_bases.push(inside);
        outside_bases.push(outside);
    }
    let inside = subcomplex_in_bases(complex, inside_bases)?;
    let outside = subcomplex_in_bases(complex, outside_bases)?;
    Ok((inside, outside))
}

/// Expresses ∇ and Γ (and the inner product) in the given per-degree bases.
/// The bases must span ∇- and Γ-invariant subspaces.
pub fn subcomplex_in_bases(
    complex: &GradedChainComplex,
    bases: Vec<ComplexMatrix>,
) -> Result<SubComplex, GradedError> {
    let m = complex.top_degree();
    let coords = |target: &ComplexMatrix, basis: &ComplexMatrix| -> Result<ComplexMatrix, GradedError> {
        if basis.cols() == 0 {
            if target.max_abs() > 1e-8 * complex.flat_diff().max_abs().max(1.0) {
                return Err(GradedError::Invalid(
                    "subcomplex basis does not absorb the operator image".to_string(),
                ));
            }
            return Ok(ComplexMatrix::zeros(0, target.cols()));
        }
        let x = Svd::new(basis)?.pinv(1e-12).mul(target);
        let res = basis.mul(&x).sub(target).max_abs();
        if res > 1e-7 * target.max_abs().max(1.0) {
            return Err(GradedError::Invalid(format!(
                "subcomplex basis is not invariant (residual {res:.2e})"
            )));
        }
        Ok(x)
    };

    let mut dims = Vec::with_capacity(m + 1);
    for b in &bases {
        dims.push(b.cols());
    }
    let mut diff = Vec::with_capacity(m);
    for q in 0..m {
        let target = complex.diff[q].mul(&bases[q]);
        diff.push(coords(&target, &bases[q + 1])?);
    }
    let mut chi = Vec::with_capacity(m + 1);
    for q in 0..=m {
        let target = complex.chi[q].mul(&bases[q]);
        chi.push(coords(&target, &bases[m - q])?);
    }
    let inner = complex.inner.as_ref().map(|gs| {
        (0..=m)
            .map(|q| bases[q].adjoint().mul(&gs[q]).mul(&bases[q]))
            .collect()
    });
    // without stored inner products the restriction of the standard one is
    // basis^H basis, which is the identity for orthonormal bases
    let inner = match inner {
        Some(v) => Some(v),
        None => {
            let gram: Vec<ComplexMatrix> = (0..=m)
                .map(|q| bases[q].adjoint().mul(&bases[q]))
                .collect();
            let orthonormal = gram.iter().all(|g| {
                g.sub(&ComplexMatrix::identity(g.rows())).max_abs() < 1e-9
            });
            if orthonormal {
                None
            } else {
                Some(gram)
            }
        }
    };
    let sub = GradedChainComplex {
        dims,
        diff,
        chi,
        inner,
    };
    Ok(SubComplex {
        bases,
        complex: sub,
    })
}

/// Sector model: B with formal adjoint B' = B^H and an
/// invertible self-adjoint twist with smallest eigenvalue >= 1/3.
#[derive(Debug, Clone)]
pub struct SectorModel {
    pub b: ComplexMatrix,
    pub b_adj: ComplexMatrix,
    pub twist: ComplexMatrix,
}

#[derive(Debug, Clone)]
pub struct SectorReport {
    pub n0: f64,
    /// min over eigenvalues λ of N₀ - |Im λ|.
    pub strip_margin: f64,
    /// min over eigenvalues μ of B² of Re μ - ((Im μ)²/(4N₀²) - N₀²).
    pub parabola_margin: f64,
    pub ok: bool,
}

impl SectorModel {
    pub fn new(b: ComplexMatrix, twist: ComplexMatrix) -> Result<SectorModel, GradedError> {
        if !b.is_square() || !twist.is_square() || b.rows() != twist.rows() {
            return Err(GradedError::SectorPrecondition(
                "B and the twist must be square of equal size".to_string(),
            ));
        }
        if !twist.is_hermitian(1e-10 * twist.max_abs().max(1.0)) {
            return Err(GradedError::SectorPrecondition(
                "twist is not self-adjoint".to_string(),
            ));
        }
        let eigs = Schur::new(&twist)?.eigenvalues();
        let min_eig = eigs.iter().map(|e| e.re).fold(f64::INFINITY, f64::min);
        if min_eig < 1.0 / 3.0 - 1e-9 {
            return Err(GradedError::SectorPrecondition(format!(
                "twist smallest eigenvalue {min_eig} < 1/3"
            )));
        }
        let b_adj = b.adjoint();
        Ok(SectorModel { b, b_adj, twist })
    }

    pub fn decomposition(&self) -> Result<(ComplexMatrix, ComplexMatrix, f64), GradedError> {
        let t_inv = self.twist.inverse()?;
        let conj = t_inv.mul(&self.b_adj).mul(&self.twist);
        let u = self.b.add(&conj).scale(C64::new(0.5, 0.0));
        let f = self.b.sub(&conj).scale(C64::new(0.5, 0.0));
        let n0 = 3.0 * operator_norm(&f) * operator_norm(&self.twist);
        Ok((u, f, n0))
    }
}

pub fn sector_bound_check(model: &SectorModel) -> Result<SectorReport, GradedError> {
    let (u, _f, n0) = model.decomposition()?;
    // U must be self-adjoint with respect to <., twist .>
    let lhs = u.adjoint().mul(&model.twist);
    let rhs = model.twist.mul(&u);
    let sym_res = lhs.sub(&rhs).max_abs();
    if sym_res > 1e-8 * model.twist.max_abs().max(1.0) * u.max_abs().max(1.0) {
        return Err(GradedError::SectorPrecondition(format!(
            "U is not twist-self-adjoint (residual {sym_res:.2e})"
        )));
    }
    let evs = Schur::new(&model.b)?.eigenvalues();
    let slack = 1e-9 * model.b.max_abs().max(1.0);
    let mut strip_margin = f64::INFINITY;
    let mut parabola_margin = f64::INFINITY;
    for ev in &evs {
        strip_margin = strip_margin.min(n0 + slack - ev.im.abs());
        let mu = ev * ev;
        let bound = if n0 > 0.0 {
            mu.im * mu.im / (4.0 * n0 * n0) - n0 * n0
        } else if mu.im.abs() <= slack {
            -slack
        } else {
            f64::INFINITY
        };
        parabola_margin = parabola_margin.min(mu.re - bound + slack);
    }
    if evs.is_empty() {
        strip_margin = 0.0;
        parabola_margin = 0.0;
    }
    Ok(SectorReport {
        n0,
        strip_margin,
        parabola_margin,
        ok: strip_margin >= 0.0 && parabola_margin >= 0.0,
    })
}

/// Multiset equality of complex values within an absolute tolerance.
pub fn multiset_close(a: &[C64], b: &[C64], tol: f64) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let key = |z: &C64| (z.re, z.im);
    let mut sa = a.to_vec();
    let mut sb = b.to_vec();
    sa.sort_by(|x, y| key(x).partial_cmp(&key(y)).unwrap());
    sb.sort_by(|x, y| key(x).partial_cmp(&key(y)).unwrap());
    sa.iter().zip(sb.iter()).all(|(x, y)| (x - y).norm() <= tol)
}

/// Eigenvalues (with algebraic multiplicity flattened out) of a matrix.
pub fn eigenvalue_multiset(m: &ComplexMatrix) -> Result<Vec<C64>, GradedError> {
    if m.rows() == 0 {
        return Ok(vec![]);
    }
    Ok(Schur::new(m)?.eigenvalues())
}

/// Finite Hodge check for Hermitian models: dim ker B²_q == dim H^q.
pub fn hodge_check(complex: &GradedChainComplex) -> Result<bool, GradedError> {
    let sig = signature_operator(complex)?;
    let coh = complex.cohomology_dims();
    let scale = operator_norm(&sig.b_squared).max(1.0);
    for q in 0..=complex.top_degree() {
        let idx = complex.degree_indices(q);
        let b2_q = take(&sig.b_squared, &idx, &idx);
        let kernel = if b2_q.rows() == 0 {
            0
        } else {
            b2_q.rows() - Svd::new(&b2_q)?.rank(DEFAULT_TOL * scale)
        };
        if kernel != coh[q] {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Intertwining: ∇, Γ∇ and ∇Γ map generalized eigenspaces of B² into
/// generalized eigenspaces with the same eigenvalue.
pub fn intertwining_residual(complex: &GradedChainComplex) -> Result<f64, GradedError> {
    let sig = signature_operator(complex)?;
    let d = complex.flat_diff();
    let g = complex.flat_chi();
    let maps = [d.clone(), g.mul(&d), d.mul(&g)];
    let data = generalized_eigenspaces(&sig.b_squared, 1e-8)?;
    let n = complex.total_dim();
    let mut worst = 0.0f64;
    for datum in &data {
        let co = ComplexMatrix::identity(n).sub(&datum.projector);
        for map in &maps {
            let leak = co.mul(map).mul(&datum.projector);
            let denom = map.max_abs().max(1.0);
            worst = worst.max(leak.max_abs() / denom);
        }
    }
    Ok(worst)
}

/// Contour-quadrature cross check of the spectral window projector.
pub fn window_contour_oracle(
    b2: &ComplexMatrix,
    lambda: f64,
    nodes: usize,
) -> Result<ComplexMatrix, GradedError> {
    Ok(contour_projector(
        b2,
        C64::new(0.0, 0.0),
        lambda,
        nodes,
    )?)
}

/// Plain product of eigenvalues through the Agmon-branch logarithm; used by
/// identity tests.
pub fn det_via_log(values: &[C64], cut: f64) -> Result<C64, GradedError> {
    if values.is_empty() {
        return Ok(C64::new(1.0, 0.0));
    }
    Ok(log_det_cut_values_checked(values, cut)?.exp())
}

fn log_det_cut_values_checked(values: &[C64], cut: f64) -> Result<C64, GradedError> {
    let data: Vec<SpectralDatum> = values
        .iter()
        .map(|v| SpectralDatum {
            value: *v,
            alg_mult: 1,
            jordan_blocks: vec![1],
            projector: ComplexMatrix::identity(0),
        })
        .collect();
    Ok(log_det_cut(&data, cut)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    /// m = 1 complex: 0 → C → C → 0 with ∇ = a and Γ the swap.
    fn segment(a: C64) -> GradedChainComplex {
        GradedChainComplex {
            dims: vec![1, 1],
            diff: vec![ComplexMatrix::from_rows(&[vec![a]])],
            chi: vec![ComplexMatrix::identity(1), ComplexMatrix::identity(1)],
            inner: None,
        }
    }

    #[test]
    fn validate_segment() {
        let cx = segment(c(2.0, 0.0));
        assert!(cx.validate().ok());
    }

    #[test]
    fn validate_rejects_bad_chirality() {
        let mut cx = segment(c(2.0, 0.0));
        cx.chi[0] = ComplexMatrix::from_rows(&[vec![c(2.0, 0.0)]]);
        let rep = cx.validate();
        assert!(!rep.ok());
        assert!(rep.violations[0].contains("not involutive"));
    }

    #[test]
    fn validate_random_complexes() {
        for seed in 0..5 {
            let cx = models::random_chirality_complex(3, 4, seed);
            assert!(cx.validate().ok(), "seed {seed}: {:?}", cx.validate().violations);
        }
    }

    #[test]
    fn segment_signature_operator() {
        // B_even is multiplication by a on degree 0
        let cx = segment(c(3.0, 1.0));
        let sig = signature_operator(&cx).unwrap();
        assert_eq!(sig.b_even.rows(), 1);
        assert!((sig.b_even[(0, 0)] - c(3.0, 1.0)).norm() < 1e-14);
        assert!((sig.b_odd[(0, 0)] - c(3.0, 1.0)).norm() < 1e-14);
    }

    #[test]
    fn zero_differential_gives_zero_b() {
        let cx = GradedChainComplex {
            dims: vec![2, 2],
            diff: vec![ComplexMatrix::zeros(2, 2)],
            chi: vec![ComplexMatrix::identity(2), ComplexMatrix::identity(2)],
            inner: None,
        };
        let sig = signature_operator(&cx).unwrap();
        assert!(sig.b.max_abs() < 1e-15);
    }

    #[test]
    fn hermitian_model_has_real_spectrum() {
        for seed in 0..5 {
            let cx = models::random_hermitian_complex(3, 3, seed);
            let sig = signature_operator(&cx).unwrap();
            let evs = eigenvalue_multiset(&sig.b).unwrap();
            for ev in evs {
                assert!(ev.im.abs() < 1e-10, "seed {seed}: eigenvalue {ev}");
            }
        }
    }

    #[test]
    fn segment_splitting() {
        let cx = segment(c(2.0, 0.0));
        let s = pm_splitting(&cx).unwrap();
        // degree 0: ker Γ∇Γ = everything (Γ∇Γ lands in degree -1 = 0),
        // ker ∇ = 0 since a ≠ 0
        assert_eq!(s.plus_bases[0].cols(), 1);
        assert_eq!(s.minus_bases[0].cols(), 0);
        assert_eq!(s.b_plus_even.rows(), 1);
        assert!((s.b_plus_even[(0, 0)] - c(2.0, 0.0)).norm() < 1e-12);
        assert_eq!(s.b_minus_even.rows(), 0);
    }

    #[test]
    fn spectral_window_diagonal() {
        let b2 = ComplexMatrix::diag(&[c(1.0, 0.0), c(3.0, 0.0)]);
        let p = spectral_window(&b2, 2.0, 1e-9).unwrap();
        let expect = ComplexMatrix::diag(&[c(1.0, 0.0), c(0.0, 0.0)]);
        assert!(p.sub(&expect).max_abs() < 1e-12);
        let p_all = spectral_window(&b2, 4.0, 1e-9).unwrap();
        assert!(p_all.sub(&ComplexMatrix::identity(2)).max_abs() < 1e-12);
    }

    #[test]
    fn spectral_window_boundary_collision() {
        let b2 = ComplexMatrix::diag(&[c(1.0, 0.0), c(3.0, 0.0)]);
        assert!(matches!(
            spectral_window(&b2, 3.0, 1e-9),
            Err(GradedError::WindowBoundary(_, _))
        ));
    }

    #[test]
    fn spectral_window_jordan_vs_contour() {
        // J2(0.4): the whole block lies inside |μ| <= 1
        let mut j = ComplexMatrix::zeros(2, 2);
        j[(0, 0)] = c(0.4, 0.0);
        j[(0, 1)] = c(1.0, 0.0);
        j[(1, 1)] = c(0.4, 0.0);
        let p = spectral_window(&j, 1.0, 1e-9).unwrap();
        assert!(p.sub(&ComplexMatrix::identity(2)).max_abs() < 1e-10);
        let oracle = window_contour_oracle(&j, 1.0, 512).unwrap();
        assert!(p.sub(&oracle).max_abs() < 1e-8);
    }

    #[test]
    fn sector_bounds_self_adjoint_twist_identity() {
        let cx = models::random_hermitian_complex(3, 3, 7);
        let sig = signature_operator(&cx).unwrap();
        let n = sig.b.rows();
        let model = SectorModel::new(sig.b.clone(), ComplexMatrix::identity(n)).unwrap();
        let rep = sector_bound_check(&model).unwrap();
        assert!(rep.n0 < 1e-9);
        assert!(rep.ok, "strip {} parabola {}", rep.strip_margin, rep.parabola_margin);
    }

    #[test]
    fn sector_bounds_random_b() {
        for seed in 0..5 {
            let model = models::random_sector_model(6, seed, seed % 2 == 1);
            let rep = sector_bound_check(&model).unwrap();
            assert!(rep.ok, "seed {seed}: margins {} / {}", rep.strip_margin, rep.parabola_margin);
        }
    }

    #[test]
    fn sector_precondition_rejected() {
        let b = ComplexMatrix::identity(2);
        let bad_twist = ComplexMatrix::diag(&[c(0.1, 0.0), c(1.0, 0.0)]);
        assert!(matches!(
            SectorModel::new(b, bad_twist),
            Err(GradedError::SectorPrecondition(_))
        ));
    }

    #[test]
    fn hodge_on_hermitian_models() {
        for seed in 0..5 {
            let cx = models::random_hermitian_complex(3, 3, 100 + seed);
            assert!(hodge_check(&cx).unwrap(), "seed {seed}");
        }
    }

    #[test]
    fn intertwining_small_residual() {
        for seed in 0..3 {
            let cx = models::random_chirality_complex(3, 3, 50 + seed);
            let res = intertwining_residual(&cx).unwrap();
            assert!(res < 1e-9, "seed {seed}: {res}");
        }
    }

    #[test]
    fn window_split_reassembles_dimensions() {
        let cx = models::random_chirality_complex(3, 4, 21);
        let sig = signature_operator(&cx).unwrap();
        let lambda = models::admissible_window(&sig, 0.5);
        let (inside, outside) = window_split(&cx, &sig, lambda, 1e-9).unwrap();
        for q in 0..=cx.top_degree() {
            assert_eq!(
                inside.complex.dims[q] + outside.complex.dims[q],
                cx.dims[q]
            );
        }
        assert!(inside.complex.validate().ok());
        assert!(outside.complex.validate().ok());
    }
}
