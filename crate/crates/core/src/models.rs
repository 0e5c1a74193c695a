//! Seeded random model generators shared by unit tests, the acceptance suite
//! and the CLI. Every generator is deterministic in its seed.

use crate::graded::{GradedChainComplex, SectorModel, SignatureOperator};
use crate::linalg::{ComplexMatrix, Schur, Svd, C64};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    })
}

pub fn random_unitary(rng: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
    if n == 0 {
        return ComplexMatrix::identity(0);
    }
    let a = random_matrix(rng, n, n);
    let svd = Svd::new(&a).expect("finite");
    svd.u.mul(&svd.v.adjoint())
}

fn random_invertible(rng: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
    if n == 0 {
        return ComplexMatrix::identity(0);
    }
    loop {
        let a = random_matrix(rng, n, n);
        let svd = Svd::new(&a).expect("finite");
        if svd.sigma[n - 1] > 0.15 {
            return a;
        }
    }
}

fn palindromic_dims(rng: &mut ChaCha8Rng, m: usize, max_dim: usize) -> Vec<usize> {
    let r = (m + 1) / 2;
    let mut dims = vec![0usize; m + 1];
    for q in 0..r {
        let d = rng.gen_range(1..=max_dim);
        dims[q] = d;
        dims[m - q] = d;
    }
    dims
}

/// Valid chirality complex: palindromic dimensions, Γ built from random
/// unitaries and the degree swap, ∇ random with ∇∇ = 0.
pub fn random_chirality_complex(m: usize, max_dim: usize, seed: u64) -> GradedChainComplex {
    assert!(m % 2 == 1);
    let mut rng = rng_from_seed(seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(m as u64));
    let dims = palindromic_dims(&mut rng, m, max_dim);
    let r = (m + 1) / 2;
    let mut chi: Vec<ComplexMatrix> = vec![ComplexMatrix::identity(0); m + 1];
    for q in 0..r {
        let u = random_unitary(&mut rng, dims[q]);
        chi[m - q] = u.adjoint();
        chi[q] = u;
    }
    let mut diff: Vec<ComplexMatrix> = Vec::with_capacity(m);
    for q in 0..m {
        let raw = random_matrix(&mut rng, dims[q + 1], dims[q]);
        let d = if q == 0 {
            raw
        } else {
            // kill the incoming image so ∇∇ = 0
            let img = Svd::new(&diff[q - 1])
                .expect("finite")
                .image_basis(1e-12);
            let proj = img.mul(&img.adjoint());
            let co = ComplexMatrix::identity(dims[q]).sub(&proj);
            raw.mul(&co)
        };
        diff.push(d);
    }
    GradedChainComplex {
        dims,
        diff,
        chi,
        inner: None,
    }
}

/// Acyclic complex with invertible odd signature operator (the Assumption
/// I/II regime). Exact by construction: each differential factors through
/// orthonormal frames.
pub fn random_acyclic_invertible_complex(
    m: usize,
    max_rank: usize,
    seed: u64,
) -> GradedChainComplex {
    assert!(m % 2 == 1);
    let mut attempt = 0u64;
    loop {
        let mut rng = rng_from_seed(
            seed.wrapping_mul(0x2545_f491_4f6c_dd1d)
                .wrapping_add(attempt)
                .wrapping_add(m as u64),
        );
        // symmetric positive ranks r_q (q = 0..m-1) so dims are palindromic
        let mut ranks = vec![0usize; m];
        for q in 0..(m + 1) / 2 {
            let v = rng.gen_range(1..=max_rank);
            ranks[q] = v;
            ranks[m - 1 - q] = v;
        }
        let mut dims = vec![0usize; m + 1];
        for q in 0..=m {
            let incoming = if q > 0 { ranks[q - 1] } else { 0 };
            let outgoing = if q < m { ranks[q] } else { 0 };
            dims[q] = incoming + outgoing;
        }
        // frame per degree: first columns carry the incoming image, the rest
        // the outgoing coimage
        let frames: Vec<ComplexMatrix> = (0..=m).map(|q| random_unitary(&mut rng, dims[q])).collect();
        let mut diff = Vec::with_capacity(m);
        for q in 0..m {
            let incoming = if q > 0 { ranks[q - 1] } else { 0 };
            let src = frames[q].submatrix(0, dims[q], incoming, dims[q]);
            let dst = frames[q + 1].submatrix(0, dims[q + 1], 0, ranks[q]);
            let mix = random_invertible(&mut rng, ranks[q]);
            diff.push(dst.mul(&mix).mul(&src.adjoint()));
        }
        let r = (m + 1) / 2;
        let mut chi: Vec<ComplexMatrix> = vec![ComplexMatrix::identity(0); m + 1];
        for q in 0..r {
            let u = random_unitary(&mut rng, dims[q]);
            chi[m - q] = u.adjoint();
            chi[q] = u;
        }
        let cx = GradedChainComplex {
            dims,
            diff,
            chi,
            inner: None,
        };
        // require B invertible (Assumption II analog)
        if let Ok(sig) = crate::graded::signature_operator(&cx) {
            let evs = Schur::new(&sig.b).expect("finite").eigenvalues();
            let min_abs = evs.iter().map(|e| e.norm()).fold(f64::INFINITY, f64::min);
            if min_abs > 1e-4 {
                return cx;
            }
        }
        attempt += 1;
    }
}

/// Hermitian-connection analog: Γ is the plain degree swap (a unitary
/// involution) and ∇ satisfies ∇* = Γ∇Γ, so B is self-adjoint.
pub fn random_hermitian_complex(m: usize, max_dim: usize, seed: u64) -> GradedChainComplex {
    assert!(m % 2 == 1);
    let mut rng = rng_from_seed(seed.wrapping_mul(0xd1b5_4a32_d192_ed03).wrapping_add(m as u64));
    let dims = palindromic_dims(&mut rng, m, max_dim);
    let r = (m + 1) / 2;
    let mut diff: Vec<ComplexMatrix> = Vec::with_capacity(m);
    for q in 0..r.saturating_sub(1) {
        let raw = random_matrix(&mut rng, dims[q + 1], dims[q]);
        let d = if q == 0 {
            raw
        } else {
            let img = Svd::new(&diff[q - 1]).expect("finite").image_basis(1e-12);
            let proj = img.mul(&img.adjoint());
            raw.mul(&ComplexMatrix::identity(dims[q]).sub(&proj))
        };
        diff.push(d);
    }
    // middle differential: Hermitian and annihilating the incoming image
    let q_mid = r - 1;
    let h = {
        let raw = random_matrix(&mut rng, dims[q_mid], dims[q_mid]);
        raw.add(&raw.adjoint()).scale(C64::new(0.5, 0.0))
    };
    let mid = if q_mid == 0 {
        h
    } else {
        let img = Svd::new(&diff[q_mid - 1]).expect("finite").image_basis(1e-12);
        let proj = img.mul(&img.adjoint());
        let co = ComplexMatrix::identity(dims[q_mid]).sub(&proj);
        co.mul(&h).mul(&co)
    };
    diff.push(mid);
    for q in r..m {
        let mirror = &diff[m - 1 - q];
        diff.push(mirror.adjoint());
    }
    let chi: Vec<ComplexMatrix> = (0..=m).map(|q| ComplexMatrix::identity(dims[q])).collect();
    GradedChainComplex {
        dims,
        diff,
        chi,
        inner: None,
    }
}

/// Sector model with random B; the twist is either the identity or a random
/// self-adjoint matrix shifted so its smallest eigenvalue clears 1/3.
pub fn random_sector_model(n: usize, seed: u64, random_twist: bool) -> SectorModel {
    let mut rng = rng_from_seed(seed.wrapping_mul(0xbf58_476d_1ce4_e5b9));
    let b = random_matrix(&mut rng, n, n);
    let twist = if random_twist {
        let a = random_matrix(&mut rng, n, n);
        let h = a.add(&a.adjoint()).scale(C64::new(0.5, 0.0));
        let evs = Schur::new(&h).expect("finite").eigenvalues();
        let min_eig = evs.iter().map(|e| e.re).fold(f64::INFINITY, f64::min);
        let shift = (1.0 / 3.0 + 0.25) - min_eig;
        let mut t = h;
        for i in 0..n {
            t[(i, i)] += C64::new(shift, 0.0);
        }
        t
    } else {
        ComplexMatrix::identity(n)
    };
    SectorModel::new(b, twist).expect("construction satisfies the preconditions")
}

/// Random boundary model for interior dimension `m` (odd): a generic part
/// with exact frame-built differentials and no harmonics, direct-summed with
/// an explicit harmonic block (∇ = 0 there). The middle-degree harmonic
/// block carries the balanced involution diag(I, -I), so Assumptions A and B
/// hold by construction; Γ is Hermitian throughout (inner product: identity).
///
/// `middle_pairs` adds 2·middle_pairs harmonic dimensions at the middle
/// degree; `side_harmonics` adds that many at degree 0 and its mirror.
pub fn random_boundary_model(
    m: usize,
    max_rank: usize,
    middle_pairs: usize,
    side_harmonics: usize,
    seed: u64,
) -> crate::boundary::BoundaryModel {
    let mut attempt = 0u64;
    loop {
        let model = build_boundary_attempt(m, max_rank, middle_pairs, side_harmonics, seed, attempt);
        if !model.validate().is_empty() {
            attempt += 1;
            continue;
        }
        // the generic part must carry no harmonics and an invertible B²
        let ok = (|| -> Result<bool, crate::boundary::BoundaryError> {
            let rep = crate::boundary::check_assumptions(&model)?;
            let total_h: usize = rep.harmonic_dims.iter().sum();
            let expected = 2 * middle_pairs + 2 * side_harmonics;
            Ok(rep.a_holds && rep.b_holds && total_h == expected && rep.kernel_dim == expected)
        })()
        .unwrap_or(false);
        if ok {
            return model;
        }
        attempt += 1;
        assert!(attempt < 64, "boundary model generation did not stabilize");
    }
}

fn build_boundary_attempt(
    m: usize,
    max_rank: usize,
    middle_pairs: usize,
    side_harmonics: usize,
    seed: u64,
    attempt: u64,
) -> crate::boundary::BoundaryModel {
    assert!(m % 2 == 1 && m >= 3);
    let top = m - 1; // boundary top degree, even
    let mid = top / 2;
    {
        let mut rng = rng_from_seed(
            seed.wrapping_mul(0x94d0_49bb_1331_11eb)
                .wrapping_add(attempt)
                .wrapping_add((m as u64) << 32),
        );
        // generic ranks, symmetric so the chirality can pair degrees
        let mut ranks = vec![0usize; top];
        for q in 0..(top + 1) / 2 {
            let v = rng.gen_range(1..=max_rank);
            ranks[q] = v;
            ranks[top - 1 - q] = v;
        }
        let mut gdims = vec![0usize; top + 1];
        for q in 0..=top {
            let incoming = if q > 0 { ranks[q - 1] } else { 0 };
            let outgoing = if q < top { ranks[q] } else { 0 };
            gdims[q] = incoming + outgoing;
        }
        let frames: Vec<ComplexMatrix> =
            (0..=top).map(|q| random_unitary(&mut rng, gdims[q])).collect();
        let mut gdiff = Vec::with_capacity(top);
        for q in 0..top {
            let incoming = if q > 0 { ranks[q - 1] } else { 0 };
            let src = frames[q].submatrix(0, gdims[q], incoming, gdims[q]);
            let dst = frames[q + 1].submatrix(0, gdims[q + 1], 0, ranks[q]);
            let mix = random_invertible(&mut rng, ranks[q]);
            gdiff.push(dst.mul(&mix).mul(&src.adjoint()));
        }
        // Hermitian chirality on the generic part: unitary pair blocks plus
        // a Hermitian unitary involution at the middle
        let mut gchi: Vec<ComplexMatrix> = vec![ComplexMatrix::identity(0); top + 1];
        for q in 0..mid {
            let w = random_unitary(&mut rng, gdims[q]);
            gchi[q] = w.adjoint();
            gchi[top - q] = w;
        }
        let mid_inv = {
            let v = random_unitary(&mut rng, gdims[mid]);
            let mut signs = ComplexMatrix::zeros(gdims[mid], gdims[mid]);
            for i in 0..gdims[mid] {
                let s = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
                signs[(i, i)] = C64::new(s, 0.0);
            }
            v.mul(&signs).mul(&v.adjoint())
        };
        gchi[mid] = mid_inv;

        // harmonic block dims
        let mut hdims = vec![0usize; top + 1];
        hdims[mid] = 2 * middle_pairs;
        if side_harmonics > 0 {
            hdims[0] += side_harmonics;
            hdims[top] += side_harmonics;
        }
        let dims: Vec<usize> = (0..=top).map(|q| gdims[q] + hdims[q]).collect();
        let diff: Vec<ComplexMatrix> = (0..top)
            .map(|q| {
                let mut d = ComplexMatrix::zeros(dims[q + 1], dims[q]);
                for i in 0..gdiff[q].rows() {
                    for j in 0..gdiff[q].cols() {
                        d[(i, j)] = gdiff[q][(i, j)];
                    }
                }
                d
            })
            .collect();
        let chi: Vec<ComplexMatrix> = (0..=top)
            .map(|q| {
                let t = top - q;
                let mut c = ComplexMatrix::zeros(dims[t], dims[q]);
                for i in 0..gchi[q].rows() {
                    for j in 0..gchi[q].cols() {
                        c[(i, j)] = gchi[q][(i, j)];
                    }
                }
                // harmonic block: identity swap off-middle, diag(I, -I) at
                // the middle
                if q == mid {
                    for p in 0..middle_pairs {
                        c[(gdims[mid] + p, gdims[mid] + p)] = C64::new(1.0, 0.0);
                        c[(gdims[mid] + middle_pairs + p, gdims[mid] + middle_pairs + p)] =
                            C64::new(-1.0, 0.0);
                    }
                } else {
                    for p in 0..hdims[q] {
                        c[(gdims[t] + p, gdims[q] + p)] = C64::new(1.0, 0.0);
                    }
                }
                c
            })
            .collect();
        crate::boundary::BoundaryModel {
            dims,
            diff,
            chi,
            inner: None,
            lagrangian: None,
        }
    }
}

/// Synthetic boundary spectrum for interior dimension `m`: the side spectra
/// satisfy the transition relation Spec(B^{2,-}_q) = Spec(B^{2,+}_{q-1}), as
/// they do for a genuine boundary operator. With `symmetric` the Γ-duality
/// constraints are imposed as well: link spectra mirror under q ↔ m - q and
/// harmonic dims satisfy l_q^- = l_{m-1-q}^+.
pub fn random_boundary_spectrum(
    m: usize,
    seed: u64,
    symmetric: bool,
) -> crate::cylinder::BoundarySpectralModel {
    use crate::cylinder::{BoundarySpectralModel, DegreeSpectrum, SpectralEntry};
    assert!(m % 2 == 1 && m >= 3);
    let mut rng = rng_from_seed(seed.wrapping_mul(0x853c_49e6_748f_ea9b).wrapping_add(m as u64));
    let entry_list = |rng: &mut ChaCha8Rng| -> Vec<SpectralEntry> {
        let count = rng.gen_range(0..=3);
        (0..count)
            .map(|_| {
                let value = C64::new(rng.gen_range(0.3..3.0), rng.gen_range(-0.25..0.25));
                let mult = rng.gen_range(1..=2);
                let jordan_blocks = if mult == 2 && rng.gen_bool(0.5) {
                    vec![2]
                } else {
                    vec![1; mult]
                };
                SpectralEntry {
                    value,
                    multiplicity: mult,
                    jordan_blocks,
                }
            })
            .collect()
    };
    // link spectra E_q for q = 1..m-1: minus[q] = plus[q-1] = E_q
    let mut links: Vec<Vec<SpectralEntry>> = vec![Vec::new(); m];
    for q in 1..m {
        if symmetric && q > m - q {
            links[q] = links[m - q].clone();
        } else {
            links[q] = entry_list(&mut rng);
        }
    }
    let mut harm_minus = vec![0usize; m];
    let mut harm_plus = vec![0usize; m];
    for q in 0..m {
        if symmetric && q > m - 1 - q {
            harm_minus[q] = harm_plus[m - 1 - q];
            harm_plus[q] = harm_minus[m - 1 - q];
        } else {
            harm_minus[q] = rng.gen_range(0..=2);
            harm_plus[q] = rng.gen_range(0..=2);
            if symmetric && q == m - 1 - q {
                harm_plus[q] = harm_minus[q];
            }
        }
    }
    let degrees = (0..m)
        .map(|q| DegreeSpectrum {
            minus: links[q].clone(),
            plus: if q + 1 < m {
                links[q + 1].clone()
            } else {
                Vec::new()
            },
            harmonic_minus: harm_minus[q],
            harmonic_plus: harm_plus[q],
        })
        .collect();
    BoundarySpectralModel { degrees }
}

/// The quarter fixture (interior dimension 5): ζ⁺₂(0) = 3, ζ⁻₁(0) = 2,
/// l₂⁺ = 1, l₂⁻ = 0, l₁⁺ = 0, l₁⁻ = 1, so ζ(0) + k at degree 2 for the
/// Dirichlet-type condition equals 1/4 exactly.
pub fn quarter_fixture() -> crate::cylinder::BoundarySpectralModel {
    use crate::cylinder::{BoundarySpectralModel, DegreeSpectrum, SpectralEntry};
    let m = 5;
    let entry = |value: f64, mult: usize| SpectralEntry {
        value: C64::new(value, 0.0),
        multiplicity: mult,
        jordan_blocks: vec![1; mult],
    };
    let mut links: Vec<Vec<SpectralEntry>> = vec![Vec::new(); m];
    links[1] = vec![entry(0.8, 1), entry(1.7, 1)]; // ζ⁻₁(0) = 2
    links[2] = vec![entry(1.1, 1)]; // shared transition spectrum, cancels
    links[3] = vec![entry(0.6, 1), entry(1.9, 2)]; // ζ⁺₂(0) = 3
    let mut harm_minus = vec![0usize; m];
    let mut harm_plus = vec![0usize; m];
    harm_plus[2] = 1;
    harm_minus[1] = 1;
    let degrees = (0..m)
        .map(|q| DegreeSpectrum {
            minus: links[q].clone(),
            plus: if q + 1 < m {
                links[q + 1].clone()
            } else {
                Vec::new()
            },
            harmonic_minus: harm_minus[q],
            harmonic_plus: harm_plus[q],
        })
        .collect();
    BoundarySpectralModel { degrees }
}

/// A window radius λ that avoids every generalized eigenvalue magnitude of
/// B². `frac` in [0, 1] slides the choice across the spectral gaps.
pub fn admissible_window(sig: &SignatureOperator, frac: f64) -> f64 {
    let evs = Schur::new(&sig.b_squared).expect("finite").eigenvalues();
    let scale = evs.iter().map(|e| e.norm()).fold(1.0f64, f64::max);
    // numerically zero magnitudes collapse to an exact zero
    let mut mags: Vec<f64> = evs
        .iter()
        .map(|e| {
            let n = e.norm();
            if n <= 1e-9 * scale {
                0.0
            } else {
                n
            }
        })
        .collect();
    mags.sort_by(|a, b| a.partial_cmp(b).unwrap());
    mags.dedup_by(|a, b| (*a - *b).abs() <= 1e-7 * scale);
    if mags.is_empty() {
        return 1.0;
    }
    // candidate windows: below the smallest nonzero value (only meaningful
    // when there is no kernel), between consecutive values, above the top
    let mut candidates = Vec::new();
    if mags[0] > 0.0 {
        candidates.push(0.5 * mags[0]);
    }
    for w in mags.windows(2) {
        candidates.push(0.5 * (w[0] + w[1]));
    }
    candidates.push(mags[mags.len() - 1] + 1.0);
    let pick = ((frac.clamp(0.0, 1.0) * candidates.len() as f64).floor() as usize)
        .min(candidates.len() - 1);
    candidates[pick]
}

/// Picks an Agmon angle θ in (-π/2, 0) such that the ray-based half-plane
/// split of the spectrum matches the real-part split of the eta invariant:
/// θ must sit below every principal argument in (-π/2, 0) and below α - π for
/// arguments α in (π/2, π), for the eigenvalues of B_even and their negatives.
/// The rays θ and 2θ are also kept clear of the spectra.
pub fn admissible_theta(b_even_spectrum: &[C64], preferred: f64) -> f64 {
    let half_pi = std::f64::consts::FRAC_PI_2;
    let pi = std::f64::consts::PI;
    let mut upper = preferred.clamp(-half_pi + 1e-6, -1e-6);
    let mut bad: Vec<f64> = Vec::new();
    for ev in b_even_spectrum {
        if ev.norm() == 0.0 {
            continue;
        }
        for v in [*ev, -*ev] {
            let a = v.arg();
            if a > -half_pi && a < 0.0 {
                bad.push(a);
            }
            if a > half_pi && a < pi {
                bad.push(a - pi);
            }
        }
    }
    if let Some(min_bad) = bad.iter().cloned().fold(None::<f64>, |acc, x| {
        Some(acc.map_or(x, |a| a.min(x)))
    }) {
        if upper >= min_bad {
            upper = 0.5 * (-half_pi + min_bad);
        }
    }
    // nudge away from rays of the spectrum (θ for B, 2θ for B²)
    let mut theta = upper;
    'outer: for _ in 0..1000 {
        for ev in b_even_spectrum {
            if ev.norm() == 0.0 {
                continue;
            }
            for v in [*ev, -*ev] {
                if angle_distance(v.arg(), theta) < 1e-7 {
                    theta -= 3e-6;
                    continue 'outer;
                }
            }
            let sq = ev * ev;
            let cut2 = 2.0 * theta;
            let mut a2 = sq.arg();
            if a2 <= cut2 {
                a2 += 2.0 * pi;
            }
            if (a2 - cut2).min(cut2 + 2.0 * pi - a2) < 1e-7 {
                theta -= 3e-6;
                continue 'outer;
            }
        }
        break;
    }
    theta.max(-half_pi + 1e-9)
}

fn angle_distance(a: f64, b: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut d = (a - b).rem_euclid(two_pi);
    if d > std::f64::consts::PI {
        d = two_pi - d;
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graded::signature_operator;

    #[test]
    fn acyclic_generator_is_acyclic_and_invertible() {
        for seed in 0..6 {
            for m in [1usize, 3, 5] {
                let cx = random_acyclic_invertible_complex(m, 2, seed);
                assert!(cx.validate().ok());
                let coh = cx.cohomology_dims();
                assert!(coh.iter().all(|d| *d == 0), "m={m} seed={seed}: {coh:?}");
                let sig = signature_operator(&cx).unwrap();
                let evs = Schur::new(&sig.b).unwrap().eigenvalues();
                assert!(evs.iter().all(|e| e.norm() > 1e-5));
            }
        }
    }

    #[test]
    fn hermitian_generator_is_valid() {
        for seed in 0..4 {
            for m in [1usize, 3, 5] {
                let cx = random_hermitian_complex(m, 3, seed);
                assert!(cx.validate().ok(), "m={m} seed={seed}");
                let sig = signature_operator(&cx).unwrap();
                assert!(sig.b.is_hermitian(1e-10 * sig.b.max_abs().max(1.0)));
            }
        }
    }

    #[test]
    fn generators_are_deterministic() {
        let a = random_chirality_complex(3, 4, 42);
        let b = random_chirality_complex(3, 4, 42);
        assert_eq!(a.dims, b.dims);
        for (x, y) in a.diff.iter().zip(b.diff.iter()) {
            assert!(x.sub(y).max_abs() == 0.0);
        }
    }

    #[test]
    fn admissible_theta_avoids_bad_sectors() {
        let spec = vec![
            C64::new(1.0, -0.4),
            C64::new(-0.3, 0.8),
            C64::new(0.0, 2.0),
        ];
        let theta = admissible_theta(&spec, -0.3);
        assert!(theta > -std::f64::consts::FRAC_PI_2 && theta < 0.0);
        for ev in &spec {
            for v in [*ev, -*ev] {
                let a = v.arg();
                if a > -std::f64::consts::FRAC_PI_2 && a < 0.0 {
                    assert!(theta < a);
                }
            }
        }
    }
}
