//! Complex Schur decomposition: Householder reduction to Hessenberg form
//! followed by implicit single-shift QR with Givens rotations, plus the
//! eigenvalue reordering used to build spectral projectors.
//!
//! Givens convention throughout: `G = [[c, s], [-conj(s), c]]` with real `c`,
//! chosen so `G * (a, b)^T = (r, 0)^T`.  Left action on rows k, k+1 is `G`,
//! right action on columns is `G^H`, and `Q` accumulates `Q * G^H`.

use super::{givens, ComplexMatrix, LinalgError, C64};

/// `A = Q T Q^H` with `Q` unitary and `T` upper triangular.
#[derive(Debug, Clone)]
pub struct Schur {
    pub q: ComplexMatrix,
    pub t: ComplexMatrix,
}

impl Schur {
    pub fn new(a: &ComplexMatrix) -> Result<Schur, LinalgError> {
        if !a.is_square() {
            return Err(LinalgError::NotSquare {
                rows: a.rows(),
                cols: a.cols(),
            });
        }
        a.check_finite()?;
        let n = a.rows();
        if n <= 1 {
            return Ok(Schur {
                q: ComplexMatrix::identity(n),
                t: a.clone(),
            });
        }
        let (mut h, mut q) = hessenberg(a);
        qr_iterate(&mut h, &mut q)?;
        // clean the strictly lower part (iteration leaves eps-size dust)
        for i in 1..n {
            for j in 0..i {
                h[(i, j)] = C64::new(0.0, 0.0);
            }
        }
        Ok(Schur { q, t: h })
    }

    pub fn eigenvalues(&self) -> Vec<C64> {
        (0..self.t.rows()).map(|i| self.t[(i, i)]).collect()
    }

    /// Swaps the diagonal entries at positions `i` and `i+1` by a unitary
    /// similarity, keeping `T` upper triangular. Degenerates to a no-op when
    /// the two entries coincide and cannot be separated.
    pub fn swap_adjacent(&mut self, i: usize) {
        let n = self.t.rows();
        assert!(i + 1 < n);
        let t11 = self.t[(i, i)];
        let t12 = self.t[(i, i + 1)];
        let t22 = self.t[(i + 1, i + 1)];
        // (t12, t22 - t11) is the eigenvector of [[t11, t12], [0, t22]] for
        // t22; the similarity G·T·G^H puts t22 first because G^H e1 is
        // proportional to that eigenvector.
        let (c, s) = givens(t12, t22 - t11);
        // rows i, i+1 <- G
        for col in 0..n {
            let a = self.t[(i, col)];
            let b = self.t[(i + 1, col)];
            self.t[(i, col)] = a * c + b * s;
            self.t[(i + 1, col)] = -a * s.conj() + b * c;
        }
        // cols i, i+1 <- G^H
        for row in 0..n {
            let a = self.t[(row, i)];
            let b = self.t[(row, i + 1)];
            self.t[(row, i)] = a * c + b * s.conj();
            self.t[(row, i + 1)] = -a * s + b * c;
        }
        for row in 0..n {
            let a = self.q[(row, i)];
            let b = self.q[(row, i + 1)];
            self.q[(row, i)] = a * c + b * s.conj();
            self.q[(row, i + 1)] = -a * s + b * c;
        }
        self.t[(i + 1, i)] = C64::new(0.0, 0.0);
        self.t[(i, i)] = t22;
        self.t[(i + 1, i + 1)] = t11;
    }

    /// Moves the selected diagonal positions to the leading block, preserving
    /// their relative order. Returns the size of the leading block.
    pub fn reorder_to_front(&mut self, selected: &[bool]) -> usize {
        let n = self.t.rows();
        assert_eq!(selected.len(), n);
        let mut flags = selected.to_vec();
        let mut target = 0usize;
        for pos in 0..n {
            if flags[pos] {
                let mut j = pos;
                while j > target {
                    self.swap_adjacent(j - 1);
                    flags.swap(j - 1, j);
                    j -= 1;
                }
                target += 1;
            }
        }
        target
    }
}

fn hessenberg(a: &ComplexMatrix) -> (ComplexMatrix, ComplexMatrix) {
    let n = a.rows();
    let mut h = a.clone();
    let mut q = ComplexMatrix::identity(n);
    for k in 0..n.saturating_sub(2) {
        let mut x: Vec<C64> = (k + 1..n).map(|i| h[(i, k)]).collect();
        let norm_x = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm_x == 0.0 {
            continue;
        }
        let x0 = x[0];
        let phase = if x0.norm() == 0.0 {
            C64::new(1.0, 0.0)
        } else {
            x0 / x0.norm()
        };
        let alpha = -phase * norm_x;
        x[0] -= alpha;
        let vnorm2 = x.iter().map(|z| z.norm_sqr()).sum::<f64>();
        if vnorm2 == 0.0 {
            continue;
        }
        let tau = 2.0 / vnorm2;
        // rows k+1..n <- P = I - tau v v^H
        for col in 0..n {
            let mut dot = C64::new(0.0, 0.0);
            for (idx, vi) in x.iter().enumerate() {
                dot += vi.conj() * h[(k + 1 + idx, col)];
            }
            dot *= tau;
            for (idx, vi) in x.iter().enumerate() {
                let sub = dot * *vi;
                h[(k + 1 + idx, col)] -= sub;
            }
        }
        // cols k+1..n <- P
        for row in 0..n {
            let mut dot = C64::new(0.0, 0.0);
            for (idx, vi) in x.iter().enumerate() {
                dot += h[(row, k + 1 + idx)] * *vi;
            }
            dot *= tau;
            for (idx, vi) in x.iter().enumerate() {
                let sub = dot * vi.conj();
                h[(row, k + 1 + idx)] -= sub;
            }
        }
        for row in 0..n {
            let mut dot = C64::new(0.0, 0.0);
            for (idx, vi) in x.iter().enumerate() {
                dot += q[(row, k + 1 + idx)] * *vi;
            }
            dot *= tau;
            for (idx, vi) in x.iter().enumerate() {
                let sub = dot * vi.conj();
                q[(row, k + 1 + idx)] -= sub;
            }
        }
        h[(k + 1, k)] = alpha;
        for i in k + 2..n {
            h[(i, k)] = C64::new(0.0, 0.0);
        }
    }
    (h, q)
}

fn wilkinson_shift(a: C64, b: C64, c: C64, d: C64) -> C64 {
    // eigenvalue of [[a, b], [c, d]] closest to d
    let tr_half = (a + d) * 0.5;
    let det = a * d - b * c;
    let disc = (tr_half * tr_half - det).sqrt();
    let e1 = tr_half + disc;
    let e2 = tr_half - disc;
    if (e1 - d).norm() <= (e2 - d).norm() {
        e1
    } else {
        e2
    }
}

fn qr_iterate(h: &mut ComplexMatrix, q: &mut ComplexMatrix) -> Result<(), LinalgError> {
    let n = h.rows();
    let eps = f64::EPSILON;
    let mut hi = n - 1;
    let mut iters_here = 0usize;
    let mut total = 0usize;
    let max_total = 60 * n * n + 300;

    while hi > 0 {
        total += 1;
        if total > max_total {
            return Err(LinalgError::NoConvergence);
        }
        // deflation scan from the bottom of the active block
        let mut lo = hi;
        while lo > 0 {
            let sub = h[(lo, lo - 1)].norm();
            let local = h[(lo - 1, lo - 1)].norm() + h[(lo, lo)].norm();
            if sub <= eps * local.max(1e-300) {
                h[(lo, lo - 1)] = C64::new(0.0, 0.0);
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            hi -= 1;
            iters_here = 0;
            continue;
        }
        iters_here += 1;
        let mu = if iters_here % 12 == 0 {
            h[(hi, hi)] + C64::new(0.75 * h[(hi, hi - 1)].norm(), 0.0)
        } else {
            wilkinson_shift(
                h[(hi - 1, hi - 1)],
                h[(hi - 1, hi)],
                h[(hi, hi - 1)],
                h[(hi, hi)],
            )
        };

        // implicit single-shift bulge chase on [lo, hi]
        let mut x = h[(lo, lo)] - mu;
        let mut y = h[(lo + 1, lo)];
        for k in lo..hi {
            let (c, s) = givens(x, y);
            let col_start = if k > lo { k - 1 } else { lo };
            for col in col_start..n {
                let a = h[(k, col)];
                let b = h[(k + 1, col)];
                h[(k, col)] = a * c + b * s;
                h[(k + 1, col)] = -a * s.conj() + b * c;
            }
            let row_end = ((k + 2).min(hi)) + 1;
            for row in 0..row_end {
                let a = h[(row, k)];
                let b = h[(row, k + 1)];
                h[(row, k)] = a * c + b * s.conj();
                h[(row, k + 1)] = -a * s + b * c;
            }
            for row in 0..n {
                let a = q[(row, k)];
                let b = q[(row, k + 1)];
                q[(row, k)] = a * c + b * s.conj();
                q[(row, k + 1)] = -a * s + b * c;
            }
            if k + 1 < hi {
                x = h[(k + 1, k)];
                y = h[(k + 2, k)];
            }
        }
    }
    Ok(())
}
