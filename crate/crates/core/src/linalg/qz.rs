//! Complex QZ iteration for the pencil `A - lambda B`.
//!
//! Reduces `(A, B)` to upper triangular `(S, T)` with `Q^H A Z = S` and
//! `Q^H B Z = T` through a QR factorisation of `B`, a Hessenberg-triangular
//! reduction and single-shift implicit QZ sweeps. Only `Z` is accumulated;
//! the callers need right eigenvectors only.

use super::{CMatrix, Givens, ONE, ZERO};
use num_complex::Complex64;

const MAX_SWEEPS_PER_EIGENVALUE: usize = 40;

#[derive(Debug, Clone)]
pub struct GeneralizedSchur {
    pub s: CMatrix,
    pub t: CMatrix,
    pub z: CMatrix,
}

impl GeneralizedSchur {
    /// Diagonal pairs `(alpha_j, beta_j)`; the eigenvalue is `alpha / beta`.
    pub fn diagonal(&self) -> Vec<(Complex64, Complex64)> {
        (0..self.s.nrows()).map(|j| (self.s[(j, j)], self.t[(j, j)])).collect()
    }
}

/// Two-sided power-of-two scaling `D_l (A, B) D_r` that equilibrates the
/// row and column infinity norms of both matrices jointly. Returns the
/// scaled pair and the right scaling `D_r` (eigenvectors of the original
/// pencil are `D_r y`).
pub fn balance(a: &CMatrix, b: &CMatrix) -> (CMatrix, CMatrix, Vec<f64>) {
    let n = a.nrows();
    let mut a = a.clone();
    let mut b = b.clone();
    let mut right = vec![1.0; n];
    let pow2 = |x: f64| 2f64.powi(-(x.log2().round() as i32));
    for _ in 0..6 {
        let mut changed = false;
        for i in 0..n {
            let r = (0..n).map(|j| a[(i, j)].norm().max(b[(i, j)].norm())).fold(0.0, f64::max);
            if r > 0.0 {
                let f = pow2(r);
                if f != 1.0 {
                    changed = true;
                    a.row_mut(i).scale_mut(f);
                    b.row_mut(i).scale_mut(f);
                }
            }
        }
        for j in 0..n {
            let r = (0..n).map(|i| a[(i, j)].norm().max(b[(i, j)].norm())).fold(0.0, f64::max);
            if r > 0.0 {
                let f = pow2(r);
                if f != 1.0 {
                    changed = true;
                    a.column_mut(j).scale_mut(f);
                    b.column_mut(j).scale_mut(f);
                    right[j] *= f;
                }
            }
        }
        if !changed {
            break;
        }
    }
    (a, b, right)
}

/// Generalized Schur decomposition. Returns `None` if the iteration fails
/// to converge.
pub fn qz(a: &CMatrix, b: &CMatrix) -> Option<GeneralizedSchur> {
    let n = a.nrows();
    assert_eq!(a.shape(), (n, n));
    assert_eq!(b.shape(), (n, n));
    let mut z = CMatrix::identity(n, n);
    if n == 0 {
        return Some(GeneralizedSchur {
            s: a.clone(),
            t: b.clone(),
            z,
        });
    }

    // B = QR, A <- Q^H A.
    let qr = b.clone().qr();
    let mut s = qr.q().adjoint() * a;
    let mut t = qr.r();
    for i in 0..n {
        for j in 0..i {
            t[(i, j)] = ZERO;
        }
    }

    // Hessenberg-triangular reduction.
    for j in 0..n.saturating_sub(2) {
        for i in ((j + 2)..n).rev() {
            let g = Givens::new(s[(i - 1, j)], s[(i, j)]);
            g.apply_left(&mut s, i - 1, i, j..n);
            g.apply_left(&mut t, i - 1, i, (i - 1)..n);
            s[(i, j)] = ZERO;
            let g = Givens::new(t[(i, i)], t[(i, i - 1)]);
            g.apply_right(&mut t, i - 1, i, 0..n);
            g.apply_right(&mut s, i - 1, i, 0..n);
            g.apply_right(&mut z, i - 1, i, 0..n);
            t[(i, i - 1)] = ZERO;
        }
    }

    let eps = f64::EPSILON;
    let s_norm = s.norm().max(f64::MIN_POSITIVE);
    let t_norm = t.norm().max(f64::MIN_POSITIVE);
    let mut hi = n - 1;
    let mut sweeps_since_deflation = 0usize;
    let mut total_sweeps = 0usize;

    while hi > 0 {
        let mut lo = hi;
        while lo > 0 {
            let sub = s[(lo, lo - 1)].norm();
            let local = s[(lo - 1, lo - 1)].norm() + s[(lo, lo)].norm();
            if sub <= eps * local || sub <= eps * s_norm {
                s[(lo, lo - 1)] = ZERO;
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            hi -= 1;
            sweeps_since_deflation = 0;
            continue;
        }

        total_sweeps += 1;
        sweeps_since_deflation += 1;
        if total_sweeps > MAX_SWEEPS_PER_EIGENVALUE * n {
            return None;
        }

        let shift = if sweeps_since_deflation.is_multiple_of(10) {
            exceptional_shift(&s, &t, hi, t_norm)
        } else {
            wilkinson_shift(&s, &t, hi)
                .filter(|mu| mu.re.is_finite() && mu.im.is_finite())
                .unwrap_or_else(|| exceptional_shift(&s, &t, hi, t_norm))
        };

        // Implicit single-shift sweep over the active block lo..=hi.
        for k in lo..hi {
            let g = if k == lo {
                Givens::new(s[(lo, lo)] - shift * t[(lo, lo)], s[(lo + 1, lo)])
            } else {
                Givens::new(s[(k, k - 1)], s[(k + 1, k - 1)])
            };
            g.apply_left(&mut s, k, k + 1, 0..n);
            g.apply_left(&mut t, k, k + 1, 0..n);
            if k > lo {
                s[(k + 1, k - 1)] = ZERO;
            }
            let g = Givens::new(t[(k + 1, k + 1)], t[(k + 1, k)]);
            g.apply_right(&mut t, k, k + 1, 0..n);
            g.apply_right(&mut s, k, k + 1, 0..n);
            g.apply_right(&mut z, k, k + 1, 0..n);
            t[(k + 1, k)] = ZERO;
        }
    }

    Some(GeneralizedSchur { s, t, z })
}

/// Eigenvalue of the trailing 2x2 pencil closest to `s_hh / t_hh`.
fn wilkinson_shift(s: &CMatrix, t: &CMatrix, hi: usize) -> Option<Complex64> {
    let (a11, a12, a21, a22) = (s[(hi - 1, hi - 1)], s[(hi - 1, hi)], s[(hi, hi - 1)], s[(hi, hi)]);
    let (b11, b12, b22) = (t[(hi - 1, hi - 1)], t[(hi - 1, hi)], t[(hi, hi)]);
    let qa = b11 * b22;
    let qb = -(a11 * b22 + a22 * b11 - a21 * b12);
    let qc = a11 * a22 - a21 * a12;
    if qa.norm() == 0.0 {
        return None;
    }
    let disc = (qb * qb - 4.0 * qa * qc).sqrt();
    let r1 = (-qb + disc) / (2.0 * qa);
    let r2 = (-qb - disc) / (2.0 * qa);
    let target = a22 / b22;
    if (r1 - target).norm() <= (r2 - target).norm() {
        Some(r1)
    } else {
        Some(r2)
    }
}

fn exceptional_shift(s: &CMatrix, t: &CMatrix, hi: usize, t_norm: f64) -> Complex64 {
    let b = t[(hi, hi)];
    let base = if b.norm() > f64::EPSILON * t_norm { s[(hi, hi)] / b } else { ZERO };
    base + s[(hi, hi - 1)].norm() / t_norm.max(f64::MIN_POSITIVE) * ONE
}

/// Right eigenvectors of the triangular pencil `(S, T)` mapped back through
/// `Z`; column `j` belongs to the `j`-th diagonal pair. Columns are
/// normalised to unit Euclidean norm.
pub fn right_eigenvectors(schur: &GeneralizedSchur) -> CMatrix {
    let n = schur.s.nrows();
    let (s, t) = (&schur.s, &schur.t);
    let small = f64::EPSILON * (s.norm() + t.norm()).max(f64::MIN_POSITIVE);
    let mut y = CMatrix::zeros(n, n);
    for j in 0..n {
        let alpha = s[(j, j)];
        let beta = t[(j, j)];
        y[(j, j)] = ONE;
        for i in (0..j).rev() {
            let mut sum = ZERO;
            for k in (i + 1)..=j {
                sum += (beta * s[(i, k)] - alpha * t[(i, k)]) * y[(k, j)];
            }
            let mut denom = beta * s[(i, i)] - alpha * t[(i, i)];
            if denom.norm() < small {
                denom = Complex64::new(small, 0.0);
            }
            y[(i, j)] = -sum / denom;
        }
    }
    let mut x = &schur.z * y;
    for j in 0..n {
        let norm = x.column(j).norm();
        if norm > 0.0 {
            x.column_mut(j).unscale_mut(norm);
        }
    }
    x
}
