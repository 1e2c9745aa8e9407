//! Dense complex linear algebra used by the solvers.

mod lsqr;
mod qz;

pub use lsqr::{lsqr, LsqrOutcome};
pub use qz::{balance, qz, right_eigenvectors, GeneralizedSchur};

use nalgebra::{DMatrix, DVector, Dyn, SVD};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Rotation `[c s; -conj(s) c]` mapping `(f, g)` to `(r, 0)`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Givens {
    c: f64,
    s: Complex64,
}

impl Givens {
    pub(crate) fn new(f: Complex64, g: Complex64) -> Self {
        let fa = f.norm();
        let ga = g.norm();
        if ga == 0.0 {
            return Self { c: 1.0, s: ZERO };
        }
        if fa == 0.0 {
            return Self {
                c: 0.0,
                s: g.conj() / ga,
            };
        }
        let r = fa.hypot(ga);
        Self {
            c: fa / r,
            s: (f / fa) * g.conj() / r,
        }
    }

    /// Rotates rows `p` and `q` of `m` over the columns in `cols`.
    pub(crate) fn apply_left(&self, m: &mut CMatrix, p: usize, q: usize, cols: std::ops::Range<usize>) {
        for k in cols {
            let x = m[(p, k)];
            let y = m[(q, k)];
            m[(p, k)] = x * self.c + self.s * y;
            m[(q, k)] = -self.s.conj() * x + y * self.c;
        }
    }

    /// Rotates columns `p` and `q` of `m` over the rows in `rows`; used to
    /// annihilate the `p` entry of a row against its `q` entry when the
    /// rotation was built from `(m[row, q], m[row, p])`.
    pub(crate) fn apply_right(&self, m: &mut CMatrix, p: usize, q: usize, rows: std::ops::Range<usize>) {
        for k in rows {
            let x = m[(k, p)];
            let y = m[(k, q)];
            m[(k, p)] = x * self.c - self.s.conj() * y;
            m[(k, q)] = self.s * x + y * self.c;
        }
    }
}

/// Builds the `rows x powers.len()` Vandermonde-type matrix `V[i][j] = nodes[j]^powers[i]`.
pub fn vandermonde(nodes: &[Complex64], powers: &[usize]) -> CMatrix {
    CMatrix::from_fn(powers.len(), nodes.len(), |i, j| nodes[j].powu(powers[i] as u32))
}

/// Cap on implicit QR sweeps; nalgebra loops forever when given none.
const SVD_MAX_ITER: usize = 10_000;

fn svd(a: CMatrix) -> Option<SVD<Complex64, Dyn, Dyn>> {
    if a.is_empty() || a.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
        return None;
    }
    SVD::try_new(a, true, true, 5.0 * f64::EPSILON, SVD_MAX_ITER)
}

/// Minimum-norm least squares via column equilibration and a truncated SVD.
/// Columns holding non-finite entries get a zero coefficient; if the SVD
/// does not converge every coefficient is zero.
pub fn lstsq_svd(a: &CMatrix, b: &[Complex64]) -> Vec<Complex64> {
    let (rows, cols) = a.shape();
    let finite: Vec<usize> =
        (0..cols).filter(|&j| a.column(j).iter().all(|v| v.re.is_finite() && v.im.is_finite())).collect();
    let mut out = vec![ZERO; cols];
    if finite.is_empty() {
        return out;
    }
    let mut scaled = a.select_columns(finite.iter());
    let scale: Vec<f64> = (0..finite.len())
        .map(|j| {
            let n = scaled.column(j).norm();
            if n > 0.0 {
                1.0 / n
            } else {
                1.0
            }
        })
        .collect();
    for (j, s) in scale.iter().enumerate() {
        scaled.column_mut(j).scale_mut(*s);
    }
    let rhs = CVector::from_column_slice(&b[..rows]);
    let Some(svd) = svd(scaled) else { return out };
    let smax = svd.singular_values.max();
    let eps = (smax * 1e-14).max(f64::MIN_POSITIVE);
    if let Ok(y) = svd.solve(&rhs, eps) {
        for ((&j, v), s) in finite.iter().zip(y.iter()).zip(&scale) {
            out[j] = v * *s;
        }
    }
    out
}

/// Dense QR least squares `min |A x - b|`. Returns `None` when `A` is
/// numerically rank deficient relative to `rank_tol`.
pub fn lstsq_qr(a: &CMatrix, b: &CVector, rank_tol: f64) -> Option<CVector> {
    let cols = a.ncols();
    if cols == 0 {
        return Some(CVector::zeros(0));
    }
    let qr = a.clone().qr();
    let r = qr.r();
    let diag_max = (0..cols).map(|i| r[(i, i)].norm()).fold(0.0, f64::max);
    if diag_max == 0.0 || (0..cols).any(|i| r[(i, i)].norm() <= rank_tol * diag_max) {
        return None;
    }
    let rhs = qr.q().adjoint() * b;
    r.solve_upper_triangular(&rhs)
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let mut ev: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Singular value decomposition sorted by decreasing singular value:
/// returns `(U, sigma, V)` with `A = U diag(sigma) V^H`, or `None` for
/// non-finite input or when the iteration does not converge.
pub fn sorted_svd(a: &CMatrix) -> Option<(CMatrix, Vec<f64>, CMatrix)> {
    let svd = svd(a.clone())?;
    let u = svd.u?;
    let v = svd.v_t?.adjoint();
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let sigma = order.iter().map(|&i| svd.singular_values[i]).collect();
    let u_sorted = CMatrix::from_fn(u.nrows(), order.len(), |r, c| u[(r, order[c])]);
    let v_sorted = CMatrix::from_fn(v.nrows(), order.len(), |r, c| v[(r, order[c])]);
    Some((u_sorted, sigma, v_sorted))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn givens_annihilates_second_component() {
        for (f, g) in [(c(1.0, 2.0), c(-0.5, 0.3)), (ZERO, c(0.0, 1.0)), (c(3.0, 0.0), ZERO)] {
            let mut m = CMatrix::from_row_slice(2, 1, &[f, g]);
            Givens::new(f, g).apply_left(&mut m, 0, 1, 0..1);
            assert!(m[(1, 0)].norm() < 1e-15);
            assert!((m[(0, 0)].norm() - f.norm().hypot(g.norm())).abs() < 1e-14);
        }
    }

    #[test]
    fn right_givens_annihilates_left_entry() {
        let x = c(0.4, -1.0);
        let y = c(2.0, 0.5);
        let mut m = CMatrix::from_row_slice(1, 2, &[x, y]);
        Givens::new(y, x).apply_right(&mut m, 0, 1, 0..1);
        assert!(m[(0, 0)].norm() < 1e-15);
        assert!((m[(0, 1)].norm() - x.norm().hypot(y.norm())).abs() < 1e-14);
    }

    #[test]
    fn qr_least_squares_detects_rank_deficiency() {
        let a = CMatrix::from_row_slice(3, 2, &[ONE, ONE, ONE, ONE, ONE, ONE]);
        let b = CVector::from_element(3, ONE);
        assert!(lstsq_qr(&a, &b, 1e-13).is_none());
    }

    #[test]
    fn svd_least_squares_fits_exact_system() {
        let nodes = [c(0.5, 0.1), c(-0.3, 0.8)];
        let v = vandermonde(&nodes, &[0, 1, 2, 3, 4]);
        let x = CVector::from_column_slice(&[c(1.0, -1.0), c(0.2, 2.0)]);
        let b = &v * &x;
        let got = lstsq_svd(&v, b.as_slice());
        for (g, w) in got.iter().zip(x.iter()) {
            assert!((g - w).norm() < 1e-12);
        }
    }

    #[test]
    fn svd_least_squares_skips_non_finite_columns() {
        let nodes = [c(0.5, 0.1), c(1e200, 0.0)];
        let v = vandermonde(&nodes, &[0, 1, 2, 3]);
        let b: Vec<Complex64> = (0..4).map(|k| c(2.0, 0.0) * nodes[0].powi(k)).collect();
        let got = lstsq_svd(&v, &b);
        assert!((got[0] - c(2.0, 0.0)).norm() < 1e-12, "{got:?}");
        assert_eq!(got[1], ZERO);
        assert!(sorted_svd(&v).is_none());
    }

    #[test]
    fn hermitian_eigenvalues_of_tridiagonal() {
        let m = CMatrix::from_row_slice(
            3,
            3,
            &[c(2.0, 0.0), c(0.0, -1.0), ZERO, c(0.0, 1.0), c(2.0, 0.0), c(0.0, -1.0), ZERO, c(0.0, 1.0), c(2.0, 0.0)],
        );
        let ev = hermitian_eigenvalues(&m);
        let s2 = 2f64.sqrt();
        for (g, w) in ev.iter().zip([2.0 - s2, 2.0, 2.0 + s2]) {
            assert!((g - w).abs() < 1e-12);
        }
    }
}
