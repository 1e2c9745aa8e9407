//! LSQR for complex least-squares problems (Paige and Saunders), with a
//! diagonal column preconditioner.

use super::{CMatrix, CVector};
use num_complex::Complex64;

#[derive(Debug, Clone)]
pub struct LsqrOutcome {
    pub x: Vec<Complex64>,
    pub iterations: usize,
    /// Final estimate of `|b - A x| / |b|`.
    pub relative_residual: f64,
    pub converged: bool,
}

/// Solves `min |A x - b|` iteratively. Stops once the residual falls below
/// `tol * |b|`, or the normal-equation residual `|A^H r| / (|A| |r|)` falls
/// below `tol`, or after `max_iter` iterations.
pub fn lsqr(a: &CMatrix, b: &[Complex64], tol: f64, max_iter: usize) -> LsqrOutcome {
    let (rows, cols) = a.shape();
    assert_eq!(b.len(), rows);
    let colscale: Vec<f64> = (0..cols)
        .map(|j| {
            let n = a.column(j).norm();
            if n > 0.0 {
                1.0 / n
            } else {
                1.0
            }
        })
        .collect();
    let mut m = a.clone();
    for (j, s) in colscale.iter().enumerate() {
        m.column_mut(j).scale_mut(*s);
    }

    let zero_outcome = |converged| LsqrOutcome {
        x: vec![Complex64::new(0.0, 0.0); cols],
        iterations: 0,
        relative_residual: 0.0,
        converged,
    };

    let b = CVector::from_column_slice(b);
    let bnorm = b.norm();
    if bnorm == 0.0 {
        return zero_outcome(true);
    }
    let mut u = b.unscale(bnorm);
    let mut beta;
    let mut v = m.ad_mul(&u);
    let mut alpha = v.norm();
    if alpha == 0.0 {
        let mut out = zero_outcome(true);
        out.relative_residual = 1.0;
        return out;
    }
    v.unscale_mut(alpha);

    let mut w = v.clone();
    let mut y = CVector::zeros(cols);
    let mut phibar = bnorm;
    let mut rhobar = alpha;
    let mut anorm_sq = 0.0;
    let mut iterations = 0;
    let mut converged = false;

    while iterations < max_iter {
        iterations += 1;
        u = &m * &v - u * Complex64::from(alpha);
        beta = u.norm();
        if beta > 0.0 {
            u.unscale_mut(beta);
        }
        anorm_sq += alpha * alpha + beta * beta;
        v = m.ad_mul(&u) - v * Complex64::from(beta);
        alpha = v.norm();
        if alpha > 0.0 {
            v.unscale_mut(alpha);
        }

        let rho = rhobar.hypot(beta);
        let c = rhobar / rho;
        let s = beta / rho;
        let theta = s * alpha;
        rhobar = -c * alpha;
        let phi = c * phibar;
        phibar *= s;

        y += &w * Complex64::from(phi / rho);
        w = &v - &w * Complex64::from(theta / rho);

        let rnorm = phibar.abs();
        let arnorm = (phibar * alpha * c).abs();
        let anorm = anorm_sq.sqrt();
        if rnorm <= tol * bnorm || (rnorm > 0.0 && arnorm <= tol * anorm * rnorm) || alpha == 0.0 || beta == 0.0 {
            converged = true;
            break;
        }
    }

    let x = y.iter().zip(&colscale).map(|(v, s)| v * *s).collect();
    LsqrOutcome {
        x,
        iterations,
        relative_residual: phibar.abs() / bnorm,
        converged,
    }
}
