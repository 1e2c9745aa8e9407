//! Fast per-pseudosample solver: linear prediction, warm-started Laguerre
//! rooting, and Vandermonde least squares for the weights.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector, ZERO};
use crate::model::{ExponentialModel, SignalSeries, Term};
use crate::pencil::EigenSolution;

pub const LAGUERRE_MAX_ITER: usize = 80;
const LAGUERRE_STEP_TOL: f64 = 1e-12;
const LAGUERRE_RESIDUAL_TOL: f64 = 1e-13;
const DUPLICATE_ROOT_DISTANCE: f64 = 1e-9;
const PREDICTION_RANK_TOL: f64 = 1e-13;
pub const LSQR_TOLERANCE: f64 = 1e-10;
pub const LSQR_MAX_ITER: usize = 200;

/// Monic polynomial `z^d + a_{d-1} z^{d-1} + ... + a_0`, coefficients stored
/// lowest degree first (the last one is exactly 1).
#[derive(Debug, Clone, PartialEq)]
pub struct MonicPolynomial {
    coeffs: Vec<Complex64>,
}

impl MonicPolynomial {
    /// From the lower coefficients `a_0..a_{d-1}`.
    pub fn from_lower(lower: &[Complex64]) -> Self {
        let mut coeffs = lower.to_vec();
        coeffs.push(Complex64::from(1.0));
        Self { coeffs }
    }

    pub fn from_roots(roots: &[Complex64]) -> Self {
        let mut coeffs = vec![Complex64::from(1.0)];
        for r in roots {
            let mut next = vec![ZERO; coeffs.len() + 1];
            for (i, c) in coeffs.iter().enumerate() {
                next[i + 1] += c;
                next[i] -= c * r;
            }
            coeffs = next;
        }
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(ZERO, |acc, c| acc * z + c)
    }

    /// Horner evaluation of `p`, `p'` and `p''`.
    fn eval_with_derivatives(&self, z: Complex64) -> (Complex64, Complex64, Complex64) {
        let mut p = ZERO;
        let mut dp = ZERO;
        let mut ddp = ZERO;
        for c in self.coeffs.iter().rev() {
            ddp = ddp * z + dp;
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp, 2.0 * ddp)
    }

    /// Synthetic division by `(z - root)`, dropping the remainder.
    pub fn deflate(&self, root: Complex64) -> Self {
        let d = self.degree();
        let mut q = vec![ZERO; d];
        let mut carry = ZERO;
        for i in (0..d).rev() {
            carry = self.coeffs[i + 1] + carry * root;
            q[i] = carry;
        }
        Self { coeffs: q }
    }

    fn coeff_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// Index gap between two observed segments of equal length.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GapSpec {
    pub segment_length: usize,
    pub gap: usize,
}

impl GapSpec {
    pub fn contiguous() -> Self {
        Self {
            segment_length: 0,
            gap: 0,
        }
    }

    pub fn new(segment_length: usize, gap: usize) -> Self {
        Self { segment_length, gap }
    }

    /// Powers attached to the rows of the weight system for `rows` data values.
    pub fn row_powers(&self, rows: usize) -> Vec<usize> {
        if self.gap == 0 {
            return (0..rows).collect();
        }
        let n = self.segment_length;
        (0..n).chain((n + self.gap)..(2 * n + self.gap)).collect()
    }
}

/// Least-squares forward linear prediction of order `p_tilde`.
///
/// Minimises `|H g + h|` with `H[i][j] = a_{i+j}` and `h_i = a_{i+p}` and
/// returns `z^p + g_{p-1} z^{p-1} + ... + g_0`.
pub fn linear_prediction(series: &SignalSeries, p_tilde: usize) -> Result<MonicPolynomial> {
    linear_prediction_segments(&[series.samples()], p_tilde)
}

/// Linear prediction with the rows of every segment stacked into one
/// least-squares system, so all segments share one set of roots.
pub fn linear_prediction_segments(segments: &[&[Complex64]], p_tilde: usize) -> Result<MonicPolynomial> {
    if p_tilde == 0 {
        return Err(Error::InvalidParameter("prediction order must be >= 1".into()));
    }
    if let Some(short) = segments.iter().find(|a| a.len() < 2 * p_tilde) {
        return Err(Error::InsufficientData {
            order: p_tilde,
            needed: 2 * p_tilde,
            got: short.len(),
        });
    }
    let windows: Vec<&[Complex64]> = segments.iter().flat_map(|a| a.windows(p_tilde + 1)).collect();
    let h = CMatrix::from_fn(windows.len(), p_tilde, |i, j| windows[i][j]);
    let rhs = CVector::from_fn(windows.len(), |i, _| -windows[i][p_tilde]);
    let g = linalg::lstsq_qr(&h, &rhs, PREDICTION_RANK_TOL).ok_or(Error::DegeneratePrediction)?;
    Ok(MonicPolynomial::from_lower(g.as_slice()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct LaguerreOutcome {
    pub roots: Vec<Complex64>,
    pub iterations: Vec<usize>,
}

fn laguerre_single(poly: &MonicPolynomial, start: Complex64) -> Option<(Complex64, usize)> {
    let d = poly.degree() as f64;
    let residual_floor = LAGUERRE_RESIDUAL_TOL * poly.coeff_norm();
    let mut z = start;
    for it in 1..=LAGUERRE_MAX_ITER {
        let (p, dp, ddp) = poly.eval_with_derivatives(z);
        if p.norm() == 0.0 {
            return Some((z, it - 1));
        }
        let g = dp / p;
        let h = g * g - ddp / p;
        let root = ((d - 1.0) * (d * h - g * g)).sqrt();
        let plus = g + root;
        let minus = g - root;
        let denom = if plus.norm() >= minus.norm() { plus } else { minus };
        let step = if denom.norm() > 0.0 {
            d / denom
        } else {
            // Stationary point: nudge off it.
            Complex64::from_polar(1e-3 * (1.0 + z.norm()), it as f64)
        };
        if !(step.re.is_finite() && step.im.is_finite()) {
            return None;
        }
        z -= step;
        if step.norm() <= LAGUERRE_STEP_TOL * (1.0 + z.norm()) {
            return Some((z, it));
        }
        if poly.eval(z).norm() <= residual_floor {
            return Some((z, it));
        }
    }
    None
}

/// Refines each warm start independently with Laguerre's method.
///
/// If two distinct starts collapse onto the same root, the later one is
/// re-run on the polynomial deflated by the earlier root, repeatedly if
/// the re-run collides again.
pub fn laguerre_roots(poly: &MonicPolynomial, warm_starts: &[Complex64]) -> Result<LaguerreOutcome> {
    if warm_starts.len() != poly.degree() {
        return Err(Error::InvalidParameter(format!(
            "need {} warm starts, got {}",
            poly.degree(),
            warm_starts.len()
        )));
    }
    let mut roots: Vec<Complex64> = Vec::with_capacity(warm_starts.len());
    let mut iterations = Vec::with_capacity(warm_starts.len());
    for (index, &start) in warm_starts.iter().enumerate() {
        let (mut root, mut its) = laguerre_single(poly, start).ok_or(Error::LaguerreDiverged { index })?;
        // A re-run on the deflated polynomial can land on yet another root
        // already found, so deflation accumulates until the root is new.
        let mut deflated = poly.clone();
        for _ in 0..index {
            let collision = roots
                .iter()
                .zip(warm_starts)
                .find(|(r, s)| (**r - root).norm() <= DUPLICATE_ROOT_DISTANCE && **s != start)
                .map(|(r, _)| *r);
            let Some(earlier) = collision else { break };
            deflated = deflated.deflate(earlier);
            if deflated.degree() == 0 {
                break;
            }
            let (r2, it2) = laguerre_single(&deflated, start).ok_or(Error::LaguerreDiverged { index })?;
            root = r2;
            its += it2;
        }
        roots.push(root);
        iterations.push(its);
    }
    Ok(LaguerreOutcome { roots, iterations })
}

/// Least-squares weights for fixed nodes: `min |V c - data|` with rows
/// `nodes^k` for the powers implied by `gap`, solved by LSQR.
pub fn vandermonde_weights(nodes: &[Complex64], data: &[Complex64], gap: GapSpec) -> Result<Vec<Complex64>> {
    if gap.gap > 0 && data.len() != 2 * gap.segment_length {
        return Err(Error::InvalidParameter(format!(
            "gapped weight fit expects {} values, got {}",
            2 * gap.segment_length,
            data.len()
        )));
    }
    if nodes.len() > data.len() {
        return Err(Error::Underdetermined {
            nodes: nodes.len(),
            rows: data.len(),
        });
    }
    let v = linalg::vandermonde(nodes, &gap.row_powers(data.len()));
    Ok(linalg::lsqr(&v, data, LSQR_TOLERANCE, LSQR_MAX_ITER).x)
}

/// Linear prediction, Laguerre from the warm-start nodes, then weights.
pub fn fast_ceip(series: &SignalSeries, warm_starts: &EigenSolution, p_tilde: usize) -> Result<ExponentialModel> {
    let starts: Vec<Complex64> = warm_starts.nodes().into_iter().take(p_tilde).collect();
    if starts.len() != p_tilde {
        return Err(Error::InvalidParameter(format!(
            "warm start holds {} nodes, need {p_tilde}",
            starts.len()
        )));
    }
    let poly = linear_prediction(series, p_tilde)?;
    let roots = laguerre_roots(&poly, &starts)?.roots;
    let weights = vandermonde_weights(&roots, series.samples(), GapSpec::contiguous())?;
    Ok(ExponentialModel::from_terms_unmerged(
        roots.into_iter().zip(weights).map(|(n, w)| Term::new(w, n)).collect(),
    ))
}
