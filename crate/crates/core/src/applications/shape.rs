use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{ExponentialModel, SignalSeries};
use crate::ptransform::{ptransform_estimate, Estimate, PseudosampleConfig, Selection};

/// Closed polygon, vertices counterclockwise with cyclic indexing.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon {
    vertices: Vec<Complex64>,
}

impl Polygon {
    pub fn new(vertices: Vec<Complex64>) -> Result<Self> {
        let p = vertices.len();
        if p < 3 {
            return Err(Error::InvalidParameter(format!("polygon needs at least 3 vertices, got {p}")));
        }
        if let Some(i) = vertices.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::NonFinite(i));
        }
        for j in 0..p {
            let (prev, cur, next) = (vertices[(j + p - 1) % p], vertices[j], vertices[(j + 1) % p]);
            if cur == next {
                return Err(Error::CoincidentVertices(j));
            }
            let turn = ((cur - prev).conj() * (next - cur)).im;
            if turn.abs() <= 1e-14 * (cur - prev).norm() * (next - cur).norm() {
                return Err(Error::InvalidParameter(format!("vertices around index {j} are collinear")));
            }
        }
        Ok(Self { vertices })
    }

    pub fn vertices(&self) -> &[Complex64] {
        &self.vertices
    }

    /// Shoelace area, positive for counterclockwise order.
    pub fn signed_area(&self) -> f64 {
        let p = self.vertices.len();
        (0..p)
            .map(|j| (self.vertices[j].conj() * self.vertices[(j + 1) % p]).im)
            .sum::<f64>()
            / 2.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentSequence {
    pub moments: Vec<Complex64>,
    /// Noise deviation of the interpolation data `k(k-1) mu_k`.
    pub sigma: f64,
}

/// `c_j = (i/2) (conj(d_{j-1}) / d_{j-1} - conj(d_j) / d_j)` with
/// `d_{j-1} = xi_{j-1} - xi_j` and `d_j = xi_j - xi_{j+1}`.
pub fn vertex_weights(poly: &Polygon) -> Vec<Complex64> {
    let v = poly.vertices();
    let p = v.len();
    let half_i = Complex64::new(0.0, 0.5);
    let phase = |d: Complex64| d.conj() / d;
    (0..p)
        .map(|j| {
            let before = v[(j + p - 1) % p] - v[j];
            let after = v[j] - v[(j + 1) % p];
            half_i * (phase(before) - phase(after))
        })
        .collect()
}

/// `mu_k = sum_j c_j xi_j^k / (k (k-1))` for `k >= 2`, `mu_0 = mu_1 = 0`.
/// Equivalently `mu_k` is the area integral of `z^(k-2)` over the polygon.
pub fn moments_from_polygon(poly: &Polygon, count: usize) -> Result<MomentSequence> {
    if count < 3 {
        return Err(Error::InvalidParameter(format!("need at least 3 moments, got {count}")));
    }
    let weights = vertex_weights(poly);
    let model = ExponentialModel::from_terms_unmerged(
        weights.into_iter().zip(poly.vertices()).map(|(c, &z)| crate::model::Term::new(c, z)).collect(),
    );
    let sums = model.evaluate(0..count);
    let moments = sums
        .into_iter()
        .enumerate()
        .map(|(k, s)| if k < 2 { Complex64::new(0.0, 0.0) } else { s / (k * (k - 1)) as f64 })
        .collect();
    Ok(MomentSequence { moments, sigma: 0.0 })
}

/// Interpolation data `s_k = k(k-1) mu_k`.
pub fn shape_series(mom: &MomentSequence) -> Result<SignalSeries> {
    let data = mom.moments.iter().enumerate().map(|(k, m)| m * (k * k.saturating_sub(1)) as f64).collect();
    SignalSeries::new(data, mom.sigma)
}

/// Runs the estimator on shape data. With `p_known` the order is fixed and
/// the `p_known` clusters of largest mass are kept.
pub fn vertices_from_series(
    series: &SignalSeries,
    cfg: &PseudosampleConfig,
    p_known: Option<usize>,
) -> Result<(ExponentialModel, Estimate)> {
    let order = p_known.or(cfg.p_tilde).unwrap_or(series.len() / 2);
    if series.len() < 2 * order {
        return Err(Error::InsufficientData { order, needed: 2 * order, got: series.len() });
    }
    let mut cfg = *cfg;
    if let Some(p) = p_known {
        cfg.p_tilde = Some(p);
        cfg.selection = Selection::Largest(p);
    }
    let est = ptransform_estimate(series, &cfg)?;
    Ok((est.report.estimates.clone(), est))
}

pub fn vertices_from_moments(
    mom: &MomentSequence,
    cfg: &PseudosampleConfig,
    p_known: Option<usize>,
) -> Result<(ExponentialModel, Estimate)> {
    if mom.moments.len() < 4 {
        return Err(Error::InsufficientData { order: 2, needed: 4, got: mom.moments.len() });
    }
    vertices_from_series(&shape_series(mom)?, cfg, p_known)
}

/// Sorts points counterclockwise by angle around their centroid.
pub fn order_by_angle(points: &[Complex64]) -> Vec<Complex64> {
    if points.is_empty() {
        return Vec::new();
    }
    let centroid = points.iter().sum::<Complex64>() / points.len() as f64;
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| (a - centroid).arg().total_cmp(&(b - centroid).arg()));
    sorted
}
