//! Browser bindings: condensed-density heatmap, polygon recovery from
//! noisy moments, and the replication scatter behind an estimate.
//!
//! Complex arrays cross the boundary flattened as `[re0, im0, re1, im1, ..]`;
//! models as `[c_re, c_im, xi_re, xi_im, ..]`.

use ptransform::applications::{moments_from_polygon, vertices_from_moments, MomentSequence, Polygon};
use ptransform::density::{condensed_density_map, Lattice};
use ptransform::ptransform::{complex_gaussian, ptransform_estimate, replication_rng, PseudosampleConfig};
use ptransform::{Complex64, ExponentialModel, SignalSeries, Term};
use wasm_bindgen::prelude::*;

fn err(e: impl std::fmt::Display) -> JsError {
    JsError::new(&e.to_string())
}

fn complexes(flat: &[f64]) -> Result<Vec<Complex64>, String> {
    if !flat.len().is_multiple_of(2) {
        return Err(format!("expected re/im pairs, got {} numbers", flat.len()));
    }
    Ok(flat.chunks(2).map(|p| Complex64::new(p[0], p[1])).collect())
}

fn flatten(values: &[Complex64]) -> Vec<f64> {
    values.iter().flat_map(|z| [z.re, z.im]).collect()
}

fn model(flat: &[f64]) -> Result<ExponentialModel, String> {
    if !flat.len().is_multiple_of(4) {
        return Err(format!("expected c_re c_im xi_re xi_im groups, got {} numbers", flat.len()));
    }
    let terms = flat
        .chunks(4)
        .map(|t| Term::new(Complex64::new(t[0], t[1]), Complex64::new(t[2], t[3])))
        .collect();
    Ok(ExponentialModel::from_terms_unmerged(terms))
}

fn add_noise(clean: Vec<Complex64>, sigma: f64, seed: u64) -> Vec<Complex64> {
    // Offset seed and last stream, so the data noise never shares draws
    // with the pseudosamples.
    let mut rng = replication_rng(seed.wrapping_add(0x5eed), u64::MAX);
    clean.into_iter().map(|s| s + complex_gaussian(&mut rng, sigma)).collect()
}

/// Density values on a `points x points` lattice over `[-half, half]^2`,
/// row-major from the bottom row, for the noiseless signal of `model` with
/// `n` samples at noise level `sigma`.
pub fn density_values(model_flat: &[f64], n: usize, sigma: f64, half: f64, points: usize) -> Result<Vec<f64>, String> {
    let signal = model(model_flat)?.evaluate(0..n);
    let lattice = Lattice::centered(half, points).map_err(|e| e.to_string())?;
    let map = condensed_density_map(&signal, sigma, &lattice).map_err(|e| e.to_string())?;
    Ok(map.values)
}

/// Recovered vertices of a polygon from `count` moments perturbed by noise
/// of level `sigma`, with the number of vertices known.
pub fn polygon_from_noisy_moments(
    vertices_flat: &[f64],
    count: usize,
    sigma: f64,
    replications: usize,
    seed: u64,
) -> Result<Vec<f64>, String> {
    let poly = Polygon::new(complexes(vertices_flat)?).map_err(|e| e.to_string())?;
    let p = poly.vertices().len();
    let clean = moments_from_polygon(&poly, count).map_err(|e| e.to_string())?;
    let mom = MomentSequence { moments: add_noise(clean.moments, sigma, seed), sigma };
    let series_sigma = ptransform::applications::shape_series(&mom).map_err(|e| e.to_string())?.sigma();
    let cfg = PseudosampleConfig { replications, sigma_prime: series_sigma / 2.0, seed, ..Default::default() };
    let (found, _) = vertices_from_moments(&mom, &cfg, Some(p)).map_err(|e| e.to_string())?;
    Ok(flatten(&ptransform::applications::order_by_angle(&found.nodes())))
}

/// Replication nodes and the selected estimate for a noisy series.
#[wasm_bindgen]
pub struct ScatterView {
    members: Vec<f64>,
    estimates: Vec<f64>,
    p_hat: usize,
}

#[wasm_bindgen]
impl ScatterView {
    /// `[re, im, selected, ..]` for every clustered replication node.
    #[wasm_bindgen(getter)]
    pub fn members(&self) -> Vec<f64> {
        self.members.clone()
    }

    /// `[c_re, c_im, xi_re, xi_im, ..]` of the selected terms.
    #[wasm_bindgen(getter)]
    pub fn estimates(&self) -> Vec<f64> {
        self.estimates.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn p_hat(&self) -> usize {
        self.p_hat
    }
}

pub fn scatter(
    model_flat: &[f64],
    n: usize,
    sigma: f64,
    replications: usize,
    p_tilde: usize,
    seed: u64,
) -> Result<ScatterView, String> {
    let clean = model(model_flat)?.evaluate(0..n);
    let series = SignalSeries::new(add_noise(clean, sigma, seed), sigma).map_err(|e| e.to_string())?;
    let cfg = PseudosampleConfig {
        replications,
        sigma_prime: sigma / 2.0,
        seed,
        p_tilde: Some(p_tilde),
        ..Default::default()
    };
    let est = ptransform_estimate(&series, &cfg).map_err(|e| e.to_string())?;
    let members = est
        .report
        .clusters
        .iter()
        .flat_map(|c| c.members.iter().map(move |m| (m.term.node, c.selected)))
        .flat_map(|(z, sel)| [z.re, z.im, if sel { 1.0 } else { 0.0 }])
        .collect();
    let estimates = est.model().terms().iter().flat_map(|t| [t.weight.re, t.weight.im, t.node.re, t.node.im]).collect();
    Ok(ScatterView { members, estimates, p_hat: est.p_hat() })
}

#[wasm_bindgen(js_name = densityHeatmap)]
pub fn density_heatmap(model_flat: &[f64], n: usize, sigma: f64, half: f64, points: usize) -> Result<Vec<f64>, JsError> {
    density_values(model_flat, n, sigma, half, points).map_err(err)
}

#[wasm_bindgen(js_name = recoverPolygon)]
pub fn recover_polygon(vertices_flat: &[f64], count: usize, sigma: f64, replications: usize, seed: u64) -> Result<Vec<f64>, JsError> {
    polygon_from_noisy_moments(vertices_flat, count, sigma, replications, seed).map_err(err)
}

#[wasm_bindgen(js_name = estimateScatter)]
pub fn estimate_scatter(
    model_flat: &[f64],
    n: usize,
    sigma: f64,
    replications: usize,
    p_tilde: usize,
    seed: u64,
) -> Result<ScatterView, JsError> {
    scatter(model_flat, n, sigma, replications, p_tilde, seed).map_err(err)
}
