//! Domain types shared by every stage: observed series, exponential models
//! and residual diagnostics.

use std::ops::Range;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Relative tolerance under which two nodes are considered coincident.
pub const NODE_TOLERANCE: f64 = 1e-8;

/// Noisy samples `a_0..a_{n-1}` with the known noise deviation `sigma`
/// (`E|noise|^2 = sigma^2`) and the sampling interval `dt` in seconds.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalSeries {
    samples: Vec<Complex64>,
    sigma: f64,
    dt: f64,
}

impl SignalSeries {
    pub fn new(samples: Vec<Complex64>, sigma: f64) -> Result<Self> {
        Self::with_dt(samples, sigma, 1.0)
    }

    pub fn with_dt(samples: Vec<Complex64>, sigma: f64, dt: f64) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::TooShort(samples.len()));
        }
        if let Some(i) = samples.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        if !(sigma.is_finite() && sigma >= 0.0) {
            return Err(Error::InvalidParameter(format!("sigma must be finite and >= 0, got {sigma}")));
        }
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidParameter(format!("dt must be finite and > 0, got {dt}")));
        }
        Ok(Self { samples, sigma, dt })
    }

    /// Convenience constructor from real-valued data.
    pub fn from_real(values: &[f64], sigma: f64) -> Result<Self> {
        Self::new(values.iter().map(|&v| Complex64::new(v, 0.0)).collect(), sigma)
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Same samples with a different noise level.
    pub fn with_sigma(&self, sigma: f64) -> Result<Self> {
        Self::with_dt(self.samples.clone(), sigma, self.dt)
    }

    /// Drops the last sample when the length is odd, so a square pencil can be built.
    pub fn truncated_even(&self) -> Self {
        let mut out = self.clone();
        if out.samples.len() % 2 == 1 {
            out.samples.pop();
        }
        out
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples
    }
}

/// One term `c * xi^k` of an exponential model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Term {
    pub weight: Complex64,
    pub node: Complex64,
}

impl Term {
    pub fn new(weight: Complex64, node: Complex64) -> Self {
        Self { weight, node }
    }
}

/// A finite sum `s_k = sum_j c_j xi_j^k`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExponentialModel {
    terms: Vec<Term>,
}

fn nodes_coincide(a: Complex64, b: Complex64) -> bool {
    (a - b).norm() <= NODE_TOLERANCE * a.norm().max(b.norm()).max(1.0)
}

impl ExponentialModel {
    /// Builds a model, merging nodes that coincide within [`NODE_TOLERANCE`]
    /// by summing their weights.
    pub fn new(terms: Vec<Term>) -> Self {
        let mut merged: Vec<Term> = Vec::with_capacity(terms.len());
        for t in terms {
            match merged.iter_mut().find(|m| nodes_coincide(m.node, t.node)) {
                Some(m) => m.weight += t.weight,
                None => merged.push(t),
            }
        }
        Self { terms: merged }
    }

    /// Builds a model keeping every term as given (per-replication solutions
    /// must keep exactly one term per solved node).
    pub fn from_terms_unmerged(terms: Vec<Term>) -> Self {
        Self { terms }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn order(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn nodes(&self) -> Vec<Complex64> {
        self.terms.iter().map(|t| t.node).collect()
    }

    pub fn weights(&self) -> Vec<Complex64> {
        self.terms.iter().map(|t| t.weight).collect()
    }

    /// Concatenates the terms of two models without merging.
    pub fn union(&self, other: &Self) -> Self {
        let mut terms = self.terms.clone();
        terms.extend_from_slice(&other.terms);
        Self { terms }
    }

    pub fn evaluate(&self, range: Range<usize>) -> Vec<Complex64> {
        evaluate_model(self, range)
    }
}

/// Evaluates `a_k = sum_j c_j xi_j^k` for every `k` in `range`.
///
/// An empty model evaluates to zeros.
pub fn evaluate_model(model: &ExponentialModel, range: Range<usize>) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); range.len()];
    for term in model.terms() {
        let mut power = term.node.powu(range.start as u32);
        for value in out.iter_mut() {
            *value += term.weight * power;
            power *= term.node;
        }
    }
    out
}

/// Residuals of a model against observed data.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualReport {
    pub residuals: Vec<Complex64>,
    /// Number of residuals with modulus strictly larger than sigma.
    pub exceed_count: usize,
    pub mse: f64,
}

pub fn residual_report(series: &SignalSeries, model: &ExponentialModel) -> ResidualReport {
    let fitted = evaluate_model(model, 0..series.len());
    let residuals: Vec<Complex64> = series
        .samples()
        .iter()
        .zip(&fitted)
        .map(|(a, f)| a - f)
        .collect();
    let exceed_count = residuals.iter().filter(|r| r.norm() > series.sigma()).count();
    let mse = residuals.iter().map(|r| r.norm_sqr()).sum::<f64>() / residuals.len() as f64;
    ResidualReport {
        residuals,
        exceed_count,
        mse,
    }
}
