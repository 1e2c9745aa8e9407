//! Complex exponential approximation with Monte Carlo pencil replication.
//!
//! Given noisy samples `a_k = sum_j c_j xi_j^k + noise`, the crate estimates
//! the order `p` and the pairs `(c_j, xi_j)` by solving many perturbed
//! interpolation problems, clustering their solutions, and measuring the
//! integrated discrete Laplacian of the averaged logarithmic potential
//! around each cluster.
//!
//! Modules follow the pipeline:
//! - [`model`]: series, exponential models and residuals.
//! - [`pencil`]: Hankel pencil and its accurate generalized eigen-solve.
//! - [`prony`]: fast per-replication solver (linear prediction, Laguerre, Vandermonde).
//! - [`ptransform`]: pseudosamples, replications, clustering, local masses, selection.
//! - [`density`]: approximate condensed density and identifiability checks.
//! - [`applications`]: gap filling, shape from moments, spectral lines.

pub mod applications;
pub mod density;
pub mod error;
pub mod linalg;
pub mod model;
pub mod pencil;
pub mod prony;
pub mod ptransform;

pub use error::{Error, Result};
pub use model::{evaluate_model, residual_report, ExponentialModel, ResidualReport, SignalSeries, Term};
pub use num_complex::Complex64;
