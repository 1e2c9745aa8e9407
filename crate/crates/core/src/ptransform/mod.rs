//! The replication estimator.
//!
//! 1. Solve the observed series accurately and keep the `p_tilde` heaviest
//!    eigenpairs ([`solve_replications`]).
//! 2. Perturb the series `R` times with extra noise `sigma'` and solve each
//!    pseudosample, warm-started at step 1 ([`generate_pseudosamples`]).
//! 3. Cluster all `(xi, |c|)` solutions with k-means ([`cluster_solutions`]).
//! 4. Around each cluster integrate the discrete Laplacian of the averaged
//!    log potential `(1/2piR) sum c log|z - xi|` on a small mesh
//!    ([`laplacian_mass`]) and keep clusters whose mass exceeds `K sigma`
//!    ([`select_and_estimate`]).

mod cluster;
mod config;
mod mass;
mod pseudosample;
mod replication;
mod select;
mod sweep;

pub use cluster::{cluster_solutions, feature_weight, Cluster, ClusterReport, Member};
pub use config::{MassPotential, MeshSpacing, PseudosampleConfig, Selection, SolvePath, WeightAveraging};
pub use mass::{auto_delta, laplacian_mass, meshes_overlap, repair_meshes, Mesh, SINGULAR_DISTANCE};
pub use pseudosample::{complex_gaussian, generate_pseudosamples, pseudosample, replication_rng};
pub use replication::{solve_replicates, solve_replications, ReplicationSet, FAST_FAILURE_LIMIT};
pub use select::{estimate_from_replicates, ptransform_estimate, select_and_estimate, select_by_threshold, Estimate};
pub use sweep::{sweep_hyperparameters, SweepOutcome, SweepRow};

/// Runs `f(0..count)` in parallel when the `parallel` feature is on,
/// preserving index order in the output.
pub(crate) fn map_indexed<T, F>(count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..count).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..count).map(f).collect()
    }
}
