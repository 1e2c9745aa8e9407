use num_complex::Complex64;

use super::cluster::{cluster_solutions, ClusterReport};
use super::config::{MassPotential, MeshSpacing, PseudosampleConfig, Selection, WeightAveraging};
use super::mass::{auto_delta, laplacian_mass, repair_meshes, Mesh};
use super::replication::{mean_series, solve_replicates, solve_replications, ReplicationSet};
use crate::error::Result;
use crate::model::{residual_report, ExponentialModel, ResidualReport, SignalSeries, Term};

/// `|mass| > K sigma`, strictly.
pub fn select_by_threshold(masses: &[Complex64], sigma: f64, k_sigma: f64) -> Vec<bool> {
    masses.iter().map(|m| m.norm() > k_sigma * sigma).collect()
}

fn select_largest(masses: &[Complex64], available: &[bool], keep: usize) -> Vec<bool> {
    let mut order: Vec<usize> = (0..masses.len()).filter(|&i| available[i]).collect();
    order.sort_by(|&a, &b| masses[b].norm().total_cmp(&masses[a].norm()));
    let mut selected = vec![false; masses.len()];
    for &i in order.iter().take(keep) {
        selected[i] = true;
    }
    selected
}

/// Builds one mesh per non-empty cluster, makes them disjoint, integrates
/// the Laplacian mass on each, selects clusters and averages their members.
/// `sigma` is the noise level of the observed data.
pub fn select_and_estimate(
    reps: &ReplicationSet,
    mut report: ClusterReport,
    sigma: f64,
    cfg: &PseudosampleConfig,
) -> ClusterReport {
    let solved = reps.solved_count().max(1);
    let all_terms: Vec<Term> = reps.models.iter().flatten().flat_map(|m| m.terms().iter().copied()).collect();

    let mut meshes: Vec<Option<Mesh>> = report
        .clusters
        .iter()
        .map(|cl| {
            let center = cl.mean_node()?;
            let delta = match cfg.mesh_spacing {
                MeshSpacing::Auto => auto_delta(&cl.member_nodes()),
                MeshSpacing::Fixed(d) => d,
            };
            Some(Mesh::new(center, cfg.mesh_size, delta))
        })
        .collect();
    repair_meshes(&mut meshes);

    for (cl, mesh) in report.clusters.iter_mut().zip(meshes) {
        cl.mesh = mesh;
        let own: Vec<Term>;
        let terms = match cfg.potential {
            MassPotential::AllTerms => &all_terms,
            MassPotential::ClusterMembers => {
                own = cl.members.iter().map(|m| m.term).collect();
                &own
            }
        };
        cl.laplacian_mass = mesh.map_or(Complex64::new(0.0, 0.0), |m| laplacian_mass(terms, solved, &m));
        cl.direct_mass = cl.members.iter().map(|m| m.term.weight).sum::<Complex64>() / solved as f64;
    }

    let masses: Vec<Complex64> = report.clusters.iter().map(|c| c.laplacian_mass).collect();
    let available: Vec<bool> = report.clusters.iter().map(|c| c.mesh.is_some()).collect();
    let selected = match cfg.selection {
        Selection::Threshold => select_by_threshold(&masses, sigma, cfg.k_sigma),
        Selection::Largest(keep) => select_largest(&masses, &available, keep),
    };

    let mut terms = Vec::new();
    for (cl, (sel, avail)) in report.clusters.iter_mut().zip(selected.into_iter().zip(available)) {
        cl.selected = sel && avail;
        if !cl.selected {
            continue;
        }
        let (Some(node), Some(mean_weight)) = (cl.mean_node(), cl.mean_weight()) else {
            cl.selected = false;
            continue;
        };
        let weight = match cfg.weight_averaging {
            WeightAveraging::MemberMean => mean_weight,
            WeightAveraging::ReplicationTotal => cl.direct_mass,
        };
        terms.push(Term::new(weight, node));
    }
    report.p_hat = report.clusters.iter().filter(|c| c.selected).count();
    report.estimates = ExponentialModel::from_terms_unmerged(terms);
    report
}

/// Result of the full pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct Estimate {
    pub report: ClusterReport,
    pub residuals: ResidualReport,
    pub replications: ReplicationSet,
}

impl Estimate {
    pub fn p_hat(&self) -> usize {
        self.report.p_hat
    }

    pub fn model(&self) -> &ExponentialModel {
        &self.report.estimates
    }
}

fn finish(reps: ReplicationSet, data: &SignalSeries, sigma: f64, cfg: &PseudosampleConfig) -> Estimate {
    let clusters = cluster_solutions(&reps);
    let report = select_and_estimate(&reps, clusters, sigma, cfg);
    let residuals = residual_report(data, &report.estimates);
    Estimate { report, residuals, replications: reps }
}

/// Pseudosample replication, clustering, mass selection and residuals
/// against the observed series.
pub fn ptransform_estimate(series: &SignalSeries, cfg: &PseudosampleConfig) -> Result<Estimate> {
    let reps = solve_replications(series, cfg)?;
    Ok(finish(reps, series, series.sigma(), cfg))
}

/// The same pipeline driven by independent observed replicates. Residuals
/// and the selection threshold refer to their sample mean, whose noise
/// level is `sigma / sqrt(R)`.
pub fn estimate_from_replicates(samples: &[SignalSeries], cfg: &PseudosampleConfig) -> Result<Estimate> {
    let reps = solve_replicates(samples, cfg)?;
    let mean = mean_series(samples);
    let sigma = mean.sigma();
    Ok(finish(reps, &mean, sigma, cfg))
}
