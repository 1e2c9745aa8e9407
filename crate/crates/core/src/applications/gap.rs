use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{lstsq_svd, vandermonde};
use crate::model::{ExponentialModel, SignalSeries, Term};
use crate::pencil::{stacked_pencil_nodes, truncate_by_weight, EigenSolution, WeightMethod};
use crate::prony::{laguerre_roots, linear_prediction_segments, vandermonde_weights, GapSpec};
use crate::ptransform::{
    cluster_solutions, map_indexed, pseudosample, ptransform_estimate, select_and_estimate, ClusterReport, Estimate,
    PseudosampleConfig, ReplicationSet, SolvePath,
};

/// Mixed into the seed of the second segment so the two segments of one
/// replication get independent noise.
const SECOND_SEGMENT_SEED: u64 = 0x9e37_79b9_7f4a_7c15;

#[derive(Debug, Clone, PartialEq)]
pub struct GapFill {
    /// Values at indices `n..n+q`.
    pub values: Vec<Complex64>,
    pub report: ClusterReport,
    pub replications: ReplicationSet,
}

fn concat(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    a.iter().chain(b).copied().collect()
}

fn with_weights(nodes: Vec<Complex64>, data: &[Complex64], gap: GapSpec) -> Result<ExponentialModel> {
    let weights = vandermonde_weights(&nodes, data, gap)?;
    Ok(ExponentialModel::from_terms_unmerged(
        nodes.into_iter().zip(weights).map(|(z, c)| Term::new(c, z)).collect(),
    ))
}

/// Accurate joint solve: nodes of the stacked pencil, weights from one
/// gapped least-squares fit, truncated to the `p_tilde` largest weights.
fn joint_accurate(a: &[Complex64], b: &[Complex64], gap: GapSpec, p_tilde: usize) -> Result<EigenSolution> {
    let nodes = stacked_pencil_nodes(&[a, b])?;
    let data = concat(a, b);
    let weights = lstsq_svd(&vandermonde(&nodes, &gap.row_powers(data.len())), &data);
    let full = EigenSolution {
        condition: vec![1.0; nodes.len()],
        pairs: nodes.into_iter().zip(weights).map(|(z, c)| Term::new(c, z)).collect(),
        dropped: Vec::new(),
        weight_method: WeightMethod::VandermondeFallback,
    };
    Ok(truncate_by_weight(&full, p_tilde))
}

/// Joint linear prediction over both segments, Laguerre from the base
/// nodes, then gapped weights.
fn joint_fast(a: &[Complex64], b: &[Complex64], gap: GapSpec, base: &EigenSolution) -> Result<ExponentialModel> {
    let poly = linear_prediction_segments(&[a, b], base.pairs.len())?;
    let roots = laguerre_roots(&poly, &base.nodes())?.roots;
    with_weights(roots, &concat(a, b), gap)
}

/// Fills `q` missing samples between two observed segments of equal length
/// `n`. Both segments enter one stacked Hankel system per replication, so
/// they share a single set of nodes; weights come from a gapped fit over
/// all `2n` observations at their true indices.
pub fn interpolate_gap(seg1: &SignalSeries, seg2: &SignalSeries, q: usize, cfg: &PseudosampleConfig) -> Result<GapFill> {
    cfg.validate()?;
    if seg1.len() != seg2.len() {
        return Err(Error::LengthMismatch(seg1.len(), seg2.len()));
    }
    let n = seg1.len();
    let gap = GapSpec::new(n, q);
    let p_tilde = cfg.p_tilde_for(n);
    let cfg2 = PseudosampleConfig { seed: cfg.seed ^ SECOND_SEGMENT_SEED, ..*cfg };

    let base = joint_accurate(seg1.samples(), seg2.samples(), gap, p_tilde)?;
    if base.pairs.is_empty() {
        return Err(Error::EmptyBase);
    }
    let p = base.pairs.len();

    let solved: Vec<(Option<ExponentialModel>, bool)> = map_indexed(cfg.replications, |r| {
        let a = pseudosample(seg1, cfg, r);
        let b = pseudosample(seg2, &cfg2, r);
        if cfg.path == SolvePath::Fast {
            if let Ok(m) = joint_fast(a.samples(), b.samples(), gap, &base) {
                return (Some(m), false);
            }
        }
        let slow = joint_accurate(a.samples(), b.samples(), gap, p).ok().filter(|s| !s.pairs.is_empty());
        (slow.map(|s| s.to_model()), cfg.path == SolvePath::Fast)
    });
    let failures = solved.iter().enumerate().filter(|(_, (_, f))| *f).map(|(r, _)| r).collect();
    let reps = ReplicationSet {
        p_tilde: p,
        base,
        models: solved.into_iter().map(|(m, _)| m).collect(),
        failures,
        switched_to_slow: false,
    };

    let report = select_and_estimate(&reps, cluster_solutions(&reps), seg1.sigma(), cfg);
    let values = report.estimates.evaluate(n..n + q);
    Ok(GapFill { values, report, replications: reps })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Extrapolation {
    /// Values at indices `n..n+horizon`.
    pub values: Vec<Complex64>,
    /// True when no cluster was selected and the values are all zero.
    pub no_signal: bool,
    pub estimate: Estimate,
}

pub fn extrapolate(series: &SignalSeries, horizon: usize, cfg: &PseudosampleConfig) -> Result<Extrapolation> {
    if horizon == 0 {
        return Err(Error::InvalidParameter("horizon must be >= 1".into()));
    }
    let estimate = ptransform_estimate(series, cfg)?;
    let n = series.len();
    let values = estimate.report.estimates.evaluate(n..n + horizon);
    Ok(Extrapolation { values, no_signal: estimate.report.p_hat == 0, estimate })
}
