use super::config::PseudosampleConfig;
use super::select::ptransform_estimate;
use crate::error::{Error, Result};
use crate::model::SignalSeries;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub config: PseudosampleConfig,
    pub exceed_count: usize,
    pub mse: f64,
    pub p_hat: usize,
    /// Set when the run hard-failed; the numeric fields are then meaningless.
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutcome {
    pub best: PseudosampleConfig,
    pub best_index: usize,
    pub table: Vec<SweepRow>,
}

/// Runs the estimator for every configuration and picks the one with the
/// fewest residuals above `sigma`, then the smallest order, then the
/// smallest mean squared residual. Earlier rows win exact ties.
pub fn sweep_hyperparameters(series: &SignalSeries, grid: &[PseudosampleConfig]) -> Result<SweepOutcome> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter("hyperparameter grid is empty".into()));
    }
    let table: Vec<SweepRow> = grid
        .iter()
        .map(|cfg| match ptransform_estimate(series, cfg) {
            Ok(est) => SweepRow {
                config: *cfg,
                exceed_count: est.residuals.exceed_count,
                mse: est.residuals.mse,
                p_hat: est.report.p_hat,
                error: None,
            },
            Err(e) => SweepRow {
                config: *cfg,
                exceed_count: usize::MAX,
                mse: f64::INFINITY,
                p_hat: usize::MAX,
                error: Some(e.to_string()),
            },
        })
        .collect();

    let best_index = table
        .iter()
        .enumerate()
        .filter(|(_, row)| row.error.is_none())
        .min_by(|(_, a), (_, b)| {
            a.exceed_count
                .cmp(&b.exceed_count)
                .then(a.p_hat.cmp(&b.p_hat))
                .then(a.mse.total_cmp(&b.mse))
        })
        .map(|(i, _)| i)
        .ok_or_else(|| Error::SweepFailed(table.iter().filter_map(|r| r.error.clone()).collect()))?;

    Ok(SweepOutcome { best: table[best_index].config, best_index, table })
}
