//! JSON result documents. `serde_json` prints the shortest decimal that
//! reads back to the same `f64`, so values survive a round trip exactly.

use std::path::Path;

use ptransform::ptransform::ClusterReport;
use ptransform::{Complex64, ResidualReport};
use serde::{Deserialize, Serialize};

use crate::config::SCHEMA_VERSION;
use crate::error::CliResult;
use crate::io::write_text;
use crate::manifest::RunManifest;

/// `[c_re, c_im, xi_re, xi_im, mass_re, mass_im, member_count]` per
/// selected cluster.
pub type TermRow = [f64; 7];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateDocument {
    pub schema_version: u32,
    pub p_hat: usize,
    pub terms: Vec<TermRow>,
    pub exceed_count: usize,
    pub mse: f64,
    pub manifest: RunManifest,
}

pub fn term_rows(report: &ClusterReport) -> Vec<TermRow> {
    report
        .clusters
        .iter()
        .filter(|c| c.selected)
        .zip(report.estimates.terms())
        .map(|(c, t)| {
            let m = c.laplacian_mass;
            [t.weight.re, t.weight.im, t.node.re, t.node.im, m.re, m.im, c.members.len() as f64]
        })
        .collect()
}

impl EstimateDocument {
    pub fn new(report: &ClusterReport, residuals: &ResidualReport, manifest: RunManifest) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            p_hat: report.p_hat,
            terms: term_rows(report),
            exceed_count: residuals.exceed_count,
            mse: residuals.mse,
            manifest,
        }
    }
}

pub fn pairs(values: &[Complex64]) -> Vec<[f64; 2]> {
    values.iter().map(|z| [z.re, z.im]).collect()
}

pub fn to_json<T: Serialize>(doc: &T) -> String {
    serde_json::to_string_pretty(doc).expect("documents serialize") + "\n"
}

pub fn write_results(report: &ClusterReport, residuals: &ResidualReport, manifest: RunManifest, path: &Path) -> CliResult<()> {
    write_text(path, &to_json(&EstimateDocument::new(report, residuals, manifest)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::RunConfig;
    use ptransform::ExponentialModel;

    fn empty_report() -> ClusterReport {
        ClusterReport { clusters: vec![], p_hat: 0, estimates: ExponentialModel::empty(), feature_weight: 1.0 }
    }

    #[test]
    fn empty_selection_gives_empty_terms() {
        let res = ResidualReport { residuals: vec![], exceed_count: 0, mse: 0.0 };
        let doc = EstimateDocument::new(&empty_report(), &res, RunManifest::new("estimate", &RunConfig::default()));
        assert_eq!(doc.p_hat, 0);
        assert!(doc.terms.is_empty());
    }

    #[test]
    fn document_round_trips() {
        let res = ResidualReport { residuals: vec![], exceed_count: 3, mse: 0.1 + 0.2 };
        let mut doc = EstimateDocument::new(&empty_report(), &res, RunManifest::new("estimate", &RunConfig::default()));
        doc.terms.push([1.0 / 3.0, -2e-310, 0.7, f64::EPSILON, 5e300, -0.0, 12.0]);
        let back: EstimateDocument = serde_json::from_str(&to_json(&doc)).unwrap();
        assert_eq!(back, doc);
    }
}
