//! Run configuration. Values come from flags, then an optional JSON config
//! file, then the defaults below.

use std::path::{Path, PathBuf};

use ptransform::ptransform::{MassPotential, MeshSpacing, PseudosampleConfig, Selection, SolvePath, WeightAveraging};
use serde::{Deserialize, Serialize};

use crate::error::{usage, CliResult};
use crate::io::{read_text, SeriesFormat};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum PathChoice {
    Fast,
    Slow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum AveragingChoice {
    MemberMean,
    ReplicationTotal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum PotentialChoice {
    Cluster,
    All,
}

/// Lattice bounds and point counts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub nx: usize,
    pub ny: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { x_min: -2.0, x_max: 2.0, y_min: -2.0, y_max: 2.0, nx: 81, ny: 81 }
    }
}

impl GridSpec {
    pub fn lattice(&self) -> CliResult<ptransform::density::Lattice> {
        Ok(ptransform::density::Lattice::new(self.x_min, self.x_max, self.y_min, self.y_max, self.nx, self.ny)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub schema_version: u32,

    pub input: Option<PathBuf>,
    pub second: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub format: Option<SeriesFormat>,
    pub models: Vec<PathBuf>,

    /// Overrides the noise level stored with the input.
    pub sigma: Option<f64>,
    pub replications: usize,
    /// Defaults to half the data noise level.
    pub sigma_prime: Option<f64>,
    pub seed: u64,
    pub p_tilde: Option<usize>,
    pub k_sigma: f64,
    pub mesh_size: usize,
    /// Fixed mesh spacing; automatic when absent.
    pub mesh_delta: Option<f64>,
    pub path: PathChoice,
    /// Keep this many heaviest clusters instead of thresholding.
    pub keep: Option<usize>,
    pub averaging: AveragingChoice,
    pub potential: PotentialChoice,

    pub grid: GridSpec,
    /// Zero-signal length for `density`.
    pub n: usize,
    /// Moment count for `shape-forward`.
    pub count: usize,
    pub horizon: usize,
    pub gap: usize,
    pub p_known: Option<usize>,
    pub band: [f64; 2],
    pub decimate: usize,
    pub reference_hz: Option<f64>,
    pub radius: f64,
    pub sigmas: Vec<f64>,
    pub lengths: Vec<usize>,
    pub sweep_replications: Vec<usize>,
    pub sweep_sigma_prime: Vec<f64>,
    pub sweep_k_sigma: Vec<f64>,
    pub sweep_p_tilde: Vec<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let base = PseudosampleConfig::default();
        Self {
            schema_version: SCHEMA_VERSION,
            input: None,
            second: None,
            output: None,
            format: None,
            models: Vec::new(),
            sigma: None,
            replications: base.replications,
            sigma_prime: None,
            seed: base.seed,
            p_tilde: None,
            k_sigma: base.k_sigma,
            mesh_size: base.mesh_size,
            mesh_delta: None,
            path: PathChoice::Fast,
            keep: None,
            averaging: AveragingChoice::MemberMean,
            potential: PotentialChoice::Cluster,
            grid: GridSpec::default(),
            n: 20,
            count: 20,
            horizon: 10,
            gap: 0,
            p_known: None,
            band: [0.0, 1.0],
            decimate: 1,
            reference_hz: None,
            radius: 0.2,
            sigmas: vec![1e-3, 1e-2, 1e-1],
            lengths: vec![20, 40],
            sweep_replications: Vec::new(),
            sweep_sigma_prime: Vec::new(),
            sweep_k_sigma: Vec::new(),
            sweep_p_tilde: Vec::new(),
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> CliResult<Self> {
        let cfg: RunConfig = serde_json::from_str(text)
            .map_err(|e| usage(format!("config line {}, column {}: {e}", e.line(), e.column())))?;
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(usage(format!(
                "config schema_version {} is not supported (expected {SCHEMA_VERSION})",
                cfg.schema_version
            )));
        }
        Ok(cfg)
    }

    /// The config file if given, else the defaults.
    pub fn load(path: Option<&Path>) -> CliResult<Self> {
        match path {
            Some(p) => Self::from_json(&read_text(p)?).map_err(|e| usage(format!("{}: {e}", p.display()))),
            None => Ok(Self::default()),
        }
    }

    pub fn input(&self) -> CliResult<&Path> {
        self.input.as_deref().ok_or_else(|| usage("missing input file (--in)"))
    }

    /// Estimator settings for data with noise level `sigma`.
    pub fn estimator(&self, sigma: f64) -> CliResult<PseudosampleConfig> {
        let cfg = PseudosampleConfig {
            replications: self.replications,
            sigma_prime: self.sigma_prime.unwrap_or(sigma / 2.0),
            seed: self.seed,
            p_tilde: self.p_tilde,
            k_sigma: self.k_sigma,
            mesh_size: self.mesh_size,
            mesh_spacing: self.mesh_delta.map_or(MeshSpacing::Auto, MeshSpacing::Fixed),
            path: match self.path {
                PathChoice::Fast => SolvePath::Fast,
                PathChoice::Slow => SolvePath::Slow,
            },
            weight_averaging: match self.averaging {
                AveragingChoice::MemberMean => WeightAveraging::MemberMean,
                AveragingChoice::ReplicationTotal => WeightAveraging::ReplicationTotal,
            },
            selection: self.keep.map_or(Selection::Threshold, Selection::Largest),
            potential: match self.potential {
                PotentialChoice::Cluster => MassPotential::ClusterMembers,
                PotentialChoice::All => MassPotential::AllTerms,
            },
        };
        cfg.validate()?;
        Ok(cfg)
    }
}
