use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use ptransform::applications::{
    extrapolate, interpolate_gap, lines_from_model, moments_from_polygon, passband_filter, vertices_from_moments,
    MomentSequence, Polygon,
};
use ptransform::density::{condensed_density_map, design_experiment, DesignCandidate, IdentifiabilityQuery};
use ptransform::ptransform::{ptransform_estimate, sweep_hyperparameters, PseudosampleConfig};
use ptransform::{Complex64, SignalSeries};
use serde::Serialize;

use crate::config::{AveragingChoice, GridSpec, PathChoice, PotentialChoice, RunConfig, SCHEMA_VERSION};
use crate::error::{usage, CliResult};
use crate::io::{self, SeriesFormat};
use crate::manifest::RunManifest;
use crate::results::{pairs, term_rows, to_json, EstimateDocument, TermRow};

#[derive(Debug, Parser)]
#[command(name = "ptransform", version, about = "Complex exponential approximation from noisy samples")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate order and terms of a series.
    Estimate(EstimateArgs),
    /// Approximate condensed density on a lattice.
    Density(DensityArgs),
    /// Identifiability table over noise levels and lengths.
    Design(DesignArgs),
    /// Fill the gap between two segments.
    Interpolate(InterpolateArgs),
    /// Predict samples past the end of a series.
    Extrapolate(ExtrapolateArgs),
    /// Complex moments of a polygon.
    ShapeForward(ShapeForwardArgs),
    /// Polygon vertices from complex moments.
    ShapeRecover(ShapeRecoverArgs),
    /// Band-pass filter and decimate a series.
    Filter(FilterArgs),
    /// Run the estimator over a grid of settings.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// JSON run configuration; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output document; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct InputArgs {
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
    /// Series format; guessed from the extension when absent.
    #[arg(long, value_enum)]
    pub format: Option<SeriesFormat>,
}

#[derive(Debug, Args)]
pub struct EstimatorArgs {
    /// Noise level of the data; overrides the value stored with the input.
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Number of pseudosamples.
    #[arg(long = "R")]
    pub replications: Option<usize>,
    /// Added noise level; half of sigma by default.
    #[arg(long)]
    pub sigma_prime: Option<f64>,
    #[arg(long)]
    pub p_tilde: Option<usize>,
    /// Selection constant K.
    #[arg(long = "k")]
    pub k_sigma: Option<f64>,
    #[arg(long)]
    pub mesh_size: Option<usize>,
    #[arg(long)]
    pub mesh_delta: Option<f64>,
    #[arg(long, value_enum)]
    pub path: Option<PathChoice>,
    /// Keep this many clusters of largest mass instead of thresholding.
    #[arg(long)]
    pub keep: Option<usize>,
    #[arg(long, value_enum)]
    pub averaging: Option<AveragingChoice>,
    #[arg(long, value_enum)]
    pub potential: Option<PotentialChoice>,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    /// x_min x_max y_min y_max nx ny
    #[arg(long, num_args = 6, allow_negative_numbers = true, value_names = ["X_MIN", "X_MAX", "Y_MIN", "Y_MAX", "NX", "NY"])]
    pub grid: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub est: EstimatorArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum SignalSource {
    Zero,
}

#[derive(Debug, Args)]
pub struct DensityArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Noiseless signal; use `--signal zero` for pure noise.
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, value_enum, conflicts_with = "input")]
    pub signal: Option<SignalSource>,
    /// Length of the zero signal.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Grid file with the density values.
    #[arg(long)]
    pub grid_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DesignArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Candidate model file (`c_re c_im xi_re xi_im` per line); repeatable.
    #[arg(long = "model")]
    pub models: Vec<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    pub sigmas: Vec<f64>,
    /// Series lengths.
    #[arg(long, value_delimiter = ',')]
    pub lengths: Vec<usize>,
    /// Largest candidate disk radius.
    #[arg(long)]
    pub radius: Option<f64>,
    #[command(flatten)]
    pub grid: GridArgs,
}

#[derive(Debug, Args)]
pub struct InterpolateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// First segment, indices 0..n.
    #[command(flatten)]
    pub input: InputArgs,
    /// Second segment, starting at n + gap.
    #[arg(long)]
    pub second: Option<PathBuf>,
    /// Number of missing samples.
    #[arg(long)]
    pub gap: Option<usize>,
    #[command(flatten)]
    pub est: EstimatorArgs,
}

#[derive(Debug, Args)]
pub struct ExtrapolateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long)]
    pub horizon: Option<usize>,
    #[command(flatten)]
    pub est: EstimatorArgs,
}

#[derive(Debug, Args)]
pub struct ShapeForwardArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Polygon vertices, `re im` per line, counterclockwise.
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub count: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ShapeRecoverArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Moments `mu_0, mu_1, ...`, `re im` per line.
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
    /// Fix the number of vertices.
    #[arg(long)]
    pub p_known: Option<usize>,
    #[command(flatten)]
    pub est: EstimatorArgs,
}

#[derive(Debug, Args)]
pub struct FilterArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub input: InputArgs,
    /// Band edges in cycles per sample, `[lo, hi)` within `[0, 1]`.
    #[arg(long, num_args = 2, value_names = ["LO", "HI"])]
    pub band: Option<Vec<f64>>,
    #[arg(long)]
    pub decimate: Option<usize>,
    /// Format of the filtered series.
    #[arg(long, value_enum, default_value = "csv")]
    pub out_format: SeriesFormat,
    /// Fit the filtered series and report its spectral lines instead.
    #[arg(long)]
    pub lines: bool,
    #[arg(long)]
    pub reference_hz: Option<f64>,
    #[command(flatten)]
    pub est: EstimatorArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long = "R-values", value_delimiter = ',')]
    pub sweep_replications: Vec<usize>,
    #[arg(long = "sigma-prime-values", value_delimiter = ',')]
    pub sweep_sigma_prime: Vec<f64>,
    #[arg(long = "k-values", value_delimiter = ',')]
    pub sweep_k_sigma: Vec<f64>,
    #[arg(long = "p-tilde-values", value_delimiter = ',')]
    pub sweep_p_tilde: Vec<usize>,
    #[command(flatten)]
    pub est: EstimatorArgs,
}

fn set<T: Clone>(target: &mut T, flag: &Option<T>) {
    if let Some(v) = flag {
        *target = v.clone();
    }
}

fn set_some<T: Clone>(target: &mut Option<T>, flag: &Option<T>) {
    if flag.is_some() {
        *target = flag.clone();
    }
}

fn set_list<T: Clone>(target: &mut Vec<T>, flag: &[T]) {
    if !flag.is_empty() {
        *target = flag.to_vec();
    }
}

impl CommonArgs {
    fn resolve(&self) -> CliResult<RunConfig> {
        let mut cfg = RunConfig::load(self.config.as_deref())?;
        set(&mut cfg.seed, &self.seed);
        set_some(&mut cfg.output, &self.out);
        Ok(cfg)
    }
}

impl InputArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        set_some(&mut cfg.input, &self.input);
        set_some(&mut cfg.format, &self.format);
    }
}

impl EstimatorArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        set_some(&mut cfg.sigma, &self.sigma);
        set(&mut cfg.replications, &self.replications);
        set_some(&mut cfg.sigma_prime, &self.sigma_prime);
        set_some(&mut cfg.p_tilde, &self.p_tilde);
        set(&mut cfg.k_sigma, &self.k_sigma);
        set(&mut cfg.mesh_size, &self.mesh_size);
        set_some(&mut cfg.mesh_delta, &self.mesh_delta);
        set(&mut cfg.path, &self.path);
        set_some(&mut cfg.keep, &self.keep);
        set(&mut cfg.averaging, &self.averaging);
        set(&mut cfg.potential, &self.potential);
    }
}

impl GridArgs {
    fn apply(&self, cfg: &mut RunConfig) -> CliResult<()> {
        let Some(g) = &self.grid else { return Ok(()) };
        let count = |v: f64| {
            if v >= 1.0 && v.fract() == 0.0 {
                Ok(v as usize)
            } else {
                Err(usage(format!("grid point counts must be positive integers, got {v}")))
            }
        };
        cfg.grid = GridSpec { x_min: g[0], x_max: g[1], y_min: g[2], y_max: g[3], nx: count(g[4])?, ny: count(g[5])? };
        Ok(())
    }
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Estimate(_) => "estimate",
            Command::Density(_) => "density",
            Command::Design(_) => "design",
            Command::Interpolate(_) => "interpolate",
            Command::Extrapolate(_) => "extrapolate",
            Command::ShapeForward(_) => "shape-forward",
            Command::ShapeRecover(_) => "shape-recover",
            Command::Filter(_) => "filter",
            Command::Sweep(_) => "sweep",
        }
    }

    /// Flags over config file over defaults.
    pub fn resolve(&self) -> CliResult<RunConfig> {
        let cfg = match self {
            Command::Estimate(a) => {
                let mut cfg = a.common.resolve()?;
                a.input.apply(&mut cfg);
                a.est.apply(&mut cfg);
                cfg
            }
            Command::Density(a) => {
                let mut cfg = a.common.resolve()?;
                a.input.apply(&mut cfg);
                if a.signal == Some(SignalSource::Zero) {
                    cfg.input = None;
                }
                set(&mut cfg.n, &a.n);
                set_some(&mut cfg.sigma, &a.sigma);
                a.grid.apply(&mut cfg)?;
                cfg
            }
            Command::Design(a) => {
                let mut cfg = a.common.resolve()?;
                set_list(&mut cfg.models, &a.models);
                set_list(&mut cfg.sigmas, &a.sigmas);
                set_list(&mut cfg.lengths, &a.lengths);
                set(&mut cfg.radius, &a.radius);
                a.grid.apply(&mut cfg)?;
                cfg
            }
            Command::Interpolate(a) => {
                let mut cfg = a.common.resolve()?;
                a.input.apply(&mut cfg);
                set_some(&mut cfg.second, &a.second);
                set(&mut cfg.gap, &a.gap);
                a.est.apply(&mut cfg);
                cfg
            }
            Command::Extrapolate(a) => {
                let mut cfg = a.common.resolve()?;
                a.input.apply(&mut cfg);
                set(&mut cfg.horizon, &a.horizon);
                a.est.apply(&mut cfg);
                cfg
            }
            Command::ShapeForward(a) => {
                let mut cfg = a.common.resolve()?;
                set_some(&mut cfg.input, &a.input);
                set(&mut cfg.count, &a.count);
                cfg
            }
            Command::ShapeRecover(a) => {
                let mut cfg = a.common.resolve()?;
                set_some(&mut cfg.input, &a.input);
                set_some(&mut cfg.p_known, &a.p_known);
                a.est.apply(&mut cfg);
                cfg
            }
            Command::Filter(a) => {
                let mut cfg = a.common.resolve()?;
                a.input.apply(&mut cfg);
                if let Some(b) = &a.band {
                    cfg.band = [b[0], b[1]];
                }
                set(&mut cfg.decimate, &a.decimate);
                set_some(&mut cfg.reference_hz, &a.reference_hz);
                a.est.apply(&mut cfg);
                cfg
            }
            Command::Sweep(a) => {
                let mut cfg = a.common.resolve()?;
                a.input.apply(&mut cfg);
                set_list(&mut cfg.sweep_replications, &a.sweep_replications);
                set_list(&mut cfg.sweep_sigma_prime, &a.sweep_sigma_prime);
                set_list(&mut cfg.sweep_k_sigma, &a.sweep_k_sigma);
                set_list(&mut cfg.sweep_p_tilde, &a.sweep_p_tilde);
                a.est.apply(&mut cfg);
                cfg
            }
        };
        Ok(cfg)
    }
}

/// A finished run: the document to write and a one-line summary.
pub struct Outcome {
    pub document: String,
    pub summary: String,
}

/// Reads the input series and applies the `sigma` override.
fn input_series(cfg: &RunConfig) -> CliResult<SignalSeries> {
    let series = io::read_series(cfg.input()?, cfg.format)?;
    Ok(match cfg.sigma {
        Some(s) => series.with_sigma(s)?,
        None => series,
    })
}

fn fmt_c(z: Complex64) -> String {
    format!("{:.6}{:+.6}i", z.re, z.im)
}

pub fn execute(command: &Command, cfg: &RunConfig) -> CliResult<Outcome> {
    let mut manifest = RunManifest::new(command.name(), cfg);
    match command {
        Command::Estimate(_) => estimate(cfg, manifest),
        Command::Density(a) => density(cfg, manifest, a.grid_out.as_deref()),
        Command::Design(_) => design(cfg, manifest),
        Command::Interpolate(_) => interpolate(cfg, manifest),
        Command::Extrapolate(_) => extrapolate_cmd(cfg, manifest),
        Command::ShapeForward(_) => shape_forward(cfg),
        Command::ShapeRecover(_) => shape_recover(cfg, manifest),
        Command::Filter(a) => filter(cfg, &mut manifest, a.out_format, a.lines),
        Command::Sweep(_) => sweep(cfg, manifest),
    }
}

fn record_failures(manifest: &mut RunManifest, reps: &ptransform::ptransform::ReplicationSet) {
    manifest.failures.extend(reps.failures.iter().map(|r| format!("replication {r}: fast solve failed")));
    if reps.switched_to_slow {
        manifest.failures.push("too many fast failures: all replications re-solved on the slow path".into());
    }
    let unsolved = reps.models.iter().filter(|m| m.is_none()).count();
    if unsolved > 0 {
        manifest.failures.push(format!("{unsolved} replications produced no model"));
    }
}

fn estimate(cfg: &RunConfig, mut manifest: RunManifest) -> CliResult<Outcome> {
    let series = manifest.time("read", || input_series(cfg))?;
    let pcfg = cfg.estimator(series.sigma())?;
    let est = manifest.time("estimate", || ptransform_estimate(&series, &pcfg))?;
    record_failures(&mut manifest, &est.replications);
    let summary = format!(
        "estimate: p_hat {} from {} samples, {} residuals above sigma, mse {:.3e}",
        est.p_hat(),
        series.len(),
        est.residuals.exceed_count,
        est.residuals.mse
    );
    let doc = EstimateDocument::new(&est.report, &est.residuals, manifest);
    Ok(Outcome { document: to_json(&doc), summary })
}

#[derive(Serialize)]
struct DensityDocument {
    schema_version: u32,
    total_mass: f64,
    argmax: [f64; 2],
    grid: GridSpec,
    grid_file: Option<PathBuf>,
    manifest: RunManifest,
}

fn density(cfg: &RunConfig, mut manifest: RunManifest, grid_out: Option<&Path>) -> CliResult<Outcome> {
    let (signal, sigma) = match &cfg.input {
        Some(_) => {
            let s = input_series(cfg)?;
            let sigma = cfg.sigma.unwrap_or(s.sigma());
            (s.into_samples(), sigma)
        }
        None => (vec![Complex64::new(0.0, 0.0); cfg.n], cfg.sigma.ok_or_else(|| usage("density needs --sigma"))?),
    };
    let lattice = cfg.grid.lattice()?;
    let map = manifest.time("density", || condensed_density_map(&signal, sigma, &lattice))?;
    if let Some(p) = grid_out {
        io::write_text(p, &map.to_grid_text())?;
    }
    let peak = map.argmax();
    let summary = format!(
        "density: total mass {:.4} on {}x{} lattice, peak at {}",
        map.total_mass,
        lattice.nx,
        lattice.ny,
        fmt_c(peak)
    );
    let doc = DensityDocument {
        schema_version: SCHEMA_VERSION,
        total_mass: map.total_mass,
        argmax: [peak.re, peak.im],
        grid: cfg.grid,
        grid_file: grid_out.map(Path::to_path_buf),
        manifest,
    };
    Ok(Outcome { document: to_json(&doc), summary })
}

#[derive(Serialize)]
struct DesignRowDoc {
    model: PathBuf,
    sigma: f64,
    n: usize,
    identifiable: bool,
}

#[derive(Serialize)]
struct DesignDocument {
    schema_version: u32,
    rows: Vec<DesignRowDoc>,
    manifest: RunManifest,
}

fn design(cfg: &RunConfig, mut manifest: RunManifest) -> CliResult<Outcome> {
    if cfg.models.is_empty() {
        return Err(usage("design needs at least one --model file"));
    }
    let candidates = cfg
        .models
        .iter()
        .map(|p| {
            let model = io::read_model(p)?;
            let query = IdentifiabilityQuery::around_nodes(&model.nodes(), cfg.radius)?;
            Ok(DesignCandidate { model, query })
        })
        .collect::<CliResult<Vec<_>>>()?;
    let lattice = cfg.grid.lattice()?;
    let rows = manifest.time("design", || design_experiment(&candidates, &cfg.sigmas, &cfg.lengths, &lattice))?;
    let ok = rows.iter().filter(|r| r.identifiable).count();
    let summary = format!("design: {ok} of {} settings identifiable", rows.len());
    let rows = rows
        .into_iter()
        .map(|r| DesignRowDoc { model: cfg.models[r.candidate].clone(), sigma: r.sigma, n: r.n, identifiable: r.identifiable })
        .collect();
    Ok(Outcome { document: to_json(&DesignDocument { schema_version: SCHEMA_VERSION, rows, manifest }), summary })
}

#[derive(Serialize)]
struct ValuesDocument {
    schema_version: u32,
    p_hat: usize,
    terms: Vec<TermRow>,
    /// Predicted samples, `[re, im]` each.
    values: Vec<[f64; 2]>,
    manifest: RunManifest,
}

fn interpolate(cfg: &RunConfig, mut manifest: RunManifest) -> CliResult<Outcome> {
    let first = input_series(cfg)?;
    let second_path = cfg.second.as_deref().ok_or_else(|| usage("interpolate needs --second"))?;
    let second = io::read_series(second_path, cfg.format)?;
    let second = second.with_sigma(first.sigma())?;
    if cfg.gap == 0 {
        return Err(usage("interpolate needs --gap >= 1"));
    }
    let pcfg = cfg.estimator(first.sigma())?;
    let fill = manifest.time("interpolate", || interpolate_gap(&first, &second, cfg.gap, &pcfg))?;
    record_failures(&mut manifest, &fill.replications);
    let summary = format!("interpolate: p_hat {}, filled {} samples", fill.report.p_hat, fill.values.len());
    let doc = ValuesDocument {
        schema_version: SCHEMA_VERSION,
        p_hat: fill.report.p_hat,
        terms: term_rows(&fill.report),
        values: pairs(&fill.values),
        manifest,
    };
    Ok(Outcome { document: to_json(&doc), summary })
}

fn extrapolate_cmd(cfg: &RunConfig, mut manifest: RunManifest) -> CliResult<Outcome> {
    let series = input_series(cfg)?;
    let pcfg = cfg.estimator(series.sigma())?;
    let ext = manifest.time("extrapolate", || extrapolate(&series, cfg.horizon, &pcfg))?;
    record_failures(&mut manifest, &ext.estimate.replications);
    if ext.no_signal {
        manifest.failures.push("no cluster selected: predictions are zero".into());
    }
    let summary = format!("extrapolate: p_hat {}, predicted {} samples", ext.estimate.p_hat(), ext.values.len());
    let doc = ValuesDocument {
        schema_version: SCHEMA_VERSION,
        p_hat: ext.estimate.p_hat(),
        terms: term_rows(&ext.estimate.report),
        values: pairs(&ext.values),
        manifest,
    };
    Ok(Outcome { document: to_json(&doc), summary })
}

/// Writes moments as a text file, one `re im` line per index from 0.
fn shape_forward(cfg: &RunConfig) -> CliResult<Outcome> {
    let poly = Polygon::new(io::read_points(cfg.input()?)?)?;
    let mom = moments_from_polygon(&poly, cfg.count)?;
    let summary = match mom.moments.get(2) {
        Some(&m2) => format!("shape-forward: {} moments, mu_2 = {}", mom.moments.len(), fmt_c(m2)),
        None => format!("shape-forward: {} moments", mom.moments.len()),
    };
    Ok(Outcome { document: io::points_to_text(&mom.moments), summary })
}

#[derive(Serialize)]
struct ShapeDocument {
    schema_version: u32,
    p_hat: usize,
    terms: Vec<TermRow>,
    vertices: Vec<[f64; 2]>,
    manifest: RunManifest,
}

fn shape_recover(cfg: &RunConfig, mut manifest: RunManifest) -> CliResult<Outcome> {
    let moments = io::read_points(cfg.input()?)?;
    let sigma = cfg.sigma.unwrap_or(0.0);
    let mom = MomentSequence { moments, sigma };
    let series = ptransform::applications::shape_series(&mom)?;
    let pcfg = cfg.estimator(series.sigma())?;
    let (model, est) = manifest.time("shape-recover", || vertices_from_moments(&mom, &pcfg, cfg.p_known))?;
    record_failures(&mut manifest, &est.replications);
    let vertices = model.nodes();
    let summary = format!("shape-recover: {} vertices", vertices.len());
    let doc = ShapeDocument {
        schema_version: SCHEMA_VERSION,
        p_hat: est.p_hat(),
        terms: term_rows(&est.report),
        vertices: pairs(&vertices),
        manifest,
    };
    Ok(Outcome { document: to_json(&doc), summary })
}

#[derive(Serialize)]
struct LineDoc {
    frequency_hz: f64,
    decay_rate: f64,
    area: f64,
    phase: f64,
    mode_ppm: Option<f64>,
}

#[derive(Serialize)]
struct LinesDocument {
    schema_version: u32,
    p_hat: usize,
    lines: Vec<LineDoc>,
    manifest: RunManifest,
}

/// The filtered series is the document; with `lines` the estimator runs on
/// it and the document lists the fitted spectral lines instead.
fn filter(
    cfg: &RunConfig,
    manifest: &mut RunManifest,
    format: SeriesFormat,
    lines: bool,
) -> CliResult<Outcome> {
    let series = input_series(cfg)?;
    let [lo, hi] = cfg.band;
    let filtered = manifest.time("filter", || passband_filter(&series, lo, hi, cfg.decimate))?;
    if !lines {
        let document = match format {
            SeriesFormat::Csv => io::series_to_csv(&filtered),
            SeriesFormat::Json => io::series_to_json(&filtered),
        };
        let summary = format!(
            "filter: {} -> {} samples, sigma {:.3e}, dt {}",
            series.len(),
            filtered.len(),
            filtered.sigma(),
            filtered.dt()
        );
        return Ok(Outcome { document, summary });
    }
    let pcfg = cfg.estimator(filtered.sigma())?;
    let est = manifest.time("estimate", || ptransform_estimate(&filtered, &pcfg))?;
    record_failures(manifest, &est.replications);
    let found = lines_from_model(est.model(), filtered.dt(), cfg.reference_hz)?;
    let summary = format!("filter: {} lines from {} filtered samples", found.len(), filtered.len());
    let doc = LinesDocument {
        schema_version: SCHEMA_VERSION,
        p_hat: est.p_hat(),
        lines: found
            .iter()
            .map(|l| LineDoc {
                frequency_hz: l.frequency_hz,
                decay_rate: l.decay_rate,
                area: l.area,
                phase: l.phase,
                mode_ppm: l.mode_ppm,
            })
            .collect(),
        manifest: manifest.clone(),
    };
    Ok(Outcome { document: to_json(&doc), summary })
}

#[derive(Serialize)]
struct SweepRowDoc {
    replications: usize,
    sigma_prime: f64,
    k_sigma: f64,
    p_tilde: Option<usize>,
    exceed_count: Option<usize>,
    mse: Option<f64>,
    p_hat: Option<usize>,
    error: Option<String>,
}

#[derive(Serialize)]
struct SweepDocument {
    schema_version: u32,
    best_index: usize,
    rows: Vec<SweepRowDoc>,
    manifest: RunManifest,
}

fn sweep(cfg: &RunConfig, mut manifest: RunManifest) -> CliResult<Outcome> {
    let series = input_series(cfg)?;
    let base = cfg.estimator(series.sigma())?;
    let or_base = |list: &[f64], v: f64| if list.is_empty() { vec![v] } else { list.to_vec() };
    let reps = if cfg.sweep_replications.is_empty() { vec![base.replications] } else { cfg.sweep_replications.clone() };
    let p_tildes: Vec<Option<usize>> =
        if cfg.sweep_p_tilde.is_empty() { vec![base.p_tilde] } else { cfg.sweep_p_tilde.iter().map(|&p| Some(p)).collect() };
    let mut grid = Vec::new();
    for &replications in &reps {
        for sigma_prime in or_base(&cfg.sweep_sigma_prime, base.sigma_prime) {
            for k_sigma in or_base(&cfg.sweep_k_sigma, base.k_sigma) {
                for &p_tilde in &p_tildes {
                    let c = PseudosampleConfig { replications, sigma_prime, k_sigma, p_tilde, ..base };
                    c.validate()?;
                    grid.push(c);
                }
            }
        }
    }
    let outcome = manifest.time("sweep", || sweep_hyperparameters(&series, &grid))?;
    let rows: Vec<SweepRowDoc> = outcome
        .table
        .iter()
        .map(|r| {
            let ok = r.error.is_none();
            SweepRowDoc {
                replications: r.config.replications,
                sigma_prime: r.config.sigma_prime,
                k_sigma: r.config.k_sigma,
                p_tilde: r.config.p_tilde,
                exceed_count: ok.then_some(r.exceed_count),
                mse: ok.then_some(r.mse),
                p_hat: ok.then_some(r.p_hat),
                error: r.error.clone(),
            }
        })
        .collect();
    manifest.failures.extend(rows.iter().enumerate().filter_map(|(i, r)| r.error.as_ref().map(|e| format!("row {i}: {e}"))));
    let best = &rows[outcome.best_index];
    let summary = format!(
        "sweep: {} settings, best R {} sigma' {:.3e} K {} p_hat {}",
        rows.len(),
        best.replications,
        best.sigma_prime,
        best.k_sigma,
        best.p_hat.unwrap_or(0)
    );
    let doc = SweepDocument { schema_version: SCHEMA_VERSION, best_index: outcome.best_index, rows, manifest };
    Ok(Outcome { document: to_json(&doc), summary })
}

/// Sizes the global thread pool from `PTRANSFORM_THREADS` (0 or unset
/// means one thread per core).
fn configure_threads() -> CliResult<()> {
    let threads = match std::env::var("PTRANSFORM_THREADS") {
        Ok(v) => v.trim().parse::<usize>().map_err(|_| usage(format!("PTRANSFORM_THREADS must be an integer, got {v:?}")))?,
        Err(_) => 0,
    };
    // A second call in the same process finds the pool already built.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    Ok(())
}

/// Parses `argv`, runs the subcommand, writes its document and prints the
/// summary. Returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match run_command(&cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// The summary goes to stdout, or to stderr when stdout carries the
/// document.
fn run_command(command: &Command) -> CliResult<()> {
    configure_threads()?;
    let cfg = command.resolve()?;
    let out = execute(command, &cfg)?;
    match &cfg.output {
        Some(path) => {
            io::write_text(path, &out.document)?;
            println!("{}", out.summary);
        }
        None => {
            std::io::stdout()
                .lock()
                .write_all(out.document.as_bytes())
                .map_err(|e| usage(format!("cannot write to stdout: {e}")))?;
            eprintln!("{}", out.summary);
        }
    }
    Ok(())
}
