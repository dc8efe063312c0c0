//! Experiment configuration, dispatch and result records.
//!
//! A run is fully determined by its configuration: every replicate draws from the
//! stream `(seed, experiment, window index, replicate index)`, replicates may run in
//! parallel, and results are assembled in replicate order.

mod config;
mod output;

use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::inference::{
    clt_experiment, decorrelation_test, domination_check, fme_truncation_check, moment_bound_check, BoxRegion,
    CltOptions, CltReport, DecorrelationReport, DominationReport, FmeReport, InferenceError, MomentBoundReport,
};
use crate::model::{ModelError, ModelSpec, ParticleLaw, UStatSpec};
use crate::particles::{Configuration, Particle, Window};
use crate::percolation::{estimate_connection_decay, estimate_lambda_c, CrossingRow, DecaySeries, PercolationError};
use crate::rng::RngStream;
use crate::sampler::{disagreement_couple, sample_gibbs_cftp, sample_gibbs_rejection, SamplerError};

pub use config::{config_to_text, parse_config, ConfigErrors, ConfigIssue};
pub use output::{payload_table, record_csv, record_json, Cell, Table};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Sample,
    Couple,
    Percolate,
    Decay,
    Decorrelate,
    UstatClt,
    MomentCheck,
    FmeCheck,
    DominationCheck,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 9] = [
        ExperimentKind::Sample,
        ExperimentKind::Couple,
        ExperimentKind::Percolate,
        ExperimentKind::Decay,
        ExperimentKind::Decorrelate,
        ExperimentKind::UstatClt,
        ExperimentKind::MomentCheck,
        ExperimentKind::FmeCheck,
        ExperimentKind::DominationCheck,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Sample => "sample",
            ExperimentKind::Couple => "couple",
            ExperimentKind::Percolate => "percolate",
            ExperimentKind::Decay => "decay",
            ExperimentKind::Decorrelate => "decorrelate",
            ExperimentKind::UstatClt => "ustat-clt",
            ExperimentKind::MomentCheck => "moment-check",
            ExperimentKind::FmeCheck => "fme-check",
            ExperimentKind::DominationCheck => "domination-check",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }

    fn needs_windows(self) -> bool {
        !matches!(self, ExperimentKind::Decay | ExperimentKind::FmeCheck)
    }

    fn single_window(self) -> bool {
        matches!(self, ExperimentKind::Decorrelate | ExperimentKind::MomentCheck | ExperimentKind::DominationCheck)
    }

    fn needs_ustat(self) -> bool {
        matches!(self, ExperimentKind::UstatClt | ExperimentKind::FmeCheck)
    }

    /// The Boolean-model experiments accept `λ = 0`.
    fn allows_zero_activity(self) -> bool {
        matches!(self, ExperimentKind::Percolate | ExperimentKind::Decay)
    }

    fn min_replicates(self) -> u64 {
        match self {
            ExperimentKind::UstatClt | ExperimentKind::MomentCheck | ExperimentKind::DominationCheck => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SamplerChoice {
    Cftp,
    Rejection,
}

impl SamplerChoice {
    pub fn name(self) -> &'static str {
        match self {
            SamplerChoice::Cftp => "cftp",
            SamplerChoice::Rejection => "rejection",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Csv,
}

impl OutputFormat {
    pub fn name(self) -> &'static str {
        match self {
            OutputFormat::Json => "json",
            OutputFormat::Csv => "csv",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KernelChoice {
    /// Facet functional `G_order` with the model's segment size.
    Facet,
    Zero,
    Constant {
        value: f64,
        radius: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UStatConfig {
    pub kernel: KernelChoice,
    pub order: usize,
}

impl UStatConfig {
    pub fn build(&self, model: &ModelSpec) -> Result<UStatSpec, ModelError> {
        let spec = match self.kernel {
            KernelChoice::Facet => UStatSpec::facet(self.order, model.radius)?,
            KernelChoice::Zero => UStatSpec::zero(self.order),
            KernelChoice::Constant { value, radius } => UStatSpec::constant(self.order, value, radius),
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// Everything needed to reproduce one experiment.
///
/// Fields that an experiment does not use are ignored by it. Windows are given by volume.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub model: ModelSpec,
    pub ustat: Option<UStatConfig>,
    pub experiment: ExperimentKind,
    pub windows: Vec<f64>,
    pub replicates: u64,
    pub seed: u64,
    /// Sampler for `sample`.
    pub sampler: SamplerChoice,
    /// Connection distances for `decay`.
    pub distances: Vec<f64>,
    /// Activities for `percolate`; empty means the model's own.
    pub lambdas: Vec<f64>,
    /// Hausdorff-distance bin edges for `decorrelate`.
    pub edges: Vec<f64>,
    /// Centers of the cubic regions for `moment-check`.
    pub region_centers: Vec<Vec<f64>>,
    pub region_side: f64,
    /// Sampling margin around each window for `ustat-clt`.
    pub margin: f64,
    /// Distance of the extra boundary particle's center from the window face for `couple`.
    pub boundary_offset: f64,
    pub output: Option<PathBuf>,
    pub format: OutputFormat,
}

impl ExperimentConfig {
    fn defaults() -> Self {
        Self {
            model: ModelSpec::poisson_balls(2, 1.0, 0.5),
            ustat: None,
            experiment: ExperimentKind::Sample,
            windows: Vec::new(),
            replicates: 1,
            seed: 0,
            sampler: SamplerChoice::Cftp,
            distances: Vec::new(),
            lambdas: Vec::new(),
            edges: Vec::new(),
            region_centers: Vec::new(),
            region_side: 1.0,
            margin: 0.0,
            boundary_offset: 0.25,
            output: None,
            format: OutputFormat::Json,
        }
    }

    /// A configuration with default settings for `experiment` on `model`.
    pub fn new(model: ModelSpec, experiment: ExperimentKind) -> Self {
        Self { model, experiment, ..Self::defaults() }
    }

    pub fn validate(&self) -> Result<(), ConfigErrors> {
        let issues = self.validate_issues();
        if issues.is_empty() {
            Ok(())
        } else {
            Err(ConfigErrors(issues))
        }
    }

    fn validate_issues(&self) -> Vec<ConfigIssue> {
        use config::issue;
        let kind = self.experiment;
        let mut out = Vec::new();
        if let Err(diags) = self.model.validate() {
            for d in diags {
                if d.field == "lambda" && self.model.lambda == 0.0 && kind.allows_zero_activity() {
                    continue;
                }
                out.push(issue(&format!("model.{}", d.field), d.message));
            }
        }
        let finite_pos = |xs: &[f64]| xs.iter().all(|x| x.is_finite() && *x > 0.0);
        let increasing = |xs: &[f64]| xs.windows(2).all(|w| w[1] > w[0]);
        if self.replicates < kind.min_replicates() {
            out.push(issue(
                "experiment.replicates",
                format!("{} needs at least {} replicates, got {}", kind.name(), kind.min_replicates(), self.replicates),
            ));
        }
        if kind.needs_windows() {
            if self.windows.is_empty() {
                out.push(issue("experiment.windows", format!("required for {}", kind.name())));
            } else if !finite_pos(&self.windows) {
                out.push(issue("experiment.windows", "window volumes must be positive and finite"));
            } else if kind.single_window() && self.windows.len() != 1 {
                out.push(issue("experiment.windows", format!("{} takes exactly one window", kind.name())));
            }
        }
        match kind {
            ExperimentKind::Decay => {
                if self.distances.is_empty() {
                    out.push(issue("experiment.distances", "required for decay"));
                } else if !finite_pos(&self.distances) || !increasing(&self.distances) {
                    out.push(issue("experiment.distances", "must be positive and strictly increasing"));
                }
            }
            ExperimentKind::Percolate => {
                if self.lambdas.iter().any(|l| !(l.is_finite() && *l >= 0.0)) {
                    out.push(issue("experiment.lambdas", "activities must be non-negative and finite"));
                }
            }
            ExperimentKind::Decorrelate => {
                if self.edges.len() < 2 {
                    out.push(issue("experiment.edges", "decorrelate needs at least two bin edges"));
                } else if self.edges.iter().any(|e| !(e.is_finite() && *e >= 0.0)) || !increasing(&self.edges) {
                    out.push(issue("experiment.edges", "must be non-negative and strictly increasing"));
                }
            }
            ExperimentKind::MomentCheck => {
                if self.region_centers.is_empty() {
                    out.push(issue("experiment.region_centers", "required for moment-check"));
                } else if self
                    .region_centers
                    .iter()
                    .any(|c| c.len() != self.model.dim || c.iter().any(|x| !x.is_finite()))
                {
                    out.push(issue(
                        "experiment.region_centers",
                        format!("every center needs {} finite coordinates", self.model.dim),
                    ));
                }
                if !(self.region_side.is_finite() && self.region_side > 0.0) {
                    out.push(issue("experiment.region_side", "must be positive and finite"));
                }
            }
            ExperimentKind::Couple => {
                if !(self.boundary_offset.is_finite() && self.boundary_offset > 0.0) {
                    out.push(issue(
                        "experiment.boundary_offset",
                        "must be positive so the particle lies outside the window",
                    ));
                }
            }
            ExperimentKind::UstatClt if !(self.margin.is_finite() && self.margin >= 0.0) => {
                out.push(issue("experiment.margin", "must be non-negative and finite"));
            }
            _ => {}
        }
        if kind.needs_ustat() {
            match &self.ustat {
                None => out.push(issue("ustat", format!("section required for {}", kind.name()))),
                Some(u) => {
                    if let Err(e) = u.build(&self.model) {
                        out.push(issue("ustat.kernel", e.to_string()));
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid configuration:\n{0}")]
    Config(#[from] ConfigErrors),
    #[error("{experiment}: {source}")]
    Sampler {
        experiment: &'static str,
        #[source]
        source: SamplerError,
    },
    #[error("{experiment}: {source}")]
    Inference {
        experiment: &'static str,
        #[source]
        source: InferenceError,
    },
    #[error("{experiment}: {source}")]
    Percolation {
        experiment: &'static str,
        #[source]
        source: PercolationError,
    },
    #[error("cannot write {}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot encode output: {0}")]
    Encode(String),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleWindow {
    pub n: f64,
    pub counts: Vec<usize>,
    pub mean_count: f64,
    pub samples: Vec<Configuration>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleReport {
    pub sampler: SamplerChoice,
    pub windows: Vec<SampleWindow>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoupleRun {
    pub n: f64,
    pub replicate: u64,
    pub horizon: f64,
    pub dominating: usize,
    pub sample_a: usize,
    pub sample_b: usize,
    pub disagreement: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoupleReport {
    /// The extra boundary particle of the second chain.
    pub boundary: Particle,
    pub runs: Vec<CoupleRun>,
    /// Fraction of runs whose samples agree everywhere.
    pub agreement_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentCheckReport {
    pub regions: Vec<BoxRegion>,
    pub report: MomentBoundReport,
}

/// Experiment-specific results.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "experiment", rename_all = "kebab-case")]
pub enum Payload {
    Sample(SampleReport),
    Couple(CoupleReport),
    Percolate { rows: Vec<CrossingRow> },
    Decay { probe: Particle, series: DecaySeries },
    Decorrelate(DecorrelationReport),
    UstatClt(CltReport),
    MomentCheck(MomentCheckReport),
    FmeCheck(FmeReport),
    DominationCheck(DominationReport),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Spread {
    pub mean: f64,
    pub max: f64,
}

impl Spread {
    fn of(xs: &[f64]) -> Option<Self> {
        if xs.is_empty() {
            return None;
        }
        Some(Self { mean: xs.iter().sum::<f64>() / xs.len() as f64, max: xs.iter().copied().fold(f64::MIN, f64::max) })
    }
}

/// Per-replicate sampler diagnostics, summarized.
#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct RunDiagnostics {
    /// Coalescence look-back times of the CFTP runs.
    pub horizon: Option<Spread>,
    /// Proposals per accepted rejection sample.
    pub proposals: Option<Spread>,
    pub warnings: Vec<String>,
}

/// The result of [`run`]. Everything except `wall_time_s` is a deterministic function
/// of the configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    pub version: String,
    pub config: ExperimentConfig,
    pub wall_time_s: f64,
    pub payload: Payload,
    pub diagnostics: RunDiagnostics,
}

impl RunRecord {
    /// JSON of everything but the wall time; identical across reruns of the same configuration.
    pub fn deterministic_json(&self) -> String {
        #[derive(Serialize)]
        struct Stable<'a> {
            version: &'a str,
            config: &'a ExperimentConfig,
            payload: &'a Payload,
            diagnostics: &'a RunDiagnostics,
        }
        serde_json::to_string_pretty(&Stable {
            version: &self.version,
            config: &self.config,
            payload: &self.payload,
            diagnostics: &self.diagnostics,
        })
        .expect("records serialize")
    }
}

/// The particle used as probe and as extra boundary: a ball, or a horizontal segment.
fn reference_particle(model: &ModelSpec, center: &[f64]) -> Particle {
    match model.law {
        ParticleLaw::Ball => Particle::ball(center, model.radius),
        ParticleLaw::Segment { .. } => Particle::segment([center[0], center[1]], 0.0, model.radius),
    }
    .expect("validated model")
}

fn window(n: f64, dim: usize) -> Window {
    Window::new(n, dim).expect("validated window")
}

/// Validates `config`, runs the experiment and, if an output path is set, writes the record.
pub fn run(config: &ExperimentConfig) -> Result<RunRecord, HarnessError> {
    config.validate()?;
    let start = Instant::now();
    let (payload, diagnostics) = dispatch(config)?;
    let record = RunRecord {
        version: VERSION.to_string(),
        config: config.clone(),
        wall_time_s: start.elapsed().as_secs_f64(),
        payload,
        diagnostics,
    };
    if let Some(path) = &config.output {
        write_record(&record, path, config.format)?;
    }
    Ok(record)
}

/// Writes `record` to `path` as JSON or CSV.
pub fn write_record(record: &RunRecord, path: &Path, format: OutputFormat) -> Result<(), HarnessError> {
    let text = match format {
        OutputFormat::Json => record_json(record),
        OutputFormat::Csv => record_csv(record)?,
    };
    std::fs::write(path, text).map_err(|source| HarnessError::Io { path: path.to_path_buf(), source })
}

fn dispatch(c: &ExperimentConfig) -> Result<(Payload, RunDiagnostics), HarnessError> {
    let model = &c.model;
    let root = RngStream::new(c.seed, 0);
    let name = c.experiment.name();
    let inf = |source| HarnessError::Inference { experiment: name, source };
    let perc = |source| HarnessError::Percolation { experiment: name, source };
    let samp = |source| HarnessError::Sampler { experiment: name, source };
    let mut diag = RunDiagnostics::default();
    if let Ok(v) = model.validate() {
        if !v.subcritical_by_bound && matches!(c.experiment, ExperimentKind::Couple | ExperimentKind::Decay) {
            diag.warnings.push(format!(
                "activity {} is not below the percolation bound {:.6}; clusters may be large",
                model.lambda, v.percolation_bound
            ));
        }
    }
    let payload = match c.experiment {
        ExperimentKind::Sample => {
            let empty = Configuration::new();
            let mut windows = Vec::new();
            let mut horizons = Vec::new();
            let mut proposals = Vec::new();
            for (wi, &n) in c.windows.iter().enumerate() {
                let w = window(n, model.dim);
                let draws: Vec<(Configuration, f64)> = (0..c.replicates)
                    .into_par_iter()
                    .map(|r| {
                        let mut rng = root.replicate(name, wi as u64, r).rng();
                        match c.sampler {
                            SamplerChoice::Cftp => {
                                sample_gibbs_cftp(model, &w, &empty, &mut rng).map(|o| (o.sample, o.horizon))
                            }
                            SamplerChoice::Rejection => sample_gibbs_rejection(model, &w, &empty, &mut rng)
                                .map(|o| (o.sample, o.proposals as f64)),
                        }
                    })
                    .collect::<Result<_, _>>()
                    .map_err(samp)?;
                let (samples, stat): (Vec<Configuration>, Vec<f64>) = draws.into_iter().unzip();
                match c.sampler {
                    SamplerChoice::Cftp => horizons.extend(stat),
                    SamplerChoice::Rejection => proposals.extend(stat),
                }
                let counts: Vec<usize> = samples.iter().map(Configuration::len).collect();
                let mean_count = counts.iter().sum::<usize>() as f64 / counts.len() as f64;
                windows.push(SampleWindow { n, counts, mean_count, samples });
            }
            diag.horizon = Spread::of(&horizons);
            diag.proposals = Spread::of(&proposals);
            Payload::Sample(SampleReport { sampler: c.sampler, windows })
        }
        ExperimentKind::Couple => {
            let mut runs = Vec::new();
            let mut boundary = None;
            for (wi, &n) in c.windows.iter().enumerate() {
                let w = window(n, model.dim);
                let mut at = vec![0.0; model.dim];
                at[0] = w.half_side() + c.boundary_offset;
                let extra = reference_particle(model, &at);
                boundary.get_or_insert(extra);
                let chi_a = Configuration::new();
                let chi_b = Configuration::try_from_vec(vec![extra]).expect("single particle");
                let mut rows: Vec<CoupleRun> = (0..c.replicates)
                    .into_par_iter()
                    .map(|r| {
                        let mut rng = root.replicate(name, wi as u64, r).rng();
                        disagreement_couple(model, &w, &chi_a, &chi_b, &mut rng).map(|o| CoupleRun {
                            n,
                            replicate: r,
                            horizon: o.horizon,
                            dominating: o.dominating.len(),
                            sample_a: o.sample_a.len(),
                            sample_b: o.sample_b.len(),
                            disagreement: o.disagreement.len(),
                        })
                    })
                    .collect::<Result<_, _>>()
                    .map_err(samp)?;
                runs.append(&mut rows);
            }
            let horizons: Vec<f64> = runs.iter().map(|r| r.horizon).collect();
            diag.horizon = Spread::of(&horizons);
            let agreement_rate = runs.iter().filter(|r| r.disagreement == 0).count() as f64 / runs.len() as f64;
            Payload::Couple(CoupleReport { boundary: boundary.expect("at least one window"), runs, agreement_rate })
        }
        ExperimentKind::Percolate => {
            let lambdas = if c.lambdas.is_empty() { vec![model.lambda] } else { c.lambdas.clone() };
            let rows = estimate_lambda_c(model, &c.windows, &lambdas, c.replicates, root.tagged(name)).map_err(perc)?;
            Payload::Percolate { rows }
        }
        ExperimentKind::Decay => {
            let probe = reference_particle(model, &vec![0.0; model.dim]);
            let series = estimate_connection_decay(model, &probe, &c.distances, c.replicates, root.tagged(name))
                .map_err(perc)?;
            if series.fit.is_none() {
                diag.warnings.push("fewer than two positive estimates; no decay fit".into());
            }
            Payload::Decay { probe, series }
        }
        ExperimentKind::Decorrelate => {
            let w = window(c.windows[0], model.dim);
            let report = decorrelation_test(model, &w, &c.edges, c.replicates, root.tagged(name)).map_err(inf)?;
            if report.estimate.bins.iter().any(|b| b.rho2.is_none()) {
                diag.warnings.push("some bins leave nothing of the eroded window and are missing".into());
            }
            Payload::Decorrelate(report)
        }
        ExperimentKind::UstatClt => {
            let spec = c.ustat.expect("validated").build(model).map_err(|e| inf(e.into()))?;
            let reps = vec![c.replicates; c.windows.len()];
            let report =
                clt_experiment(model, &spec, &c.windows, &reps, root.tagged(name), CltOptions { margin: c.margin })
                    .map_err(inf)?;
            diag.warnings.extend(report.warnings.iter().cloned());
            Payload::UstatClt(report)
        }
        ExperimentKind::MomentCheck => {
            let w = window(c.windows[0], model.dim);
            let regions: Vec<BoxRegion> = c.region_centers.iter().map(|z| BoxRegion::cube(z, c.region_side)).collect();
            let report = moment_bound_check(model, &w, &regions, c.replicates, root.tagged(name)).map_err(inf)?;
            Payload::MomentCheck(MomentCheckReport { regions, report })
        }
        ExperimentKind::FmeCheck => {
            let spec = c.ustat.expect("validated").build(model).map_err(|e| inf(e.into()))?;
            Payload::FmeCheck(fme_truncation_check(&spec, model, c.replicates, root.tagged(name)).map_err(inf)?)
        }
        ExperimentKind::DominationCheck => {
            let w = window(c.windows[0], model.dim);
            Payload::DominationCheck(domination_check(model, &w, c.replicates, root.tagged(name)).map_err(inf)?)
        }
    };
    Ok((payload, diag))
}
