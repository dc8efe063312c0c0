use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dapsim::harness::{
    parse_config, record_csv, record_json, run, write_record, ExperimentKind, HarnessError, OutputFormat,
};

#[derive(Parser)]
#[command(name = "dapsim", version, about = "Exact simulation and diagnostics for repulsive Gibbs particle processes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw exact samples of the model in each window.
    Sample(Flags),
    /// Run the disagreement coupling against one extra boundary particle.
    Couple(Flags),
    /// Crossing probabilities of the Boolean model over activities and windows.
    Percolate(Flags),
    /// Decay of the connection probability with distance.
    Decay(Flags),
    /// Binned pair correlation and its decorrelation.
    Decorrelate(Flags),
    /// Scaled moments and normality of a U-statistic over growing windows.
    UstatClt(Flags),
    /// Product moments over disjoint regions against the Poisson bound.
    MomentCheck(Flags),
    /// Randomized checks of the truncated factorial moment expansion.
    FmeCheck(Flags),
    /// Stochastic domination of the particle count by the Poisson count.
    DominationCheck(Flags),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct Flags {
    /// Experiment configuration file.
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Root seed; overrides the configuration.
    #[arg(long)]
    seed: Option<u64>,
    /// Replicate count; overrides the configuration.
    #[arg(long)]
    replicates: Option<u64>,
    /// Output file; overrides the configuration. Without any, the record goes to stdout.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Output format; overrides the configuration.
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Worker threads for replicates (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

impl Command {
    fn split(self) -> (ExperimentKind, Flags) {
        match self {
            Command::Sample(f) => (ExperimentKind::Sample, f),
            Command::Couple(f) => (ExperimentKind::Couple, f),
            Command::Percolate(f) => (ExperimentKind::Percolate, f),
            Command::Decay(f) => (ExperimentKind::Decay, f),
            Command::Decorrelate(f) => (ExperimentKind::Decorrelate, f),
            Command::UstatClt(f) => (ExperimentKind::UstatClt, f),
            Command::MomentCheck(f) => (ExperimentKind::MomentCheck, f),
            Command::FmeCheck(f) => (ExperimentKind::FmeCheck, f),
            Command::DominationCheck(f) => (ExperimentKind::DominationCheck, f),
        }
    }
}

fn main() -> ExitCode {
    let (kind, flags) = Cli::parse().command.split();
    let text = match std::fs::read_to_string(&flags.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", flags.config.display());
            return ExitCode::from(2);
        }
    };
    let mut config = match parse_config(&text) {
        Ok(c) => c,
        Err(errs) => {
            eprintln!("error: invalid configuration {}", flags.config.display());
            for issue in &errs.0 {
                eprintln!("  {issue}");
            }
            return ExitCode::from(2);
        }
    };
    if config.experiment != kind {
        eprintln!(
            "error: {} describes a {} experiment, not {}",
            flags.config.display(),
            config.experiment.name(),
            kind.name()
        );
        return ExitCode::from(2);
    }
    if let Some(seed) = flags.seed {
        config.seed = seed;
    }
    if let Some(r) = flags.replicates {
        config.replicates = r;
    }
    if let Some(f) = flags.format {
        config.format = match f {
            Format::Json => OutputFormat::Json,
            Format::Csv => OutputFormat::Csv,
        };
    }
    if flags.out.is_some() {
        config.output = flags.out.clone();
    }
    if let Some(t) = flags.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: cannot start {t} threads: {e}");
            return ExitCode::from(2);
        }
    }
    // Write after the run so stdout mode and file mode share one code path.
    let target = config.output.take();
    let record = match run(&config) {
        Ok(r) => r,
        Err(HarnessError::Config(errs)) => {
            eprintln!("error: invalid configuration");
            for issue in &errs.0 {
                eprintln!("  {issue}");
            }
            return ExitCode::from(2);
        }
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    };
    for w in &record.diagnostics.warnings {
        eprintln!("warning: {w}");
    }
    let written = match &target {
        Some(path) => write_record(&record, path, config.format),
        None => {
            let text = match config.format {
                OutputFormat::Json => Ok(record_json(&record)),
                OutputFormat::Csv => record_csv(&record),
            };
            text.map(|t| print!("{t}"))
        }
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return ExitCode::FAILURE;
    }
    ExitCode::SUCCESS
}
