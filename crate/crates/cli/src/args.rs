use std::fmt;
use std::path::PathBuf;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fuzzstat_core::evaluation::Reference;
use fuzzstat_core::{AbundanceDistribution, RichnessChoice, SamplingModel};

#[derive(Debug, Parser)]
#[command(
    name = "fuzzstat",
    version,
    about = "Species-discovery statistics for fuzzing campaigns",
    long_about = "Estimates how many species (paths, statements, crash sites) a fuzzing campaign \
                  has left to find, the residual risk that the next input finds something new, \
                  and how discovery continues with more inputs."
)]
pub struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    pub format: Format,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Csv,
    JsonLines,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Richness, coverage and residual risk of a campaign.
    Estimate(EstimateArgs),
    /// Predicted species and discovery probability after more inputs or time.
    Extrapolate(ExtrapolateArgs),
    /// Additional inputs needed to reach a target species coverage.
    Effort(EffortArgs),
    /// Sample a synthetic campaign; writes snapshot CSV to stdout.
    Simulate(SimulateArgs),
    /// Bias and imprecision of an estimator over repeated campaigns.
    Evaluate(EvaluateArgs),
    /// Re-estimate whenever a snapshot log changes.
    Watch(WatchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InputFormat {
    /// Snapshot CSV if the first record is a header naming `time_s`, else events.
    Auto,
    Events,
    Snapshots,
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Event file or snapshot CSV (`-` for standard input).
    #[arg(default_value = "-")]
    pub input: String,

    #[arg(long, value_enum, default_value_t = InputFormat::Auto)]
    pub input_format: InputFormat,

    /// Sampling model. Snapshot logs default to the model their header implies,
    /// event files to multinomial.
    #[arg(long, value_parser = parse_model)]
    pub model: Option<SamplingModel>,

    /// Report every snapshot row rather than only the latest.
    #[arg(long)]
    pub all_rows: bool,
}

#[derive(Debug, Args)]
pub struct MethodArgs {
    /// Richness estimator: chao, ichao, jk1, jk2 or known:<S>.
    #[arg(long, default_value = "chao", value_parser = parse_method)]
    pub method: RichnessChoice,
}

#[derive(Debug, Args)]
pub struct BootstrapArgs {
    /// Bootstrap replicates for percentile intervals (0 disables them).
    #[arg(long, default_value_t = 0)]
    pub bootstrap: usize,

    /// Confidence level of bootstrap intervals.
    #[arg(long, default_value_t = 0.95, value_parser = parse_unit_interval)]
    pub level: f64,

    /// Seed of the bootstrap resampler.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub method: MethodArgs,
    #[command(flatten)]
    pub bootstrap: BootstrapArgs,
}

#[derive(Debug, Args)]
pub struct ExtrapolateArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub method: MethodArgs,
    #[command(flatten)]
    pub bootstrap: BootstrapArgs,

    /// Additional inputs (`50000`) or time (`30m`, `4h`); repeatable or comma-separated.
    #[arg(long = "horizon", required = true, value_delimiter = ',', value_parser = parse_horizon)]
    pub horizons: Vec<HorizonArg>,
}

#[derive(Debug, Args)]
pub struct EffortArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub method: MethodArgs,

    /// Target species coverage G* in (0, 1).
    #[arg(long, value_parser = parse_unit_interval)]
    pub target: f64,
}

#[derive(Debug, Args)]
pub struct AssemblageArgs {
    /// True number of species.
    #[arg(long, default_value_t = 1000)]
    pub species: usize,

    /// Abundance shape: uniform, geometric:<ratio> or zipf:<exponent>.
    #[arg(long, visible_alias = "dist", default_value = "uniform", value_parser = parse_distribution)]
    pub distribution: AbundanceDistribution,

    #[arg(long, default_value = "multinomial", value_parser = parse_model)]
    pub model: SamplingModel,

    /// Detection rate of the most frequent species (incidence model).
    #[arg(long, default_value_t = 0.1, value_parser = parse_rate)]
    pub max_rate: f64,

    /// Multiply the probabilities of a species' neighbours by this factor on
    /// its first discovery (adaptive bias; off by default).
    #[arg(long)]
    pub bias_boost: Option<f64>,

    /// Neighbours boosted per discovery.
    #[arg(long, default_value_t = 2)]
    pub bias_degree: usize,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub assemblage: AssemblageArgs,

    /// Inputs to generate.
    #[arg(long)]
    pub inputs: u64,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Snapshot rows, geometrically spaced in n.
    #[arg(long, default_value_t = 20)]
    pub checkpoints: usize,

    /// Simulated inputs per second, used for the `time_s` column.
    #[arg(long, default_value_t = 1000.0, value_parser = parse_positive)]
    pub rate: f64,

    /// Also write every input to this event file.
    #[arg(long)]
    pub events: Option<PathBuf>,

    /// Also write the true trajectory (discovered species, true discovery
    /// probability) to this CSV file.
    #[arg(long)]
    pub truth: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Snapshot logs of replayed campaigns, one per run. Without them, runs are simulated.
    pub logs: Vec<PathBuf>,

    #[command(flatten)]
    pub assemblage: AssemblageArgs,
    #[command(flatten)]
    pub method: MethodArgs,

    /// Inputs per simulated run.
    #[arg(long, default_value_t = 100_000)]
    pub inputs: u64,

    /// Simulated runs, seeded `seed`, `seed+1`, ...
    #[arg(long, default_value_t = 10)]
    pub runs: u64,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Report rows, geometrically spaced in n (simulated runs).
    #[arg(long, default_value_t = 12)]
    pub checkpoints: usize,

    /// Reference values: simulator-truth (default for simulated runs) or
    /// final-empirical (default for logs).
    #[arg(long, value_parser = parse_reference)]
    pub reference: Option<Reference>,

    /// Evaluate the extrapolator at this horizon instead of the richness estimator.
    #[arg(long, value_parser = parse_horizon)]
    pub horizon: Option<HorizonArg>,
}

#[derive(Debug, Args)]
pub struct WatchArgs {
    /// Snapshot log being appended to.
    pub input: PathBuf,

    #[arg(long, value_parser = parse_model)]
    pub model: Option<SamplingModel>,

    #[command(flatten)]
    pub method: MethodArgs,
    #[command(flatten)]
    pub bootstrap: BootstrapArgs,

    /// Polling interval.
    #[arg(long, default_value = "5s", value_parser = humantime::parse_duration)]
    pub interval: Duration,

    /// Stop after this many polls (0 polls forever).
    #[arg(long, default_value_t = 0)]
    pub iterations: u64,
}

/// An extrapolation horizon as given on the command line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HorizonArg {
    Inputs(u64),
    Seconds { seconds: u64, label: String },
}

impl fmt::Display for HorizonArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HorizonArg::Inputs(m) => write!(f, "{m}"),
            HorizonArg::Seconds { label, .. } => f.write_str(label),
        }
    }
}

fn parse_horizon(s: &str) -> Result<HorizonArg, String> {
    let s = s.trim();
    if let Ok(m) = s.parse::<u64>() {
        return Ok(HorizonArg::Inputs(m));
    }
    let d = humantime::parse_duration(s)
        .map_err(|e| format!("`{s}` is neither an input count nor a duration: {e}"))?;
    if d.subsec_nanos() != 0 {
        return Err(format!("duration `{s}` must be a whole number of seconds"));
    }
    Ok(HorizonArg::Seconds {
        seconds: d.as_secs(),
        label: s.to_string(),
    })
}

fn parse_model(s: &str) -> Result<SamplingModel, String> {
    s.parse().map_err(|e: fuzzstat_core::Error| e.to_string())
}

fn parse_method(s: &str) -> Result<RichnessChoice, String> {
    s.parse().map_err(|e: fuzzstat_core::Error| e.to_string())
}

fn parse_distribution(s: &str) -> Result<AbundanceDistribution, String> {
    s.parse().map_err(|e: fuzzstat_core::Error| e.to_string())
}

fn parse_reference(s: &str) -> Result<Reference, String> {
    s.parse().map_err(|e: fuzzstat_core::Error| e.to_string())
}

fn parse_unit_interval(s: &str) -> Result<f64, String> {
    let x: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if x > 0.0 && x < 1.0 {
        Ok(x)
    } else {
        Err(format!("{x} must lie strictly between 0 and 1"))
    }
}

fn parse_rate(s: &str) -> Result<f64, String> {
    let x: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if x > 0.0 && x <= 1.0 {
        Ok(x)
    } else {
        Err(format!("{x} must lie in (0, 1]"))
    }
}

fn parse_positive(s: &str) -> Result<f64, String> {
    let x: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(format!("{x} must be positive"))
    }
}
