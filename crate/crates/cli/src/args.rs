use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "driftlab",
    version,
    about = "Drift-field dynamics, friction schedules and toy training"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Iterate the two-particle surrogate and log the trajectory.
    Surrogate(SurrogateArgs),
    /// Cobweb diagram of the frictionless surrogate map.
    Cobweb(CobwebArgs),
    /// Randomized checks of the cumulative bounds.
    Bounds(BoundsArgs),
    /// Drift and density gap scans over random measure pairs.
    Identifiability(IdentifiabilityArgs),
    /// Train the 2D toy generator and score it.
    Toy(ToyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    #[value(name = "csv+svg")]
    CsvSvg,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Output directory (created if missing).
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

impl Common {
    pub fn svg(&self) -> bool {
        self.format == Format::CsvSvg
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Variant {
    HeavyBall,
    Hybrid,
}

#[derive(Debug, Args)]
pub struct SurrogateArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = 1.0)]
    pub tau: f64,
    /// Initial distance `a0` (or `x0` for second order).
    #[arg(long, default_value_t = 0.08)]
    pub a0: f64,
    /// linear, constant:C, quadratic, quadratic-raw, sine, delayed[:I0]
    #[arg(long, default_value = "linear")]
    pub schedule: String,
    /// Horizon (number of steps).
    #[arg(long = "T", default_value_t = 100)]
    pub horizon: usize,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub order: u8,
    /// Second order only: `surrogate` or `frozen:ETA`.
    #[arg(long)]
    pub drive: Option<String>,
    /// Second order only.
    #[arg(long, value_enum)]
    pub variant: Option<Variant>,
    /// Also run the frictionless trajectory and overlay it.
    #[arg(long)]
    pub baseline: bool,
}

#[derive(Debug, Args)]
pub struct CobwebArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = 1.0)]
    pub tau: f64,
    #[arg(long, default_value_t = 0.08)]
    pub a0: f64,
    #[arg(long = "T", default_value_t = 30)]
    pub horizon: usize,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[command(flatten)]
    pub common: Common,
    /// Comma-separated admissible schedules cycled over first-order trials.
    #[arg(long, default_value = "linear,quadratic,sine,delayed")]
    pub schedules: String,
    #[arg(long = "T", default_value_t = 100)]
    pub horizon: usize,
    /// Margin bound; defaults to each trajectory's observed maximum
    /// (first order) or 1 (frozen second order).
    #[arg(long)]
    pub eta_max: Option<f64>,
    /// Trials per order.
    #[arg(long, default_value_t = 200)]
    pub trials: usize,
    #[arg(long, default_value_t = 1.0)]
    pub tau: f64,
}

#[derive(Debug, Args)]
pub struct IdentifiabilityArgs {
    #[command(flatten)]
    pub common: Common,
    /// gaussian or laplace
    #[arg(long, default_value = "gaussian")]
    pub kernel: String,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    /// Grid points per axis on [-5, 5]^dim.
    #[arg(long, default_value_t = 61)]
    pub grid: usize,
    #[arg(long, default_value_t = 5)]
    pub atoms: usize,
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    #[arg(long, default_value_t = 1.0)]
    pub tau: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Dm,
    Dmf,
}

#[derive(Debug, Args)]
pub struct ToyArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum, default_value = "dmf")]
    pub method: Method,
    /// Friction schedule for dmf (overrides the config).
    #[arg(long)]
    pub schedule: Option<String>,
    /// Comma-separated seeds; overrides --seed.
    #[arg(long)]
    pub seeds: Option<String>,
    /// Flat `key = value` config file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Config override `KEY=VALUE`, repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    #[arg(long, default_value_t = driftlab::toy::DEFAULT_N_EVAL)]
    pub n_eval: usize,
    /// Run the schedule ablation (linear, constant:0.5, quadratic, sine,
    /// delayed) plus the frictionless baseline.
    #[arg(long)]
    pub ablation: bool,
    /// Generated and target points written per run for plotting.
    #[arg(long, default_value_t = 2000)]
    pub dump: usize,
}
