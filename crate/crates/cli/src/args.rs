use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use divcap_core::ModelParams;

use crate::CliError;

/// Optimal dividends with capital injection under a payout barrier.
#[derive(Debug, Parser)]
#[command(name = "divcap", version, allow_negative_numbers = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Barriers, cost regime, optimal strategy and values.
    Solve(SolveArgs),
    /// Write G, H and V along a surplus grid or a payout-barrier grid.
    Sweep(SweepArgs),
    /// Monte Carlo estimate of a barrier strategy.
    Simulate(SimulateArgs),
    /// Numerical certification of the closed-form solution.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// mu = 0.04, sigma^2 = 0.15, alpha = 0.05, k = 1.01.
    Paper,
}

#[derive(Debug, Clone, Args)]
pub struct ParamArgs {
    /// Start from a built-in parameter set; explicit flags override it.
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    /// Drift.
    #[arg(long)]
    pub mu: Option<f64>,
    /// Variance sigma^2.
    #[arg(long, conflicts_with = "sigma")]
    pub sigma2: Option<f64>,
    /// Volatility sigma, as an alternative to --sigma2.
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Discount rate.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Proportional cost of injected capital.
    #[arg(long)]
    pub k: Option<f64>,
    /// Payout barrier: dividends only while the surplus is at or above it.
    #[arg(long)]
    pub br: Option<f64>,
}

impl ParamArgs {
    pub fn resolve(&self) -> Result<ModelParams, CliError> {
        let base = self.preset.map(|Preset::Paper| {
            ModelParams::reference(0.0).expect("reference parameters are valid")
        });
        let pick = |flag: Option<f64>, preset: Option<f64>, name: &str| {
            flag.or(preset).ok_or_else(|| {
                CliError::Usage(format!("missing --{name} (or pass --preset paper)"))
            })
        };
        let mu = pick(self.mu, base.map(|p| p.mu), "mu")?;
        let alpha = pick(self.alpha, base.map(|p| p.alpha), "alpha")?;
        let k = pick(self.k, base.map(|p| p.k), "k")?;
        let b_r = self.br.unwrap_or(0.0);
        let params = match (self.sigma2, self.sigma) {
            (Some(s2), _) => ModelParams::from_variance(mu, s2, alpha, k, b_r),
            (None, Some(s)) => ModelParams::new(mu, s, alpha, k, b_r),
            (None, None) => {
                let sigma = pick(None, base.map(|p| p.sigma), "sigma2")?;
                ModelParams::new(mu, sigma, alpha, k, b_r)
            }
        };
        Ok(params?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Significant digits for text and CSV numbers. CSV defaults to the
    /// shortest round-trip form, text to 6 digits; JSON is always exact.
    #[arg(long)]
    pub precision: Option<usize>,
    /// Directory for data files.
    #[arg(long, env = "DIVCAP_OUT_DIR", default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[command(flatten)]
    pub output: OutputArgs,
    /// Surplus levels at which to report G, H and V.
    #[arg(long, value_delimiter = ',')]
    pub x0: Vec<f64>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(subcommand)]
    pub mode: SweepCommand,
}

#[derive(Debug, Subcommand)]
pub enum SweepCommand {
    /// Values against the surplus x, one file per payout barrier.
    Surplus(SurplusArgs),
    /// Values against the payout barrier b_r, one file per surplus.
    Barrier(BarrierArgs),
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    /// Number of evenly spaced points from 0 to the grid maximum.
    #[arg(long, default_value_t = divcap_core::sweep::DEFAULT_POINTS)]
    pub points: usize,
    /// Explicit grid, overriding --points and the grid maximum.
    #[arg(long, value_delimiter = ',')]
    pub grid: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
pub struct SurplusArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[command(flatten)]
    pub output: OutputArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Payout barriers, one output file each; defaults to --br.
    #[arg(long, value_delimiter = ',')]
    pub br_values: Vec<f64>,
    #[arg(long, default_value_t = 4.0)]
    pub x_max: f64,
}

#[derive(Debug, Args)]
pub struct BarrierArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[command(flatten)]
    pub output: OutputArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Surplus levels, one output file each.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub x: Vec<f64>,
    #[arg(long, default_value_t = 8.0)]
    pub br_max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StrategyChoice {
    /// The optimal strategy for the parameters.
    Auto,
    Upper,
    Double,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[command(flatten)]
    pub output: OutputArgs,
    #[arg(long, value_enum, default_value_t = StrategyChoice::Auto)]
    pub strategy: StrategyChoice,
    /// Reflection barrier; defaults to the effective barrier of the strategy.
    #[arg(long)]
    pub barrier: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub x0: f64,
    #[arg(long, default_value_t = 100_000)]
    pub paths: usize,
    #[arg(long, default_value_t = 0.005)]
    pub dt: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Independent paths instead of antithetic pairs.
    #[arg(long)]
    pub no_antithetic: bool,
    /// Simulation horizon; defaults to where the discount factor drops below 1e-9.
    #[arg(long)]
    pub horizon: Option<f64>,
    /// Estimate ruin-time moments over a fixed horizon (upper barrier only).
    #[arg(long)]
    pub ruin_moments: bool,
    /// Write the first path to a CSV file in the output directory.
    #[arg(long)]
    pub trace: bool,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[command(flatten)]
    pub output: OutputArgs,
    /// Also certify this many randomly drawn parameter sets, each at seven
    /// payout barriers.
    #[arg(long, default_value_t = 0)]
    pub samples: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}
