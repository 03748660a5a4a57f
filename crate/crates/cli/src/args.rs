use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Poisson transmuted-exponential count models.
#[derive(Debug, Parser)]
#[command(name = "ptex", version, about)]
pub struct Cli {
    /// Emit JSON instead of tables.
    #[arg(long, global = true)]
    pub json: bool,

    /// Significant digits in tables.
    #[arg(long, global = true, default_value_t = 6, value_parser = clap::value_parser!(u8).range(1..=17))]
    pub precision: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a PTE model to a count dataset.
    Fit(FitArgs),
    /// Draw PTE variates, one per line.
    Sample(SampleArgs),
    /// Aggregate-loss density or pmf with PTE claim counts.
    Risk(RiskArgs),
    /// PTE and Poisson log-link regression.
    Regress(RegressArgs),
    /// Goodness of fit of a saved model on a dataset.
    Gof(GofArgs),
    /// Moments and mode of a PTE law.
    Moments(MomentsArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Mle,
    Moments,
    Proportion,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Baseline {
    Poisson,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// CSV file (`value,frequency` or one count per line) or `seizure`.
    #[arg(long)]
    pub data: String,

    #[arg(long, value_enum, value_delimiter = ',', default_value = "mle")]
    pub method: Vec<MethodArg>,

    #[arg(long, value_enum)]
    pub baseline: Option<Baseline>,

    /// Treat the last chi-square cell as exactly the largest value.
    #[arg(long)]
    pub closed_tail: bool,

    /// Write a model record for the (single) fitted method.
    #[arg(long)]
    pub save: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct Params {
    #[arg(short, long, allow_negative_numbers = true)]
    pub alpha: f64,
    #[arg(short, long)]
    pub theta: f64,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[command(flatten)]
    pub params: Params,
    #[arg(short, long)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output file; stdout when absent.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RiskArgs {
    #[command(flatten)]
    pub params: Params,
    /// `exp:RATE`, `erlang2:RATE` or `discrete:PATH`.
    #[arg(long)]
    pub severity: String,
    /// Density grid `lo:hi:step` for continuous severities.
    #[arg(long, default_value = "0:10:0.5")]
    pub grid: String,
    /// Largest aggregate value for discrete severities.
    #[arg(long, default_value_t = 50)]
    pub s_max: usize,
    /// Also report `E[(S - d)+]`.
    #[arg(long)]
    pub stop_loss: Option<f64>,
}

#[derive(Debug, Args)]
pub struct RegressArgs {
    /// CSV file with a header row.
    #[arg(long)]
    pub data: String,
    #[arg(long)]
    pub response: String,
    /// Covariate columns; an intercept is always added.
    #[arg(long, value_delimiter = ',')]
    pub covariates: Vec<String>,
}

#[derive(Debug, Args)]
pub struct GofArgs {
    /// Model record written by `fit --save`.
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub data: String,
    #[arg(long)]
    pub closed_tail: bool,
}

#[derive(Debug, Args)]
pub struct MomentsArgs {
    #[command(flatten)]
    pub params: Params,
    /// Highest raw moment to list.
    #[arg(long, default_value_t = 4)]
    pub raw: u32,
}
