use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "curvlab",
    version,
    about = "Entropic Ricci curvature bounds for finite Markov chains"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build the model and check its chain and mapping representation.
    Validate(Common),
    /// Run every applicable criterion and print the best certified bound.
    Bound(BoundArgs),
    /// Sweep the inverse temperature of an Ising-type model.
    Scan(ScanArgs),
    /// Cross-check the best bound numerically.
    Verify(VerifyArgs),
    /// Eigenvalues of the generator and the spectral gap.
    Spectrum(Common),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Table,
}

#[derive(Debug, Args)]
#[command(group = clap::ArgGroup::new("source").required(true).args(["model", "inline"]))]
pub struct Common {
    /// Model description as a JSON file.
    #[arg(long, value_name = "PATH")]
    pub model: Option<PathBuf>,
    /// Model description given directly as JSON.
    #[arg(long, value_name = "JSON")]
    pub inline: Option<String>,
    /// Write the output here instead of stdout.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct BoundArgs {
    #[command(flatten)]
    pub common: Common,
    /// Split of the moves for the split criterion, as `H1=a,b,...,H2=c,d,...`
    /// with move indices or names.
    #[arg(long, value_name = "H1=..,H2=..")]
    pub split: Option<String>,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = 0.001)]
    pub beta_min: f64,
    #[arg(long, default_value_t = 0.5)]
    pub beta_max: f64,
    #[arg(long, default_value_t = 200)]
    pub beta_steps: usize,
    /// Space the grid geometrically instead of evenly.
    #[arg(long)]
    pub log_spaced: bool,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub bound: BoundArgs,
    #[arg(long, default_value_t = 2000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Number of best samples polished by coordinate descent.
    #[arg(long, default_value_t = 10)]
    pub refine: usize,
    /// Also write the JSON report here.
    #[arg(long, value_name = "PATH")]
    pub report: Option<PathBuf>,
    /// Evaluate the Hessian form by the explicit triple sum.
    #[arg(long)]
    pub oracle_b: bool,
    /// Multiplies the certified bound before checking it. Negative control
    /// for test harnesses.
    #[arg(long, hide = true, value_name = "FACTOR")]
    pub inflate_bound: Option<f64>,
}
