//! `vwa`: denoising, confidence intervals and coverage simulations with the
//! vertically weighted average.

mod commands;
mod config;
mod input;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use vwa_core::intervals::PartialTwoStage;
use vwa_core::VwaError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Degenerate(String),
    #[error("{}", insufficient_message(.0))]
    Insufficient(Box<PartialTwoStage>),
}

fn insufficient_message(p: &PartialTwoStage) -> String {
    format!(
        "insufficient data: needed {} neighbors, source supplied {}",
        p.required_neighbors, p.drawn
    )
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Degenerate(_) => 3,
            CliError::Insufficient(_) => 4,
        }
    }
}

impl From<VwaError> for CliError {
    fn from(e: VwaError) -> Self {
        match e {
            VwaError::InsufficientData { partial } => CliError::Insufficient(partial),
            e if e.is_degeneracy() => CliError::Degenerate(e.to_string()),
            e => CliError::Usage(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "vwa", version, about = "Vertically weighted averages: denoising, intervals, simulations")]
pub struct Cli {
    /// Flat key = value file; command-line flags take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Denoise a series point by point.
    Denoise(DenoiseArgs),
    /// Fixed-sample confidence interval; the last row is the current observation.
    Ci(CiArgs),
    /// Two-stage fixed-width interval from a file or a generated stream.
    FixedWidth(FixedWidthArgs),
    /// Reproduce a coverage table.
    Simulate(SimulateArgs),
    /// Standard deviation of the estimator across current values.
    SdProfile(SdProfileArgs),
}

#[derive(Debug, Args)]
pub struct KernelArgs {
    /// Kernel family: gaussian or uniform [default: gaussian].
    #[arg(long)]
    kernel: Option<String>,
    /// Kernel scale [default: 0.6; 0.4 for sd-profile].
    #[arg(long)]
    sigma: Option<f64>,
    /// Constant added to every weight [default: 0].
    #[arg(long)]
    ridge: Option<f64>,
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// CSV file with the observations.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Column name or 0-based index; required for multi-column files.
    #[arg(long)]
    column: Option<String>,
}

#[derive(Debug, Args)]
pub struct DenoiseArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    kernel: KernelArgs,
    /// Output CSV [default: standard output].
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CiArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    kernel: KernelArgs,
    /// jackknife (conditional) or bootstrap (unconditional) [default: jackknife].
    #[arg(long)]
    method: Option<String>,
    /// Confidence level [default: 0.95].
    #[arg(long)]
    level: Option<f64>,
    /// Bootstrap replications [default: 1000].
    #[arg(long)]
    boot_reps: Option<usize>,
    /// Master seed [default: 20240601].
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct FixedWidthArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    kernel: KernelArgs,
    /// Draw neighbors from a law: normal, normal(m), laplace, uniform, point(c).
    #[arg(long, conflicts_with = "input")]
    generate: Option<String>,
    /// Current observation Y_N.
    #[arg(long, allow_negative_numbers = true)]
    current: Option<f64>,
    /// Half-width of the interval.
    #[arg(long)]
    d: Option<f64>,
    /// Confidence level [default: 0.95].
    #[arg(long)]
    level: Option<f64>,
    /// clt or bootstrap [default: clt].
    #[arg(long)]
    variant: Option<String>,
    /// Fixed first-stage size instead of the rule.
    #[arg(long)]
    n0: Option<usize>,
    /// Bootstrap replications [default: 2000].
    #[arg(long)]
    boot_reps: Option<usize>,
    /// Smooth bootstrap [default: true].
    #[arg(long)]
    smooth: Option<bool>,
    /// Master seed [default: 20240601].
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// classi, marginal-bt, fw-fixed, fw-rule, fw-boot or sd-profile.
    #[arg(long)]
    table: Option<String>,
    /// Output CSV [default: standard output, text table on standard error].
    #[arg(long)]
    output: Option<PathBuf>,
    /// Full-scale run counts and oracle budget.
    #[arg(long)]
    full_scale: bool,
    /// Run without the thread pool.
    #[arg(long)]
    serial: bool,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    oracle_size: Option<usize>,
    #[arg(long)]
    boot_reps: Option<usize>,
    #[arg(long)]
    smooth: Option<bool>,
    #[arg(long)]
    seed: Option<u64>,
    /// Error law: normal, normal(m), laplace, uniform, point(c).
    #[arg(long)]
    law: Option<String>,
    #[arg(long)]
    kernel: Option<String>,
    #[arg(long)]
    ridge: Option<f64>,
    /// Kernel scales, comma separated.
    #[arg(long, value_delimiter = ',')]
    sigma: Vec<f64>,
    /// Sample sizes, comma separated.
    #[arg(long, value_delimiter = ',')]
    n: Vec<usize>,
    /// Half-widths, comma separated.
    #[arg(long, value_delimiter = ',')]
    d: Vec<f64>,
    /// Fixed first-stage sizes, comma separated.
    #[arg(long, value_delimiter = ',')]
    n0: Vec<usize>,
    /// Confidence levels, comma separated.
    #[arg(long, value_delimiter = ',')]
    level: Vec<f64>,
    /// Quantile levels of the current observation, comma separated.
    #[arg(long, value_delimiter = ',')]
    q: Vec<f64>,
}

#[derive(Debug, Args)]
pub struct SdProfileArgs {
    /// Output CSV [default: standard output].
    #[arg(long)]
    output: Option<PathBuf>,
    #[command(flatten)]
    kernel: KernelArgs,
    /// Sample size n [default: 30].
    #[arg(long)]
    n: Option<usize>,
    /// Runs per grid point [default: 10000].
    #[arg(long)]
    runs: Option<usize>,
    /// Grid step [default: 0.025].
    #[arg(long)]
    step: Option<f64>,
    #[arg(long)]
    law: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    serial: bool,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version exit 0, usage errors exit 2.
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("vwa: {e}");
            if let CliError::Insufficient(p) = &e {
                println!("{}", commands::partial_line(p));
            }
            ExitCode::from(e.exit_code())
        }
    }
}
