//! Command-line interface for the seqlasso library: synthetic benchmark
//! cells, selection on CSV datasets, path inspection, and support-recovery
//! condition checks.
//!
//! Exit codes: 0 success, 2 configuration error, 3 runtime failure.

mod commands {
    pub mod check;
    pub mod select;
    pub mod simulate;
}
mod config;
mod csvio;
mod errors;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "seqlasso",
    version,
    about = "Sequential-lasso feature selection, benchmark harness, and condition checkers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run Monte-Carlo benchmark cells and write result tables
    Simulate(SimulateArgs),
    /// Select features from a CSV dataset (selector + EBIC)
    Select(SelectArgs),
    /// Print the full selection path on a CSV dataset
    Path(PathArgs),
    /// Check support-recovery conditions on data or analytic fixtures
    CheckConditions(CheckArgs),
}

#[derive(Args)]
pub struct SimulateArgs {
    /// key=value configuration file; flags override file entries
    #[arg(long)]
    config: Option<PathBuf>,
    /// Sample sizes, comma separated (cells are crossed with structures)
    #[arg(long, value_delimiter = ',')]
    n: Vec<usize>,
    /// Covariance structures: A1 A2 A3 B1 B2 B3, comma separated
    #[arg(long, value_delimiter = ',')]
    structure: Vec<String>,
    /// Coefficient type: 1 (random signs) or 2 (deterministic)
    #[arg(long)]
    coef_type: Option<String>,
    /// Signal fraction in (0,1); defaults to 0.8 with a notice
    #[arg(long)]
    h: Option<f64>,
    /// Correlation parameter for A2, A3, B2, B3
    #[arg(long)]
    rho: Option<f64>,
    /// Replicates per cell (default 200)
    #[arg(long)]
    replicates: Option<usize>,
    /// Random seed; falls back to SEQLASSO_SEED, then 0
    #[arg(long)]
    seed: Option<u64>,
    /// Selectors to run: lasso, fsr, slasso, omp
    #[arg(long, value_delimiter = ',')]
    selectors: Vec<String>,
    /// Step budget K (default min(ceil(n/2), p))
    #[arg(long)]
    k: Option<usize>,
    /// Fixed EBIC gamma
    #[arg(long)]
    gamma: Option<f64>,
    /// EBIC gamma rule parameter r (gamma = 1 - ln n / (2 r ln p))
    #[arg(long)]
    gamma_rule_r: Option<f64>,
    /// Worker thread cap (default: available parallelism)
    #[arg(long)]
    threads: Option<usize>,
    /// Results CSV path (default results.csv)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Mean(sd) table path (default results.txt)
    #[arg(long)]
    table_out: Option<PathBuf>,
    /// Override the feature count p
    #[arg(long)]
    p_override: Option<usize>,
    /// Override the causal count p0
    #[arg(long)]
    p0_override: Option<usize>,
}

#[derive(Args)]
pub struct SelectArgs {
    /// CSV dataset with a header row
    #[arg(long)]
    data: PathBuf,
    /// Name of the response column
    #[arg(long)]
    response: String,
    /// Selector: slasso (default), omp, fsr, lasso
    #[arg(long, default_value = "slasso")]
    selector: String,
    /// Step budget K
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    gamma_rule_r: Option<f64>,
    /// Report file (default select_report.txt)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
pub struct PathArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    response: String,
    #[arg(long, default_value = "slasso")]
    selector: String,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    gamma_rule_r: Option<f64>,
    /// Optional CSV output of the per-step table
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
pub struct CheckArgs {
    /// CSV dataset (data mode)
    #[arg(long)]
    data: Option<PathBuf>,
    /// Response column (data mode)
    #[arg(long)]
    response: Option<String>,
    /// Candidate support: comma-separated 1-based indices or column names
    #[arg(long)]
    support: Option<String>,
    /// Optional coefficients aligned with --support (default: refit)
    #[arg(long)]
    beta: Option<String>,
    /// Analytic fixture instead of data: I or II
    #[arg(long)]
    special_case: Option<String>,
    /// Correlation for special case I
    #[arg(long)]
    rho: Option<f64>,
    /// Support size for the special cases
    #[arg(long)]
    p0: Option<usize>,
    /// Total feature count for special case II (default 3 p0)
    #[arg(long)]
    p: Option<usize>,
}

fn main() -> ExitCode {
    // die quietly when a pager or `head` closes the pipe
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate(args) => commands::simulate::run(args),
        Command::Select(args) => commands::select::run_select(args),
        Command::Path(args) => commands::select::run_path(args),
        Command::CheckConditions(args) => commands::check::run(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
