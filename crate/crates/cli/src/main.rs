//! `expgeo`: command-line front end for Bregman-geometric estimation.
//!
//! Every command prints a JSON run report to stdout (or `--out`). Exit codes:
//! 0 success, 1 a `check` diagnostic failed, 2 bad input, 3 a solver did not
//! converge.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::commands::CliError;
use crate::report::RunReport;

#[derive(Parser, Debug)]
#[command(name = "expgeo", version, about = "Bregman geometry of exponential families")]
struct Cli {
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// ML or MAP estimate from a CSV of sufficient statistics.
    Fit(FitArgs),
    /// Bregman and alpha-divergences between two points.
    Divergence(DivergenceArgs),
    /// Fit the coupled generative/discriminative naive Bayes model.
    Hybrid(HybridArgs),
    /// Run the numerical self-checks.
    Check(CheckArgs),
}

#[derive(Args, Debug)]
pub struct FitArgs {
    /// Family name, optionally `name:param` (variance or number of categories).
    #[arg(long)]
    pub family: String,
    /// CSV with one row of sufficient statistics per observation.
    #[arg(long)]
    pub data: PathBuf,
    /// Prior alpha, comma separated. Requires `--beta`.
    #[arg(long, allow_hyphen_values = true, requires = "beta")]
    pub alpha: Option<String>,
    /// Prior strength in pseudo-observations. Requires `--alpha`.
    #[arg(long, requires = "alpha")]
    pub beta: Option<f64>,
    /// Coordinates for the numerical cross-check.
    #[arg(long, default_value = "mean")]
    pub space: expgeo::Space,
    #[arg(long, default_value_t = expgeo::estimation::MEDIAN_MAX_ITER)]
    pub max_iter: usize,
    /// Gradient-norm tolerance of the numerical cross-check.
    #[arg(long, default_value_t = expgeo::estimation::MEDIAN_TOL)]
    pub tol: f64,
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
pub struct DivergenceArgs {
    #[arg(long)]
    pub family: String,
    /// Coordinates of P and Q.
    #[arg(long, default_value = "mean")]
    pub space: expgeo::Space,
    /// Alpha indices in [-1, 1], comma separated.
    #[arg(long, allow_hyphen_values = true)]
    pub alpha_index: Option<String>,
    /// First point, comma separated.
    pub p: String,
    /// Second point, comma separated.
    pub q: String,
}

#[derive(Args, Debug)]
pub struct HybridArgs {
    /// CSV of binary features and a 0/1 label column (blank = unlabeled).
    /// Synthetic data is drawn from `--seed` when omitted.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Coupling strength; `inf` ties the two parameter vectors.
    #[arg(long, default_value = "1")]
    pub lambda: String,
    #[arg(long, env = "EXPGEO_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 10_000)]
    pub max_iter: usize,
    #[arg(long, default_value_t = 1e-7)]
    pub tol: f64,
}

#[derive(Args, Debug)]
pub struct CheckArgs {
    /// Restrict to one family; all built-in families otherwise.
    #[arg(long)]
    pub family: Option<String>,
    #[arg(long, env = "EXPGEO_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Tolerance of the round-trip and duality checks.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
}

fn run(cli: Cli, argv: Vec<String>) -> Result<RunReport, CliError> {
    match cli.command {
        Command::Fit(a) => commands::fit::run(&a, argv),
        Command::Divergence(a) => commands::divergence::run(&a, argv),
        Command::Hybrid(a) => commands::hybrid::run(&a, argv),
        Command::Check(a) => commands::check::run(&a, argv),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let argv: Vec<String> = std::env::args().skip(1).collect();
    let out = cli.out.clone();
    let is_check = matches!(cli.command, Command::Check(_));
    let start = Instant::now();
    let mut report = match run(cli, argv) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code());
        }
    };
    report.wall_time_seconds = start.elapsed().as_secs_f64();
    let text = match serde_json::to_string_pretty(&report) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match out {
        Some(path) => {
            if let Err(e) = std::fs::write(&path, text + "\n") {
                eprintln!("error: {}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
        None => println!("{text}"),
    }
    if is_check && !report.all_passed() {
        eprintln!("error: one or more checks failed");
        return ExitCode::from(1);
    }
    ExitCode::SUCCESS
}
