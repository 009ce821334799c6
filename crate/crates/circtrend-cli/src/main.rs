//! `circtrend` — circular trend-surface estimation over spatial covariates.
//!
//! Subcommands: `simulate`, `fit`, `select`, `benchmark`, `predict`,
//! `residuals`. Every command is deterministic given its configuration;
//! seeds are explicit. Exit codes: 0 success, 2 validation failure,
//! 3 numerical failure.

mod cli_error;
mod commands;
mod config;
mod hmat;
mod io;

use clap::{Parser, Subcommand};
use cli_error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "circtrend",
    version,
    about = "Nonparametric circular trend-surface estimation with spatially correlated errors"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate a scenario: write a dataset CSV and the true trend CSV.
    Simulate(commands::simulate::Args),
    /// Fit the circular trend surface on an evaluation grid.
    Fit(commands::fit::Args),
    /// Select a bandwidth matrix by CV/MCV on a dataset.
    Select(commands::select::Args),
    /// Run a Monte Carlo benchmark of bandwidth selectors.
    Benchmark(commands::benchmark::Args),
    /// Train/test prediction with a selected or given bandwidth.
    Predict(commands::predict::Args),
    /// Signed residuals of a fitted surface at the data points.
    Residuals(commands::residuals::Args),
}

fn init_threads() {
    if let Ok(v) = std::env::var("CIRCTREND_THREADS") {
        if let Ok(n) = v.parse::<usize>() {
            if n >= 1 {
                // Ignore the error if a global pool already exists.
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }
}

fn main() {
    init_threads();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Simulate(args) => commands::simulate::run(args),
        Command::Fit(args) => commands::fit::run(args),
        Command::Select(args) => commands::select::run(args),
        Command::Benchmark(args) => commands::benchmark::run(args),
        Command::Predict(args) => commands::predict::run(args),
        Command::Residuals(args) => commands::residuals::run(args),
    };
    if let Err(e) = outcome {
        eprintln!("error: {e}");
        std::process::exit(match e {
            CliError::Validation(_) => 2,
            CliError::Numerical(_) => 3,
        });
    }
}
