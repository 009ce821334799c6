//! `circtrend simulate` — draw one scenario sample and write it to CSV.

use crate::cli_error::{numerical, CliResult};
use crate::config::{self, Config};
use crate::io;
use circtrend::simulate::generate_sample_seeded;
use std::path::PathBuf;

/// Scenario parameters shared by `simulate` and `benchmark`.
#[derive(Debug, clap::Args)]
pub struct ScenarioFlags {
    /// Trend function: r1 | r2.
    #[arg(long)]
    pub regression: Option<String>,
    /// Error process: wrapped | projected.
    #[arg(long)]
    pub errors: Option<String>,
    /// Correlation model: exponential | rational_quadratic.
    #[arg(long)]
    pub corr: Option<String>,
    /// Correlation range (or scale) parameter.
    #[arg(long)]
    pub range: Option<f64>,
    /// Wrapped-process variance.
    #[arg(long)]
    pub sigma2: Option<f64>,
    /// Wrapped-process mean direction.
    #[arg(long)]
    pub mu: Option<f64>,
    /// Projected-process mean, first component.
    #[arg(long)]
    pub mu1: Option<f64>,
    /// Projected-process mean, second component.
    #[arg(long)]
    pub mu2: Option<f64>,
    /// Projected-process sigma.
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Projected-process cross-correlation tau in [-1, 1].
    #[arg(long)]
    pub tau: Option<f64>,
    /// Sample size (perfect square; regular grid on the unit square).
    #[arg(long)]
    pub n: Option<usize>,
    /// RNG seed.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Flat key = value config file; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub scenario: ScenarioFlags,
    /// Output dataset CSV.
    #[arg(long, default_value = "dataset.csv")]
    pub out: PathBuf,
    /// Output CSV with the true trend at the sample locations.
    #[arg(long, default_value = "truth.csv")]
    pub truth_out: PathBuf,
}

pub fn run(args: Args) -> CliResult<()> {
    let cfg = Config::load(args.config.as_deref())?;
    let scenario = scenario_from(&args.scenario, &cfg)?;
    let (sample, truth) = generate_sample_seeded(&scenario).map_err(numerical)?;
    io::write_dataset(&args.out, &sample, Some(scenario.seed))?;
    io::write_truth(&args.truth_out, sample.locations(), &truth, Some(scenario.seed))?;
    println!(
        "wrote {} observations to {} (truth in {})",
        sample.n(),
        args.out.display(),
        args.truth_out.display()
    );
    Ok(())
}

pub fn scenario_from(
    args: &ScenarioFlags,
    cfg: &Config,
) -> CliResult<circtrend::simulate::ScenarioSpec> {
    let regression: String =
        config::resolve(args.regression.clone(), cfg, "regression", Some("r1".into()))?;
    let errors: String =
        config::resolve(args.errors.clone(), cfg, "errors", Some("wrapped".into()))?;
    let corr_name: String =
        config::resolve(args.corr.clone(), cfg, "corr", Some("exponential".into()))?;
    let range = config::resolve(args.range, cfg, "range", Some(0.3))?;
    let corr = config::build_correlation(&corr_name, range)?;
    let sigma2 = config::resolve(args.sigma2, cfg, "sigma2", Some(1.0))?;
    let mu = config::resolve(args.mu, cfg, "mu", Some(0.0))?;
    let mu1 = config::resolve(args.mu1, cfg, "mu1", Some(1.0))?;
    let mu2 = config::resolve(args.mu2, cfg, "mu2", Some(1.0))?;
    let sigma = config::resolve(args.sigma, cfg, "sigma", Some(1.0))?;
    let tau = config::resolve(args.tau, cfg, "tau", Some(0.9))?;
    let n = config::resolve(args.n, cfg, "n", Some(100))?;
    let seed = config::resolve(args.seed, cfg, "seed", Some(1))?;
    config::build_scenario(
        &regression,
        &errors,
        corr,
        sigma2,
        mu,
        mu1,
        mu2,
        sigma,
        tau,
        n,
        seed,
    )
}
