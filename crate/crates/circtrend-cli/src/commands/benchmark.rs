//! `circtrend benchmark` — Monte Carlo comparison of bandwidth selectors.
//!
//! The table CSV is fully determined by the configuration (selector means,
//! Monte Carlo standard errors, failure counts); wall-clock timings go to
//! stderr so reruns stay byte-identical.

use crate::cli_error::{numerical, validation, CliResult};
use crate::config::{self, Config};
use crate::io::fmt_f64;
use circtrend::bandwidth::radius_from_b;
use circtrend::evaluate::{run_monte_carlo, GridConfig, MonteCarloPlan, Selector};
use circtrend::simulate::{CorrelationModel, ErrorProcess};
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Flat key = value config file; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub scenario: super::simulate::ScenarioFlags,
    /// Number of Monte Carlo replicates.
    #[arg(long)]
    pub replicates: Option<usize>,
    /// Local polynomial degree (0 or 1).
    #[arg(short, long)]
    pub p: Option<u8>,
    /// Comma-separated selectors: cv, mcv<b> (b in 0..=10), case.
    #[arg(long)]
    pub selectors: Option<String>,
    /// Master seed for the per-replicate RNG streams.
    #[arg(long)]
    pub master_seed: Option<u64>,
    /// Diagonal grid points per axis.
    #[arg(long)]
    pub grid_points: Option<usize>,
    /// Lower grid factor.
    #[arg(long)]
    pub grid_lo: Option<f64>,
    /// Upper grid factor.
    #[arg(long)]
    pub grid_hi: Option<f64>,
    /// Output table CSV.
    #[arg(long, default_value = "benchmark.csv")]
    pub out: PathBuf,
}

/// Parses a selector token into its label and selector.
pub fn parse_selector(token: &str) -> CliResult<(String, Selector)> {
    match token {
        "cv" => Ok(("CV".into(), Selector::Cv)),
        "case" => Ok(("CASE".into(), Selector::CaseOracle)),
        other => {
            if let Some(b) = other.strip_prefix("mcv") {
                let b: u32 = b
                    .parse()
                    .map_err(|_| validation(format!("bad selector '{other}'")))?;
                let radius = radius_from_b(b).map_err(|e| validation(e.to_string()))?;
                Ok((format!("MCV{b}"), Selector::Mcv { radius }))
            } else {
                Err(validation(format!(
                    "selector must be cv, mcv<b> or case, got '{other}'"
                )))
            }
        }
    }
}

pub fn run(args: Args) -> CliResult<()> {
    let cfg = Config::load(args.config.as_deref())?;
    let scenario = super::simulate::scenario_from(&args.scenario, &cfg)?;
    let replicates = config::resolve(args.replicates, &cfg, "replicates", Some(100))?;
    let p: u8 = config::resolve(args.p, &cfg, "p", Some(0))?;
    let degree = config::build_degree(p)?;
    let selectors_text: String = config::resolve(
        args.selectors.clone(),
        &cfg,
        "selectors",
        Some("cv,mcv1,mcv2,mcv3,case".into()),
    )?;
    let master_seed = config::resolve(args.master_seed, &cfg, "master_seed", Some(1))?;
    let grid = GridConfig {
        lo_factor: config::resolve(args.grid_lo, &cfg, "grid_lo", Some(0.05))?,
        hi_factor: config::resolve(args.grid_hi, &cfg, "grid_hi", Some(1.5))?,
        points_per_axis: config::resolve(args.grid_points, &cfg, "grid_points", Some(15))?,
    };
    let kernel_name: String =
        config::resolve(None, &cfg, "kernel", Some("product_triweight".into()))?;
    let kernel = config::build_kernel(&kernel_name, 2)?;

    let mut labels = Vec::new();
    let mut selectors = Vec::new();
    for token in selectors_text.split(',') {
        let (label, sel) = parse_selector(token.trim())?;
        labels.push(label);
        selectors.push(sel);
    }
    if selectors.is_empty() {
        return Err(validation("no selectors given"));
    }

    let (regression, error_label, corr_label, range) = scenario_labels(&scenario);
    let plan = MonteCarloPlan {
        scenario,
        replicates,
        degree,
        selectors,
        master_seed,
        grid,
        kernel,
    };

    let start = Instant::now();
    let table = run_monte_carlo(&plan).map_err(numerical)?;
    let elapsed = start.elapsed().as_secs_f64();
    eprintln!(
        "benchmark: {replicates} replicates in {elapsed:.2}s ({:.3}s per replicate)",
        elapsed / replicates as f64
    );

    let file = std::fs::File::create(&args.out)
        .map_err(|e| validation(format!("cannot write {}: {e}", args.out.display())))?;
    let mut w = std::io::BufWriter::new(file);
    let emit = |w: &mut dyn Write| -> std::io::Result<()> {
        writeln!(
            w,
            "regression,errors,corr,range,n,p,replicates,master_seed,selector,mean_case,mc_se,failures"
        )?;
        for (label, summary) in labels.iter().zip(&table.summaries) {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{},{},{},{}",
                regression,
                error_label,
                corr_label,
                fmt_f64(range),
                plan.scenario.n,
                p,
                replicates,
                master_seed,
                label,
                fmt_f64(summary.mean_case),
                fmt_f64(summary.mc_se),
                summary.failures
            )?;
        }
        Ok(())
    };
    emit(&mut w).map_err(|e| validation(format!("write failed: {e}")))?;

    for (label, summary) in labels.iter().zip(&table.summaries) {
        println!(
            "{label}: mean CASE {} (se {}), failures {}",
            fmt_f64(summary.mean_case),
            fmt_f64(summary.mc_se),
            summary.failures
        );
    }
    println!("table written to {}", args.out.display());
    Ok(())
}

fn scenario_labels(
    scenario: &circtrend::simulate::ScenarioSpec,
) -> (String, String, String, f64) {
    let regression = format!("{:?}", scenario.trend).to_lowercase();
    let (error_label, corr) = match &scenario.errors {
        ErrorProcess::Wrapped(w) => ("wrapped".to_string(), w.corr),
        ErrorProcess::Projected(p) => ("projected".to_string(), p.corr),
    };
    let (corr_label, range) = match corr {
        CorrelationModel::Exponential { range } => ("exponential".to_string(), range),
        CorrelationModel::RationalQuadratic { scale } => {
            ("rational_quadratic".to_string(), scale)
        }
    };
    (regression, error_label, corr_label, range)
}
