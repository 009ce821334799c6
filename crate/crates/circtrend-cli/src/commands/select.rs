//! `circtrend select` — bandwidth selection report for a dataset.

use super::SelectorFlags;
use crate::cli_error::CliResult;
use crate::config::{self, Config};
use crate::hmat;
use crate::io;
use std::path::PathBuf;

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Input dataset CSV (header x1,...,xd,theta).
    #[arg(long)]
    pub data: PathBuf,
    /// Interpret the theta column as degrees.
    #[arg(long)]
    pub degrees: bool,
    #[command(flatten)]
    pub selector: SelectorFlags,
    /// Local polynomial degree (0 or 1).
    #[arg(short, long)]
    pub p: Option<u8>,
    /// Write the full evaluation trace to this CSV.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

pub fn run(args: Args) -> CliResult<()> {
    let cfg = Config::load(args.config.as_deref())?;
    let sample = io::read_dataset(&args.data, args.degrees)?;
    let p: u8 = config::resolve(args.p, &cfg, "p", Some(0))?;
    let degree = config::build_degree(p)?;
    let kernel_name: String =
        config::resolve(None, &cfg, "kernel", Some("product_triweight".into()))?;
    let spec = config::build_kernel(&kernel_name, sample.dim())?;

    let report = args
        .selector
        .select(&sample, &spec, degree, &cfg, args.trace.is_some())?;

    println!("chosen bandwidth matrix:");
    print!("{}", hmat::format_h(&report.chosen_h));
    println!("criterion value: {}", io::fmt_f64(report.criterion_value));
    println!("evaluations: {}", report.evaluations);
    println!("converged: {}", report.converged);

    if let Some(path) = &args.trace {
        let trace = report.trace.as_deref().unwrap_or(&[]);
        io::write_trace(path, sample.dim(), trace)?;
        println!("trace written to {}", path.display());
    }
    Ok(())
}
