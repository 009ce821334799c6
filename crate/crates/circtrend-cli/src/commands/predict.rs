//! `circtrend predict` — fit on a training set, predict a test set, report
//! the total prediction error.

use super::SelectorFlags;
use crate::cli_error::{numerical, CliResult};
use crate::config::{self, Config};
use crate::hmat;
use crate::io;
use circtrend::estimator::fit_surface;
use circtrend::evaluate::prediction_error;
use std::path::PathBuf;

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Training dataset CSV.
    #[arg(long)]
    pub train: PathBuf,
    /// Test dataset CSV (same columns).
    #[arg(long)]
    pub test: PathBuf,
    /// Interpret theta columns as degrees.
    #[arg(long)]
    pub degrees: bool,
    /// Bandwidth matrix, e.g. "diag:0.2,0.3"; otherwise selected on train.
    #[arg(long = "H", conflicts_with = "criterion")]
    pub h: Option<String>,
    #[command(flatten)]
    pub selector: SelectorFlags,
    /// Local polynomial degree (0 or 1); the prediction workflow defaults to 1.
    #[arg(short, long)]
    pub p: Option<u8>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output predictions CSV.
    #[arg(long, default_value = "predictions.csv")]
    pub out: PathBuf,
}

pub fn run(args: Args) -> CliResult<()> {
    let cfg = Config::load(args.config.as_deref())?;
    let train = io::read_dataset(&args.train, args.degrees)?;

    // An empty test file is a warning, not an error: zero prediction error.
    if io::count_rows(&args.test)? == 0 {
        eprintln!("warning: test file {} has no rows", args.test.display());
        io::write_predictions(&args.out, train.dim(), &[])?;
        println!("prediction error: 0");
        return Ok(());
    }
    let test = io::read_dataset(&args.test, args.degrees)?;
    if test.dim() != train.dim() {
        return Err(crate::cli_error::validation(format!(
            "train dimension {} vs test dimension {}",
            train.dim(),
            test.dim()
        )));
    }

    let p: u8 = config::resolve(args.p, &cfg, "p", Some(1))?;
    let degree = config::build_degree(p)?;
    let kernel_name: String =
        config::resolve(None, &cfg, "kernel", Some("product_triweight".into()))?;
    let spec = config::build_kernel(&kernel_name, train.dim())?;

    let h = match &args.h {
        Some(text) => hmat::parse_h(text, Some(train.dim()))?,
        None => {
            let report = args.selector.select(&train, &spec, degree, &cfg, false)?;
            println!("selected bandwidth matrix:");
            print!("{}", hmat::format_h(&report.chosen_h));
            report.chosen_h
        }
    };

    let fits = fit_surface(&train, &spec, &h, test.locations(), degree).map_err(numerical)?;
    let error = prediction_error(test.thetas(), &fits).map_err(numerical)?;
    io::write_predictions(&args.out, train.dim(), &fits)?;
    println!("predictions written to {}", args.out.display());
    println!("prediction error: {}", io::fmt_f64(error));
    Ok(())
}
