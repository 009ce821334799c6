//! `circtrend residuals` — signed residuals of a fitted surface at the data
//! points, exported for external diagnostics (e.g. circular boxplots).

use crate::cli_error::{validation, CliResult};
use crate::io::{self, fmt_f64};
use circtrend::circular::signed_residual;
use std::io::Write;
use std::path::PathBuf;

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Dataset CSV the surface was fitted on.
    #[arg(long)]
    pub data: PathBuf,
    /// Fitted surface CSV evaluated at the data points (from `fit --grid data`).
    #[arg(long)]
    pub surface: PathBuf,
    /// Interpret the dataset theta column as degrees.
    #[arg(long)]
    pub degrees: bool,
    /// Output residual CSV.
    #[arg(long, default_value = "residuals.csv")]
    pub out: PathBuf,
}

pub fn run(args: Args) -> CliResult<()> {
    let sample = io::read_dataset(&args.data, args.degrees)?;
    let (surf_locs, fitted) = io::read_surface(&args.surface)?;
    if surf_locs.n() != sample.n() || surf_locs.dim() != sample.dim() {
        return Err(validation(format!(
            "surface rows ({}, d={}) do not align with the dataset ({}, d={})",
            surf_locs.n(),
            surf_locs.dim(),
            sample.n(),
            sample.dim()
        )));
    }
    for i in 0..sample.n() {
        if sample.location(i) != surf_locs.point(i) {
            return Err(validation(format!(
                "surface row {} is at a different location than dataset row {}",
                i + 1,
                i + 1
            )));
        }
    }

    let file = std::fs::File::create(&args.out)
        .map_err(|e| validation(format!("cannot write {}: {e}", args.out.display())))?;
    let mut w = std::io::BufWriter::new(file);
    let emit = |w: &mut dyn Write| -> std::io::Result<()> {
        let mut cols: Vec<String> = (1..=sample.dim()).map(|i| format!("x{i}")).collect();
        cols.extend(["theta", "fitted", "residual", "flag"].map(String::from));
        writeln!(w, "{}", cols.join(","))?;
        for i in 0..sample.n() {
            let mut fields: Vec<String> =
                sample.location(i).iter().map(|v| fmt_f64(*v)).collect();
            fields.push(fmt_f64(sample.theta(i).radians()));
            match fitted[i] {
                Some(m) => {
                    fields.push(fmt_f64(m.radians()));
                    fields.push(fmt_f64(signed_residual(sample.theta(i), m).value()));
                    fields.push("ok".to_string());
                }
                None => {
                    fields.push(String::new());
                    fields.push(String::new());
                    fields.push("undefined".to_string());
                }
            }
            writeln!(w, "{}", fields.join(","))?;
        }
        Ok(())
    };
    emit(&mut w).map_err(|e| validation(format!("write failed: {e}")))?;
    println!("residuals written to {}", args.out.display());
    Ok(())
}
