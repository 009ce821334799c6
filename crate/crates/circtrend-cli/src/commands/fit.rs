//! `circtrend fit` — fit the trend surface over an evaluation grid.

use super::SelectorFlags;
use crate::cli_error::{numerical, validation, CliResult};
use crate::config::{self, Config};
use crate::hmat;
use crate::io;
use circtrend::estimator::fit_surface;
use circtrend::{Fallback, Locations};
use std::path::PathBuf;

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Input dataset CSV (header x1,...,xd,theta).
    #[arg(long)]
    pub data: PathBuf,
    /// Interpret the theta column as degrees.
    #[arg(long)]
    pub degrees: bool,
    /// Bandwidth matrix, e.g. "diag:0.2,0.3" or "full:...".
    #[arg(long = "H", conflicts_with = "criterion")]
    pub h: Option<String>,
    #[command(flatten)]
    pub selector: SelectorFlags,
    /// Local polynomial degree (0 or 1).
    #[arg(short, long)]
    pub p: Option<u8>,
    /// Evaluation grid: "data", "RxC" over the data bounding box, or
    /// "file:PATH" for explicit points (header x1,...,xd,<any>).
    #[arg(long, default_value = "data")]
    pub grid: String,
    /// Flag grid points farther than this many grid cell lengths from the
    /// nearest observation.
    #[arg(long)]
    pub drop_far: Option<f64>,
    /// Flag grid points whose fit needed a stability fallback.
    #[arg(long)]
    pub drop_unstable: bool,
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output surface CSV.
    #[arg(long, default_value = "surface.csv")]
    pub out: PathBuf,
}

/// Builds the evaluation grid; returns the grid plus its cell length (the
/// largest axis spacing), when one exists.
fn build_grid(spec: &str, data: &Locations) -> CliResult<(Locations, Option<f64>)> {
    if spec == "data" {
        return Ok((data.clone(), None));
    }
    if let Some(path) = spec.strip_prefix("file:") {
        let (locs, _) = io::read_points_with_value(std::path::Path::new(path), "theta")
            .or_else(|_| io::read_points_with_value(std::path::Path::new(path), "m_true"))?;
        return Ok((locs, None));
    }
    let parts: Vec<&str> = spec.split('x').collect();
    if parts.len() != 2 {
        return Err(validation(format!(
            "grid must be 'data', 'RxC' or 'file:PATH', got '{spec}'"
        )));
    }
    if data.dim() != 2 {
        return Err(validation("an RxC grid needs two-dimensional data"));
    }
    let nx: usize = parts[0]
        .parse()
        .map_err(|_| validation(format!("bad grid size '{}'", parts[0])))?;
    let ny: usize = parts[1]
        .parse()
        .map_err(|_| validation(format!("bad grid size '{}'", parts[1])))?;
    if nx < 2 || ny < 2 {
        return Err(validation("grid sizes must be ≥ 2"));
    }
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for i in 0..data.n() {
        let p = data.point(i);
        for k in 0..2 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    let dx = (hi[0] - lo[0]) / (nx as f64 - 1.0);
    let dy = (hi[1] - lo[1]) / (ny as f64 - 1.0);
    let mut coords = Vec::with_capacity(nx * ny * 2);
    for ix in 0..nx {
        for iy in 0..ny {
            coords.push(lo[0] + ix as f64 * dx);
            coords.push(lo[1] + iy as f64 * dy);
        }
    }
    Ok((
        Locations::new(2, coords).map_err(crate::cli_error::invalid)?,
        Some(dx.max(dy)),
    ))
}

pub fn run(args: Args) -> CliResult<()> {
    let cfg = Config::load(args.config.as_deref())?;
    let sample = io::read_dataset(&args.data, args.degrees)?;
    let p: u8 = config::resolve(args.p, &cfg, "p", Some(0))?;
    let degree = config::build_degree(p)?;
    let kernel_name: String = config::resolve(
        None,
        &cfg,
        "kernel",
        Some("product_triweight".into()),
    )?;
    let spec = config::build_kernel(&kernel_name, sample.dim())?;

    let (h, report) = match &args.h {
        Some(text) => (hmat::parse_h(text, Some(sample.dim()))?, None),
        None => {
            let report = args.selector.select(&sample, &spec, degree, &cfg, false)?;
            (report.chosen_h.clone(), Some(report))
        }
    };

    let (grid, cell) = build_grid(&args.grid, sample.locations())?;
    let fits = fit_surface(&sample, &spec, &h, &grid, degree).map_err(numerical)?;

    let far_threshold = match (args.drop_far, cell) {
        (Some(mult), Some(cell)) => Some(mult * cell),
        (Some(_), None) => {
            return Err(validation(
                "--drop-far needs an RxC grid (no cell length for 'data' or 'file:' grids)",
            ))
        }
        _ => None,
    };
    let drops: Vec<(bool, bool)> = fits
        .iter()
        .enumerate()
        .map(|(g, fr)| {
            let far = far_threshold
                .map(|t| {
                    let gp = grid.point(g);
                    let nearest = (0..sample.n())
                        .map(|i| {
                            sample
                                .location(i)
                                .iter()
                                .zip(gp)
                                .map(|(a, b)| (a - b) * (a - b))
                                .sum::<f64>()
                                .sqrt()
                        })
                        .fold(f64::INFINITY, f64::min);
                    nearest > t
                })
                .unwrap_or(false);
            let unstable = args.drop_unstable && fr.fallback != Fallback::None;
            (far, unstable)
        })
        .collect();

    io::write_surface(&args.out, sample.dim(), &fits, Some(&drops))?;
    if let Some(report) = report {
        println!(
            "selected bandwidth ({} evaluations, converged: {}):",
            report.evaluations, report.converged
        );
        print!("{}", hmat::format_h(&report.chosen_h));
        println!("criterion value: {}", io::fmt_f64(report.criterion_value));
    }
    println!("wrote {} fitted points to {}", fits.len(), args.out.display());
    Ok(())
}
