//! CSV ingestion and emission.
//!
//! All files share one interchange convention: comma-separated, a header
//! row, optional `#`-prefixed comment lines, floats written in shortest
//! round-trip decimal form (exact re-parse). Datasets carry columns
//! `x1..xd,theta` with angles in radians unless converted at load time.

use crate::cli_error::{invalid, io_err, validation, CliResult};
use circtrend::estimator::FitResult;
use circtrend::{Angle, AngularSample, Fallback, Locations};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

/// Shortest round-trip decimal form; re-parsing restores the exact value.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "NaN".to_string()
    } else {
        format!("{v}")
    }
}

fn reader(path: &Path) -> CliResult<csv::Reader<File>> {
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| validation(format!("cannot open {}: {e}", path.display())))
}

fn parse_field(path: &Path, row: usize, name: &str, raw: &str) -> CliResult<f64> {
    raw.parse::<f64>().map_err(|_| {
        validation(format!(
            "{}:{}: column '{name}': cannot parse '{raw}' as a number",
            path.display(),
            row
        ))
    })
}

/// Loads a dataset CSV with header `x1,...,xd,theta`. With `degrees` set, the
/// response column is converted to radians at this boundary.
pub fn read_dataset(path: &Path, degrees: bool) -> CliResult<AngularSample> {
    let (locations, values) = read_points_with_value(path, "theta")?;
    let thetas: Vec<Angle> = values
        .into_iter()
        .map(|v| {
            let radians = if degrees { v.to_radians() } else { v };
            Angle::new(radians).map_err(invalid)
        })
        .collect::<CliResult<_>>()?;
    AngularSample::new(locations, thetas).map_err(invalid)
}

/// Loads a CSV of points `x1..xd` plus one named trailing column.
pub fn read_points_with_value(path: &Path, value_col: &str) -> CliResult<(Locations, Vec<f64>)> {
    let mut rdr = reader(path)?;
    let headers = rdr
        .headers()
        .map_err(|e| validation(format!("{}: {e}", path.display())))?
        .clone();
    let cols: Vec<&str> = headers.iter().collect();
    if cols.len() < 2 || cols[cols.len() - 1] != value_col {
        return Err(validation(format!(
            "{}: expected header 'x1,...,xd,{value_col}', got '{}'",
            path.display(),
            cols.join(",")
        )));
    }
    let d = cols.len() - 1;
    for (i, c) in cols[..d].iter().enumerate() {
        let expect = format!("x{}", i + 1);
        if *c != expect {
            return Err(validation(format!(
                "{}: covariate column {} must be named '{expect}', got '{c}'",
                path.display(),
                i + 1
            )));
        }
    }
    let mut coords = Vec::new();
    let mut values = Vec::new();
    for (row, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| validation(format!("{}: {e}", path.display())))?;
        if record.len() != d + 1 {
            return Err(validation(format!(
                "{}:{}: expected {} fields, got {}",
                path.display(),
                row + 2,
                d + 1,
                record.len()
            )));
        }
        for k in 0..d {
            coords.push(parse_field(path, row + 2, cols[k], &record[k])?);
        }
        values.push(parse_field(path, row + 2, value_col, &record[d])?);
    }
    let locations = Locations::new(d, coords).map_err(invalid)?;
    Ok((locations, values))
}

/// Number of data rows in a CSV (excluding header and comments).
pub fn count_rows(path: &Path) -> CliResult<usize> {
    let mut rdr = reader(path)?;
    let mut n = 0;
    for rec in rdr.records() {
        rec.map_err(|e| validation(format!("{}: {e}", path.display())))?;
        n += 1;
    }
    Ok(n)
}

fn open_out(path: &Path) -> CliResult<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).map_err(|e| io_err(&format!("cannot write {}", path.display()), e))?,
    ))
}

fn header_row(d: usize, tail: &[&str]) -> String {
    let mut cols: Vec<String> = (1..=d).map(|i| format!("x{i}")).collect();
    cols.extend(tail.iter().map(|s| s.to_string()));
    cols.join(",")
}

/// Writes a dataset CSV; the seed comment keeps the provenance in the file.
pub fn write_dataset(
    path: &Path,
    sample: &AngularSample,
    seed: Option<u64>,
) -> CliResult<()> {
    let mut w = open_out(path)?;
    let d = sample.dim();
    let emit = |w: &mut BufWriter<File>| -> std::io::Result<()> {
        if let Some(s) = seed {
            writeln!(w, "# seed={s}")?;
        }
        writeln!(w, "{}", header_row(d, &["theta"]))?;
        for i in 0..sample.n() {
            let mut fields: Vec<String> =
                sample.location(i).iter().map(|v| fmt_f64(*v)).collect();
            fields.push(fmt_f64(sample.theta(i).radians()));
            writeln!(w, "{}", fields.join(","))?;
        }
        Ok(())
    };
    emit(&mut w).map_err(|e| io_err("write failed", e))
}

/// Writes the true trend values alongside their locations.
pub fn write_truth(
    path: &Path,
    locations: &Locations,
    truth: &[Angle],
    seed: Option<u64>,
) -> CliResult<()> {
    let mut w = open_out(path)?;
    let d = locations.dim();
    let emit = |w: &mut BufWriter<File>| -> std::io::Result<()> {
        if let Some(s) = seed {
            writeln!(w, "# seed={s}")?;
        }
        writeln!(w, "{}", header_row(d, &["m_true"]))?;
        for i in 0..locations.n() {
            let mut fields: Vec<String> =
                locations.point(i).iter().map(|v| fmt_f64(*v)).collect();
            fields.push(fmt_f64(truth[i].radians()));
            writeln!(w, "{}", fields.join(","))?;
        }
        Ok(())
    };
    emit(&mut w).map_err(|e| io_err("write failed", e))
}

pub fn fallback_label(f: Fallback) -> &'static str {
    match f {
        Fallback::None => "none",
        Fallback::LinearToConstant => "ll_to_nw",
        Fallback::Undefined => "undefined",
    }
}

fn fit_fields(fr: &FitResult) -> Vec<String> {
    let mut fields: Vec<String> = fr.point.iter().map(|v| fmt_f64(*v)).collect();
    fields.push(fr.m_hat.map(|a| fmt_f64(a.radians())).unwrap_or_default());
    fields.push(fmt_f64(fr.m1_hat));
    fields.push(fmt_f64(fr.m2_hat));
    fields.push(fmt_f64(fr.resultant));
    fields.push(fallback_label(fr.fallback).to_string());
    fields
}

/// Writes a fitted surface; the two drop columns mark points filtered by the
/// distance-to-data and stability rules (always emitted, flagged not removed).
pub fn write_surface(
    path: &Path,
    dim: usize,
    fits: &[FitResult],
    drops: Option<&[(bool, bool)]>,
) -> CliResult<()> {
    let mut w = open_out(path)?;
    let emit = |w: &mut BufWriter<File>| -> std::io::Result<()> {
        writeln!(
            w,
            "{}",
            header_row(
                dim,
                &["m_hat", "m1_hat", "m2_hat", "resultant", "fallback", "drop_far", "drop_unstable"]
            )
        )?;
        for (i, fr) in fits.iter().enumerate() {
            let mut fields = fit_fields(fr);
            let (far, unstable) = drops.map(|d| d[i]).unwrap_or((false, false));
            fields.push((far as u8).to_string());
            fields.push((unstable as u8).to_string());
            writeln!(w, "{}", fields.join(","))?;
        }
        Ok(())
    };
    emit(&mut w).map_err(|e| io_err("write failed", e))
}

/// Reads back a surface CSV written by [`write_surface`]: locations plus the
/// optional fitted direction per row.
pub fn read_surface(path: &Path) -> CliResult<(Locations, Vec<Option<Angle>>)> {
    let mut rdr = reader(path)?;
    let headers = rdr
        .headers()
        .map_err(|e| validation(format!("{}: {e}", path.display())))?
        .clone();
    let cols: Vec<&str> = headers.iter().collect();
    let Some(m_hat_pos) = cols.iter().position(|c| *c == "m_hat") else {
        return Err(validation(format!(
            "{}: surface file needs an 'm_hat' column",
            path.display()
        )));
    };
    let d = m_hat_pos;
    if d == 0 {
        return Err(validation(format!(
            "{}: surface file needs x1..xd before 'm_hat'",
            path.display()
        )));
    }
    let mut coords = Vec::new();
    let mut fitted = Vec::new();
    for (row, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| validation(format!("{}: {e}", path.display())))?;
        for k in 0..d {
            coords.push(parse_field(path, row + 2, cols[k], &record[k])?);
        }
        let raw = record[d].trim();
        fitted.push(if raw.is_empty() {
            None
        } else {
            Some(Angle::new(parse_field(path, row + 2, "m_hat", raw)?).map_err(invalid)?)
        });
    }
    Ok((Locations::new(d, coords).map_err(invalid)?, fitted))
}

/// Writes per-test-point predictions.
pub fn write_predictions(path: &Path, dim: usize, fits: &[FitResult]) -> CliResult<()> {
    let mut w = open_out(path)?;
    let emit = |w: &mut BufWriter<File>| -> std::io::Result<()> {
        writeln!(w, "{}", header_row(dim, &["m_hat", "resultant", "fallback"]))?;
        for fr in fits {
            let mut fields: Vec<String> = fr.point.iter().map(|v| fmt_f64(*v)).collect();
            fields.push(fr.m_hat.map(|a| fmt_f64(a.radians())).unwrap_or_default());
            fields.push(fmt_f64(fr.resultant));
            fields.push(fallback_label(fr.fallback).to_string());
            writeln!(w, "{}", fields.join(","))?;
        }
        Ok(())
    };
    emit(&mut w).map_err(|e| io_err("write failed", e))
}

/// Writes a selection trace (one evaluated bandwidth per row).
pub fn write_trace(
    path: &Path,
    dim: usize,
    trace: &[(circtrend::BandwidthMatrix, f64)],
) -> CliResult<()> {
    let mut w = open_out(path)?;
    let emit = |w: &mut BufWriter<File>| -> std::io::Result<()> {
        let mut cols = Vec::new();
        for i in 0..dim {
            for j in 0..dim {
                cols.push(format!("h{}{}", i + 1, j + 1));
            }
        }
        cols.push("criterion".to_string());
        writeln!(w, "{}", cols.join(","))?;
        for (h, v) in trace {
            let mut fields: Vec<String> = h.entries().iter().map(|e| fmt_f64(*e)).collect();
            fields.push(fmt_f64(*v));
            writeln!(w, "{}", fields.join(","))?;
        }
        Ok(())
    };
    emit(&mut w).map_err(|e| io_err("write failed", e))
}
