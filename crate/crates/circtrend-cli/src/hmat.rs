//! Bandwidth-matrix flag parsing and pretty-printing.

use crate::cli_error::{invalid, validation, CliResult};
use circtrend::BandwidthMatrix;

pub const H_GRAMMAR: &str =
    "expected 'diag:h1,...,hd' (positive entries) or 'full:e11,e12,...,edd' \
     (d*d row-major entries of a symmetric positive-definite matrix)";

/// Parses `diag:0.2,0.3` or `full:0.2,0.05,0.05,0.3`.
pub fn parse_h(s: &str, expected_dim: Option<usize>) -> CliResult<BandwidthMatrix> {
    let (kind, body) = s
        .split_once(':')
        .ok_or_else(|| validation(format!("malformed bandwidth '{s}': {H_GRAMMAR}")))?;
    let numbers: Vec<f64> = body
        .split(',')
        .map(|tok| {
            tok.trim()
                .parse::<f64>()
                .map_err(|_| validation(format!("malformed bandwidth entry '{tok}': {H_GRAMMAR}")))
        })
        .collect::<CliResult<_>>()?;
    let h = match kind {
        "diag" => BandwidthMatrix::diagonal(&numbers).map_err(invalid)?,
        "full" => {
            let d = (numbers.len() as f64).sqrt().round() as usize;
            if d * d != numbers.len() || d == 0 {
                return Err(validation(format!(
                    "malformed bandwidth '{s}': need d*d entries, got {}; {H_GRAMMAR}",
                    numbers.len()
                )));
            }
            BandwidthMatrix::new(d, numbers).map_err(invalid)?
        }
        other => {
            return Err(validation(format!(
                "malformed bandwidth kind '{other}': {H_GRAMMAR}"
            )))
        }
    };
    if let Some(d) = expected_dim {
        if h.dim() != d {
            return Err(validation(format!(
                "bandwidth dimension {} does not match the data dimension {d}",
                h.dim()
            )));
        }
    }
    Ok(h)
}

/// Matrix layout with four decimals per entry.
pub fn format_h(h: &BandwidthMatrix) -> String {
    let d = h.dim();
    let mut out = String::new();
    for i in 0..d {
        out.push_str("[ ");
        for j in 0..d {
            out.push_str(&format!("{:8.4} ", h.entry(i, j)));
        }
        out.push_str("]\n");
    }
    out
}
