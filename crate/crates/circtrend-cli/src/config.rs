//! Flat `key = value` configuration files.
//!
//! One shared schema covers scenario, benchmark and selector keys; unknown
//! keys are rejected with the offending line number. Individual command-line
//! flags override config values.

use crate::cli_error::{invalid, validation, CliResult};
use circtrend::simulate::{
    CorrelationModel, Design, ErrorProcess, ProjectedGpSpec, ScenarioSpec, TrendFunction,
    WrappedGpSpec,
};
use circtrend::{Degree, KernelFamily, KernelSpec};
use std::collections::BTreeMap;
use std::path::Path;

/// Every key the config format understands.
const SCHEMA: &[&str] = &[
    // scenario
    "regression",
    "errors",
    "corr",
    "range",
    "sigma2",
    "mu",
    "mu1",
    "mu2",
    "sigma",
    "tau",
    "n",
    "seed",
    "kernel",
    // benchmark / selection
    "replicates",
    "p",
    "selectors",
    "master_seed",
    "grid_points",
    "grid_lo",
    "grid_hi",
];

/// Parsed config: a flat key → value map with schema-checked keys.
#[derive(Debug, Default, Clone)]
pub struct Config {
    values: BTreeMap<String, String>,
}

impl Config {
    pub fn load(path: Option<&Path>) -> CliResult<Self> {
        let Some(path) = path else {
            return Ok(Config::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| validation(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn parse(text: &str, origin: &str) -> CliResult<Self> {
        let mut values = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(validation(format!(
                    "{origin}:{}: expected 'key = value', got '{raw}'",
                    lineno + 1
                )));
            };
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if !SCHEMA.contains(&key.as_str()) {
                return Err(validation(format!(
                    "{origin}:{}: unknown key '{key}'",
                    lineno + 1
                )));
            }
            if values.insert(key.clone(), value).is_some() {
                return Err(validation(format!(
                    "{origin}:{}: duplicate key '{key}'",
                    lineno + 1
                )));
            }
        }
        Ok(Config { values })
    }

    fn parse_value<T: std::str::FromStr>(&self, key: &str) -> CliResult<Option<T>> {
        match self.values.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse::<T>()
                .map(Some)
                .map_err(|_| validation(format!("config key '{key}': cannot parse '{v}'"))),
        }
    }
}

/// Resolves a value from (flag, config key, default), in that precedence.
pub fn resolve<T: Clone + std::str::FromStr>(
    flag: Option<T>,
    config: &Config,
    key: &str,
    default: Option<T>,
) -> CliResult<T> {
    if let Some(v) = flag {
        return Ok(v);
    }
    if let Some(v) = config.parse_value::<T>(key)? {
        return Ok(v);
    }
    default.ok_or_else(|| validation(format!("missing required parameter '{key}'")))
}

/// Builds the correlation model from `corr` + `range` keys/flags.
pub fn build_correlation(corr: &str, range: f64) -> CliResult<CorrelationModel> {
    match corr {
        "exponential" => CorrelationModel::exponential(range).map_err(invalid),
        "rational_quadratic" => CorrelationModel::rational_quadratic(range).map_err(invalid),
        other => Err(validation(format!(
            "corr must be 'exponential' or 'rational_quadratic', got '{other}'"
        ))),
    }
}

pub fn build_trend(name: &str) -> CliResult<TrendFunction> {
    match name {
        "r1" => Ok(TrendFunction::R1),
        "r2" => Ok(TrendFunction::R2),
        other => Err(validation(format!("regression must be 'r1' or 'r2', got '{other}'"))),
    }
}

pub fn build_kernel(name: &str, dim: usize) -> CliResult<KernelSpec> {
    let family = match name {
        "product_triweight" => KernelFamily::ProductTriweight,
        "spherical_triweight" => KernelFamily::SphericalTriweight,
        "product_epanechnikov" => KernelFamily::ProductEpanechnikov,
        other => {
            return Err(validation(format!(
                "kernel must be one of product_triweight | spherical_triweight | \
                 product_epanechnikov, got '{other}'"
            )))
        }
    };
    KernelSpec::new(family, dim).map_err(invalid)
}

pub fn build_degree(p: u8) -> CliResult<Degree> {
    Degree::from_order(p).map_err(invalid)
}

/// Assembles a full scenario from resolved parameters.
#[allow(clippy::too_many_arguments)]
pub fn build_scenario(
    regression: &str,
    errors: &str,
    corr: CorrelationModel,
    sigma2: f64,
    mu: f64,
    mu1: f64,
    mu2: f64,
    sigma: f64,
    tau: f64,
    n: usize,
    seed: u64,
) -> CliResult<ScenarioSpec> {
    let trend = build_trend(regression)?;
    let errors = match errors {
        "wrapped" => {
            ErrorProcess::Wrapped(WrappedGpSpec::new(mu, sigma2, corr).map_err(invalid)?)
        }
        "projected" => ErrorProcess::Projected(
            ProjectedGpSpec::new([mu1, mu2], sigma, tau, corr).map_err(invalid)?,
        ),
        other => {
            return Err(validation(format!(
                "errors must be 'wrapped' or 'projected', got '{other}'"
            )))
        }
    };
    let scenario =
        ScenarioSpec { trend, n, design: Design::UnitSquareGrid, errors, seed };
    scenario.validate().map_err(invalid)?;
    Ok(scenario)
}
