pub mod benchmark;
pub mod fit;
pub mod predict;
pub mod residuals;
pub mod select;
pub mod simulate;

use crate::cli_error::{validation, CliResult};
use crate::config::Config;
use circtrend::bandwidth::{
    grid_search_diagonal, nelder_mead_select, radius_from_b, BandwidthSearchSpace,
    CriterionReport, NelderMeadConfig, SelectionCriterion,
};
use circtrend::{AngularSample, Degree, KernelSpec};

/// Shared selection-flag handling for `fit`, `select` and `predict`.
#[derive(Debug, Clone, clap::Args)]
pub struct SelectorFlags {
    /// Selection criterion: `cv` or `mcv`.
    #[arg(long)]
    pub criterion: Option<String>,
    /// MCV neighborhood size as the unit-square rule `l = sqrt(2)*b/10`.
    #[arg(long, conflicts_with = "l")]
    pub b: Option<u32>,
    /// MCV exclusion radius, directly in covariate units.
    #[arg(long)]
    pub l: Option<f64>,
    /// Search family: `diag-grid` (exhaustive) or `full-spd` (simplex).
    #[arg(long)]
    pub space: Option<String>,
    /// Diagonal grid points per axis.
    #[arg(long)]
    pub grid_points: Option<usize>,
    /// Lower grid factor relative to the default initial bandwidth.
    #[arg(long)]
    pub grid_lo: Option<f64>,
    /// Upper grid factor relative to the default initial bandwidth.
    #[arg(long)]
    pub grid_hi: Option<f64>,
    /// Simplex objective-value tolerance.
    #[arg(long)]
    pub tol_f: Option<f64>,
    /// Simplex diameter tolerance.
    #[arg(long)]
    pub tol_x: Option<f64>,
    /// Simplex iteration cap.
    #[arg(long)]
    pub max_iter: Option<usize>,
}

impl SelectorFlags {
    pub fn criterion(&self) -> CliResult<SelectionCriterion> {
        let name = self.criterion.as_deref().unwrap_or("cv");
        match name {
            "cv" => Ok(SelectionCriterion::Cv),
            "mcv" => {
                let radius = match (self.b, self.l) {
                    (Some(b), None) => {
                        radius_from_b(b).map_err(|e| validation(e.to_string()))?
                    }
                    (None, Some(l)) => l,
                    (None, None) => {
                        return Err(validation("mcv needs --b or --l for the radius"))
                    }
                    (Some(_), Some(_)) => unreachable!("clap conflicts_with"),
                };
                Ok(SelectionCriterion::Mcv { radius })
            }
            other => Err(validation(format!(
                "criterion must be 'cv' or 'mcv', got '{other}'"
            ))),
        }
    }

    /// Runs the configured selection on a dataset.
    pub fn select(
        &self,
        sample: &AngularSample,
        spec: &KernelSpec,
        degree: Degree,
        config: &Config,
        keep_trace: bool,
    ) -> CliResult<CriterionReport> {
        use crate::cli_error::numerical;
        use crate::config::resolve;
        let criterion = self.criterion()?;
        let space_name = self.space.as_deref().unwrap_or("diag-grid");
        match space_name {
            "diag-grid" => {
                let points = resolve(self.grid_points, config, "grid_points", Some(15))?;
                let lo = resolve(self.grid_lo, config, "grid_lo", Some(0.05))?;
                let hi = resolve(self.grid_hi, config, "grid_hi", Some(1.5))?;
                let space = BandwidthSearchSpace::diagonal_scaled(sample, lo, hi, points)
                    .map_err(numerical)?;
                grid_search_diagonal(sample, spec, degree, &criterion, &space)
                    .map_err(numerical)
            }
            "full-spd" => {
                let init =
                    circtrend::bandwidth::default_init_h(sample).map_err(numerical)?;
                let nm = NelderMeadConfig {
                    tol_f: self.tol_f.unwrap_or(1e-6),
                    tol_x: self.tol_x.unwrap_or(1e-6),
                    max_iter: self.max_iter,
                    keep_trace,
                };
                nelder_mead_select(sample, spec, degree, &criterion, &init, &nm)
                    .map_err(numerical)
            }
            other => Err(validation(format!(
                "space must be 'diag-grid' or 'full-spd', got '{other}'"
            ))),
        }
    }
}
