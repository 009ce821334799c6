//! Error metrics, train/test workflows, and the Monte Carlo benchmark
//! harness that scores bandwidth selectors by circular average squared error
//! over repeated simulated samples.

use crate::bandwidth::{
    case_score, grid_search_diagonal, BandwidthSearchSpace, SelectionCriterion,
};
use crate::circular::{angular_risk, signed_residual, Angle, AngularResidual};
use crate::error::{Error, Result};
use crate::estimator::{fit_surface, AngularSample, Degree, FitResult};
use crate::kernel::KernelSpec;
use crate::simulate::{generate_sample, replicate_rng, ScenarioSpec};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// A random train/test partition: `round(train_fraction · n)` observations go
/// to the training part, the rest to the test part.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub seed: u64,
}

impl SplitSpec {
    pub fn new(train_fraction: f64, seed: u64) -> Result<Self> {
        if !(train_fraction.is_finite() && 0.0 < train_fraction && train_fraction < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "train fraction must lie in (0, 1), got {train_fraction}"
            )));
        }
        Ok(SplitSpec { train_fraction, seed })
    }
}

/// Splits a sample into disjoint train and test parts by a uniform random
/// partition without replacement; deterministic given the split seed. Indices
/// are sorted within each part.
pub fn train_test_split(
    sample: &AngularSample,
    split: &SplitSpec,
) -> Result<(AngularSample, AngularSample)> {
    SplitSpec::new(split.train_fraction, split.seed)?;
    let n = sample.n();
    if n < 2 {
        return Err(Error::InvalidParameter("split needs n ≥ 2".into()));
    }
    let train_size = (split.train_fraction * n as f64).round() as usize;
    if train_size == 0 || train_size >= n {
        return Err(Error::InvalidParameter(format!(
            "degenerate split: train size {train_size} of {n}"
        )));
    }
    let mut indices: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(split.seed);
    indices.shuffle(&mut rng);
    let mut train_idx = indices[..train_size].to_vec();
    let mut test_idx = indices[train_size..].to_vec();
    train_idx.sort_unstable();
    test_idx.sort_unstable();
    Ok((sample.subset(&train_idx)?, sample.subset(&test_idx)?))
}

/// Total prediction error `Σⱼ {1 − cos[Θ̌ⱼ − m̂(X̌ⱼ)]}` over a test set;
/// undefined predictions contribute the maximal risk 2.
pub fn prediction_error(test_thetas: &[Angle], predictions: &[FitResult]) -> Result<f64> {
    if test_thetas.len() != predictions.len() {
        return Err(Error::LengthMismatch {
            left: test_thetas.len(),
            right: predictions.len(),
        });
    }
    Ok(test_thetas
        .iter()
        .zip(predictions)
        .map(|(t, fr)| match fr.m_hat {
            Some(m) => angular_risk(*t, m),
            None => 2.0,
        })
        .sum())
}

/// Signed residuals of a fitted surface at the sample points; undefined fits
/// yield `None`.
pub fn residual_table(
    sample: &AngularSample,
    fits: &[FitResult],
) -> Result<Vec<Option<AngularResidual>>> {
    if fits.len() != sample.n() {
        return Err(Error::LengthMismatch { left: sample.n(), right: fits.len() });
    }
    Ok(fits
        .iter()
        .enumerate()
        .map(|(i, fr)| fr.m_hat.map(|m| signed_residual(sample.theta(i), m)))
        .collect())
}

/// A bandwidth selector entering the Monte Carlo comparison.
#[derive(Debug, Clone, PartialEq)]
pub enum Selector {
    Cv,
    Mcv { radius: f64 },
    CaseOracle,
}

impl Selector {
    pub fn label(&self) -> String {
        match self {
            Selector::Cv => "CV".to_string(),
            Selector::Mcv { radius } => format!("MCV[l={radius}]"),
            Selector::CaseOracle => "CASE".to_string(),
        }
    }

    fn criterion(&self, truth: &[Angle]) -> SelectionCriterion {
        match self {
            Selector::Cv => SelectionCriterion::Cv,
            Selector::Mcv { radius } => SelectionCriterion::Mcv { radius: *radius },
            Selector::CaseOracle => SelectionCriterion::CaseOracle { truth: truth.to_vec() },
        }
    }
}

/// Per-axis grid configuration for the shared diagonal search:
/// `[lo_factor, hi_factor]` times the default initial bandwidth entry,
/// `points_per_axis` log-spaced candidates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridConfig {
    pub lo_factor: f64,
    pub hi_factor: f64,
    pub points_per_axis: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig { lo_factor: 0.05, hi_factor: 1.5, points_per_axis: 15 }
    }
}

/// Full description of one Monte Carlo benchmark run.
///
/// Every selector (oracle included) searches the same per-replicate diagonal
/// grid, so the oracle's score is an exact lower bound for every data-driven
/// selector within each replicate.
#[derive(Debug, Clone)]
pub struct MonteCarloPlan {
    pub scenario: ScenarioSpec,
    pub replicates: usize,
    pub degree: Degree,
    pub selectors: Vec<Selector>,
    pub master_seed: u64,
    pub grid: GridConfig,
    pub kernel: KernelSpec,
}

/// Aggregated outcome for one selector.
#[derive(Debug, Clone)]
pub struct SelectorSummary {
    pub label: String,
    /// Mean circular average squared error over successful replicates.
    pub mean_case: f64,
    /// Monte Carlo standard error of that mean.
    pub mc_se: f64,
    pub successes: usize,
    pub failures: usize,
}

/// Per-selector summaries plus the per-replicate scores they were built from
/// (`per_replicate[r][s]`, `None` marks a failed cell).
#[derive(Debug, Clone)]
pub struct MonteCarloTable {
    pub summaries: Vec<SelectorSummary>,
    pub per_replicate: Vec<Vec<Option<f64>>>,
}

/// Runs the benchmark: per replicate, generate a sample from its own RNG
/// stream, select a bandwidth per selector on the shared diagonal grid, fit
/// at the sample locations and score against the truth. Failures are counted
/// and excluded from the means, never silently dropped. Output is
/// deterministic given the plan (replicate streams are keyed by index, and
/// aggregation runs in index order).
pub fn run_monte_carlo(plan: &MonteCarloPlan) -> Result<MonteCarloTable> {
    if plan.replicates == 0 {
        return Err(Error::InvalidParameter("replicates must be ≥ 1".into()));
    }
    if plan.selectors.is_empty() {
        return Err(Error::EmptyInput);
    }
    plan.scenario.validate()?;

    let replicate_row = |r: usize| -> Vec<Option<f64>> {
        let mut rng = replicate_rng(plan.master_seed, r as u64);
        let generated = generate_sample(&plan.scenario, &mut rng);
        let (sample, truth) = match generated {
            Ok(pair) => pair,
            Err(_) => return vec![None; plan.selectors.len()],
        };
        let space = match BandwidthSearchSpace::diagonal_scaled(
            &sample,
            plan.grid.lo_factor,
            plan.grid.hi_factor,
            plan.grid.points_per_axis,
        ) {
            Ok(s) => s,
            Err(_) => return vec![None; plan.selectors.len()],
        };
        plan.selectors
            .iter()
            .map(|sel| {
                let criterion = sel.criterion(&truth);
                let report = grid_search_diagonal(
                    &sample,
                    &plan.kernel,
                    plan.degree,
                    &criterion,
                    &space,
                )
                .ok()?;
                let fits = fit_surface(
                    &sample,
                    &plan.kernel,
                    &report.chosen_h,
                    sample.locations(),
                    plan.degree,
                )
                .ok()?;
                case_score(&truth, &fits).ok()
            })
            .collect()
    };

    let per_replicate: Vec<Vec<Option<f64>>> =
        (0..plan.replicates).into_par_iter().map(replicate_row).collect();

    let summaries = plan
        .selectors
        .iter()
        .enumerate()
        .map(|(s, sel)| {
            let scores: Vec<f64> =
                per_replicate.iter().filter_map(|row| row[s]).collect();
            let successes = scores.len();
            let failures = plan.replicates - successes;
            let mean = scores.iter().sum::<f64>() / successes.max(1) as f64;
            let mc_se = if successes >= 2 {
                let var = scores.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>()
                    / (successes - 1) as f64;
                (var / successes as f64).sqrt()
            } else {
                f64::NAN
            };
            SelectorSummary {
                label: sel.label(),
                mean_case: if successes == 0 { f64::NAN } else { mean },
                mc_se,
                successes,
                failures,
            }
        })
        .collect();

    Ok(MonteCarloTable { summaries, per_replicate })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimator::{Fallback, Locations};
    use crate::simulate::{
        CorrelationModel, Design, ErrorProcess, TrendFunction, WrappedGpSpec,
    };
    use approx::assert_abs_diff_eq;

    fn mk_fit(v: Option<f64>) -> FitResult {
        let a = v.map(|x| Angle::new(x).unwrap());
        FitResult {
            point: vec![0.0, 0.0],
            m_hat: a,
            m1_hat: a.map(|t| t.sin()).unwrap_or(0.0),
            m2_hat: a.map(|t| t.cos()).unwrap_or(0.0),
            resultant: if a.is_some() { 1.0 } else { 0.0 },
            degree: Degree::Constant,
            fallback: if a.is_some() { Fallback::None } else { Fallback::Undefined },
        }
    }

    #[test]
    fn prediction_error_cases() {
        let thetas: Vec<Angle> =
            [0.2, 1.4, 3.0].iter().map(|&v| Angle::new(v).unwrap()).collect();
        let perfect: Vec<FitResult> = [0.2, 1.4, 3.0].iter().map(|&v| mk_fit(Some(v))).collect();
        assert_eq!(prediction_error(&thetas, &perfect).unwrap(), 0.0);

        let antipodal: Vec<FitResult> = [0.2, 1.4, 3.0]
            .iter()
            .map(|&v| mk_fit(Some(v + std::f64::consts::PI)))
            .collect();
        assert_abs_diff_eq!(
            prediction_error(&thetas, &antipodal).unwrap(),
            6.0,
            epsilon = 1e-12
        );

        // Hand-evaluated three-pair fixture with one undefined prediction.
        let mixed = vec![mk_fit(Some(0.5)), mk_fit(None), mk_fit(Some(3.0))];
        let expect = (1.0 - 0.3f64.cos()) + 2.0 + 0.0;
        assert_abs_diff_eq!(prediction_error(&thetas, &mixed).unwrap(), expect, epsilon = 1e-12);

        assert!(matches!(
            prediction_error(&thetas, &perfect[..2]),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn split_sizes_and_determinism() {
        let sample = AngularSample::new(
            Locations::unit_square_grid(4).unwrap(),
            (0..16).map(|i| Angle::new(0.1 * i as f64).unwrap()).collect(),
        )
        .unwrap();
        let split = SplitSpec::new(0.75, 7).unwrap();
        let (tr1, te1) = train_test_split(&sample, &split).unwrap();
        let (tr2, te2) = train_test_split(&sample, &split).unwrap();
        assert_eq!(tr1.n(), 12);
        assert_eq!(te1.n(), 4);
        assert_eq!(tr1.thetas(), tr2.thetas());
        assert_eq!(te1.thetas(), te2.thetas());
        assert_eq!(tr1.n() + te1.n(), sample.n());

        // Rounding rule at the documented sizes.
        let n = 1494;
        let side_sample = AngularSample::new(
            Locations::new(1, (0..n).map(|i| i as f64).collect()).unwrap(),
            vec![Angle::new(0.3).unwrap(); n],
        )
        .unwrap();
        let (tr, te) =
            train_test_split(&side_sample, &SplitSpec::new(0.9, 1).unwrap()).unwrap();
        assert_eq!((tr.n(), te.n()), (1345, 149));

        let ten = AngularSample::new(
            Locations::new(1, (0..10).map(|i| i as f64).collect()).unwrap(),
            vec![Angle::new(0.3).unwrap(); 10],
        )
        .unwrap();
        let (tr, te) = train_test_split(&ten, &SplitSpec::new(0.9, 1).unwrap()).unwrap();
        assert_eq!((tr.n(), te.n()), (9, 1));

        assert!(SplitSpec::new(1.0, 0).is_err());
        assert!(SplitSpec::new(0.0, 0).is_err());
    }

    #[test]
    fn split_partitions_without_overlap() {
        let sample = AngularSample::new(
            Locations::new(1, (0..30).map(|i| i as f64).collect()).unwrap(),
            (0..30).map(|i| Angle::new(0.2 * i as f64).unwrap()).collect(),
        )
        .unwrap();
        let (tr, te) =
            train_test_split(&sample, &SplitSpec::new(0.6, 5).unwrap()).unwrap();
        let mut seen: Vec<f64> = tr
            .locations()
            .coords()
            .iter()
            .chain(te.locations().coords())
            .copied()
            .collect();
        seen.sort_by(f64::total_cmp);
        let expect: Vec<f64> = (0..30).map(|i| i as f64).collect();
        assert_eq!(seen, expect);
    }

    #[test]
    fn residual_table_cases() {
        let sample = AngularSample::new(
            Locations::new(1, vec![0.0, 1.0, 2.0]).unwrap(),
            vec![
                Angle::new(0.5).unwrap(),
                Angle::new(1.5).unwrap(),
                Angle::new(2.5).unwrap(),
            ],
        )
        .unwrap();
        let perfect: Vec<FitResult> = [0.5, 1.5, 2.5].iter().map(|&v| mk_fit(Some(v))).collect();
        let table = residual_table(&sample, &perfect).unwrap();
        for r in &table {
            assert_eq!(r.unwrap().value(), 0.0);
        }

        let shifted: Vec<FitResult> =
            [0.6, 1.6, 2.6].iter().map(|&v| mk_fit(Some(v))).collect();
        let table = residual_table(&sample, &shifted).unwrap();
        for r in &table {
            assert_abs_diff_eq!(r.unwrap().value(), -0.1, epsilon = 1e-12);
        }

        let with_missing = vec![mk_fit(Some(0.1)), mk_fit(None), mk_fit(Some(2.0))];
        let table = residual_table(&sample, &with_missing).unwrap();
        assert!(table[1].is_none());
        assert_abs_diff_eq!(table[0].unwrap().value(), 0.4, epsilon = 1e-12);
        assert_abs_diff_eq!(table[2].unwrap().value(), 0.5, epsilon = 1e-12);
    }

    fn small_plan(selectors: Vec<Selector>, master_seed: u64) -> MonteCarloPlan {
        MonteCarloPlan {
            scenario: ScenarioSpec {
                trend: TrendFunction::R1,
                n: 25,
                design: Design::UnitSquareGrid,
                errors: ErrorProcess::Wrapped(
                    WrappedGpSpec::new(
                        0.0,
                        1.0,
                        CorrelationModel::exponential(0.3).unwrap(),
                    )
                    .unwrap(),
                ),
                seed: 0,
            },
            replicates: 4,
            degree: Degree::Constant,
            selectors,
            master_seed,
            grid: GridConfig { points_per_axis: 6, ..Default::default() },
            kernel: KernelSpec::product_triweight(2).unwrap(),
        }
    }

    #[test]
    fn monte_carlo_deterministic_and_dominated_by_oracle() {
        let plan = small_plan(
            vec![Selector::Cv, Selector::Mcv { radius: 0.2 }, Selector::CaseOracle],
            99,
        );
        let t1 = run_monte_carlo(&plan).unwrap();
        let t2 = run_monte_carlo(&plan).unwrap();
        for (a, b) in t1.summaries.iter().zip(&t2.summaries) {
            assert_eq!(a.mean_case.to_bits(), b.mean_case.to_bits());
            assert_eq!(a.mc_se.to_bits(), b.mc_se.to_bits());
            assert_eq!(a.failures, 0);
        }
        // On-grid oracle dominance per replicate.
        for row in &t1.per_replicate {
            let oracle = row[2].unwrap();
            assert!(oracle <= row[0].unwrap());
            assert!(oracle <= row[1].unwrap());
        }
    }

    #[test]
    fn monte_carlo_zero_noise_oracle_case_is_tiny() {
        let mut plan = small_plan(vec![Selector::CaseOracle], 3);
        plan.replicates = 1;
        plan.scenario.errors = ErrorProcess::Wrapped(
            WrappedGpSpec::new(0.0, 1e-18, CorrelationModel::exponential(0.3).unwrap())
                .unwrap(),
        );
        let table = run_monte_carlo(&plan).unwrap();
        assert!(table.summaries[0].mean_case < 1e-3);
    }
}
