//! Bandwidth-matrix selection: cross-validation (CV), modified
//! cross-validation (MCV) with a distance-based exclusion neighborhood, the
//! circular-average-squared-error (CASE) oracle benchmark, exhaustive
//! diagonal grid search, and a Nelder–Mead simplex search over full
//! symmetric positive-definite matrices.

use crate::circular::{angular_risk, Angle};
use crate::error::{Error, Result};
use crate::estimator::{fit_excluding, fit_surface, AngularSample, Degree, FitResult};
use crate::kernel::{BandwidthMatrix, KernelSpec};
use rayon::prelude::*;

/// Degenerate leave-out terms (empty neighborhood, undefined direction) are
/// charged the supremum of the angular risk so every criterion stays finite.
const DEGENERATE_RISK: f64 = 2.0;

/// Minimum sample size before criterion terms are evaluated in parallel.
const PAR_CRITERION_THRESHOLD: usize = 400;

/// A data-driven or oracle criterion for scoring a bandwidth matrix.
#[derive(Debug, Clone, PartialEq)]
pub enum SelectionCriterion {
    /// Leave-one-out cross-validation.
    Cv,
    /// Modified cross-validation: every observation within the closed ball of
    /// the given radius around the evaluation point is left out as well.
    /// Radius 0 evaluates identically to [`SelectionCriterion::Cv`].
    Mcv { radius: f64 },
    /// Oracle benchmark scoring the fit against the true directions at the
    /// sample locations; usable only in simulations.
    CaseOracle { truth: Vec<Angle> },
}

impl SelectionCriterion {
    fn validate(&self, sample: &AngularSample) -> Result<()> {
        match self {
            SelectionCriterion::Cv => Ok(()),
            SelectionCriterion::Mcv { radius } => {
                if !(radius.is_finite() && *radius >= 0.0) {
                    return Err(Error::InvalidParameter("MCV radius must be ≥ 0".into()));
                }
                Ok(())
            }
            SelectionCriterion::CaseOracle { truth } => {
                if truth.len() != sample.n() {
                    return Err(Error::LengthMismatch { left: truth.len(), right: sample.n() });
                }
                Ok(())
            }
        }
    }
}

/// Leave-one-out cross-validation score
/// `Σᵢ {1 − cos[Θᵢ − m̂⁽ⁱ⁾(Xᵢ)]}`.
pub fn cv_score(
    sample: &AngularSample,
    spec: &KernelSpec,
    h: &BandwidthMatrix,
    degree: Degree,
) -> Result<f64> {
    mcv_score(sample, spec, h, degree, 0.0)
}

/// Modified cross-validation score with exclusion radius `radius`; terms
/// whose leave-out fit is degenerate contribute the maximal risk 2.
pub fn mcv_score(
    sample: &AngularSample,
    spec: &KernelSpec,
    h: &BandwidthMatrix,
    degree: Degree,
    radius: f64,
) -> Result<f64> {
    if sample.n() < 2 {
        return Err(Error::InvalidParameter("criterion needs n ≥ 2".into()));
    }
    if !(radius.is_finite() && radius >= 0.0) {
        return Err(Error::InvalidParameter("exclusion radius must be ≥ 0".into()));
    }
    let term = |i: usize| -> Result<f64> {
        match fit_excluding(sample, spec, h, i, radius, degree) {
            Ok(fr) => Ok(match fr.m_hat {
                Some(m) => angular_risk(sample.theta(i), m),
                None => DEGENERATE_RISK,
            }),
            Err(Error::EmptyNeighborhood) => Ok(DEGENERATE_RISK),
            Err(e) => Err(e),
        }
    };
    let terms: Vec<f64> = if sample.n() >= PAR_CRITERION_THRESHOLD {
        (0..sample.n()).into_par_iter().map(term).collect::<Result<_>>()?
    } else {
        (0..sample.n()).map(term).collect::<Result<_>>()?
    };
    Ok(terms.iter().sum())
}

/// Circular average squared error `(1/n) Σᵢ {1 − cos[truthᵢ − m̂ᵢ]}` of fits
/// against the true directions; undefined fits contribute 2.
pub fn case_score(truth: &[Angle], fits: &[FitResult]) -> Result<f64> {
    if truth.len() != fits.len() {
        return Err(Error::LengthMismatch { left: truth.len(), right: fits.len() });
    }
    if truth.is_empty() {
        return Err(Error::EmptyInput);
    }
    let total: f64 = truth
        .iter()
        .zip(fits)
        .map(|(t, fr)| match fr.m_hat {
            Some(m) => angular_risk(*t, m),
            None => DEGENERATE_RISK,
        })
        .sum();
    Ok(total / truth.len() as f64)
}

/// Scores one bandwidth matrix under the given criterion.
pub fn evaluate_criterion(
    sample: &AngularSample,
    spec: &KernelSpec,
    degree: Degree,
    criterion: &SelectionCriterion,
    h: &BandwidthMatrix,
) -> Result<f64> {
    criterion.validate(sample)?;
    match criterion {
        SelectionCriterion::Cv => cv_score(sample, spec, h, degree),
        SelectionCriterion::Mcv { radius } => mcv_score(sample, spec, h, degree, *radius),
        SelectionCriterion::CaseOracle { truth } => {
            let fits = fit_surface(sample, spec, h, sample.locations(), degree)?;
            case_score(truth, &fits)
        }
    }
}

/// Shape of the family searched for the bandwidth matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchShape {
    /// Diagonal matrices with positive entries.
    DiagonalPositive,
    /// Full symmetric positive-definite matrices.
    FullSpd,
}

/// Inclusive per-axis range with a number of log-spaced grid points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisRange {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

/// The family of candidate bandwidth matrices handed to a selector.
#[derive(Debug, Clone, PartialEq)]
pub struct BandwidthSearchSpace {
    pub shape: SearchShape,
    pub axes: Vec<AxisRange>,
}

impl BandwidthSearchSpace {
    /// A diagonal search space; every producible matrix is positive definite.
    pub fn diagonal(axes: Vec<AxisRange>) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::EmptyInput);
        }
        for ax in &axes {
            if !(ax.lo.is_finite() && ax.hi.is_finite() && ax.lo > 0.0 && ax.hi >= ax.lo) {
                return Err(Error::InvalidParameter(format!(
                    "axis range must satisfy 0 < lo ≤ hi, got [{}, {}]",
                    ax.lo, ax.hi
                )));
            }
            if ax.count == 0 {
                return Err(Error::InvalidParameter("axis grid count must be ≥ 1".into()));
            }
        }
        Ok(BandwidthSearchSpace { shape: SearchShape::DiagonalPositive, axes })
    }

    /// Default diagonal grid: per axis, `count` log-spaced points spanning
    /// `[lo_factor, hi_factor]` times the default initial bandwidth entry.
    pub fn diagonal_scaled(
        sample: &AngularSample,
        lo_factor: f64,
        hi_factor: f64,
        count: usize,
    ) -> Result<Self> {
        if !(lo_factor.is_finite() && hi_factor.is_finite() && lo_factor > 0.0 && hi_factor >= lo_factor)
        {
            return Err(Error::InvalidParameter("grid factors must satisfy 0 < lo ≤ hi".into()));
        }
        let init = default_init_h(sample)?;
        let axes = (0..sample.dim())
            .map(|i| {
                let base = init.entry(i, i);
                AxisRange { lo: lo_factor * base, hi: hi_factor * base, count }
            })
            .collect();
        Self::diagonal(axes)
    }

    /// The default benchmark grid: 15 log-spaced points per axis spanning
    /// `[0.05, 1.5]` times the initial bandwidth.
    pub fn diagonal_default(sample: &AngularSample) -> Result<Self> {
        Self::diagonal_scaled(sample, 0.05, 1.5, 15)
    }

    /// Log-spaced candidate values per axis, ascending, endpoints exact.
    pub fn axis_candidates(&self) -> Vec<Vec<f64>> {
        self.axes
            .iter()
            .map(|ax| {
                if ax.count == 1 {
                    return vec![ax.lo];
                }
                let (la, lb) = (ax.lo.ln(), ax.hi.ln());
                (0..ax.count)
                    .map(|k| {
                        if k == 0 {
                            ax.lo
                        } else if k == ax.count - 1 {
                            ax.hi
                        } else {
                            (la + (lb - la) * k as f64 / (ax.count as f64 - 1.0)).exp()
                        }
                    })
                    .collect()
            })
            .collect()
    }
}

/// Outcome of a bandwidth selection run.
#[derive(Debug, Clone)]
pub struct CriterionReport {
    pub chosen_h: BandwidthMatrix,
    pub criterion_value: f64,
    pub evaluations: usize,
    pub converged: bool,
    pub trace: Option<Vec<(BandwidthMatrix, f64)>>,
}

/// Exhaustive search over the Cartesian product of the per-axis grids.
///
/// Ties on the criterion value are broken by the smaller determinant, then by
/// the lexicographically smaller diagonal.
pub fn grid_search_diagonal(
    sample: &AngularSample,
    spec: &KernelSpec,
    degree: Degree,
    criterion: &SelectionCriterion,
    space: &BandwidthSearchSpace,
) -> Result<CriterionReport> {
    if space.shape != SearchShape::DiagonalPositive {
        return Err(Error::InvalidParameter("grid search needs a diagonal search space".into()));
    }
    if space.axes.len() != sample.dim() {
        return Err(Error::DimensionMismatch { expected: sample.dim(), got: space.axes.len() });
    }
    criterion.validate(sample)?;
    let axes = space.axis_candidates();
    let total: usize = axes.iter().map(|a| a.len()).product();
    if total == 0 {
        return Err(Error::EmptyInput);
    }

    // Enumerate diagonals in lexicographic order (first axis slowest).
    let mut diagonals = Vec::with_capacity(total);
    let mut idx = vec![0usize; axes.len()];
    loop {
        diagonals.push(idx.iter().enumerate().map(|(a, &k)| axes[a][k]).collect::<Vec<f64>>());
        let mut a = axes.len();
        loop {
            if a == 0 {
                break;
            }
            a -= 1;
            idx[a] += 1;
            if idx[a] < axes[a].len() {
                break;
            }
            idx[a] = 0;
            if a == 0 {
                break;
            }
        }
        if idx.iter().all(|&k| k == 0) {
            break;
        }
    }
    debug_assert_eq!(diagonals.len(), total);

    let scored: Vec<(BandwidthMatrix, f64)> = diagonals
        .par_iter()
        .map(|diag| {
            let h = BandwidthMatrix::diagonal(diag)?;
            let v = evaluate_criterion(sample, spec, degree, criterion, &h)?;
            Ok((h, v))
        })
        .collect::<Result<_>>()?;

    let mut best: usize = 0;
    for (k, (h, v)) in scored.iter().enumerate().skip(1) {
        let (bh, bv) = &scored[best];
        let better = v < bv
            || (v == bv && h.det() < bh.det())
            || (v == bv
                && h.det() == bh.det()
                && diagonals[k].as_slice() < diagonals[best].as_slice());
        if better {
            best = k;
        }
    }
    let (chosen_h, criterion_value) = scored[best].clone();
    Ok(CriterionReport {
        chosen_h,
        criterion_value,
        evaluations: total,
        converged: true,
        trace: Some(scored),
    })
}

/// Stopping and bookkeeping parameters for the simplex search.
#[derive(Debug, Clone)]
pub struct NelderMeadConfig {
    pub tol_f: f64,
    pub tol_x: f64,
    /// Defaults to `500 ×` the number of free parameters when `None`.
    pub max_iter: Option<usize>,
    pub keep_trace: bool,
}

impl Default for NelderMeadConfig {
    fn default() -> Self {
        NelderMeadConfig { tol_f: 1e-6, tol_x: 1e-6, max_iter: None, keep_trace: false }
    }
}

/// Maps the free parameter vector (lower-triangular Cholesky factor with
/// log-transformed diagonal) to a bandwidth matrix. Every parameter vector
/// yields a symmetric positive-definite matrix.
fn params_to_h(dim: usize, theta: &[f64]) -> Result<BandwidthMatrix> {
    let mut l = vec![0.0; dim * dim];
    let mut k = 0;
    for i in 0..dim {
        for j in 0..=i {
            l[i * dim + j] = if i == j { theta[k].exp() } else { theta[k] };
            k += 1;
        }
    }
    let mut entries = vec![0.0; dim * dim];
    for i in 0..dim {
        for j in 0..=i {
            let mut s = 0.0;
            for t in 0..=j {
                s += l[i * dim + t] * l[j * dim + t];
            }
            entries[i * dim + j] = s;
            entries[j * dim + i] = s;
        }
    }
    BandwidthMatrix::new(dim, entries)
}

fn h_to_params(h: &BandwidthMatrix) -> Vec<f64> {
    let dim = h.dim();
    let l = h.cholesky_factor();
    let mut theta = Vec::with_capacity(dim * (dim + 1) / 2);
    for i in 0..dim {
        for j in 0..=i {
            theta.push(if i == j { l[i * dim + i].ln() } else { l[i * dim + j] });
        }
    }
    theta
}

/// Nelder–Mead simplex minimization of an arbitrary objective over the
/// unconstrained Cholesky parameterization of SPD matrices.
///
/// Standard simplex coefficients: reflection 1, expansion 2, contraction 0.5,
/// shrink 0.5. Convergence is declared when the simplex diameter drops below
/// `tol_x` or the objective spread below `tol_f`.
pub fn minimize_spd<F>(
    dim: usize,
    init: &BandwidthMatrix,
    config: &NelderMeadConfig,
    mut objective: F,
) -> Result<CriterionReport>
where
    F: FnMut(&BandwidthMatrix) -> Result<f64>,
{
    if init.dim() != dim {
        return Err(Error::DimensionMismatch { expected: dim, got: init.dim() });
    }
    let nparams = dim * (dim + 1) / 2;
    let max_iter = config.max_iter.unwrap_or(500 * nparams);
    let mut evaluations = 0usize;
    let mut trace: Vec<(BandwidthMatrix, f64)> = Vec::new();

    let mut eval = |theta: &[f64],
                    evaluations: &mut usize,
                    trace: &mut Vec<(BandwidthMatrix, f64)>|
     -> Result<f64> {
        *evaluations += 1;
        match params_to_h(dim, theta) {
            Ok(h) => {
                let v = objective(&h)?;
                if config.keep_trace {
                    trace.push((h, v));
                }
                Ok(if v.is_nan() { f64::INFINITY } else { v })
            }
            // Overflowed parameterization: treat as an infinitely bad vertex.
            Err(_) => Ok(f64::INFINITY),
        }
    };

    let x0 = h_to_params(init);
    let f0 = eval(&x0, &mut evaluations, &mut trace)?;
    if !f0.is_finite() {
        return Err(Error::NonFiniteCriterion);
    }

    let mut simplex: Vec<Vec<f64>> = vec![x0.clone()];
    for i in 0..nparams {
        let mut v = x0.clone();
        let delta = if v[i].abs() < 1e-12 { 0.00025 } else { 0.05 * v[i].abs() };
        v[i] += delta;
        simplex.push(v);
    }
    let mut values = vec![f0];
    for v in simplex.iter().skip(1) {
        values.push(eval(v, &mut evaluations, &mut trace)?);
    }

    let mut converged = false;
    for _ in 0..max_iter {
        let mut order: Vec<usize> = (0..=nparams).collect();
        order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        let spread = values[nparams] - values[0];
        let diameter = simplex[1..]
            .iter()
            .map(|v| {
                v.iter()
                    .zip(&simplex[0])
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0_f64, f64::max);
        if spread < config.tol_f || diameter < config.tol_x {
            converged = true;
            break;
        }

        let centroid: Vec<f64> = (0..nparams)
            .map(|j| simplex[..nparams].iter().map(|v| v[j]).sum::<f64>() / nparams as f64)
            .collect();
        let worst = simplex[nparams].clone();
        let reflect: Vec<f64> =
            centroid.iter().zip(&worst).map(|(c, w)| c + (c - w)).collect();
        let f_r = eval(&reflect, &mut evaluations, &mut trace)?;

        if f_r < values[0] {
            let expand: Vec<f64> =
                centroid.iter().zip(&worst).map(|(c, w)| c + 2.0 * (c - w)).collect();
            let f_e = eval(&expand, &mut evaluations, &mut trace)?;
            if f_e < f_r {
                simplex[nparams] = expand;
                values[nparams] = f_e;
            } else {
                simplex[nparams] = reflect;
                values[nparams] = f_r;
            }
        } else if f_r < values[nparams - 1] {
            simplex[nparams] = reflect;
            values[nparams] = f_r;
        } else {
            let (contract, f_c) = if f_r < values[nparams] {
                let outside: Vec<f64> = centroid
                    .iter()
                    .zip(&reflect)
                    .map(|(c, r)| c + 0.5 * (r - c))
                    .collect();
                let f = eval(&outside, &mut evaluations, &mut trace)?;
                (outside, f)
            } else {
                let inside: Vec<f64> = centroid
                    .iter()
                    .zip(&worst)
                    .map(|(c, w)| c + 0.5 * (w - c))
                    .collect();
                let f = eval(&inside, &mut evaluations, &mut trace)?;
                (inside, f)
            };
            if f_c < values[nparams].min(f_r) {
                simplex[nparams] = contract;
                values[nparams] = f_c;
            } else {
                // Shrink toward the best vertex.
                for i in 1..=nparams {
                    let shrunk: Vec<f64> = simplex[i]
                        .iter()
                        .zip(&simplex[0])
                        .map(|(v, b)| b + 0.5 * (v - b))
                        .collect();
                    values[i] = eval(&shrunk, &mut evaluations, &mut trace)?;
                    simplex[i] = shrunk;
                }
            }
        }
    }

    let mut best = 0;
    for i in 1..=nparams {
        if values[i] < values[best] {
            best = i;
        }
    }
    Ok(CriterionReport {
        chosen_h: params_to_h(dim, &simplex[best])?,
        criterion_value: values[best],
        evaluations,
        converged,
        trace: if config.keep_trace { Some(trace) } else { None },
    })
}

/// Selects a full SPD bandwidth matrix by Nelder–Mead minimization of the
/// given criterion, starting from `init_h`.
pub fn nelder_mead_select(
    sample: &AngularSample,
    spec: &KernelSpec,
    degree: Degree,
    criterion: &SelectionCriterion,
    init_h: &BandwidthMatrix,
    config: &NelderMeadConfig,
) -> Result<CriterionReport> {
    criterion.validate(sample)?;
    if init_h.dim() != sample.dim() {
        return Err(Error::DimensionMismatch { expected: sample.dim(), got: init_h.dim() });
    }
    minimize_spd(sample.dim(), init_h, config, |h| {
        evaluate_criterion(sample, spec, degree, criterion, h)
    })
}

/// Default initial bandwidth: `1.5 ×` the diagonal of per-coordinate sample
/// standard deviations (with the `n − 1` divisor).
pub fn default_init_h(sample: &AngularSample) -> Result<BandwidthMatrix> {
    if sample.n() < 2 {
        return Err(Error::InvalidParameter("initial bandwidth needs n ≥ 2".into()));
    }
    let n = sample.n() as f64;
    let d = sample.dim();
    let mut diag = Vec::with_capacity(d);
    for k in 0..d {
        let mean: f64 = (0..sample.n()).map(|i| sample.location(i)[k]).sum::<f64>() / n;
        let ss: f64 = (0..sample.n())
            .map(|i| {
                let dev = sample.location(i)[k] - mean;
                dev * dev
            })
            .sum();
        let sd = (ss / (n - 1.0)).sqrt();
        if sd == 0.0 {
            return Err(Error::InvalidParameter(format!(
                "coordinate {k} has zero variance"
            )));
        }
        diag.push(1.5 * sd);
    }
    BandwidthMatrix::diagonal(&diag)
}

/// Exclusion radius `√2·b/10` for the unit-square designs; `b = 0` recovers
/// plain cross-validation and `b = 10` spans the square's diameter.
pub fn radius_from_b(b: u32) -> Result<f64> {
    if b > 10 {
        return Err(Error::InvalidParameter(format!("b must lie in 0..=10, got {b}")));
    }
    Ok(std::f64::consts::SQRT_2 * b as f64 / 10.0)
}
