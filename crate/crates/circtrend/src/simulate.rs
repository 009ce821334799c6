//! Simulation of circular spatial error processes and trend scenarios:
//! stationary correlation models, zero-mean Gaussian field sampling via
//! Cholesky factorization, wrapped and projected circular error processes,
//! two benchmark trend functions on the unit square, and full sample
//! generation.

use crate::circular::{arctan2, center_angles, mod2pi, Angle};
use crate::error::{Error, Result};
use crate::estimator::{AngularSample, Locations};
use nalgebra::DMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use std::sync::Arc;

/// Stationary isotropic correlation models, evaluated on distances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CorrelationModel {
    /// `exp(−dist / range)`; larger range means longer-ranged dependence.
    Exponential { range: f64 },
    /// `1 / (1 + scale · dist²)`.
    RationalQuadratic { scale: f64 },
}

impl CorrelationModel {
    pub fn exponential(range: f64) -> Result<Self> {
        if !(range.is_finite() && range > 0.0) {
            return Err(Error::InvalidParameter("correlation range must be > 0".into()));
        }
        Ok(CorrelationModel::Exponential { range })
    }

    pub fn rational_quadratic(scale: f64) -> Result<Self> {
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::InvalidParameter("correlation scale must be > 0".into()));
        }
        Ok(CorrelationModel::RationalQuadratic { scale })
    }
}

/// Correlation at the given nonnegative distance; equals 1 at distance 0.
pub fn corr_eval(model: &CorrelationModel, dist: f64) -> Result<f64> {
    if !(dist.is_finite() && dist >= 0.0) {
        return Err(Error::InvalidParameter("distance must be ≥ 0".into()));
    }
    Ok(match model {
        CorrelationModel::Exponential { range } => (-dist / range).exp(),
        CorrelationModel::RationalQuadratic { scale } => 1.0 / (1.0 + scale * dist * dist),
    })
}

/// Covariance matrix `σ² ρ(‖X_i − X_j‖)` over the given locations. Exactly
/// symmetric with constant diagonal `σ²`.
pub fn covariance_matrix(
    locations: &Locations,
    model: &CorrelationModel,
    sigma2: f64,
) -> Result<DMatrix<f64>> {
    if !(sigma2.is_finite() && sigma2 > 0.0) {
        return Err(Error::InvalidParameter("variance must be > 0".into()));
    }
    let n = locations.n();
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    let mut cov = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        cov[(i, i)] = sigma2;
        for j in 0..i {
            let v = sigma2 * corr_eval(model, locations.distance(i, j))?;
            cov[(i, j)] = v;
            cov[(j, i)] = v;
        }
    }
    Ok(cov)
}

/// Lower Cholesky factor of a covariance matrix, retrying with escalating
/// diagonal jitter `1e−10·σ² × 10^k` up to `1e−6·σ²` before giving up.
pub fn cholesky_with_jitter(cov: &DMatrix<f64>, sigma2: f64) -> Result<DMatrix<f64>> {
    if let Some(ch) = cov.clone().cholesky() {
        return Ok(ch.l());
    }
    let mut jitter = 1e-10 * sigma2;
    while jitter <= 1e-6 * sigma2 {
        let mut jittered = cov.clone();
        for i in 0..cov.nrows() {
            jittered[(i, i)] += jitter;
        }
        if let Some(ch) = jittered.cholesky() {
            return Ok(ch.l());
        }
        jitter *= 10.0;
    }
    Err(Error::NotPsd)
}

/// One draw of a zero-mean Gaussian field with the given covariance
/// structure: `w = L z` with `z` i.i.d. standard normal drawn in index order.
pub fn sample_gaussian_field<R: Rng + ?Sized>(
    locations: &Locations,
    model: &CorrelationModel,
    sigma2: f64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let cov = covariance_matrix(locations, model, sigma2)?;
    let l = cholesky_with_jitter(&cov, sigma2)?;
    let n = locations.n();
    let z: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut acc = 0.0;
        for j in 0..=i {
            acc += l[(i, j)] * z[j];
        }
        w[i] = acc;
    }
    Ok(w)
}

/// Wrapped Gaussian circular error process: a real Gaussian field reduced
/// modulo 2π at every location.
#[derive(Debug, Clone, PartialEq)]
pub struct WrappedGpSpec {
    pub mu: f64,
    pub sigma2: f64,
    pub corr: CorrelationModel,
}

impl WrappedGpSpec {
    pub fn new(mu: f64, sigma2: f64, corr: CorrelationModel) -> Result<Self> {
        if !mu.is_finite() {
            return Err(Error::NonFiniteInput);
        }
        if !(sigma2.is_finite() && sigma2 > 0.0) {
            return Err(Error::InvalidParameter("wrapped process variance must be > 0".into()));
        }
        Ok(WrappedGpSpec { mu, sigma2, corr })
    }
}

/// Projected Gaussian circular error process: directions of a bivariate
/// Gaussian field with separable cross-covariance `ρ(·) ⊗ T`, where
/// `T = [[σ², τσ], [τσ, 1]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectedGpSpec {
    pub mu: [f64; 2],
    pub sigma: f64,
    pub tau: f64,
    pub corr: CorrelationModel,
}

impl ProjectedGpSpec {
    pub fn new(mu: [f64; 2], sigma: f64, tau: f64, corr: CorrelationModel) -> Result<Self> {
        if !(mu[0].is_finite() && mu[1].is_finite()) {
            return Err(Error::NonFiniteInput);
        }
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::InvalidParameter("projected process sigma must be > 0".into()));
        }
        if !(tau.is_finite() && (-1.0..=1.0).contains(&tau)) {
            return Err(Error::InvalidParameter(format!(
                "tau must lie in [−1, 1], got {tau}"
            )));
        }
        Ok(ProjectedGpSpec { mu, sigma, tau, corr })
    }

    /// The standard simulation setting: mean `(1, 1)` (which keeps the error
    /// distribution unimodal), `σ = 1`, `τ = 0.9`.
    pub fn standard(corr: CorrelationModel) -> Self {
        ProjectedGpSpec { mu: [1.0, 1.0], sigma: 1.0, tau: 0.9, corr }
    }

    /// Lower Cholesky factor of the 2×2 component covariance `T`.
    fn component_factor(&self) -> [[f64; 2]; 2] {
        [[self.sigma, 0.0], [self.tau, (1.0 - self.tau * self.tau).max(0.0).sqrt()]]
    }
}

/// Draws a wrapped circular error sample and centers it (subtracting the
/// sample circular mean direction, then reducing modulo 2π).
pub fn sample_wrapped_errors<R: Rng + ?Sized>(
    locations: &Locations,
    spec: &WrappedGpSpec,
    rng: &mut R,
) -> Result<Vec<Angle>> {
    let w = sample_gaussian_field(locations, &spec.corr, spec.sigma2, rng)?;
    let raw: Vec<Angle> = w
        .iter()
        .map(|wi| mod2pi(spec.mu + wi))
        .collect::<Result<_>>()?;
    center_angles(&raw)
}

/// Draws the two component fields of the zero-mean bivariate process with
/// covariance `R ⊗ T`, using the identity `chol(R ⊗ T) = chol(R) ⊗ chol(T)`.
pub fn sample_bivariate_field<R: Rng + ?Sized>(
    locations: &Locations,
    spec: &ProjectedGpSpec,
    rng: &mut R,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = locations.n();
    let corr = covariance_matrix(locations, &spec.corr, 1.0)?;
    let lr = cholesky_with_jitter(&corr, 1.0)?;
    let lt = spec.component_factor();
    // z drawn location-major: (z_{j,1}, z_{j,2}) for j = 0..n.
    let mut v1 = vec![0.0; n];
    let mut v2 = vec![0.0; n];
    for j in 0..n {
        let z1: f64 = rng.sample(StandardNormal);
        let z2: f64 = rng.sample(StandardNormal);
        v1[j] = lt[0][0] * z1;
        v2[j] = lt[1][0] * z1 + lt[1][1] * z2;
    }
    let mut w1 = vec![0.0; n];
    let mut w2 = vec![0.0; n];
    for i in 0..n {
        let mut a1 = 0.0;
        let mut a2 = 0.0;
        for j in 0..=i {
            let lij = lr[(i, j)];
            a1 += lij * v1[j];
            a2 += lij * v2[j];
        }
        w1[i] = a1;
        w2[i] = a2;
    }
    Ok((w1, w2))
}

/// Draws a projected circular error sample `arctan2(Y₂, Y₁)` with
/// `Y = μ + w`, centered.
pub fn sample_projected_errors<R: Rng + ?Sized>(
    locations: &Locations,
    spec: &ProjectedGpSpec,
    rng: &mut R,
) -> Result<Vec<Angle>> {
    let (w1, w2) = sample_bivariate_field(locations, spec, rng)?;
    let raw: Vec<Angle> = w1
        .iter()
        .zip(&w2)
        .map(|(a, b)| arctan2(spec.mu[1] + b, spec.mu[0] + a))
        .collect::<Result<_>>()?;
    center_angles(&raw)
}

/// First benchmark trend on the unit square:
/// `arctan2(6x₁⁵ − 2x₁³ − 1, −2x₂⁵ − 3x₂ − 1)`.
pub fn regression_r1(x: &[f64]) -> Result<Angle> {
    if x.len() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: x.len() });
    }
    let y = 6.0 * x[0].powi(5) - 2.0 * x[0].powi(3) - 1.0;
    let c = -2.0 * x[1].powi(5) - 3.0 * x[1] - 1.0;
    arctan2(y, c)
}

/// Second benchmark trend on the unit square:
/// `arccos(x₁⁵ − 1) + (3/2)·arcsin(x₂³ − x₂ + 1)`, reduced modulo 2π.
pub fn regression_r2(x: &[f64]) -> Result<Angle> {
    if x.len() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: x.len() });
    }
    let a = x[0].powi(5) - 1.0;
    let b = x[1].powi(3) - x[1] + 1.0;
    if !(-1.0..=1.0).contains(&a) || !(-1.0..=1.0).contains(&b) {
        return Err(Error::DomainViolation(format!("({}, {})", x[0], x[1])));
    }
    mod2pi(a.acos() + 1.5 * b.asin())
}

/// The trend surface of a simulation scenario.
#[derive(Clone)]
pub enum TrendFunction {
    R1,
    R2,
    Custom(Arc<dyn Fn(&[f64]) -> Result<Angle> + Send + Sync>),
}

impl TrendFunction {
    pub fn eval(&self, x: &[f64]) -> Result<Angle> {
        match self {
            TrendFunction::R1 => regression_r1(x),
            TrendFunction::R2 => regression_r2(x),
            TrendFunction::Custom(f) => f(x),
        }
    }
}

impl std::fmt::Debug for TrendFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TrendFunction::R1 => f.write_str("R1"),
            TrendFunction::R2 => f.write_str("R2"),
            TrendFunction::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

/// Spatial design of a scenario.
#[derive(Debug, Clone)]
pub enum Design {
    /// Regular `√n × √n` grid on the unit square (endpoints included).
    UnitSquareGrid,
    /// Explicit coordinates provided by the caller.
    Explicit(Locations),
}

/// Which circular error process drives a scenario.
#[derive(Debug, Clone)]
pub enum ErrorProcess {
    Wrapped(WrappedGpSpec),
    Projected(ProjectedGpSpec),
}

/// Full description of a simulation scenario.
#[derive(Debug, Clone)]
pub struct ScenarioSpec {
    pub trend: TrendFunction,
    pub n: usize,
    pub design: Design,
    pub errors: ErrorProcess,
    pub seed: u64,
}

impl ScenarioSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n < 4 {
            return Err(Error::InvalidParameter("scenario needs n ≥ 4".into()));
        }
        match &self.design {
            Design::UnitSquareGrid => {
                let side = (self.n as f64).sqrt().round() as usize;
                if side * side != self.n {
                    return Err(Error::InvalidParameter(format!(
                        "grid design needs a perfect-square n, got {}",
                        self.n
                    )));
                }
            }
            Design::Explicit(locs) => {
                if locs.n() != self.n {
                    return Err(Error::LengthMismatch { left: locs.n(), right: self.n });
                }
            }
        }
        Ok(())
    }

    /// The design locations of this scenario.
    pub fn locations(&self) -> Result<Locations> {
        self.validate()?;
        match &self.design {
            Design::UnitSquareGrid => {
                let side = (self.n as f64).sqrt().round() as usize;
                Locations::unit_square_grid(side)
            }
            Design::Explicit(locs) => Ok(locs.clone()),
        }
    }
}

/// The RNG stream for one Monte Carlo replicate: a seedable, portable
/// generator keyed by the master seed, with one independent stream per
/// replicate index.
pub fn replicate_rng(master_seed: u64, replicate: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(replicate);
    rng
}

/// Generates one sample `Θ_i = [m(X_i) + ε_i] mod 2π` from a scenario,
/// returning the sample together with the true trend values at the design
/// locations. Deterministic given the RNG state.
pub fn generate_sample<R: Rng + ?Sized>(
    scenario: &ScenarioSpec,
    rng: &mut R,
) -> Result<(AngularSample, Vec<Angle>)> {
    let locations = scenario.locations()?;
    let errors = match &scenario.errors {
        ErrorProcess::Wrapped(spec) => sample_wrapped_errors(&locations, spec, rng)?,
        ErrorProcess::Projected(spec) => sample_projected_errors(&locations, spec, rng)?,
    };
    let mut truth = Vec::with_capacity(scenario.n);
    let mut thetas = Vec::with_capacity(scenario.n);
    for i in 0..scenario.n {
        let m = scenario.trend.eval(locations.point(i))?;
        truth.push(m);
        thetas.push(mod2pi(m.radians() + errors[i].radians())?);
    }
    Ok((AngularSample::new(locations, thetas)?, truth))
}

/// Generates the sample using the scenario's own seed.
pub fn generate_sample_seeded(scenario: &ScenarioSpec) -> Result<(AngularSample, Vec<Angle>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);
    generate_sample(scenario, &mut rng)
}
