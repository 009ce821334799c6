//! Kernel-type estimators of a circular regression function.
//!
//! The sine and cosine components of the response are smoothed separately —
//! locally constant (Nadaraya–Watson style, degree 0) or locally linear
//! (degree 1) — and recombined through `arctan2`. Leave-one-out and
//! leave-neighborhood-out variants support the cross-validation criteria.

use crate::circular::{arctan2, Angle};
use crate::error::{Error, Result};
use crate::kernel::{BandwidthMatrix, KernelSpec, WeightEngine};
use rayon::prelude::*;

/// Minimum number of grid points before a surface fit is parallelized.
const PAR_SURFACE_THRESHOLD: usize = 64;

/// A set of `n` points in `R^d`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Locations {
    dim: usize,
    coords: Vec<f64>,
}

impl Locations {
    /// Builds from row-major coordinates; every entry must be finite.
    pub fn new(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("location dimension must be ≥ 1".into()));
        }
        if coords.len() % dim != 0 {
            return Err(Error::DimensionMismatch {
                expected: dim * (coords.len() / dim + 1),
                got: coords.len(),
            });
        }
        if coords.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteInput);
        }
        Ok(Locations { dim, coords })
    }

    /// Regular `side × side` grid on the unit square with both endpoints
    /// included: coordinates `i/(side−1)` in each axis.
    pub fn unit_square_grid(side: usize) -> Result<Self> {
        if side < 2 {
            return Err(Error::InvalidParameter("grid side must be ≥ 2".into()));
        }
        let step = 1.0 / (side as f64 - 1.0);
        let mut coords = Vec::with_capacity(side * side * 2);
        for ix in 0..side {
            for iy in 0..side {
                coords.push(ix as f64 * step);
                coords.push(iy as f64 * step);
            }
        }
        Ok(Locations { dim: 2, coords })
    }

    pub fn n(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Euclidean distance between points `i` and `j`.
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        let (a, b) = (self.point(i), self.point(j));
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt()
    }

    /// New set containing the selected rows, in the given order.
    pub fn subset(&self, indices: &[usize]) -> Locations {
        let mut coords = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            coords.extend_from_slice(self.point(i));
        }
        Locations { dim: self.dim, coords }
    }
}

/// Spatial locations paired with angular responses.
///
/// Sines and cosines of the responses are cached at construction; every
/// estimator consumes them in index-ascending order, which keeps repeated
/// fits bit-reproducible.
#[derive(Debug, Clone, PartialEq)]
pub struct AngularSample {
    locations: Locations,
    thetas: Vec<Angle>,
    sines: Vec<f64>,
    cosines: Vec<f64>,
}

impl AngularSample {
    pub fn new(locations: Locations, thetas: Vec<Angle>) -> Result<Self> {
        if thetas.is_empty() {
            return Err(Error::EmptyInput);
        }
        if locations.n() != thetas.len() {
            return Err(Error::LengthMismatch { left: locations.n(), right: thetas.len() });
        }
        let sines = thetas.iter().map(|t| t.sin()).collect();
        let cosines = thetas.iter().map(|t| t.cos()).collect();
        Ok(AngularSample { locations, thetas, sines, cosines })
    }

    pub fn n(&self) -> usize {
        self.thetas.len()
    }

    pub fn dim(&self) -> usize {
        self.locations.dim()
    }

    pub fn locations(&self) -> &Locations {
        &self.locations
    }

    pub fn location(&self, i: usize) -> &[f64] {
        self.locations.point(i)
    }

    pub fn theta(&self, i: usize) -> Angle {
        self.thetas[i]
    }

    pub fn thetas(&self) -> &[Angle] {
        &self.thetas
    }

    /// New sample containing the selected rows, in the given order.
    pub fn subset(&self, indices: &[usize]) -> Result<AngularSample> {
        let locations = self.locations.subset(indices);
        let thetas = indices.iter().map(|&i| self.thetas[i]).collect();
        AngularSample::new(locations, thetas)
    }
}

/// Local polynomial degree of the component fits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Degree {
    /// Locally constant components (degree 0).
    Constant,
    /// Locally linear components (degree 1).
    Linear,
}

impl Degree {
    pub fn order(self) -> u8 {
        match self {
            Degree::Constant => 0,
            Degree::Linear => 1,
        }
    }

    pub fn from_order(p: u8) -> Result<Self> {
        match p {
            0 => Ok(Degree::Constant),
            1 => Ok(Degree::Linear),
            _ => Err(Error::InvalidParameter(format!("degree must be 0 or 1, got {p}"))),
        }
    }
}

/// How a point estimate was obtained, or why it is missing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fallback {
    /// The requested fit succeeded.
    None,
    /// The local-linear normal matrix was numerically singular; the locally
    /// constant fit was returned instead.
    LinearToConstant,
    /// The direction is undefined (zero resultant or empty neighborhood).
    Undefined,
}

/// Fitted direction and component estimates at one evaluation point.
#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub point: Vec<f64>,
    /// Combined estimate `arctan2(m1_hat, m2_hat)`; absent when undefined.
    pub m_hat: Option<Angle>,
    /// Smoothed sine component.
    pub m1_hat: f64,
    /// Smoothed cosine component.
    pub m2_hat: f64,
    /// `sqrt(m1_hat² + m2_hat²)`, the estimated mean resultant length.
    pub resultant: f64,
    pub degree: Degree,
    pub fallback: Fallback,
}

/// Relative Cholesky-pivot threshold below which the local-linear normal
/// matrix is treated as singular.
const LL_PIVOT_TOL: f64 = 1e-10;

/// Both component estimates are below this magnitude → undefined direction.
const UNDEFINED_TOL: f64 = 1e-300;

/// Locally constant (degree 0) weighted means of `N` response vectors at `x`.
///
/// Observations are visited in ascending index order; zero-weight terms are
/// skipped in every code path so that filtered fits and subsample fits are
/// bitwise identical.
fn nw_filtered<const N: usize>(
    locs: &Locations,
    spec: &KernelSpec,
    h: &BandwidthMatrix,
    x: &[f64],
    ys: [&[f64]; N],
    include: impl Fn(usize) -> bool,
) -> Result<[f64; N]> {
    let mut eng = WeightEngine::new(spec, h)?;
    let mut sw = 0.0;
    let mut sums = [0.0; N];
    for j in 0..locs.n() {
        if !include(j) {
            continue;
        }
        let w = eng.weight(locs.point(j), x);
        if w > 0.0 {
            sw += w;
            for (k, y) in ys.iter().enumerate() {
                sums[k] += w * y[j];
            }
        }
    }
    if sw == 0.0 {
        return Err(Error::EmptyNeighborhood);
    }
    Ok(std::array::from_fn(|k| sums[k] / sw))
}

/// Locally linear (degree 1) fits of `N` response vectors at `x`.
///
/// Returns the intercepts of the weighted least-squares planes and a flag
/// telling whether the fit fell back to the locally constant estimate. The
/// normal matrix is deemed singular when its smallest Cholesky pivot drops
/// below `LL_PIVOT_TOL ×` its largest diagonal entry or when fewer than
/// `d + 1` observations carry positive weight.
fn ll_filtered<const N: usize>(
    locs: &Locations,
    spec: &KernelSpec,
    h: &BandwidthMatrix,
    x: &[f64],
    ys: [&[f64]; N],
    include: impl Fn(usize) -> bool,
) -> Result<([f64; N], bool)> {
    let d = locs.dim();
    let m = d + 1;
    let mut eng = WeightEngine::new(spec, h)?;
    let mut a = vec![0.0; m * m]; // lower triangle of Σ w z zᵀ, z = (1, X_j − x)
    let mut b = vec![0.0; m * N];
    let mut z = vec![0.0; m];
    let mut positive = 0usize;
    for j in 0..locs.n() {
        if !include(j) {
            continue;
        }
        let pj = locs.point(j);
        let w = eng.weight(pj, x);
        if w <= 0.0 {
            continue;
        }
        positive += 1;
        z[0] = 1.0;
        for i in 0..d {
            z[i + 1] = pj[i] - x[i];
        }
        for r in 0..m {
            let wz = w * z[r];
            for c in 0..=r {
                a[r * m + c] += wz * z[c];
            }
            for (k, y) in ys.iter().enumerate() {
                b[r * N + k] += wz * y[j];
            }
        }
    }
    if a[0] == 0.0 {
        return Err(Error::EmptyNeighborhood);
    }
    // Locally constant values from the same accumulators (row 0 of the
    // normal equations), used when the plane fit is unstable.
    let constant: [f64; N] = std::array::from_fn(|k| b[k] / a[0]);
    if positive < m {
        return Ok((constant, true));
    }

    let max_diag = (0..m).map(|i| a[i * m + i]).fold(0.0_f64, f64::max);
    let threshold = LL_PIVOT_TOL * max_diag;
    // Cholesky with the pivot rule; fall back on any small pivot.
    let mut l = vec![0.0; m * m];
    for i in 0..m {
        for j in 0..=i {
            let mut s = a[i * m + j];
            for k in 0..j {
                s -= l[i * m + k] * l[j * m + k];
            }
            if i == j {
                if !(s.is_finite() && s >= threshold && s > 0.0) {
                    return Ok((constant, true));
                }
                l[i * m + i] = s.sqrt();
            } else {
                l[i * m + j] = s / l[j * m + j];
            }
        }
    }
    let mut out = [0.0; N];
    let mut v = vec![0.0; m];
    for k in 0..N {
        for i in 0..m {
            let mut s = b[i * N + k];
            for t in 0..i {
                s -= l[i * m + t] * v[t];
            }
            v[i] = s / l[i * m + i];
        }
        for i in (0..m).rev() {
            let mut s = v[i];
            for t in i + 1..m {
                s -= l[t * m + i] * v[t];
            }
            v[i] = s / l[i * m + i];
        }
        out[k] = v[0];
    }
    Ok((out, false))
}

fn check_point(sample: &AngularSample, x: &[f64]) -> Result<()> {
    if x.len() != sample.dim() {
        return Err(Error::DimensionMismatch { expected: sample.dim(), got: x.len() });
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteInput);
    }
    Ok(())
}

/// Locally constant smooth of a single real-valued response.
pub fn nw_real_response(
    locs: &Locations,
    spec: &KernelSpec,
    h: &BandwidthMatrix,
    x: &[f64],
    ys: &[f64],
) -> Result<f64> {
    if ys.len() != locs.n() {
        return Err(Error::LengthMismatch { left: locs.n(), right: ys.len() });
    }
    Ok(nw_filtered(locs, spec, h, x, [ys], |_| true)?[0])
}

/// Locally linear smooth of a single real-valued response; the boolean tells
/// whether the fit fell back to the locally constant estimate.
pub fn ll_real_response(
    locs: &Locations,
    spec: &KernelSpec,
    h: &BandwidthMatrix,
    x: &[f64],
    ys: &[f64],
) -> Result<(f64, bool)> {
    if ys.len() != locs.n() {
        return Err(Error::LengthMismatch { left: locs.n(), right: ys.len() });
    }
    let (out, fell_back) = ll_filtered(locs, spec, h, x, [ys], |_| true)?;
    Ok((out[0], fell_back))
}

/// Locally constant component estimates `(m̂₁, m̂₂)` at `x`: kernel-weighted
/// means of the response sines and cosines. Both lie in `[−1, 1]`.
pub fn nw_components(
    sample: &AngularSample,
    spec: &KernelSpec,
    h: &BandwidthMatrix,
    x: &[f64],
) -> Result<(f64, f64)> {
    check_point(sample, x)?;
    let [m1, m2] = nw_filtered(
        sample.locations(),
        spec,
        h,
        x,
        [&sample.sines, &sample.cosines],
        |_| true,
    )?;
    Ok((m1, m2))
}

/// Locally linear component estimates `(m̂₁, m̂₂)` at `x`, with the fallback
/// flag raised when the normal matrix was unstable.
pub fn ll_components(
    sample: &AngularSample,
    spec: &KernelSpec,
    h: &BandwidthMatrix,
    x: &[f64],
) -> Result<(f64, f64, Fallback)> {
    check_point(sample, x)?;
    let ([m1, m2], fell_back) = ll_filtered(
        sample.locations(),
        spec,
        h,
        x,
        [&sample.sines, &sample.cosines],
        |_| true,
    )?;
    let flag = if fell_back { Fallback::LinearToConstant } else { Fallback::None };
    Ok((m1, m2, flag))
}

fn fit_point_filtered(
    sample: &AngularSample,
    spec: &KernelSpec,
    h: &BandwidthMatrix,
    x: &[f64],
    degree: Degree,
    include: impl Fn(usize) -> bool,
) -> Result<FitResult> {
    check_point(sample, x)?;
    let ys = [&sample.sines[..], &sample.cosines[..]];
    let (m1, m2, mut fallback) = match degree {
        Degree::Constant => {
            let [m1, m2] = nw_filtered(sample.locations(), spec, h, x, ys, &include)?;
            (m1, m2, Fallback::None)
        }
        Degree::Linear => {
            let ([m1, m2], fell_back) =
                ll_filtered(sample.locations(), spec, h, x, ys, &include)?;
            let flag = if fell_back { Fallback::LinearToConstant } else { Fallback::None };
            (m1, m2, flag)
        }
    };
    let resultant = (m1 * m1 + m2 * m2).sqrt();
    let m_hat = if m1.abs() < UNDEFINED_TOL && m2.abs() < UNDEFINED_TOL {
        fallback = Fallback::Undefined;
        None
    } else {
        Some(arctan2(m1, m2)?)
    };
    Ok(FitResult {
        point: x.to_vec(),
        m_hat,
        m1_hat: m1,
        m2_hat: m2,
        resultant,
        degree,
        fallback,
    })
}

/// Fits the circular regression estimator of the given degree at `x`.
pub fn fit_point(
    sample: &AngularSample,
    spec: &KernelSpec,
    h: &BandwidthMatrix,
    x: &[f64],
    degree: Degree,
) -> Result<FitResult> {
    fit_point_filtered(sample, spec, h, x, degree, |_| true)
}

fn undefined_fit(x: &[f64], degree: Degree) -> FitResult {
    FitResult {
        point: x.to_vec(),
        m_hat: None,
        m1_hat: 0.0,
        m2_hat: 0.0,
        resultant: 0.0,
        degree,
        fallback: Fallback::Undefined,
    }
}

/// Fits the estimator at every grid point, preserving order. Points whose
/// neighborhood is empty are reported with [`Fallback::Undefined`] rather
/// than aborting the batch.
pub fn fit_surface(
    sample: &AngularSample,
    spec: &KernelSpec,
    h: &BandwidthMatrix,
    grid: &Locations,
    degree: Degree,
) -> Result<Vec<FitResult>> {
    if grid.dim() != sample.dim() {
        return Err(Error::DimensionMismatch { expected: sample.dim(), got: grid.dim() });
    }
    let fit_one = |i: usize| -> Result<FitResult> {
        let x = grid.point(i);
        match fit_point(sample, spec, h, x, degree) {
            Ok(fr) => Ok(fr),
            Err(Error::EmptyNeighborhood) => Ok(undefined_fit(x, degree)),
            Err(e) => Err(e),
        }
    };
    if grid.n() >= PAR_SURFACE_THRESHOLD {
        (0..grid.n()).into_par_iter().map(fit_one).collect()
    } else {
        (0..grid.n()).map(fit_one).collect()
    }
}

/// Fits at the sample location `X_i` using only observations strictly farther
/// than `exclusion_radius` from `X_i` (observation `i` itself is always left
/// out, so radius 0 is classical leave-one-out).
pub fn fit_excluding(
    sample: &AngularSample,
    spec: &KernelSpec,
    h: &BandwidthMatrix,
    i: usize,
    exclusion_radius: f64,
    degree: Degree,
) -> Result<FitResult> {
    if i >= sample.n() {
        return Err(Error::InvalidParameter(format!(
            "observation index {i} out of range (n = {})",
            sample.n()
        )));
    }
    if !(exclusion_radius.is_finite() && exclusion_radius >= 0.0) {
        return Err(Error::InvalidParameter("exclusion radius must be ≥ 0".into()));
    }
    let locs = sample.locations();
    let xi = locs.point(i).to_vec();
    let include = |j: usize| j != i && locs.distance(i, j) > exclusion_radius;
    fit_point_filtered(sample, spec, h, &xi, degree, include)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circular::{angular_risk, mod2pi, signed_residual};
    use approx::assert_abs_diff_eq;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn tw(d: usize) -> KernelSpec {
        KernelSpec::product_triweight(d).unwrap()
    }

    fn fixture(n: usize, d: usize, seed: u64) -> AngularSample {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let coords: Vec<f64> = (0..n * d).map(|_| rng.random::<f64>()).collect();
        let thetas: Vec<Angle> = (0..n)
            .map(|_| Angle::new(rng.random::<f64>() * std::f64::consts::TAU).unwrap())
            .collect();
        AngularSample::new(Locations::new(d, coords).unwrap(), thetas).unwrap()
    }

    /// Independent double-loop weighted-mean oracle.
    fn nw_oracle(sample: &AngularSample, spec: &KernelSpec, h: &BandwidthMatrix, x: &[f64]) -> (f64, f64) {
        let (mut sw, mut ss, mut sc) = (0.0, 0.0, 0.0);
        for j in 0..sample.n() {
            let u: Vec<f64> = sample
                .location(j)
                .iter()
                .zip(x)
                .map(|(a, b)| a - b)
                .collect();
            let w = crate::kernel::kernel_h_eval(spec, h, &u).unwrap();
            sw += w;
            ss += w * sample.theta(j).sin();
            sc += w * sample.theta(j).cos();
        }
        (ss / sw, sc / sw)
    }

    /// Generic dense solve (Gaussian elimination with partial pivoting),
    /// written independently of the production Cholesky path.
    fn dense_solve(m: usize, a: &mut [f64], b: &mut [f64]) {
        for col in 0..m {
            let mut piv = col;
            for r in col + 1..m {
                if a[r * m + col].abs() > a[piv * m + col].abs() {
                    piv = r;
                }
            }
            for c in 0..m {
                a.swap(col * m + c, piv * m + c);
            }
            b.swap(col, piv);
            for r in col + 1..m {
                let f = a[r * m + col] / a[col * m + col];
                for c in col..m {
                    a[r * m + c] -= f * a[col * m + c];
                }
                b[r] -= f * b[col];
            }
        }
        for r in (0..m).rev() {
            for c in r + 1..m {
                b[r] -= a[r * m + c] * b[c];
            }
            b[r] /= a[r * m + r];
        }
    }

    /// Weighted-least-squares oracle for the locally linear components.
    fn ll_oracle(
        sample: &AngularSample,
        spec: &KernelSpec,
        h: &BandwidthMatrix,
        x: &[f64],
        sine: bool,
    ) -> f64 {
        let d = sample.dim();
        let m = d + 1;
        let mut a = vec![0.0; m * m];
        let mut b = vec![0.0; m];
        for j in 0..sample.n() {
            let u: Vec<f64> = sample
                .location(j)
                .iter()
                .zip(x)
                .map(|(p, q)| p - q)
                .collect();
            let w = crate::kernel::kernel_h_eval(spec, h, &u).unwrap();
            let mut z = vec![1.0];
            z.extend_from_slice(&u);
            let y = if sine { sample.theta(j).sin() } else { sample.theta(j).cos() };
            for r in 0..m {
                for c in 0..m {
                    a[r * m + c] += w * z[r] * z[c];
                }
                b[r] += w * z[r] * y;
            }
        }
        dense_solve(m, &mut a, &mut b);
        b[0]
    }

    #[test]
    fn nw_constant_responses_and_single_point() {
        let theta0 = Angle::new(1.1).unwrap();
        let locs = Locations::new(2, vec![0.1, 0.1, 0.4, 0.2, 0.3, 0.9]).unwrap();
        let sample = AngularSample::new(locs, vec![theta0; 3]).unwrap();
        let h = BandwidthMatrix::scaled_identity(2, 1.0).unwrap();
        let (m1, m2) = nw_components(&sample, &tw(2), &h, &[0.3, 0.3]).unwrap();
        assert_abs_diff_eq!(m1, theta0.sin(), epsilon = 1e-14);
        assert_abs_diff_eq!(m2, theta0.cos(), epsilon = 1e-14);

        let single = AngularSample::new(
            Locations::new(2, vec![0.5, 0.5]).unwrap(),
            vec![theta0],
        )
        .unwrap();
        let (m1, m2) = nw_components(&single, &tw(2), &h, &[0.5, 0.5]).unwrap();
        assert_eq!(m1, theta0.sin());
        assert_eq!(m2, theta0.cos());
    }

    #[test]
    fn nw_matches_double_loop_oracle() {
        let sample = fixture(5, 2, 42);
        let h = BandwidthMatrix::scaled_identity(2, 0.5).unwrap();
        let x = [0.4, 0.6];
        let (m1, m2) = nw_components(&sample, &tw(2), &h, &x).unwrap();
        let (o1, o2) = nw_oracle(&sample, &tw(2), &h, &x);
        assert_abs_diff_eq!(m1, o1, epsilon = 1e-12);
        assert_abs_diff_eq!(m2, o2, epsilon = 1e-12);
        assert!(m1.abs() <= 1.0 && m2.abs() <= 1.0);
    }

    #[test]
    fn nw_empty_neighborhood() {
        let sample = fixture(4, 2, 3);
        let h = BandwidthMatrix::scaled_identity(2, 1e-6).unwrap();
        assert_eq!(
            nw_components(&sample, &tw(2), &h, &[10.0, 10.0]),
            Err(Error::EmptyNeighborhood)
        );
    }

    #[test]
    fn ll_reproduces_planes_fed_as_real_responses() {
        // Plane data pushed through the component pipeline directly.
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let n = 40;
        let coords: Vec<f64> = (0..n * 2).map(|_| rng.random::<f64>()).collect();
        let locs = Locations::new(2, coords).unwrap();
        let (a, b1, b2) = (0.3, -0.8, 0.5);
        let ys: Vec<f64> = (0..n)
            .map(|j| {
                let p = locs.point(j);
                a + b1 * p[0] + b2 * p[1]
            })
            .collect();
        let h = BandwidthMatrix::diagonal(&[0.45, 0.45]).unwrap();
        let x = [0.5, 0.5];
        let (fit, fell_back) = ll_real_response(&locs, &tw(2), &h, &x, &ys).unwrap();
        assert!(!fell_back);
        assert_abs_diff_eq!(fit, a + b1 * x[0] + b2 * x[1], epsilon = 1e-9);

        let constant: Vec<f64> = vec![0.7; n];
        let (fit_c, _) = ll_real_response(&locs, &tw(2), &h, &x, &constant).unwrap();
        assert_abs_diff_eq!(fit_c, 0.7, epsilon = 1e-9);
    }

    #[test]
    fn ll_constant_angles_no_fallback() {
        let theta0 = Angle::new(0.9).unwrap();
        let sample = AngularSample::new(
            Locations::new(2, vec![0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 1.0, 1.0, 0.5, 0.5]).unwrap(),
            vec![theta0; 5],
        )
        .unwrap();
        let h = BandwidthMatrix::scaled_identity(2, 1.5).unwrap();
        let (m1, m2, flag) = ll_components(&sample, &tw(2), &h, &[0.5, 0.5]).unwrap();
        assert_eq!(flag, Fallback::None);
        assert_abs_diff_eq!(m1, theta0.sin(), epsilon = 1e-12);
        assert_abs_diff_eq!(m2, theta0.cos(), epsilon = 1e-12);
    }

    #[test]
    fn ll_matches_wls_oracle() {
        let sample = fixture(8, 2, 7);
        let h = BandwidthMatrix::diagonal(&[0.4, 0.3]).unwrap();
        let x = [0.45, 0.55];
        let (m1, m2, flag) = ll_components(&sample, &tw(2), &h, &x).unwrap();
        assert_eq!(flag, Fallback::None);
        assert_abs_diff_eq!(m1, ll_oracle(&sample, &tw(2), &h, &x, true), epsilon = 1e-9);
        assert_abs_diff_eq!(m2, ll_oracle(&sample, &tw(2), &h, &x, false), epsilon = 1e-9);
    }

    #[test]
    fn ll_falls_back_when_underdetermined() {
        // Two positively weighted points cannot support a plane in R².
        let sample = fixture(2, 2, 5);
        let h = BandwidthMatrix::scaled_identity(2, 5.0).unwrap();
        let (m1, m2, flag) = ll_components(&sample, &tw(2), &h, &[0.5, 0.5]).unwrap();
        assert_eq!(flag, Fallback::LinearToConstant);
        let (n1, n2) = nw_components(&sample, &tw(2), &h, &[0.5, 0.5]).unwrap();
        assert_eq!(m1, n1);
        assert_eq!(m2, n2);
    }

    #[test]
    fn fit_point_composes_components() {
        let sample = fixture(5, 2, 42);
        let h = BandwidthMatrix::scaled_identity(2, 0.5).unwrap();
        let x = [0.4, 0.6];
        let fr = fit_point(&sample, &tw(2), &h, &x, Degree::Constant).unwrap();
        let (m1, m2) = nw_components(&sample, &tw(2), &h, &x).unwrap();
        assert_eq!(fr.m_hat.unwrap(), arctan2(m1, m2).unwrap());
        assert_eq!(fr.resultant, (m1 * m1 + m2 * m2).sqrt());
        assert!(fr.resultant <= 1.0 + 1e-12);
    }

    #[test]
    fn fit_point_constant_sample() {
        let theta0 = Angle::new(4.2).unwrap();
        let sample = AngularSample::new(
            Locations::new(1, vec![0.0, 0.5, 1.0]).unwrap(),
            vec![theta0; 3],
        )
        .unwrap();
        let h = BandwidthMatrix::scaled_identity(1, 2.0).unwrap();
        for degree in [Degree::Constant, Degree::Linear] {
            let fr = fit_point(&sample, &tw(1), &h, &[0.3], degree).unwrap();
            let dev = signed_residual(fr.m_hat.unwrap(), theta0).value();
            assert!(dev.abs() <= 1e-12);
        }
    }

    #[test]
    fn rotation_equivariance_both_degrees() {
        let sample = fixture(20, 2, 17);
        let h = BandwidthMatrix::diagonal(&[0.5, 0.6]).unwrap();
        let c = 2.35;
        let rotated = AngularSample::new(
            sample.locations().clone(),
            sample
                .thetas()
                .iter()
                .map(|t| mod2pi(t.radians() + c).unwrap())
                .collect(),
        )
        .unwrap();
        for degree in [Degree::Constant, Degree::Linear] {
            for x in [[0.3, 0.4], [0.6, 0.5]] {
                let base = fit_point(&sample, &tw(2), &h, &x, degree).unwrap();
                let rot = fit_point(&rotated, &tw(2), &h, &x, degree).unwrap();
                let expect = mod2pi(base.m_hat.unwrap().radians() + c).unwrap();
                let dev = signed_residual(rot.m_hat.unwrap(), expect).value();
                assert!(dev.abs() <= 1e-9, "degree {degree:?}: deviation {dev}");
            }
        }
    }

    #[test]
    fn fit_surface_batches_and_flags() {
        let sample = fixture(6, 2, 23);
        let spec = tw(2);
        // Tiny bandwidth: only the points themselves carry weight.
        let h = BandwidthMatrix::scaled_identity(2, 1e-9).unwrap();
        let fits = fit_surface(&sample, &spec, &h, sample.locations(), Degree::Constant).unwrap();
        assert_eq!(fits.len(), 6);
        for (i, fr) in fits.iter().enumerate() {
            let dev = signed_residual(fr.m_hat.unwrap(), sample.theta(i)).value();
            assert!(dev.abs() <= 1e-12);
        }

        let empty = Locations::new(2, vec![]).unwrap();
        assert!(fit_surface(&sample, &spec, &h, &empty, Degree::Constant)
            .unwrap()
            .is_empty());

        // A far-away grid point is flagged, not an error.
        let far = Locations::new(2, vec![50.0, 50.0]).unwrap();
        let fits = fit_surface(&sample, &spec, &h, &far, Degree::Constant).unwrap();
        assert_eq!(fits[0].fallback, Fallback::Undefined);
        assert!(fits[0].m_hat.is_none());
    }

    #[test]
    fn fit_excluding_equals_subsample_fit() {
        let sample = fixture(12, 2, 31);
        let spec = tw(2);
        let h = BandwidthMatrix::scaled_identity(2, 0.8).unwrap();
        for i in [0usize, 5, 11] {
            let keep: Vec<usize> = (0..sample.n()).filter(|&j| j != i).collect();
            let reduced = sample.subset(&keep).unwrap();
            let direct = fit_point(
                &reduced,
                &spec,
                &h,
                sample.location(i),
                Degree::Constant,
            )
            .unwrap();
            let loo = fit_excluding(&sample, &spec, &h, i, 0.0, Degree::Constant).unwrap();
            assert_eq!(loo.m1_hat, direct.m1_hat);
            assert_eq!(loo.m2_hat, direct.m2_hat);
        }
    }

    #[test]
    fn fit_excluding_ignores_own_response_and_large_radius_errors() {
        let sample = fixture(10, 2, 13);
        let spec = tw(2);
        let h = BandwidthMatrix::scaled_identity(2, 0.7).unwrap();
        let base = fit_excluding(&sample, &spec, &h, 4, 0.1, Degree::Constant).unwrap();

        let mut thetas = sample.thetas().to_vec();
        thetas[4] = mod2pi(thetas[4].radians() + 1.0).unwrap();
        let perturbed = AngularSample::new(sample.locations().clone(), thetas).unwrap();
        let after = fit_excluding(&perturbed, &spec, &h, 4, 0.1, Degree::Constant).unwrap();
        assert_eq!(base.m1_hat, after.m1_hat);
        assert_eq!(base.m2_hat, after.m2_hat);

        assert_eq!(
            fit_excluding(&sample, &spec, &h, 4, 10.0, Degree::Constant),
            Err(Error::EmptyNeighborhood)
        );
    }

    #[test]
    fn estimator_oracle_sweep() {
        // Randomized cross-check of both component estimators, d ∈ {1, 2}.
        let mut rng = ChaCha8Rng::seed_from_u64(1234);
        for case in 0..40 {
            let d = 1 + (case % 2);
            let n = 5 + (case % 20);
            let sample = fixture(n, d, 1000 + case as u64);
            let diag: Vec<f64> = (0..d).map(|_| 0.3 + rng.random::<f64>()).collect();
            let h = BandwidthMatrix::diagonal(&diag).unwrap();
            let x: Vec<f64> = (0..d).map(|_| 0.2 + 0.6 * rng.random::<f64>()).collect();
            let spec = tw(d);
            if let Ok((m1, m2)) = nw_components(&sample, &spec, &h, &x) {
                let (o1, o2) = nw_oracle(&sample, &spec, &h, &x);
                assert_abs_diff_eq!(m1, o1, epsilon = 1e-9);
                assert_abs_diff_eq!(m2, o2, epsilon = 1e-9);
            }
            if let Ok((m1, m2, Fallback::None)) = ll_components(&sample, &spec, &h, &x) {
                assert_abs_diff_eq!(m1, ll_oracle(&sample, &spec, &h, &x, true), epsilon = 1e-9);
                assert_abs_diff_eq!(m2, ll_oracle(&sample, &spec, &h, &x, false), epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn surface_risk_shrinks_with_dense_truth() {
        // Constant-direction data recovered on a grid exactly.
        let theta0 = Angle::new(2.0).unwrap();
        let grid = Locations::unit_square_grid(5).unwrap();
        let sample = AngularSample::new(grid.clone(), vec![theta0; 25]).unwrap();
        let h = BandwidthMatrix::scaled_identity(2, 0.6).unwrap();
        let fits = fit_surface(&sample, &tw(2), &h, &grid, Degree::Constant).unwrap();
        for fr in fits {
            assert!(angular_risk(fr.m_hat.unwrap(), theta0) <= 1e-12);
        }
    }
}
