//! Multivariate smoothing kernels and bandwidth matrices.
//!
//! A kernel `K` is rescaled by a symmetric positive-definite bandwidth matrix
//! `H` as `K_H(u) = |H|⁻¹ K(H⁻¹u)`; all estimators in this crate consume
//! kernels through that form.

use crate::error::{Error, Result};
use std::f64::consts::PI;

/// Supported kernel families. All have compact support: the product families
/// live on `[−1, 1]^d`, the spherical family on the unit ball.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelFamily {
    /// Product of univariate triweight factors `(35/32)(1 − t²)³`.
    ProductTriweight,
    /// Spherically symmetric triweight `c_d (1 − ‖u‖²)³` on the unit ball.
    SphericalTriweight,
    /// Product of univariate Epanechnikov factors `(3/4)(1 − t²)`.
    ProductEpanechnikov,
}

/// A kernel family together with the covariate dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KernelSpec {
    family: KernelFamily,
    dim: usize,
}

/// Second moment `μ₂ = ∫ u_i² K(u) du` and squared norm `ν₀ = ∫ K²(u) du`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelMoments {
    pub mu2: f64,
    pub nu0: f64,
}

fn triweight_factor(t: f64) -> f64 {
    if t.abs() > 1.0 {
        return 0.0;
    }
    let s = 1.0 - t * t;
    (35.0 / 32.0) * s * s * s
}

fn epanechnikov_factor(t: f64) -> f64 {
    if t.abs() > 1.0 {
        return 0.0;
    }
    0.75 * (1.0 - t * t)
}

/// Γ(half/2) for small positive half-integer arguments.
fn gamma_half(twice_arg: u32) -> f64 {
    debug_assert!(twice_arg >= 1);
    if twice_arg % 2 == 0 {
        (1..twice_arg / 2).map(|k| k as f64).product()
    } else {
        let m = (twice_arg - 1) / 2;
        let mut v = PI.sqrt();
        for k in 0..m {
            v *= k as f64 + 0.5;
        }
        v
    }
}

/// Surface area of the unit sphere in `R^d`.
fn unit_sphere_area(d: usize) -> f64 {
    2.0 * PI.powf(d as f64 / 2.0) / gamma_half(d as u32)
}

/// Normalizing constant of the spherical triweight in dimension `d`:
/// `Γ(d/2 + 4) / (6 π^{d/2})`.
fn spherical_triweight_constant(d: usize) -> f64 {
    gamma_half(d as u32 + 8) / (6.0 * PI.powf(d as f64 / 2.0))
}

/// Composite Simpson rule on `[a, b]` with `2m` panels.
fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, m: usize) -> f64 {
    let n = 2 * m;
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + k as f64 * h);
    }
    acc * h / 3.0
}

impl KernelSpec {
    /// Builds a kernel for dimension `dim ≥ 1`. For `dim ≤ 3` the unit-mass
    /// property is verified numerically (tolerance 1e-6).
    pub fn new(family: KernelFamily, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("kernel dimension must be ≥ 1".into()));
        }
        let spec = KernelSpec { family, dim };
        if dim <= 3 {
            let mass = spec.unit_mass_quadrature();
            if (mass - 1.0).abs() > 1e-6 {
                return Err(Error::InvalidParameter(format!(
                    "kernel does not integrate to 1 (got {mass})"
                )));
            }
        }
        Ok(spec)
    }

    /// The default kernel used by the simulation studies: product triweight.
    pub fn product_triweight(dim: usize) -> Result<Self> {
        Self::new(KernelFamily::ProductTriweight, dim)
    }

    pub fn family(&self) -> KernelFamily {
        self.family
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn unit_mass_quadrature(&self) -> f64 {
        match self.family {
            // Product kernels integrate to (∫ factor)^d.
            KernelFamily::ProductTriweight => {
                simpson(triweight_factor, -1.0, 1.0, 512).powi(self.dim as i32)
            }
            KernelFamily::ProductEpanechnikov => {
                simpson(epanechnikov_factor, -1.0, 1.0, 512).powi(self.dim as i32)
            }
            KernelFamily::SphericalTriweight => {
                let d = self.dim;
                let c = spherical_triweight_constant(d);
                let area = unit_sphere_area(d);
                c * area
                    * simpson(
                        |r| r.powi(d as i32 - 1) * (1.0 - r * r).powi(3),
                        0.0,
                        1.0,
                        512,
                    )
            }
        }
    }

    /// Evaluates the unscaled kernel at `u`.
    pub(crate) fn eval_unchecked(&self, u: &[f64]) -> f64 {
        match self.family {
            KernelFamily::ProductTriweight => {
                let mut v = 1.0;
                for &t in u {
                    let f = triweight_factor(t);
                    if f == 0.0 {
                        return 0.0;
                    }
                    v *= f;
                }
                v
            }
            KernelFamily::ProductEpanechnikov => {
                let mut v = 1.0;
                for &t in u {
                    let f = epanechnikov_factor(t);
                    if f == 0.0 {
                        return 0.0;
                    }
                    v *= f;
                }
                v
            }
            KernelFamily::SphericalTriweight => {
                let r2: f64 = u.iter().map(|t| t * t).sum();
                if r2 > 1.0 {
                    0.0
                } else {
                    let s = 1.0 - r2;
                    spherical_triweight_constant(self.dim) * s * s * s
                }
            }
        }
    }
}

/// Evaluates `K(u)`; errors if `u` has the wrong dimension.
pub fn kernel_eval(spec: &KernelSpec, u: &[f64]) -> Result<f64> {
    if u.len() != spec.dim {
        return Err(Error::DimensionMismatch { expected: spec.dim, got: u.len() });
    }
    Ok(spec.eval_unchecked(u))
}

/// Closed-form kernel moments per family.
pub fn kernel_moments(spec: &KernelSpec) -> KernelMoments {
    let d = spec.dim;
    match spec.family {
        KernelFamily::ProductTriweight => KernelMoments {
            mu2: 1.0 / 9.0,
            nu0: (350.0_f64 / 429.0).powi(d as i32),
        },
        KernelFamily::ProductEpanechnikov => KernelMoments {
            mu2: 1.0 / 5.0,
            nu0: (3.0_f64 / 5.0).powi(d as i32),
        },
        KernelFamily::SphericalTriweight => {
            let c = spherical_triweight_constant(d);
            let area = unit_sphere_area(d);
            // ∫_0^1 r^{d+1}(1−r²)³ dr = B((d+2)/2, 4) / 2, and the angular
            // average of u_1² over the sphere contributes the 1/d factor.
            let beta_mu = beta_half(d as u32 + 2, 8);
            let beta_nu = beta_half(d as u32, 14);
            KernelMoments {
                mu2: c * area / d as f64 * beta_mu / 2.0,
                nu0: c * c * area * beta_nu / 2.0,
            }
        }
    }
}

/// B(a/2, b/2) through the half-integer gamma helper.
fn beta_half(twice_a: u32, twice_b: u32) -> f64 {
    gamma_half(twice_a) * gamma_half(twice_b) / gamma_half(twice_a + twice_b)
}

/// A symmetric positive-definite bandwidth matrix.
///
/// Symmetry must hold exactly as stored; positive definiteness is certified by
/// a successful Cholesky factorization at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct BandwidthMatrix {
    dim: usize,
    entries: Vec<f64>, // row-major, exactly symmetric
    chol: Vec<f64>,    // lower factor, row-major
    det: f64,
    diag: Option<Vec<f64>>, // set when the matrix is strictly diagonal
}

/// Plain lower Cholesky of a symmetric matrix; `None` when a pivot is ≤ 0.
/// Returns the factor and the determinant of the input.
fn cholesky_lower(dim: usize, a: &[f64]) -> Option<(Vec<f64>, f64)> {
    let mut l = vec![0.0; dim * dim];
    let mut det = 1.0;
    for i in 0..dim {
        for j in 0..=i {
            let mut s = a[i * dim + j];
            for k in 0..j {
                s -= l[i * dim + k] * l[j * dim + k];
            }
            if i == j {
                if s <= 0.0 || !s.is_finite() {
                    return None;
                }
                l[i * dim + i] = s.sqrt();
                det *= s;
            } else {
                l[i * dim + j] = s / l[j * dim + j];
            }
        }
    }
    Some((l, det))
}

impl BandwidthMatrix {
    /// Builds from a row-major `dim × dim` matrix; rejects non-finite entries,
    /// any asymmetry, and non-positive-definite input.
    pub fn new(dim: usize, entries: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("bandwidth dimension must be ≥ 1".into()));
        }
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim, got: entries.len() });
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteInput);
        }
        for i in 0..dim {
            for j in 0..i {
                if entries[i * dim + j] != entries[j * dim + i] {
                    return Err(Error::NotPositiveDefinite);
                }
            }
        }
        let (chol, det) =
            cholesky_lower(dim, &entries).ok_or(Error::NotPositiveDefinite)?;
        let is_diag = (0..dim).all(|i| (0..dim).all(|j| i == j || entries[i * dim + j] == 0.0));
        let diag = if is_diag {
            Some((0..dim).map(|i| entries[i * dim + i]).collect())
        } else {
            None
        };
        Ok(BandwidthMatrix { dim, entries, chol, det, diag })
    }

    /// Diagonal bandwidth matrix with the given positive entries.
    pub fn diagonal(values: &[f64]) -> Result<Self> {
        let dim = values.len();
        let mut entries = vec![0.0; dim * dim];
        for (i, &v) in values.iter().enumerate() {
            entries[i * dim + i] = v;
        }
        Self::new(dim, entries)
    }

    /// `h · I_d`.
    pub fn scaled_identity(dim: usize, h: f64) -> Result<Self> {
        Self::diagonal(&vec![h; dim])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.dim + j]
    }

    /// Row-major entries.
    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// Determinant, computed from the Cholesky factor.
    pub fn det(&self) -> f64 {
        self.det
    }

    /// Diagonal entries when the matrix is strictly diagonal.
    pub fn diag_values(&self) -> Option<&[f64]> {
        self.diag.as_deref()
    }

    /// Lower Cholesky factor, row-major.
    pub fn cholesky_factor(&self) -> &[f64] {
        &self.chol
    }

    /// Returns `c · H` for `c > 0`.
    pub fn scale(&self, c: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::InvalidParameter("scale factor must be positive".into()));
        }
        Self::new(self.dim, self.entries.iter().map(|v| v * c).collect())
    }

    /// Solves `H v = rhs` in place via the stored Cholesky factor.
    pub(crate) fn solve_into(&self, rhs: &[f64], out: &mut [f64]) {
        let d = self.dim;
        out.copy_from_slice(rhs);
        for i in 0..d {
            for k in 0..i {
                out[i] -= self.chol[i * d + k] * out[k];
            }
            out[i] /= self.chol[i * d + i];
        }
        for i in (0..d).rev() {
            for k in i + 1..d {
                out[i] -= self.chol[k * d + i] * out[k];
            }
            out[i] /= self.chol[i * d + i];
        }
    }
}

/// Rescaled kernel `K_H(u) = |H|⁻¹ K(H⁻¹ u)`.
pub fn kernel_h_eval(spec: &KernelSpec, h: &BandwidthMatrix, u: &[f64]) -> Result<f64> {
    if u.len() != spec.dim {
        return Err(Error::DimensionMismatch { expected: spec.dim, got: u.len() });
    }
    if h.dim() != spec.dim {
        return Err(Error::DimensionMismatch { expected: spec.dim, got: h.dim() });
    }
    let mut eng = WeightEngine::new(spec, h)?;
    Ok(eng.weight_of_diff(u))
}

/// Repeated `K_H(X_j − x)` evaluation with reusable scratch space.
///
/// For a diagonal `H` and a compactly supported kernel, points outside the
/// axis-aligned support box are rejected before any arithmetic; a full matrix
/// `H` evaluates every point.
pub(crate) struct WeightEngine<'a> {
    spec: &'a KernelSpec,
    h: &'a BandwidthMatrix,
    inv_det: f64,
    diff: Vec<f64>,
    solved: Vec<f64>,
}

impl<'a> WeightEngine<'a> {
    pub fn new(spec: &'a KernelSpec, h: &'a BandwidthMatrix) -> Result<Self> {
        if h.dim() != spec.dim() {
            return Err(Error::DimensionMismatch { expected: spec.dim(), got: h.dim() });
        }
        Ok(WeightEngine {
            spec,
            h,
            inv_det: 1.0 / h.det(),
            diff: vec![0.0; spec.dim()],
            solved: vec![0.0; spec.dim()],
        })
    }

    /// `K_H(a − b)`.
    pub fn weight(&mut self, a: &[f64], b: &[f64]) -> f64 {
        for i in 0..self.diff.len() {
            self.diff[i] = a[i] - b[i];
        }
        let diff = std::mem::take(&mut self.diff);
        let w = self.weight_of_diff(&diff);
        self.diff = diff;
        w
    }

    /// `K_H(u)`.
    pub fn weight_of_diff(&mut self, u: &[f64]) -> f64 {
        if let Some(diag) = self.h.diag_values() {
            let mut kv = 1.0;
            match self.spec.family() {
                KernelFamily::ProductTriweight => {
                    for i in 0..u.len() {
                        let t = u[i] / diag[i];
                        if t.abs() > 1.0 {
                            return 0.0;
                        }
                        let s = 1.0 - t * t;
                        kv *= (35.0 / 32.0) * s * s * s;
                    }
                }
                KernelFamily::ProductEpanechnikov => {
                    for i in 0..u.len() {
                        let t = u[i] / diag[i];
                        if t.abs() > 1.0 {
                            return 0.0;
                        }
                        kv *= 0.75 * (1.0 - t * t);
                    }
                }
                KernelFamily::SphericalTriweight => {
                    let mut r2 = 0.0;
                    for i in 0..u.len() {
                        let t = u[i] / diag[i];
                        if t.abs() > 1.0 {
                            return 0.0;
                        }
                        r2 += t * t;
                    }
                    if r2 > 1.0 {
                        return 0.0;
                    }
                    let s = 1.0 - r2;
                    kv = spherical_triweight_constant(u.len()) * s * s * s;
                }
            }
            kv * self.inv_det
        } else {
            self.h.solve_into(u, &mut self.solved);
            self.spec.eval_unchecked(&self.solved) * self.inv_det
        }
    }
}
