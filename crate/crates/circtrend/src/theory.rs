//! Numerical oracles for the asymptotic behavior of the circular regression
//! estimators: leading-term variance, asymptotic mean squared error for both
//! polynomial degrees, the AMSE-optimal local bandwidth matrix, and the
//! scalar covariance identities that reduce the combined-estimator variance
//! to `ℓ²σ₁²[1 + f ρ_{c₁}]`.
//!
//! Everything here evaluates known model quantities supplied by the caller;
//! nothing is estimated from data.

use crate::error::{Error, Result};
use crate::kernel::{BandwidthMatrix, KernelMoments};
use nalgebra::{DMatrix, SymmetricEigen};
use std::sync::Arc;

type ValueFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
type GradientFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;
type HessianFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// A scalar field with optional analytic gradient and Hessian; missing
/// derivatives fall back to central finite differences with per-coordinate
/// step `cbrt(ε_machine) · max(1, |x_i|)`.
#[derive(Clone)]
pub struct DiffField {
    value: ValueFn,
    gradient: Option<GradientFn>,
    hessian: Option<HessianFn>,
}

impl std::fmt::Debug for DiffField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DiffField")
            .field("gradient", &self.gradient.is_some())
            .field("hessian", &self.hessian.is_some())
            .finish()
    }
}

fn fd_step(xi: f64) -> f64 {
    f64::EPSILON.cbrt() * xi.abs().max(1.0)
}

impl DiffField {
    pub fn new(value: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        DiffField { value: Arc::new(value), gradient: None, hessian: None }
    }

    pub fn constant(c: f64) -> Self {
        DiffField {
            value: Arc::new(move |_| c),
            gradient: Some(Arc::new(|x: &[f64]| vec![0.0; x.len()])),
            hessian: Some(Arc::new(|x: &[f64]| vec![0.0; x.len() * x.len()])),
        }
    }

    pub fn with_gradient(
        mut self,
        g: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        self.gradient = Some(Arc::new(g));
        self
    }

    pub fn with_hessian(
        mut self,
        h: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        self.hessian = Some(Arc::new(h));
        self
    }

    pub fn value_at(&self, x: &[f64]) -> f64 {
        (self.value)(x)
    }

    pub fn gradient_at(&self, x: &[f64]) -> Vec<f64> {
        if let Some(g) = &self.gradient {
            return g(x);
        }
        let d = x.len();
        let mut out = vec![0.0; d];
        let mut xp = x.to_vec();
        for i in 0..d {
            let h = fd_step(x[i]);
            xp[i] = x[i] + h;
            let up = (self.value)(&xp);
            xp[i] = x[i] - h;
            let dn = (self.value)(&xp);
            xp[i] = x[i];
            out[i] = (up - dn) / (2.0 * h);
        }
        out
    }

    /// Row-major `d × d` Hessian.
    pub fn hessian_at(&self, x: &[f64]) -> Vec<f64> {
        if let Some(h) = &self.hessian {
            return h(x);
        }
        let d = x.len();
        let mut out = vec![0.0; d * d];
        let f0 = (self.value)(x);
        let mut xp = x.to_vec();
        for i in 0..d {
            let hi = fd_step(x[i]);
            xp[i] = x[i] + hi;
            let up = (self.value)(&xp);
            xp[i] = x[i] - hi;
            let dn = (self.value)(&xp);
            xp[i] = x[i];
            out[i * d + i] = (up - 2.0 * f0 + dn) / (hi * hi);
            for j in 0..i {
                let hj = fd_step(x[j]);
                let mut eval = |si: f64, sj: f64| {
                    xp[i] = x[i] + si * hi;
                    xp[j] = x[j] + sj * hj;
                    let v = (self.value)(&xp);
                    xp[i] = x[i];
                    xp[j] = x[j];
                    v
                };
                let v = (eval(1.0, 1.0) - eval(1.0, -1.0) - eval(-1.0, 1.0)
                    + eval(-1.0, -1.0))
                    / (4.0 * hi * hj);
                out[i * d + j] = v;
                out[j * d + i] = v;
            }
        }
        out
    }
}

/// The true model quantities entering the asymptotic expressions: trend `m`,
/// design density `f`, mean resultant length `ℓ(x) = E[cos ε | X = x]`, the
/// sine/cosine error variances and cross-covariance, and the limiting
/// correlation integrals `ρ_c = (ρ_{c₁}, ρ_{c₂}, ρ_{c₃})`.
#[derive(Debug, Clone)]
pub struct TrueModelOracle {
    pub dim: usize,
    pub m: DiffField,
    pub f: DiffField,
    pub ell: DiffField,
    pub sigma1_sq: f64,
    pub sigma2_sq: f64,
    pub sigma12: f64,
    pub rho_c: [f64; 3],
}

impl TrueModelOracle {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        dim: usize,
        m: DiffField,
        f: DiffField,
        ell: DiffField,
        sigma1_sq: f64,
        sigma2_sq: f64,
        sigma12: f64,
        rho_c: [f64; 3],
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("oracle dimension must be ≥ 1".into()));
        }
        if sigma1_sq < 0.0 || sigma2_sq < 0.0 {
            return Err(Error::InvalidParameter("variances must be ≥ 0".into()));
        }
        Ok(TrueModelOracle { dim, m, f, ell, sigma1_sq, sigma2_sq, sigma12, rho_c })
    }

    fn positive_f_ell(&self, x: &[f64]) -> Result<(f64, f64)> {
        let fv = self.f.value_at(x);
        let lv = self.ell.value_at(x);
        if !(fv.is_finite() && fv > 0.0) {
            return Err(Error::InvalidParameter(format!("design density must be > 0, got {fv}")));
        }
        if !(lv.is_finite() && lv > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "mean resultant length must be > 0, got {lv}"
            )));
        }
        Ok((fv, lv))
    }
}

/// Leading term of the conditional variance of the combined estimator,
/// `ν₀ σ₁² [1 + f(x) ρ_{c₁}] / (n |H| ℓ²(x) f(x))`; identical for both
/// polynomial degrees.
pub fn asymptotic_variance(
    oracle: &TrueModelOracle,
    x: &[f64],
    n: usize,
    h: &BandwidthMatrix,
    nu0: f64,
) -> Result<f64> {
    let (fv, lv) = oracle.positive_f_ell(x)?;
    Ok(nu0 * oracle.sigma1_sq * (1.0 + fv * oracle.rho_c[0])
        / (n as f64 * h.det() * lv * lv * fv))
}

/// The curvature matrix entering the squared-bias term: for degree 0,
/// `(ℓf)⁻¹[∇(ℓf)∇ᵀm + ∇m∇ᵀ(ℓf)] + 𝓗_m`; for degree 1 the same with `ℓ`
/// in place of `ℓf`.
pub fn curvature_matrix(
    oracle: &TrueModelOracle,
    x: &[f64],
    degree: crate::estimator::Degree,
) -> Result<Vec<f64>> {
    let d = oracle.dim;
    if x.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: x.len() });
    }
    let (fv, lv) = oracle.positive_f_ell(x)?;
    let grad_m = oracle.m.gradient_at(x);
    let hess_m = oracle.m.hessian_at(x);
    let (scale, grad_s): (f64, Vec<f64>) = match degree {
        crate::estimator::Degree::Constant => {
            let gf = oracle.f.gradient_at(x);
            let gl = oracle.ell.gradient_at(x);
            // ∇(ℓf) = ℓ∇f + f∇ℓ.
            let g = gf
                .iter()
                .zip(&gl)
                .map(|(df, dl)| lv * df + fv * dl)
                .collect();
            (lv * fv, g)
        }
        crate::estimator::Degree::Linear => (lv, oracle.ell.gradient_at(x)),
    };
    let mut out = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..d {
            out[i * d + j] =
                (grad_s[i] * grad_m[j] + grad_m[i] * grad_s[j]) / scale + hess_m[i * d + j];
        }
    }
    Ok(out)
}

/// Asymptotic mean squared error
/// `¼μ₂² tr²[H² M(x)] + ν₀σ₁²[1 + fρ_{c₁}]/(n|H|ℓ²f)` with `M` the curvature
/// matrix of the requested degree.
pub fn amse(
    oracle: &TrueModelOracle,
    x: &[f64],
    n: usize,
    h: &BandwidthMatrix,
    degree: crate::estimator::Degree,
    moments: &KernelMoments,
) -> Result<f64> {
    let d = oracle.dim;
    if h.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, got: h.dim() });
    }
    let m = curvature_matrix(oracle, x, degree)?;
    // tr(H² M) with H² = H·H.
    let mut h2 = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..d {
            let mut s = 0.0;
            for k in 0..d {
                s += h.entry(i, k) * h.entry(k, j);
            }
            h2[i * d + j] = s;
        }
    }
    let mut tr = 0.0;
    for i in 0..d {
        for j in 0..d {
            tr += h2[i * d + j] * m[j * d + i];
        }
    }
    let bias_sq = 0.25 * moments.mu2 * moments.mu2 * tr * tr;
    Ok(bias_sq + asymptotic_variance(oracle, x, n, h, moments.nu0)?)
}

/// Eigenvalues below this magnitude make the curvature matrix effectively
/// singular and the optimal bandwidth undefined.
const EIGEN_FLOOR: f64 = 1e-12;

/// AMSE-optimal local bandwidth `h*(x) · M̃(x)^{−1/2}`, where `M̃` is the
/// curvature matrix or its negative (whichever is positive definite) and
/// `h*(x) = {ν₀|M̃|^{1/2}σ₁²[1+fρ_{c₁}] / (n·d·μ₂²·ℓ²f)}^{1/(d+4)}`.
pub fn h_opt_local(
    oracle: &TrueModelOracle,
    x: &[f64],
    n: usize,
    degree: crate::estimator::Degree,
    moments: &KernelMoments,
) -> Result<BandwidthMatrix> {
    let d = oracle.dim;
    let (fv, lv) = oracle.positive_f_ell(x)?;
    let m = curvature_matrix(oracle, x, degree)?;
    let sym = DMatrix::from_fn(d, d, |i, j| 0.5 * (m[i * d + j] + m[j * d + i]));
    let eig = SymmetricEigen::new(sym);
    let pos = eig.eigenvalues.iter().all(|&l| l > EIGEN_FLOOR);
    let neg = eig.eigenvalues.iter().all(|&l| l < -EIGEN_FLOOR);
    if !(pos || neg) {
        return Err(Error::IndefiniteCurvature);
    }
    let sign = if pos { 1.0 } else { -1.0 };
    let tilde: Vec<f64> = eig.eigenvalues.iter().map(|&l| sign * l).collect();
    let det_tilde: f64 = tilde.iter().product();
    let h_star = (moments.nu0
        * det_tilde.sqrt()
        * oracle.sigma1_sq
        * (1.0 + fv * oracle.rho_c[0])
        / (n as f64 * d as f64 * moments.mu2 * moments.mu2 * lv * lv * fv))
        .powf(1.0 / (d as f64 + 4.0));

    // h* · Ṽ diag(λ̃^{-1/2}) Ṽᵀ, symmetrized exactly.
    let v = &eig.eigenvectors;
    let mut entries = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..=i {
            let mut s = 0.0;
            for k in 0..d {
                s += v[(i, k)] * v[(j, k)] / tilde[k].sqrt();
            }
            entries[i * d + j] = h_star * s;
            entries[j * d + i] = h_star * s;
        }
    }
    BandwidthMatrix::new(d, entries)
}

/// Pointwise sine/cosine of the trend: `f₁ = sin m`, `f₂ = cos m`.
#[derive(Clone)]
pub struct ComponentFunctions {
    f1: ValueFn,
    f2: ValueFn,
}

impl std::fmt::Debug for ComponentFunctions {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("ComponentFunctions")
    }
}

impl ComponentFunctions {
    pub fn new(
        f1: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        f2: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        ComponentFunctions { f1: Arc::new(f1), f2: Arc::new(f2) }
    }

    /// Derives the component pair from a trend field.
    pub fn from_trend(m: &DiffField) -> Self {
        let m1 = m.clone();
        let m2 = m.clone();
        ComponentFunctions {
            f1: Arc::new(move |x: &[f64]| m1.value_at(x).sin()),
            f2: Arc::new(move |x: &[f64]| m2.value_at(x).cos()),
        }
    }

    pub fn f1_at(&self, x: &[f64]) -> f64 {
        (self.f1)(x)
    }

    pub fn f2_at(&self, x: &[f64]) -> f64 {
        (self.f2)(x)
    }
}

/// The six scalar covariance quantities of the component error processes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AppendixCovariances {
    /// Pointwise sine/cosine error cross-moment.
    pub c: f64,
    /// Limiting correlation contribution to the sine-error variance.
    pub c1: f64,
    /// Limiting correlation contribution to the cosine-error variance.
    pub c2: f64,
    /// Limiting correlation contribution to the cross term.
    pub c3: f64,
    /// Sine-component error variance `s₁²`.
    pub s1_sq: f64,
    /// Cosine-component error variance `s₂²`.
    pub s2_sq: f64,
}

/// Evaluates the six covariance formulas verbatim at `x`.
pub fn appendix_covariances(
    comp: &ComponentFunctions,
    oracle: &TrueModelOracle,
    x: &[f64],
) -> AppendixCovariances {
    let f1 = comp.f1_at(x);
    let f2 = comp.f2_at(x);
    debug_assert!((f1 * f1 + f2 * f2 - 1.0).abs() <= 1e-12);
    let (s1q, s2q, s12) = (oracle.sigma1_sq, oracle.sigma2_sq, oracle.sigma12);
    let [r1, r2, r3] = oracle.rho_c;
    AppendixCovariances {
        c: f1 * f2 * s2q - f1 * f1 * s12 + f2 * f2 * s12 - f1 * f2 * s1q,
        c3: f1 * f2 * s2q * r2 - f1 * f1 * s12 * r3 + f2 * f2 * s12 * r3 - f1 * f2 * s1q * r1,
        s1_sq: f1 * f1 * s2q + 2.0 * f1 * f2 * s12 + f2 * f2 * s1q,
        s2_sq: f2 * f2 * s2q - 2.0 * f2 * f1 * s12 + f1 * f1 * s1q,
        c1: f1 * f1 * s2q * r2 + 2.0 * f1 * f2 * s12 * r3 + f2 * f2 * s1q * r1,
        c2: f2 * f2 * s2q * r2 - 2.0 * f1 * f2 * s12 * r3 + f1 * f1 * s1q * r1,
    }
}

/// Absolute defect of the variance-reduction identity
/// `m₁²[s₂² + fC₂] + m₂²[s₁² + fC₁] − 2m₁m₂[c + fC₃] = ℓ²σ₁²[1 + fρ_{c₁}]`,
/// where `m₁ = f₁ℓ` and `m₂ = f₂ℓ`.
pub fn variance_identity_check(
    comp: &ComponentFunctions,
    oracle: &TrueModelOracle,
    x: &[f64],
    m1: f64,
    m2: f64,
) -> f64 {
    let cov = appendix_covariances(comp, oracle, x);
    let fv = oracle.f.value_at(x);
    let lv = oracle.ell.value_at(x);
    let lhs = m1 * m1 * (cov.s2_sq + fv * cov.c2) + m2 * m2 * (cov.s1_sq + fv * cov.c1)
        - 2.0 * m1 * m2 * (cov.c + fv * cov.c3);
    let rhs = lv * lv * oracle.sigma1_sq * (1.0 + fv * oracle.rho_c[0]);
    (lhs - rhs).abs()
}
