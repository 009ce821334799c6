//! Nonparametric estimation of circular trend surfaces from spatially
//! correlated angular observations.
//!
//! The crate smooths the sine and cosine components of a circular response
//! over real-valued spatial covariates with kernel-type estimators (locally
//! constant or locally linear), recombining them through `arctan2`. Bandwidth
//! matrices are chosen by cross-validation, by a modified cross-validation
//! that leaves out whole distance neighborhoods to defeat the bias induced by
//! spatial correlation, or by an oracle benchmark on simulated data; full
//! symmetric positive-definite matrices are searched with a Nelder–Mead
//! simplex over a Cholesky parameterization. Simulators for wrapped and
//! projected Gaussian circular error processes, asymptotic-theory oracles and
//! a reproducible Monte Carlo harness round out the toolkit.
//!
//! # Modules
//!
//! - [`circular`]: angle normalization, angular risk, circular means,
//!   centering, signed residuals.
//! - [`kernel`]: kernel families, moments, bandwidth matrices and the
//!   rescaling `K_H(u) = |H|⁻¹K(H⁻¹u)`.
//! - [`estimator`]: component and combined fits, surface fitting,
//!   leave-neighborhood-out fits.
//! - [`bandwidth`]: CV / MCV / oracle criteria, diagonal grid search,
//!   Nelder–Mead over SPD matrices.
//! - [`simulate`]: correlation models, Gaussian field sampling, wrapped and
//!   projected error processes, benchmark trend functions, scenario
//!   generation.
//! - [`theory`]: asymptotic variance, AMSE, optimal local bandwidths,
//!   covariance identities.
//! - [`evaluate`]: prediction error, train/test splits, residual tables, the
//!   Monte Carlo benchmark harness.

pub mod bandwidth;
pub mod circular;
mod error;
pub mod estimator;
pub mod evaluate;
pub mod kernel;
pub mod simulate;
pub mod theory;

pub use circular::{Angle, AngularResidual};
pub use error::{Error, Result};
pub use estimator::{AngularSample, Degree, Fallback, FitResult, Locations};
pub use kernel::{BandwidthMatrix, KernelFamily, KernelMoments, KernelSpec};
