//! Circular arithmetic: angle normalization, angular risk, circular means,
//! centering and signed residuals.
//!
//! Angles are kept in radians on `[0, 2π)` everywhere inside the crate; unit
//! conversions belong at I/O boundaries.

use crate::error::{Error, Result};
use std::f64::consts::{PI, TAU};

/// An angle in radians, normalized to `[0, 2π)` on construction.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Angle(f64);

impl Angle {
    /// Builds an angle from any finite radian value, reducing modulo 2π.
    pub fn new(radians: f64) -> Result<Self> {
        mod2pi(radians)
    }

    /// The stored value in `[0, 2π)`.
    pub fn radians(self) -> f64 {
        self.0
    }

    pub fn sin(self) -> f64 {
        self.0.sin()
    }

    pub fn cos(self) -> f64 {
        self.0.cos()
    }
}

/// Reduces a finite radian value into `[0, 2π)`.
pub fn mod2pi(x: f64) -> Result<Angle> {
    if !x.is_finite() {
        return Err(Error::NonFiniteInput);
    }
    let mut r = x.rem_euclid(TAU);
    // rem_euclid of a tiny negative input can round up to exactly 2π.
    if r >= TAU {
        r -= TAU;
    }
    Ok(Angle(r))
}

/// Angle of the vector `(x, y)` measured from the positive x-axis, in `[0, 2π)`.
///
/// The origin carries no direction and is rejected with
/// [`Error::UndefinedDirection`] so callers can flag degenerate fits.
pub fn arctan2(y: f64, x: f64) -> Result<Angle> {
    if !y.is_finite() || !x.is_finite() {
        return Err(Error::NonFiniteInput);
    }
    if y == 0.0 && x == 0.0 {
        return Err(Error::UndefinedDirection);
    }
    mod2pi(y.atan2(x))
}

/// Angular risk `1 − cos(a − b)`, in `[0, 2]`.
pub fn angular_risk(a: Angle, b: Angle) -> f64 {
    1.0 - (a.0 - b.0).cos()
}

/// Circular mean direction `arctan2(mean of sines, mean of cosines)`.
///
/// Fails on an empty list or when the resultant vector is zero.
pub fn circular_mean(angles: &[Angle]) -> Result<Angle> {
    if angles.is_empty() {
        return Err(Error::EmptyInput);
    }
    let n = angles.len() as f64;
    let mut s = 0.0;
    let mut c = 0.0;
    for a in angles {
        s += a.sin();
        c += a.cos();
    }
    arctan2(s / n, c / n)
}

/// Rotates every angle by minus the sample circular mean direction, so the
/// centered sample has mean direction zero (sine component vanishes up to
/// rounding).
pub fn center_angles(angles: &[Angle]) -> Result<Vec<Angle>> {
    let mean = circular_mean(angles)?;
    angles.iter().map(|a| mod2pi(a.0 - mean.0)).collect()
}

/// A signed angular residual, the representative of `θ − fitted` in `(−π, π]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct AngularResidual(f64);

impl AngularResidual {
    /// The signed value in `(−π, π]`.
    pub fn value(self) -> f64 {
        self.0
    }
}

/// Signed residual of an observation against a fitted direction.
///
/// The wrap-around representative is chosen in `(−π, π]`; the boundary case of
/// an exactly antipodal pair maps to `+π`.
pub fn signed_residual(theta: Angle, fitted: Angle) -> AngularResidual {
    let mut r = (theta.0 - fitted.0).rem_euclid(TAU);
    if r >= TAU {
        r -= TAU;
    }
    if r > PI {
        r -= TAU;
    }
    AngularResidual(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn mod2pi_identity_and_wrap() {
        assert_eq!(mod2pi(0.0).unwrap().radians(), 0.0);
        assert_abs_diff_eq!(
            mod2pi(-PI / 2.0).unwrap().radians(),
            3.0 * PI / 2.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(mod2pi(7.0 * PI).unwrap().radians(), PI, epsilon = 1e-12);
    }

    #[test]
    fn mod2pi_rejects_non_finite() {
        assert_eq!(mod2pi(f64::NAN), Err(Error::NonFiniteInput));
        assert_eq!(mod2pi(f64::INFINITY), Err(Error::NonFiniteInput));
    }

    #[test]
    fn mod2pi_tiny_negative_stays_in_range() {
        let a = mod2pi(-1e-320).unwrap().radians();
        assert!((0.0..TAU).contains(&a));
    }

    #[test]
    fn arctan2_axes_and_quadrants() {
        assert_eq!(arctan2(0.0, 1.0).unwrap().radians(), 0.0);
        assert_abs_diff_eq!(arctan2(1.0, 0.0).unwrap().radians(), PI / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(
            arctan2(-1.0, -1.0).unwrap().radians(),
            5.0 * PI / 4.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn arctan2_origin_is_an_error() {
        assert_eq!(arctan2(0.0, 0.0), Err(Error::UndefinedDirection));
    }

    #[test]
    fn angular_risk_known_values() {
        let t = Angle::new(1.3).unwrap();
        assert_eq!(angular_risk(t, t), 0.0);
        assert_abs_diff_eq!(
            angular_risk(Angle::new(0.0).unwrap(), Angle::new(PI).unwrap()),
            2.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            angular_risk(Angle::new(0.0).unwrap(), Angle::new(PI / 2.0).unwrap()),
            1.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn circular_mean_single_and_symmetric() {
        let t = Angle::new(2.2).unwrap();
        assert_abs_diff_eq!(circular_mean(&[t]).unwrap().radians(), 2.2, epsilon = 1e-12);

        let d = 0.7;
        let pair = [Angle::new(PI / 2.0 - d).unwrap(), Angle::new(PI / 2.0 + d).unwrap()];
        assert_abs_diff_eq!(
            circular_mean(&pair).unwrap().radians(),
            PI / 2.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn circular_mean_matches_direct_formula() {
        // Oracle: the two-line definition evaluated independently.
        let vals = [0.1, 0.2, 0.3];
        let angles: Vec<Angle> = vals.iter().map(|&v| Angle::new(v).unwrap()).collect();
        let s: f64 = vals.iter().map(|v| v.sin()).sum::<f64>() / 3.0;
        let c: f64 = vals.iter().map(|v| v.cos()).sum::<f64>() / 3.0;
        let expected = s.atan2(c);
        assert_abs_diff_eq!(
            circular_mean(&angles).unwrap().radians(),
            expected,
            epsilon = 1e-15
        );
    }

    #[test]
    fn circular_mean_rejects_empty_list() {
        assert_eq!(circular_mean(&[]), Err(Error::EmptyInput));
    }

    #[test]
    fn circular_mean_antipodal_pair_is_degenerate() {
        // Exact cancellation of both trig sums is unreachable in floating
        // point, so an antipodal pair either errors or leaves a resultant at
        // rounding scale; the estimators guard on the magnitude separately.
        let antipodal = [Angle::new(0.0).unwrap(), Angle::new(PI).unwrap()];
        match circular_mean(&antipodal) {
            Err(Error::UndefinedDirection) => {}
            Ok(_) => {
                let s: f64 = antipodal.iter().map(|a| a.sin()).sum();
                let c: f64 = antipodal.iter().map(|a| a.cos()).sum();
                assert!(s.abs() <= 1e-12 && c.abs() <= 1e-12);
            }
            Err(e) => panic!("unexpected error {e}"),
        }
    }

    #[test]
    fn center_angles_constant_list() {
        let c = Angle::new(1.0).unwrap();
        let centered = center_angles(&[c, c, c]).unwrap();
        for a in centered {
            assert_abs_diff_eq!(a.radians(), 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn center_angles_idempotent() {
        let angles: Vec<Angle> = [0.3, 0.4, 6.1, 0.1]
            .iter()
            .map(|&v| Angle::new(v).unwrap())
            .collect();
        let once = center_angles(&angles).unwrap();
        let twice = center_angles(&once).unwrap();
        for (a, b) in once.iter().zip(twice.iter()) {
            let diff = signed_residual(*a, *b).value();
            assert!(diff.abs() <= 1e-12);
        }
    }

    #[test]
    fn center_angles_zeroes_mean_direction() {
        // Oracle: recompute the circular mean of the output.
        use rand::SeedableRng;
        use rand_distr::Distribution;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let normal = rand_distr::Normal::new(0.8, 0.7).unwrap();
        let angles: Vec<Angle> = (0..100)
            .map(|_| Angle::new(normal.sample(&mut rng)).unwrap())
            .collect();
        let centered = center_angles(&angles).unwrap();
        let mean = circular_mean(&centered).unwrap();
        let dev = signed_residual(mean, Angle::new(0.0).unwrap()).value();
        assert!(dev.abs() <= 1e-10, "mean direction after centering: {dev}");
        let mean_sine: f64 =
            centered.iter().map(|a| a.sin()).sum::<f64>() / centered.len() as f64;
        assert!(mean_sine.abs() <= 1e-12);
    }

    #[test]
    fn signed_residual_examples() {
        let z = Angle::new(0.4).unwrap();
        assert_eq!(signed_residual(z, z).value(), 0.0);
        assert_abs_diff_eq!(
            signed_residual(Angle::new(0.1).unwrap(), Angle::new(TAU - 0.1).unwrap()).value(),
            0.2,
            epsilon = 1e-12
        );
        // Boundary maps to +π.
        assert_abs_diff_eq!(
            signed_residual(Angle::new(PI).unwrap(), Angle::new(0.0).unwrap()).value(),
            PI,
            epsilon = 1e-15
        );
    }

    proptest! {
        #[test]
        fn mod2pi_is_idempotent(x in -1e6f64..1e6) {
            let once = mod2pi(x).unwrap().radians();
            let twice = mod2pi(once).unwrap().radians();
            prop_assert_eq!(once, twice);
            prop_assert!((0.0..TAU).contains(&once));
        }

        #[test]
        fn risk_symmetric_rotation_invariant_bounded(
            a in 0.0f64..TAU, b in 0.0f64..TAU, c in -20.0f64..20.0,
        ) {
            let (aa, bb) = (Angle::new(a).unwrap(), Angle::new(b).unwrap());
            let r = angular_risk(aa, bb);
            prop_assert!((0.0..=2.0 + 1e-15).contains(&r));
            prop_assert!((r - angular_risk(bb, aa)).abs() <= 1e-12);
            let (ac, bc) = (Angle::new(a + c).unwrap(), Angle::new(b + c).unwrap());
            prop_assert!((r - angular_risk(ac, bc)).abs() <= 1e-12);
            if signed_residual(aa, bb).value().abs() < 1e-9 {
                prop_assert!(r <= 1e-12);
            }
            if r <= 1e-14 {
                prop_assert!(signed_residual(aa, bb).value().abs() <= 1e-6);
            }
        }

        #[test]
        fn circular_mean_rotation_equivariant(
            base in proptest::collection::vec(0.0f64..1.5, 2..12),
            c in -10.0f64..10.0,
        ) {
            // Angles confined to a quarter-circle keep the resultant away from zero.
            let angles: Vec<Angle> = base.iter().map(|&v| Angle::new(v).unwrap()).collect();
            let rotated: Vec<Angle> =
                base.iter().map(|&v| Angle::new(v + c).unwrap()).collect();
            let m = circular_mean(&angles).unwrap();
            let mr = circular_mean(&rotated).unwrap();
            let expect = mod2pi(m.radians() + c).unwrap();
            prop_assert!(signed_residual(mr, expect).value().abs() <= 1e-10);
        }

        #[test]
        fn signed_residual_in_half_open_interval(a in 0.0f64..TAU, b in 0.0f64..TAU) {
            let v = signed_residual(Angle::new(a).unwrap(), Angle::new(b).unwrap()).value();
            prop_assert!(v > -PI && v <= PI);
        }
    }
}
