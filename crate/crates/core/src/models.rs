//! The two case-study models, reduced to the scalar linear delay form the
//! verifier consumes.
//!
//! Both reductions follow the same pattern: linearize around the relevant
//! equilibrium, bound the discarded nonlinearity over an absorbing set, and
//! hand the verifier (a) the linear coefficients and (b) the perturbation
//! bound `Lambda` the nonlinearity satisfies there. The verified inequality
//! then certifies the *nonlinear* model's compound stability.

use crate::dde::{ConstraintKind, LinearDelaySystem};
use crate::error::{Error, Result};

// ---------------------------------------------------------------------------
// Delayed-oscillator model of equatorial sea-surface temperature
// (the Suarez–Schopf recharge oscillator, in nondimensional form)
// ---------------------------------------------------------------------------

/// Parameters of `T'(t) = T(t) - alpha T(t - tau) - T(t)^3` at fixed
/// `0 < alpha < 1`, `tau > 0`; `radius` is the absorbing-ball radius used to
/// bound the cubic term.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct DelayedOscillatorParams {
    pub alpha: f64,
    pub tau: f64,
    pub radius: f64,
}

/// Linearization of the delayed oscillator about the origin with the cubic
/// bounded over `|T| <= radius`: `Lambda = 3 radius^2 / 2` (the cubic's
/// Lipschitz constant there, halved by the symmetric sector form), and the
/// perturbation enters without measurement delay (`tau0 = 0`, gain -1).
pub fn delayed_oscillator_system(p: &DelayedOscillatorParams) -> Result<LinearDelaySystem> {
    if !(p.alpha > 0.0 && p.alpha < 1.0) {
        return Err(Error::Domain(format!(
            "alpha = {} must lie in (0, 1)",
            p.alpha
        )));
    }
    if !(p.tau > 0.0 && p.tau.is_finite()) {
        return Err(Error::Domain(format!("tau = {} must be positive", p.tau)));
    }
    if !(p.radius > 0.0 && p.radius.is_finite()) {
        return Err(Error::Domain(format!(
            "radius = {} must be positive",
            p.radius
        )));
    }
    let lambda = 1.5 * p.radius * p.radius;
    LinearDelaySystem::new(
        1.0 - lambda,
        -p.alpha,
        p.tau,
        0.0,
        -1.0,
        lambda,
        ConstraintKind::NormBound,
    )
}

/// Radius of the absorbing ball of the delayed oscillator: the unique root of
///
/// ```text
///     -R^3 + (1 - alpha) R + C(alpha, tau) = 0,
///     C(alpha, tau) = alpha tau * (4/3) (1 - alpha) sqrt((1 - alpha) / 3)
/// ```
///
/// in `(sqrt(1 - alpha), sqrt(1 + alpha))`; requires the dissipativity
/// condition `2 alpha tau < 1`.
pub fn delayed_oscillator_radius(alpha: f64, tau: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain(format!("alpha = {alpha} must lie in (0, 1)")));
    }
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::Domain(format!("tau = {tau} must be positive")));
    }
    if 2.0 * alpha * tau >= 1.0 {
        return Err(Error::Domain(format!(
            "dissipativity needs 2 alpha tau < 1, got {}",
            2.0 * alpha * tau
        )));
    }
    let c = alpha * tau * (4.0 / 3.0) * (1.0 - alpha) * ((1.0 - alpha) / 3.0).sqrt();
    let f = |r: f64| -r * r * r + (1.0 - alpha) * r + c;
    let mut lo = (1.0 - alpha).sqrt();
    let mut hi = (1.0 + alpha).sqrt();
    if f(lo) <= 0.0 {
        return Err(Error::Numeric(format!(
            "radius bracket failed at lower end: f({lo}) = {}",
            f(lo)
        )));
    }
    if f(hi) >= 0.0 {
        return Err(Error::Numeric(format!(
            "radius bracket failed at upper end: f({hi}) = {}",
            f(hi)
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Closed-form bound `ln((1 + sqrt(1 - alpha^2)) / alpha) / sqrt(1 - alpha^2)`
/// on the delay range over which the two leading real parts can be summed
/// analytically; decreases to 1 as `alpha -> 1`.
pub fn delayed_oscillator_sum_region_bound(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain(format!("alpha = {alpha} must lie in (0, 1)")));
    }
    let s = (1.0 - alpha * alpha).sqrt();
    Ok((s.ln_1p() - alpha.ln()) / s)
}

// ---------------------------------------------------------------------------
// Delayed physiological feedback model (Mackey–Glass)
// ---------------------------------------------------------------------------

/// Parameters of `y'(t) = -gamma y(t) + beta y(t - tau) / (1 + y(t - tau)^kappa)`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FeedbackModelParams {
    pub gamma: f64,
    pub beta: f64,
    pub kappa: f64,
    pub tau: f64,
}

impl FeedbackModelParams {
    fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::Domain(format!(
                "gamma = {} must be positive",
                self.gamma
            )));
        }
        if !(self.beta > self.gamma && self.beta.is_finite()) {
            return Err(Error::Domain(format!(
                "beta = {} must exceed gamma = {} for a positive equilibrium",
                self.beta, self.gamma
            )));
        }
        if !(self.kappa > 1.0 && self.kappa.is_finite()) {
            return Err(Error::Domain(format!(
                "kappa = {} must exceed 1",
                self.kappa
            )));
        }
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(Error::Domain(format!("tau = {} must be positive", self.tau)));
        }
        Ok(())
    }
}

/// Slope of the feedback nonlinearity `f(y) = y / (1 + y^kappa)` at the
/// positive equilibrium `y* = (beta/gamma - 1)^(1/kappa)`:
///
/// ```text
///     f'(y*) = (1 + (1 - kappa)(beta/gamma - 1)) / (beta/gamma)^2
/// ```
pub fn feedback_equilibrium_slope(gamma: f64, beta: f64, kappa: f64) -> Result<f64> {
    let p = FeedbackModelParams {
        gamma,
        beta,
        kappa,
        tau: 1.0,
    };
    p.validate()?;
    let q = beta / gamma;
    Ok((1.0 + (1.0 - kappa) * (q - 1.0)) / (q * q))
}

/// Time is rescaled by the delay, so the verifier sees a unit delay:
/// `a0 = -tau gamma`, and the delayed slope `tau beta f'(y*)` is centered by
/// the global slope bound of `f` (its sector radius over the whole line is
/// `Lambda = (tau beta / 2) ((kappa - 1)^2 / (4 kappa) + 1)`), leaving
/// `a1 = tau beta - Lambda` with the residual treated as the perturbation.
/// The perturbation acts through the delayed coordinate: `tau0 = tau = 1`.
pub fn feedback_model_system(p: &FeedbackModelParams) -> Result<LinearDelaySystem> {
    p.validate()?;
    let lambda = 0.5
        * p.tau
        * p.beta
        * ((p.kappa - 1.0) * (p.kappa - 1.0) / (4.0 * p.kappa) + 1.0);
    LinearDelaySystem::new(
        -p.tau * p.gamma,
        p.tau * p.beta - lambda,
        1.0,
        1.0,
        1.0,
        lambda,
        ConstraintKind::NormBound,
    )
}

/// The published closed-form estimate of the first destabilizing delay for
/// the standard parameter set `gamma = 0.1, beta = 0.2, kappa = 10`:
/// `arccos(-1/4) / (0.4 (1 - 1/16))`.
pub fn feedback_published_delay_threshold() -> f64 {
    (-0.25f64).acos() / (0.4 * (1.0 - 1.0 / 16.0))
}

/// First delay at which the linearization `y' = -gamma y + b y(t - tau)`
/// loses stability, from the exact crossing equations
/// `omega = -b sin(omega tau)`, `cos(omega tau) = gamma / b` — solved as
/// `tau = arccos(gamma / b) / sqrt(b^2 - gamma^2)`; requires `b < -gamma`.
///
/// `gamma = 0` is admitted (pure delayed feedback): the crossing sits at
/// `omega = |b|`, `tau = pi / (2 |b|)`.
pub fn feedback_crossing_delay(gamma: f64, b: f64) -> Result<f64> {
    if !(gamma >= 0.0 && gamma.is_finite() && b.is_finite()) {
        return Err(Error::Domain(format!(
            "need gamma >= 0 and finite b, got gamma = {gamma}, b = {b}"
        )));
    }
    if b >= -gamma {
        return Err(Error::Domain(format!(
            "no stability crossing: delayed slope b = {b} must be below -gamma = {}",
            -gamma
        )));
    }
    let omega = (b * b - gamma * gamma).sqrt();
    Ok((gamma / b).acos() / omega)
}

/// Crossing delay of the feedback model's linearization at its equilibrium.
pub fn feedback_model_crossing_delay(gamma: f64, beta: f64, kappa: f64) -> Result<f64> {
    let slope = feedback_equilibrium_slope(gamma, beta, kappa)?;
    feedback_crossing_delay(gamma, beta * slope)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::{characteristic_value, default_search_box, leading_roots};
    use num_complex::Complex64;

    #[test]
    fn oscillator_radius_reference_point() {
        let r = delayed_oscillator_radius(0.6, 0.83).unwrap();
        assert!((r - 0.729972).abs() < 1e-5, "R = {r}");
        // Residual of the defining cubic.
        let c = 0.6 * 0.83 * (4.0 / 3.0) * 0.4 * (0.4f64 / 3.0).sqrt();
        let f = -r * r * r + 0.4 * r + c;
        assert!(f.abs() < 1e-10);
    }

    #[test]
    fn oscillator_radius_rejects_nondissipative_parameters() {
        assert!(delayed_oscillator_radius(0.6, 1.0).is_err());
        assert!(delayed_oscillator_radius(1.2, 0.1).is_err());
    }

    #[test]
    fn oscillator_system_reference_point() {
        let r = delayed_oscillator_radius(0.6, 0.83).unwrap();
        let sys = delayed_oscillator_system(&DelayedOscillatorParams {
            alpha: 0.6,
            tau: 0.83,
            radius: r,
        })
        .unwrap();
        assert!((sys.lambda_bound - 0.799289).abs() < 1e-5);
        assert!((sys.a0 - 0.200711).abs() < 1e-5);
        assert_eq!(sys.a1, -0.6);
        assert_eq!(sys.tau0, 0.0);
        assert_eq!(sys.b_tilde, -1.0);
        // Leading pair of the linearization.
        let spectrum = leading_roots(&sys, 2, &default_search_box(&sys)).unwrap();
        let expect = Complex64::new(-0.894334, 0.624194);
        assert!((spectrum.roots[0] - expect).norm() < 1e-5);
        assert!(characteristic_value(&sys, spectrum.roots[0]).norm() < 1e-10);
    }

    #[test]
    fn sum_region_bound_values() {
        let b6 = delayed_oscillator_sum_region_bound(0.6).unwrap();
        let b8 = delayed_oscillator_sum_region_bound(0.8).unwrap();
        assert!((b6 - 1.3732654).abs() < 1e-6, "{b6}");
        assert!((b8 - 1.1552453).abs() < 1e-6, "{b8}");
        // Monotone decreasing toward 1 as alpha -> 1.
        assert!(b6 > b8 && b8 > 1.0);
        let near_one = delayed_oscillator_sum_region_bound(1.0 - 1e-8).unwrap();
        assert!((near_one - 1.0).abs() < 1e-3);
    }

    #[test]
    fn feedback_slope_reference_point() {
        let s = feedback_equilibrium_slope(0.1, 0.2, 10.0).unwrap();
        assert!((s + 2.0).abs() < 1e-12, "slope {s}");
    }

    #[test]
    fn feedback_system_reference_points() {
        let sys = feedback_model_system(&FeedbackModelParams {
            gamma: 0.1,
            beta: 0.2,
            kappa: 10.0,
            tau: 4.5,
        })
        .unwrap();
        assert!((sys.lambda_bound - 1.36125).abs() < 1e-10);
        assert!((sys.a0 + 0.45).abs() < 1e-12);
        assert!((sys.a1 + 0.46125).abs() < 1e-10);
        assert_eq!(sys.tau, 1.0);
        assert_eq!(sys.tau0, 1.0);
        let spectrum = leading_roots(&sys, 2, &default_search_box(&sys)).unwrap();
        let expect = Complex64::new(-0.992308, 1.119793);
        assert!((spectrum.roots[0] - expect).norm() < 1e-5, "{}", spectrum.roots[0]);

        let sys46 = feedback_model_system(&FeedbackModelParams {
            gamma: 0.1,
            beta: 0.2,
            kappa: 10.0,
            tau: 4.6,
        })
        .unwrap();
        assert!((sys46.lambda_bound - 1.3915).abs() < 1e-10);
        let spec46 = leading_roots(&sys46, 2, &default_search_box(&sys46)).unwrap();
        let expect46 = Complex64::new(-0.980315, 1.143912);
        assert!((spec46.roots[0] - expect46).norm() < 1e-5);
    }

    #[test]
    fn published_and_exact_crossing_delays() {
        let published = feedback_published_delay_threshold();
        assert!((published - 4.862604).abs() < 1e-5);
        let exact = feedback_model_crossing_delay(0.1, 0.2, 10.0).unwrap();
        assert!((exact - 4.708196).abs() < 1e-5);
        // The published closed form overestimates the true crossing delay.
        assert!(published > exact);
    }

    #[test]
    fn pure_delayed_feedback_crossing() {
        let t = feedback_crossing_delay(0.0, -1.0).unwrap();
        assert!((t - std::f64::consts::FRAC_PI_2).abs() < 1e-14);
    }

    #[test]
    fn crossing_requires_destabilizing_slope() {
        assert!(feedback_crossing_delay(0.5, -0.4).is_err());
        assert!(feedback_crossing_delay(0.5, 0.7).is_err());
    }

    #[test]
    fn crossing_delay_agrees_with_spectrum() {
        // At the crossing delay the linearization's leading root touches the
        // imaginary axis; check via the root finder on both sides.
        let (gamma, beta, kappa) = (0.1, 0.2, 10.0);
        let b = beta * feedback_equilibrium_slope(gamma, beta, kappa).unwrap();
        let tau_c = feedback_model_crossing_delay(gamma, beta, kappa).unwrap();
        for (tau, expect_stable) in [(tau_c - 0.05, true), (tau_c + 0.05, false)] {
            let sys = LinearDelaySystem::new(
                -gamma,
                b,
                tau,
                0.0,
                1.0,
                1.0,
                crate::dde::ConstraintKind::NormBound,
            )
            .unwrap();
            let spectrum = leading_roots(&sys, 1, &default_search_box(&sys)).unwrap();
            assert_eq!(
                spectrum.roots[0].re < 0.0,
                expect_stable,
                "tau = {tau}: leading root {}",
                spectrum.roots[0]
            );
        }
    }
}
