//! Shared helpers and closed-form oracles for the integration tests.
//!
//! Everything here is derived independently of the library's evaluation
//! routes (Laplace transforms and hand-integrated exponentials), so
//! agreement is meaningful evidence and not a tautology.

#![allow(dead_code)]

use num_complex::Complex64;

use compound_freq_core::dde::{ConstraintKind, LinearDelaySystem};
use compound_freq_core::linalg::ComplexMatrix;
use compound_freq_core::scheme::{SchemeConfig, SchemePath};

/// A strongly stable delayed oscillator (leading roots near -0.89 +/- 0.63i),
/// handy wherever the exact model constants don't matter.
pub fn stable_oscillator() -> LinearDelaySystem {
    LinearDelaySystem::new(
        0.2,
        -0.6,
        0.83,
        0.0,
        -1.0,
        0.8,
        ConstraintKind::NormBound,
    )
    .unwrap()
}

pub fn small_cfg(m: usize, n_modes: usize, t_end: f64, step_hint: f64) -> SchemeConfig {
    SchemeConfig {
        m,
        n_modes,
        t_end,
        step_hint,
        path: SchemePath::Fast,
        ..SchemeConfig::default()
    }
}

/// `W(p)` for `m = 1` at infinite horizon: the Laplace transform of the
/// shifted fundamental solution,
/// `b_tilde exp(-p tau0) / (p - a0 - a1 exp(-p tau))`.
pub fn m1_transfer_infinite(sys: &LinearDelaySystem, p: Complex64) -> Complex64 {
    sys.b_tilde * (-p * sys.tau0).exp()
        / (p - sys.a0 - sys.a1 * (-p * sys.tau).exp())
}

/// `E(z; u, v) = integral of exp(z t) over [u, v] = (exp(z v) - exp(z u))/z`,
/// with the `z -> 0` limit handled by series.
pub fn e_int(z: Complex64, u: f64, v: f64) -> Complex64 {
    if z.norm() < 1e-8 {
        let s = v - u;
        let zu = z * u;
        let zv = z * v;
        // (v - u) * (1 + (zu + zv)/2 + (zu^2 + zu zv + zv^2)/6 + ...)
        s * (Complex64::new(1.0, 0.0)
            + 0.5 * (zu + zv)
            + (zu * zu + zu * zv + zv * zv) / 6.0)
    } else {
        ((z * v).exp() - (z * u).exp()) / z
    }
}

/// Closed-form `m = 2` transfer-matrix entry in the undelayed limit
/// `a1 = 0`.
///
/// With no delay coupling every solution is a pure exponential once its
/// argument is positive, so the 2x2 wedge degenerates: the integrand
/// vanishes identically for `t >= tau`, and the remaining triangle
/// integrates in closed form. Writing `mu_j = 2 pi j / tau`,
/// `z = a0 + i mu_k - p`, `w = a0 - i mu_l`, `v = i(mu_k - mu_l)`:
///
/// ```text
/// W_{lk} = -(b_tilde / tau) [ exp(-i mu_k tau0) (E(z;0,t0) - E(z-w;0,t0)) / w
///                           - exp(-a0 tau0) (E(z-v;t0,tau) - exp(-v tau) E(z;t0,tau)) / v ]
/// ```
///
/// (limit forms at `v = 0`), independent of the horizon for `T >= tau`.
pub fn ode_limit_entry(sys: &LinearDelaySystem, p: Complex64, l: i32, k: i32) -> Complex64 {
    assert_eq!(sys.a1, 0.0, "closed form only valid without delay coupling");
    let tau = sys.tau;
    let t0 = sys.tau0;
    let mu_k = sys.mode_frequency(k);
    let mu_l = sys.mode_frequency(l);
    let z = Complex64::new(sys.a0, mu_k) - p;
    let w = Complex64::new(sys.a0, -mu_l);
    let v = Complex64::new(0.0, mu_k - mu_l);

    let term1 = (Complex64::new(0.0, -mu_k * t0)).exp()
        * (e_int(z, 0.0, t0) - e_int(z - w, 0.0, t0))
        / w;
    let bracket2 = if l == k {
        // lim_{v -> 0} [E(z - v) - exp(-v tau) E(z)] / v
        //   = integral of (tau - t) exp(z t) over [t0, tau]
        //   = (E(z; t0, tau) - (tau - t0) exp(z t0)) / z
        (e_int(z, t0, tau) - (tau - t0) * (z * t0).exp()) / z
    } else {
        (e_int(z - v, t0, tau) - (-v * tau).exp() * e_int(z, t0, tau)) / v
    };
    let term2 = (-sys.a0 * t0).exp() * bracket2;
    -(sys.b_tilde / tau) * (term1 - term2)
}

/// Full closed-form matrix for the undelayed limit.
pub fn ode_limit_matrix(sys: &LinearDelaySystem, p: Complex64, n_modes: usize) -> ComplexMatrix {
    let n = n_modes as i32;
    let dim = 2 * n_modes + 1;
    ComplexMatrix::from_fn(dim, dim, |li, ki| {
        ode_limit_entry(sys, p, li as i32 - n, ki as i32 - n)
    })
}
