//! Incrementally evaluated mode-weighted window integrals.
//!
//! The fast route needs, for every time node `t_j`, the integral
//!
//! ```text
//!     I(j) = integral over theta in [-tau, 0] of  x(t_j + theta) conj(phi_l(theta)) dtheta
//! ```
//!
//! for each solution table `x` and mode `l`. Evaluating each window afresh
//! costs O(nodes per delay) and makes full sweeps quadratic; instead, the
//! modulation identity `conj(phi_l(theta)) = conj(psi[j]) psi[u] / sqrt(tau)`
//! (with `u = j + theta/h` and `psi[u] = exp(-i mu_l h u)`) turns every
//! window into a weighted sum of one fixed sequence `g[u] = x[u] psi[u]`,
//! and composite-Simpson weighted sums over any node range reduce to O(1)
//! lookups in parity-split prefix sums.
//!
//! Two structural details keep this exact rather than approximately right:
//! prefix accumulators restart at every delay multiple, so (a) sums never
//! bridge a breakpoint where the integrand loses smoothness — windows are
//! split there, matching the rule the direct route applies — and (b)
//! cancellation cannot grow with the horizon.

use num_complex::Complex64;

use crate::dde::SolutionTable;
use crate::grid::NodeGrid;

/// Exact-phase modulation sequence `psi[u] = exp(-i mu_l h u)` over the full
/// node range of `grid`; negative modes are bitwise conjugates of positive
/// ones. The phase is reduced with integer arithmetic: `mu_l h u` is
/// `2 pi (l u / n_tau)` and only its fractional part matters.
pub(super) fn modulation(grid: &NodeGrid, l: i32) -> Vec<Complex64> {
    if l < 0 {
        return modulation(grid, -l).into_iter().map(|z| z.conj()).collect();
    }
    let n_tau = grid.delay_steps();
    (grid.first_node()..=grid.horizon_steps())
        .map(|u| {
            let r = (l as i64 * u).rem_euclid(n_tau);
            let angle = -2.0 * std::f64::consts::PI * r as f64 / n_tau as f64;
            Complex64::from_polar(1.0, angle)
        })
        .collect()
}

pub(super) struct WindowEngine {
    n_tau: i64,
    n_end: i64,
    /// `x[u] * psi[u]`, index `u + n_tau`.
    g: Vec<Complex64>,
    /// Parity-split prefix sums of `g`, restarted after every delay multiple:
    /// `p_even[i(u)]` sums `g[v]` over even `v` in `(seg(u), u]` where
    /// `seg(u)` is the largest delay multiple below `u`.
    p_even: Vec<Complex64>,
    p_odd: Vec<Complex64>,
    /// Windows of the fundamental solution stop at 0: everything below is
    /// identically zero and the jump at 0 must not be bridged.
    clamp_at_zero: bool,
    /// `h / sqrt(tau)` — quadrature step times the mode normalization.
    scale: f64,
}

impl WindowEngine {
    pub(super) fn new(table: &SolutionTable, psi: &[Complex64], clamp_at_zero: bool) -> Self {
        let grid = table.grid();
        let n_tau = grid.delay_steps();
        let n_end = grid.horizon_steps();
        let len = grid.len();
        assert_eq!(psi.len(), len);
        let mut g = Vec::with_capacity(len);
        for (i, u) in (grid.first_node()..=n_end).enumerate() {
            g.push(table.value(u) * psi[i]);
        }
        let mut p_even = vec![Complex64::new(0.0, 0.0); len];
        let mut p_odd = vec![Complex64::new(0.0, 0.0); len];
        let mut acc_e = Complex64::new(0.0, 0.0);
        let mut acc_o = Complex64::new(0.0, 0.0);
        for (i, u) in (grid.first_node()..=n_end).enumerate() {
            if u.rem_euclid(n_tau) == 0 {
                acc_e = Complex64::new(0.0, 0.0);
                acc_o = Complex64::new(0.0, 0.0);
            } else if u % 2 == 0 {
                acc_e += g[i];
            } else {
                acc_o += g[i];
            }
            p_even[i] = acc_e;
            p_odd[i] = acc_o;
        }
        WindowEngine {
            n_tau,
            n_end,
            g,
            p_even,
            p_odd,
            clamp_at_zero,
            scale: grid.h() / grid.tau().sqrt(),
        }
    }

    #[inline]
    fn pos(&self, u: i64) -> usize {
        (u + self.n_tau) as usize
    }

    /// Interior sums of `g` over `(a, b)`, split into the nodes at odd and at
    /// even offset from `a` (Simpson's "4" and "2" classes); both bounds must
    /// lie in one closed delay segment.
    #[inline]
    fn interior(&self, a: i64, b: i64, a_is_even: bool) -> (Complex64, Complex64) {
        let (pa, pb) = (self.pos(a), self.pos(b - 1));
        // Parity arrays are global; nodes at odd offset from an even `a` are
        // the globally odd ones, and vice versa.
        let (four, two) = if a_is_even {
            (&self.p_odd, &self.p_even)
        } else {
            (&self.p_even, &self.p_odd)
        };
        (four[pb] - four[pa], two[pb] - two[pa])
    }

    /// Weighted sum of `g` over the node range `[a, b]` with the same
    /// composite rule `crate::quad` would assign to that range.
    fn weighted_range(&self, a: i64, b: i64) -> Complex64 {
        let n = b - a;
        debug_assert!(n >= 0);
        match n {
            0 => Complex64::new(0.0, 0.0),
            1 => 0.5 * (self.g[self.pos(a)] + self.g[self.pos(b)]),
            3 => {
                let g = &self.g;
                0.375 * (g[self.pos(a)] + g[self.pos(b)])
                    + 1.125 * (g[self.pos(a + 1)] + g[self.pos(a + 2)])
            }
            n if n % 2 == 0 => {
                let (four, two) = self.interior(a, b, a % 2 == 0);
                (self.g[self.pos(a)] + self.g[self.pos(b)]) / 3.0
                    + (4.0 / 3.0) * four
                    + (2.0 / 3.0) * two
            }
            _ => {
                let g = &self.g;
                let head = 0.375 * (g[self.pos(a)] + g[self.pos(a + 3)])
                    + 1.125 * (g[self.pos(a + 1)] + g[self.pos(a + 2)]);
                head + self.weighted_range(a + 3, b)
            }
        }
    }

    /// The raw window sum at time node `j` (without the `conj(psi[j])`
    /// demodulation and normalization, which the caller applies).
    pub(super) fn window_sum(&self, j: i64) -> Complex64 {
        debug_assert!((0..=self.n_end).contains(&j));
        let lo_full = j - self.n_tau;
        let lo = if self.clamp_at_zero { lo_full.max(0) } else { lo_full };
        if lo >= j {
            return Complex64::new(0.0, 0.0);
        }
        // At most one delay multiple lies strictly inside the window.
        let mut c = j.div_euclid(self.n_tau) * self.n_tau;
        if c == j {
            c -= self.n_tau;
        }
        if c > lo && c < j {
            self.weighted_range(lo, c) + self.weighted_range(c, j)
        } else {
            self.weighted_range(lo, j)
        }
    }

    /// `I(j)`, the mode-weighted window integral at time node `j`.
    pub(super) fn eval(&self, j: i64, psi: &[Complex64]) -> Complex64 {
        self.scale * psi[self.pos(j)].conj() * self.window_sum(j)
    }
}
