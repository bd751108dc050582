//! Delay-aligned uniform time grid.
//!
//! Every discretized quantity in this crate lives on one shared grid whose
//! step divides the delay exactly: `tau = delay_steps * h`. Nodes are
//! addressed by signed integers (node `j` sits at `t = j * h`), so kink and
//! jump locations — always integer multiples of the delay, possibly shifted
//! by the discrete delay `tau0` — are exact node indices and never drift.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct NodeGrid {
    h: f64,
    delay_steps: i64,
    horizon_steps: i64,
}

impl NodeGrid {
    /// Build a grid for histories on `[-tau, 0]` and solutions on `[0, t_end]`.
    ///
    /// The step is chosen as `tau / n` with `n` even and `tau / n` as close to
    /// `step_hint` as parity allows; the horizon is nudged to an even number of
    /// steps so composite quadrature rules of order four apply end to end.
    pub fn delay_aligned(tau: f64, t_end: f64, step_hint: f64) -> Result<Self> {
        if !(tau.is_finite() && tau > 0.0) {
            return Err(Error::Config(format!("delay must be positive, got {tau}")));
        }
        if !(step_hint.is_finite() && step_hint > 0.0) {
            return Err(Error::Config(format!(
                "step hint must be positive, got {step_hint}"
            )));
        }
        if !(t_end.is_finite() && t_end >= tau) {
            return Err(Error::Config(format!(
                "horizon {t_end} must be finite and at least one delay ({tau})"
            )));
        }
        let mut n = (tau / step_hint).round() as i64;
        if n < 2 {
            n = 2;
        }
        if n % 2 != 0 {
            n += 1;
        }
        let h = tau / n as f64;
        let mut m = (t_end / h).round() as i64;
        if m % 2 != 0 {
            m += 1;
        }
        if m < n {
            m = n;
        }
        Ok(NodeGrid {
            h,
            delay_steps: n,
            horizon_steps: m,
        })
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// Number of steps per delay (even).
    pub fn delay_steps(&self) -> i64 {
        self.delay_steps
    }

    /// Number of steps from 0 to the horizon (even).
    pub fn horizon_steps(&self) -> i64 {
        self.horizon_steps
    }

    pub fn tau(&self) -> f64 {
        self.h * self.delay_steps as f64
    }

    pub fn t_end(&self) -> f64 {
        self.h * self.horizon_steps as f64
    }

    /// Time of node `j` (valid for any integer, in or out of range).
    pub fn t(&self, j: i64) -> f64 {
        j as f64 * self.h
    }

    /// First node of the stored range (`-delay_steps`).
    pub fn first_node(&self) -> i64 {
        -self.delay_steps
    }

    /// Total number of stored nodes (`delay_steps + horizon_steps + 1`).
    pub fn len(&self) -> usize {
        (self.delay_steps + self.horizon_steps + 1) as usize
    }

    #[must_use]
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Vector index of node `j`.
    pub fn idx(&self, j: i64) -> usize {
        debug_assert!(j >= self.first_node() && j <= self.horizon_steps);
        (j + self.delay_steps) as usize
    }

    /// Resolve a time to a node index if it lies within `1e-9 * h` of one.
    pub fn node_at(&self, t: f64) -> Option<i64> {
        let u = t / self.h;
        let j = u.round();
        if (u - j).abs() <= 1e-9 {
            Some(j as i64)
        } else {
            None
        }
    }

    /// Nearest node index `<= t/h` for cell-based interpolation.
    pub fn cell_of(&self, t: f64) -> i64 {
        (t / self.h).floor() as i64
    }

    /// Express a duration as an exact node count, or fail.
    ///
    /// Used for the discrete delay `tau0`, which must sit on the grid so that
    /// the integrand kinks it induces are node-aligned.
    pub fn steps_of(&self, duration: f64, what: &str) -> Result<i64> {
        let u = duration / self.h;
        let j = u.round();
        if (u - j).abs() > 1e-9 * (1.0 + u.abs()) {
            return Err(Error::Config(format!(
                "{what} = {duration} is not an integer number of grid steps (h = {})",
                self.h
            )));
        }
        Ok(j as i64)
    }

    /// Multiples of the delay strictly inside the node interval `(a, b)`.
    ///
    /// These are the breakpoints where solution segments join: a solution of
    /// the delay equation gains one order of smoothness at each, so composite
    /// quadrature must not integrate across them blindly.
    pub fn delay_multiples_in(&self, a: i64, b: i64) -> Vec<i64> {
        let n = self.delay_steps;
        let mut out = Vec::new();
        // smallest multiple of n strictly greater than a
        let mut c = a.div_euclid(n) * n;
        while c <= a {
            c += n;
        }
        while c < b {
            out.push(c);
            c += n;
        }
        out
    }
}
