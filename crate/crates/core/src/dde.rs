//! Scalar linear delay differential equations and their discretized solutions.
//!
//! The model class is
//!
//! ```text
//!     x'(t) = a0 * x(t) + a1 * x(t - tau)
//! ```
//!
//! integrated by the method of steps with a classical Runge–Kutta scheme on a
//! delay-aligned grid. Solutions of such equations are only piecewise smooth:
//! the fundamental solution jumps at 0, its derivative jumps at `tau`, and so
//! on; every such feature sits exactly on a grid node here. Tables therefore
//! store, besides the nodal values and right-sided derivatives, the handful of
//! left-sided overrides at nodes where the two one-sided limits differ, and
//! all interpolation respects them.

use std::io::Write;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::NodeGrid;

/// How the admissible perturbations are constrained, which decides the scalar
/// extracted from a transfer matrix: its largest singular value for a norm
/// bound, the smallest eigenvalue of its Hermitian part for a monotone sector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConstraintKind {
    NormBound,
    MonotoneSector,
}

/// The linear part of the delayed feedback system under study, together with
/// the data of the verification problem attached to it.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct LinearDelaySystem {
    /// Instantaneous coefficient.
    pub a0: f64,
    /// Delayed coefficient.
    pub a1: f64,
    /// The delay.
    pub tau: f64,
    /// Discrete measurement delay in `[0, tau]`.
    pub tau0: f64,
    /// Scalar gain of the measurement functional.
    pub b_tilde: f64,
    /// Bound on the admissible perturbation class; the verified inequality
    /// compares against its reciprocal.
    pub lambda_bound: f64,
    pub constraint: ConstraintKind,
}

impl LinearDelaySystem {
    pub fn new(
        a0: f64,
        a1: f64,
        tau: f64,
        tau0: f64,
        b_tilde: f64,
        lambda_bound: f64,
        constraint: ConstraintKind,
    ) -> Result<Self> {
        for (name, v) in [
            ("a0", a0),
            ("a1", a1),
            ("tau", tau),
            ("tau0", tau0),
            ("b_tilde", b_tilde),
            ("lambda_bound", lambda_bound),
        ] {
            if !v.is_finite() {
                return Err(Error::Domain(format!("{name} must be finite, got {v}")));
            }
        }
        if tau <= 0.0 {
            return Err(Error::Domain(format!("tau must be positive, got {tau}")));
        }
        if !(0.0..=tau).contains(&tau0) {
            return Err(Error::Domain(format!(
                "tau0 = {tau0} must lie in [0, tau] = [0, {tau}]"
            )));
        }
        if lambda_bound <= 0.0 {
            return Err(Error::Domain(format!(
                "perturbation bound must be positive, got {lambda_bound}"
            )));
        }
        Ok(LinearDelaySystem {
            a0,
            a1,
            tau,
            tau0,
            b_tilde,
            lambda_bound,
            constraint,
        })
    }

    /// Frequency modulus of the `k`-th orthonormal Fourier mode on `[-tau, 0]`.
    pub fn mode_frequency(&self, k: i32) -> f64 {
        2.0 * std::f64::consts::PI * k as f64 / self.tau
    }
}

/// Initial data on `[-tau, 0]`: nodal values and derivatives of a smooth
/// (or identically vanishing) history segment.
#[derive(Debug, Clone)]
pub struct History {
    values: Vec<Complex64>,
    derivs: Vec<Complex64>,
}

impl History {
    pub fn zero(grid: &NodeGrid) -> Self {
        let n = grid.delay_steps() as usize + 1;
        History {
            values: vec![Complex64::new(0.0, 0.0); n],
            derivs: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    /// Sample a smooth history function and its derivative on the nodes of
    /// `[-tau, 0]`.
    pub fn from_fn(
        grid: &NodeGrid,
        mut f: impl FnMut(f64) -> Complex64,
        mut df: impl FnMut(f64) -> Complex64,
    ) -> Self {
        let n = grid.delay_steps();
        let mut values = Vec::with_capacity(n as usize + 1);
        let mut derivs = Vec::with_capacity(n as usize + 1);
        for j in -n..=0 {
            values.push(f(grid.t(j)));
            derivs.push(df(grid.t(j)));
        }
        History { values, derivs }
    }

    fn at_zero(&self) -> (Complex64, Complex64) {
        (*self.values.last().unwrap(), *self.derivs.last().unwrap())
    }
}

/// Which solution a table holds; negating `k` corresponds to complex
/// conjugation of the table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolutionLabel {
    Fundamental,
    Basis(i32),
}

impl SolutionLabel {
    fn conjugated(self) -> Self {
        match self {
            SolutionLabel::Fundamental => SolutionLabel::Fundamental,
            SolutionLabel::Basis(k) => SolutionLabel::Basis(-k),
        }
    }
}

/// A solution sampled on the grid: nodal values, right-sided derivatives, and
/// left-sided overrides at the nodes where the solution (or its derivative)
/// is discontinuous.
///
/// The value convention at a discontinuity is the right limit: `value(j)` and
/// `eval` at the node return the stored (right-sided) data, while
/// `left_value`/`left_deriv` expose the other branch. Interpolation on a cell
/// `[j, j+1]` uses right data at `j` and left data at `j+1`, so it always
/// interpolates the smooth piece the cell belongs to.
#[derive(Debug, Clone)]
pub struct SolutionTable {
    label: SolutionLabel,
    grid: NodeGrid,
    values: Vec<Complex64>,
    derivs: Vec<Complex64>,
    /// Sorted by node; entries are `(node, left value, left derivative)`.
    left_fixes: Vec<(i64, Complex64, Complex64)>,
}

impl SolutionTable {
    pub fn grid(&self) -> &NodeGrid {
        &self.grid
    }

    pub fn label(&self) -> SolutionLabel {
        self.label
    }

    /// Stored (right-sided) value at node `j`.
    #[inline]
    pub fn value(&self, j: i64) -> Complex64 {
        self.values[self.grid.idx(j)]
    }

    /// Stored value, with nodes below the table range reading as zero.
    ///
    /// Only meaningful for the fundamental solution, whose history vanishes;
    /// callers shifting by the measurement delay use this to avoid underflow
    /// of the index range.
    #[inline]
    pub fn value_or_zero(&self, j: i64) -> Complex64 {
        if j < self.grid.first_node() {
            Complex64::new(0.0, 0.0)
        } else {
            self.values[self.grid.idx(j)]
        }
    }

    /// Right-sided derivative at node `j`.
    #[inline]
    pub fn deriv(&self, j: i64) -> Complex64 {
        self.derivs[self.grid.idx(j)]
    }

    pub fn left_value(&self, j: i64) -> Complex64 {
        match self.left_fixes.binary_search_by_key(&j, |e| e.0) {
            Ok(i) => self.left_fixes[i].1,
            Err(_) => self.value(j),
        }
    }

    pub fn left_deriv(&self, j: i64) -> Complex64 {
        match self.left_fixes.binary_search_by_key(&j, |e| e.0) {
            Ok(i) => self.left_fixes[i].2,
            Err(_) => self.deriv(j),
        }
    }

    /// Evaluate anywhere in `[-tau, t_end]`.
    ///
    /// Node-aligned times return the stored right-sided value; off-node times
    /// are cubic Hermite interpolants of the cell they fall in, which is
    /// fourth-order accurate because every cell interior is smooth.
    pub fn eval(&self, t: f64) -> Result<Complex64> {
        let g = &self.grid;
        if let Some(j) = g.node_at(t) {
            if j < g.first_node() || j > g.horizon_steps() {
                return Err(Error::Domain(format!(
                    "evaluation time {t} outside table range [{}, {}]",
                    -g.tau(),
                    g.t_end()
                )));
            }
            return Ok(self.value(j));
        }
        if t < -g.tau() || t > g.t_end() {
            return Err(Error::Domain(format!(
                "evaluation time {t} outside table range [{}, {}]",
                -g.tau(),
                g.t_end()
            )));
        }
        let j0 = g.cell_of(t).clamp(g.first_node(), g.horizon_steps() - 1);
        let h = g.h();
        let s = (t - g.t(j0)) / h;
        let v0 = self.value(j0);
        let d0 = self.deriv(j0);
        let v1 = self.left_value(j0 + 1);
        let d1 = self.left_deriv(j0 + 1);
        let s2 = s * s;
        let s3 = s2 * s;
        Ok(v0 * (2.0 * s3 - 3.0 * s2 + 1.0)
            + d0 * (h * (s3 - 2.0 * s2 + s))
            + v1 * (-2.0 * s3 + 3.0 * s2)
            + d1 * (h * (s3 - s2)))
    }

    /// The complex conjugate solution (solves the same real-coefficient
    /// equation with conjugated initial data). Conjugation is exact: every
    /// stored number is conjugated bitwise.
    pub fn conjugated(&self) -> SolutionTable {
        SolutionTable {
            label: self.label.conjugated(),
            grid: self.grid.clone(),
            values: self.values.iter().map(|z| z.conj()).collect(),
            derivs: self.derivs.iter().map(|z| z.conj()).collect(),
            left_fixes: self
                .left_fixes
                .iter()
                .map(|&(j, v, d)| (j, v.conj(), d.conj()))
                .collect(),
        }
    }

    /// Dump nodal values as `t,re,im` CSV.
    pub fn write_csv(&self, out: &mut dyn Write) -> std::io::Result<()> {
        writeln!(out, "t,re,im")?;
        let g = &self.grid;
        for j in g.first_node()..=g.horizon_steps() {
            let v = self.value(j);
            writeln!(out, "{:.15e},{:.15e},{:.15e}", g.t(j), v.re, v.im)?;
        }
        Ok(())
    }
}

/// Integrate the system forward from a history and an initial value.
///
/// `x0` is the state at `t = 0+`; it may differ from the history's value at 0
/// (that jump is exactly how the fundamental solution starts). One classical
/// Runge–Kutta step per grid cell is genuinely fourth order here because the
/// delayed argument crosses at most node-aligned kinks: the stage at the left
/// end reads the right-sided branch, the stage at the right end the left-sided
/// one, and the half-step stage interpolates a smooth cell interior.
pub fn integrate(
    sys: &LinearDelaySystem,
    grid: &NodeGrid,
    history: &History,
    x0: Complex64,
) -> Result<SolutionTable> {
    let n_tau = grid.delay_steps();
    let n_end = grid.horizon_steps();
    if history.values.len() != n_tau as usize + 1 {
        return Err(Error::Contract(format!(
            "history has {} nodes, grid needs {}",
            history.values.len(),
            n_tau + 1
        )));
    }
    let h = grid.h();
    let (hist_v0, hist_d0) = history.at_zero();

    let mut table = SolutionTable {
        label: SolutionLabel::Fundamental, // relabelled by the callers below
        grid: grid.clone(),
        values: vec![Complex64::new(0.0, 0.0); grid.len()],
        derivs: vec![Complex64::new(0.0, 0.0); grid.len()],
        left_fixes: Vec::new(),
    };
    for i in 0..n_tau as usize {
        table.values[i] = history.values[i];
        table.derivs[i] = history.derivs[i];
    }
    table.values[grid.idx(0)] = x0;
    table.derivs[grid.idx(0)] = sys.a0 * x0 + sys.a1 * history.values[0];

    // Left-sided data at 0 comes from the history; record it before stepping
    // so delayed reads during integration see the correct branch.
    table.left_fixes.push((0, hist_v0, hist_d0));
    let value_jump = hist_v0 != x0;

    let rhs = |x: Complex64, xd: Complex64| sys.a0 * x + sys.a1 * xd;
    for j in 0..n_end {
        let u = j - n_tau;
        let d1 = table.value(u);
        let d4 = table.left_value(u + 1);
        // Hermite midpoint of the delayed cell [u, u+1].
        let dmid = {
            let v0 = table.value(u);
            let d0 = table.deriv(u);
            let v1 = table.left_value(u + 1);
            let dl1 = table.left_deriv(u + 1);
            0.5 * (v0 + v1) + 0.125 * h * (d0 - dl1)
        };
        let x = table.value(j);
        let k1 = rhs(x, d1);
        let k2 = rhs(x + 0.5 * h * k1, dmid);
        let k3 = rhs(x + 0.5 * h * k2, dmid);
        let k4 = rhs(x + h * k3, d4);
        let next = x + (h / 6.0) * (k1 + 2.0 * (k2 + k3) + k4);
        let i_next = grid.idx(j + 1);
        table.values[i_next] = next;
        table.derivs[i_next] = rhs(next, table.value(u + 1));
        // A value jump at 0 propagates as a derivative jump one delay later;
        // record it as soon as that node's value exists, because delayed
        // half-step reads of the cell ending there consult the left branch.
        if value_jump && j + 1 == n_tau {
            let left_d = sys.a0 * next + sys.a1 * hist_v0;
            table.left_fixes.push((n_tau, next, left_d));
        }
    }
    Ok(table)
}

/// Scaled fundamental solution used as the last factor of every exterior
/// product: zero history with initial value `(-1)^(m+1) * sqrt(m!) * b_tilde`.
///
/// Its imaginary part is identically zero (real data, real coefficients), a
/// fact downstream conjugation identities rely on.
pub fn fundamental_solution(
    sys: &LinearDelaySystem,
    m: usize,
    grid: &NodeGrid,
) -> Result<SolutionTable> {
    if m == 0 || m > 20 {
        return Err(Error::Config(format!(
            "exterior power m = {m} out of supported range [1, 20]"
        )));
    }
    let fact: f64 = (1..=m as u64).product::<u64>() as f64;
    let sign = if m % 2 == 1 { 1.0 } else { -1.0 };
    let x0 = Complex64::new(sign * fact.sqrt() * sys.b_tilde, 0.0);
    let mut t = integrate(sys, grid, &History::zero(grid), x0)?;
    t.label = SolutionLabel::Fundamental;
    Ok(t)
}

/// Solution with Fourier-mode history `phi_k(s) = tau^(-1/2) exp(i mu_k s)`,
/// `mu_k = 2 pi k / tau`.
///
/// Negative modes are produced by conjugating the positive ones, which makes
/// the identity `x_{-k} = conj(x_k)` hold bit for bit rather than merely to
/// rounding — frequency-symmetry checks downstream depend on that exactness.
pub fn basis_solution(sys: &LinearDelaySystem, k: i32, grid: &NodeGrid) -> Result<SolutionTable> {
    if k < 0 {
        return Ok(basis_solution(sys, -k, grid)?.conjugated());
    }
    let mu = sys.mode_frequency(k);
    let amp = 1.0 / sys.tau.sqrt();
    let hist = History::from_fn(
        grid,
        |s| Complex64::from_polar(amp, mu * s),
        |s| Complex64::new(0.0, mu) * Complex64::from_polar(amp, mu * s),
    );
    let x0 = hist.at_zero().0;
    let mut t = integrate(sys, grid, &hist, x0)?;
    t.label = SolutionLabel::Basis(k);
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sys(a0: f64, a1: f64, tau: f64) -> LinearDelaySystem {
        LinearDelaySystem::new(a0, a1, tau, 0.0, 1.0, 1.0, ConstraintKind::NormBound).unwrap()
    }

    #[test]
    fn parameter_validation() {
        assert!(LinearDelaySystem::new(0.0, 0.0, 0.0, 0.0, 1.0, 1.0, ConstraintKind::NormBound)
            .is_err());
        assert!(LinearDelaySystem::new(0.0, 0.0, 1.0, 1.5, 1.0, 1.0, ConstraintKind::NormBound)
            .is_err());
        assert!(LinearDelaySystem::new(0.0, 0.0, 1.0, 0.5, 1.0, 0.0, ConstraintKind::NormBound)
            .is_err());
    }

    #[test]
    fn undelayed_fundamental_is_an_exponential() {
        let s = sys(-0.7, 0.0, 1.0);
        let grid = NodeGrid::delay_aligned(1.0, 5.0, 1e-2).unwrap();
        let x = fundamental_solution(&s, 1, &grid).unwrap();
        for j in [0, 17, 250, 500] {
            let t = grid.t(j);
            let exact = (-0.7 * t).exp();
            assert!(
                (x.value(j).re - exact).abs() < 1e-10,
                "t={t}: {} vs {exact}",
                x.value(j).re
            );
            assert_eq!(x.value(j).im, 0.0);
        }
    }

    #[test]
    fn fundamental_matches_closed_form_on_two_segments() {
        // On [0, tau] the delayed term reads the zero history, so
        // x = x0 exp(a0 t); on [tau, 2 tau] variation of constants gives
        // x(t) = (x(tau) + a1 x0 (t - tau)) exp(a0 (t - tau)).
        let (a0, a1, tau) = (0.3, -0.8, 1.3);
        let s = sys(a0, a1, tau);
        let grid = NodeGrid::delay_aligned(tau, 2.0 * tau, 1e-3).unwrap();
        let x = fundamental_solution(&s, 1, &grid).unwrap();
        let x0 = x.value(0).re;
        let n = grid.delay_steps();
        let xtau = x0 * (a0 * tau).exp();
        for j in (0..=2 * n).step_by(97) {
            let t = grid.t(j);
            let exact = if j <= n {
                x0 * (a0 * t).exp()
            } else {
                (xtau + a1 * x0 * (t - tau)) * (a0 * (t - tau)).exp()
            };
            assert!(
                (x.value(j).re - exact).abs() < 1e-11 * (1.0 + exact.abs()),
                "j={j}"
            );
        }
    }

    #[test]
    fn zero_history_and_the_jump_at_zero() {
        let s = sys(0.2, -0.6, 0.83);
        let grid = NodeGrid::delay_aligned(0.83, 3.0, 1e-3).unwrap();
        let x = fundamental_solution(&s, 2, &grid).unwrap();
        // m = 2, b_tilde = 1: starts at -sqrt(2).
        assert!((x.value(0).re + 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(x.eval(-0.4111).unwrap(), Complex64::new(0.0, 0.0));
        assert_eq!(x.left_value(0), Complex64::new(0.0, 0.0));
        assert_eq!(x.eval(0.0).unwrap(), x.value(0));
        // The derivative jump one delay later is recorded.
        let n = grid.delay_steps();
        assert!((x.left_deriv(n) - x.deriv(n)).norm() > 1e-3);
        let expected_left = s.a0 * x.value(n);
        assert!((x.left_deriv(n) - expected_left).norm() < 1e-13);
    }

    #[test]
    fn interpolation_is_smooth_and_accurate() {
        let s = sys(0.1, -0.5, 1.0);
        let grid = NodeGrid::delay_aligned(1.0, 2.0, 1e-2).unwrap();
        let x = fundamental_solution(&s, 1, &grid).unwrap();
        // Mid-cell interpolation on the first segment against the exponential.
        let x0 = x.value(0).re;
        for &t in &[0.005f64, 0.3371, 0.995] {
            let exact = x0 * (0.1 * t).exp();
            assert!((x.eval(t).unwrap().re - exact).abs() < 1e-9);
        }
        // Just below zero the (zero) history branch rules.
        assert_eq!(x.eval(-1e-5).unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn fourth_order_convergence() {
        // Richardson: e(h) ~ C h^4 means successive differences shrink ~16x.
        // Probe at an exact delay multiple so every grid evaluates the same
        // time (horizons rounded to different step multiples would otherwise
        // dominate the differences).
        let s = sys(0.2, -0.83, 0.83);
        let probe = |hint: f64| {
            let grid = NodeGrid::delay_aligned(0.83, 4.0 * 0.83, hint).unwrap();
            let x = fundamental_solution(&s, 2, &grid).unwrap();
            x.value(grid.horizon_steps()).re
        };
        let (c, m, f) = (probe(8e-3), probe(4e-3), probe(2e-3));
        let ratio = (c - m).abs() / (m - f).abs();
        assert!(
            (11.0..=22.0).contains(&ratio),
            "convergence ratio {ratio} not ~16"
        );
    }

    #[test]
    fn basis_history_and_continuity() {
        let tau = 0.83;
        let s = sys(0.2, -0.6, tau);
        let grid = NodeGrid::delay_aligned(tau, 2.0, 1e-3).unwrap();
        let x = basis_solution(&s, 3, &grid).unwrap();
        let amp = 1.0 / tau.sqrt();
        let mu = 2.0 * std::f64::consts::PI * 3.0 / tau;
        // History nodes reproduce the mode exactly.
        for j in [-830i64, -411, -1, 0] {
            let t = grid.t(j);
            let expect = Complex64::from_polar(amp, mu * t);
            assert!((x.value(j) - expect).norm() < 1e-12);
        }
        // Continuous at 0 (no value fix), kinked in derivative.
        assert_eq!(x.left_value(0), x.value(0));
        assert!((x.left_deriv(0) - Complex64::new(0.0, mu) * x.value(0)).norm() < 1e-12);
    }

    #[test]
    fn negated_mode_is_bitwise_conjugate() {
        let s = sys(-0.45, -0.46, 1.0);
        let grid = NodeGrid::delay_aligned(1.0, 3.0, 2e-3).unwrap();
        let xp = basis_solution(&s, 4, &grid).unwrap();
        let xm = basis_solution(&s, -4, &grid).unwrap();
        assert_eq!(xm.label(), SolutionLabel::Basis(-4));
        for j in grid.first_node()..=grid.horizon_steps() {
            assert_eq!(xm.value(j), xp.value(j).conj());
            assert_eq!(xm.deriv(j), xp.deriv(j).conj());
        }
    }

    #[test]
    fn fundamental_imaginary_part_is_exactly_zero() {
        let s = sys(0.2, -0.6, 0.83);
        let grid = NodeGrid::delay_aligned(0.83, 10.0, 1e-3).unwrap();
        let x = fundamental_solution(&s, 2, &grid).unwrap();
        for j in grid.first_node()..=grid.horizon_steps() {
            assert_eq!(x.value(j).im, 0.0);
        }
    }

    #[test]
    fn eval_rejects_out_of_range() {
        let s = sys(0.0, -1.0, 1.0);
        let grid = NodeGrid::delay_aligned(1.0, 2.0, 1e-2).unwrap();
        let x = fundamental_solution(&s, 1, &grid).unwrap();
        assert!(x.eval(-1.1).is_err());
        assert!(x.eval(2.3).is_err());
    }

    #[test]
    fn csv_dump_shape() {
        let s = sys(0.0, -1.0, 1.0);
        let grid = NodeGrid::delay_aligned(1.0, 1.0, 0.25).unwrap();
        let x = fundamental_solution(&s, 1, &grid).unwrap();
        let mut buf = Vec::new();
        x.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "t,re,im");
        assert_eq!(lines.len(), 1 + grid.len());
    }
}
