//! The finite-dimensional approximation of the compound transfer operator.
//!
//! For compound order `m` and mode cutoff `N`, the scheme builds, at each
//! complex frequency `p`, the matrix `W(p)` of the measured response of
//! m-fold exterior products of solutions against the antisymmetrized Fourier
//! modes: entry `(l, k)` is `m` times the inner product of the measurement
//! kernel driven by control tuple `k` with measurement tuple `l`. The scalar
//! the stability criterion compares against a threshold is then either the
//! largest singular value of `W` or the smallest eigenvalue of its Hermitian
//! part, depending on the constraint class.
//!
//! Two evaluation routes are implemented. The *direct* route follows the
//! defining nested integrals (a time integral per measurement-angle point,
//! then the angle inner products); it scales poorly but is the semantic
//! reference, and it supports any `m`. The *fast* route, for `m <= 2`,
//! integrates in the opposite order: sliding mode-weighted window integrals
//! of each solution are maintained incrementally, reducing a full matrix to
//! a single pass over the time grid per entry. The two routes are
//! independent fourth-order discretizations of the same integrals and are
//! tested against each other; when in doubt, trust the direct one.

mod direct;
mod fast;
mod window;

pub use fast::TailReport;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::dde::{basis_solution, fundamental_solution, ConstraintKind, LinearDelaySystem, SolutionTable};
use crate::error::{Error, Result};
use crate::grid::NodeGrid;
use crate::linalg::{
    hermitian_symmetrize, largest_singular_value, smallest_hermitian_eigenvalue, ComplexMatrix,
};
use crate::multi_index::ordered_tuples;

/// Which evaluation route computes the transfer matrices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemePath {
    /// Nested integrals in their defining order; any `m`, slow.
    Direct,
    /// Swapped integration order with incremental window sums; `m <= 2`.
    Fast,
}

/// Discretization parameters of the scheme.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SchemeConfig {
    /// Compound order.
    pub m: usize,
    /// Fourier-mode cutoff: modes `-N..=N` enter the truncation.
    pub n_modes: usize,
    /// Truncation horizon of the time integrals.
    pub t_end: f64,
    /// Half-width of the swept frequency band.
    pub omega_max: f64,
    /// Exponential weight: matrices are evaluated on the line `Re p = -nu0`.
    pub nu0: f64,
    /// Frequency grid spacing.
    pub omega_step: f64,
    /// Target step of the delay-aligned grid (the actual step divides the
    /// delay exactly; see [`NodeGrid::delay_aligned`]).
    pub step_hint: f64,
    /// Subsampling stride of the measurement-angle grid used by the direct
    /// route (1 = full resolution; larger strides must keep an even number
    /// of angle intervals).
    pub theta_stride: usize,
    pub path: SchemePath,
    /// Orders `m > 2` are experimental (direct route only, combinatorial
    /// cost); refuse them unless explicitly enabled.
    pub allow_high_order: bool,
}

impl Default for SchemeConfig {
    fn default() -> Self {
        SchemeConfig {
            m: 2,
            n_modes: 30,
            t_end: 15.0,
            omega_max: 30.0,
            nu0: 0.01,
            omega_step: 0.05,
            step_hint: 1e-3,
            theta_stride: 1,
            path: SchemePath::Fast,
            allow_high_order: false,
        }
    }
}

/// A validated scheme: system, configuration, and the delay-aligned grid with
/// the measurement delay resolved to an exact node count.
#[derive(Debug, Clone)]
pub struct SchemeContext {
    pub sys: LinearDelaySystem,
    pub cfg: SchemeConfig,
    pub grid: NodeGrid,
    pub tau0_steps: i64,
}

impl SchemeContext {
    pub fn new(sys: LinearDelaySystem, cfg: SchemeConfig) -> Result<Self> {
        if cfg.m == 0 {
            return Err(Error::Config("compound order m must be at least 1".into()));
        }
        if cfg.m > 4 {
            return Err(Error::Config(format!(
                "compound order m = {} is not supported (max 4)",
                cfg.m
            )));
        }
        if cfg.m > 2 {
            if !cfg.allow_high_order {
                return Err(Error::Config(format!(
                    "compound order m = {} needs the experimental high-order switch",
                    cfg.m
                )));
            }
            if cfg.path == SchemePath::Fast {
                return Err(Error::Config(
                    "the fast route supports m <= 2; use the direct route for higher orders"
                        .into(),
                ));
            }
        }
        if !(cfg.nu0 > 0.0 && cfg.nu0.is_finite()) {
            return Err(Error::Config(format!(
                "exponential weight nu0 = {} must be positive",
                cfg.nu0
            )));
        }
        if !(cfg.omega_max > 0.0 && cfg.omega_max.is_finite()) {
            return Err(Error::Config(format!(
                "frequency band Omega = {} must be positive",
                cfg.omega_max
            )));
        }
        if !(cfg.omega_step > 0.0 && cfg.omega_step <= cfg.omega_max) {
            return Err(Error::Config(format!(
                "frequency step {} must lie in (0, Omega]",
                cfg.omega_step
            )));
        }
        let dim = matrix_dimension(cfg.n_modes, cfg.m);
        if dim == 0 || dim > 4000 {
            return Err(Error::Config(format!(
                "truncation produces {dim} tuples; supported range is 1..=4000"
            )));
        }
        let grid = NodeGrid::delay_aligned(sys.tau, cfg.t_end, cfg.step_hint)?;
        if cfg.theta_stride == 0
            || grid.delay_steps() % cfg.theta_stride as i64 != 0
            || (grid.delay_steps() / cfg.theta_stride as i64) % 2 != 0
        {
            return Err(Error::Config(format!(
                "theta stride {} must divide the {} steps per delay with an even quotient",
                cfg.theta_stride,
                grid.delay_steps()
            )));
        }
        let tau0_steps = grid.steps_of(sys.tau0, "measurement delay tau0")?;
        Ok(SchemeContext {
            sys,
            cfg,
            grid,
            tau0_steps,
        })
    }

    /// Frequencies `0, step, 2 step, ...` up to and including the band edge.
    pub fn omega_grid_nonneg(&self) -> Vec<f64> {
        let n = (self.cfg.omega_max / self.cfg.omega_step - 1e-9).ceil() as usize;
        let mut v: Vec<f64> = (0..n).map(|j| j as f64 * self.cfg.omega_step).collect();
        v.push(self.cfg.omega_max);
        v
    }
}

/// Number of ordered mode tuples, i.e. the transfer matrix dimension.
pub fn matrix_dimension(n_modes: usize, m: usize) -> usize {
    // C(2N+1, m-1) without overflow risk at the supported sizes.
    let n = 2 * n_modes + 1;
    let k = m - 1;
    if k > n {
        return 0;
    }
    let mut num = 1usize;
    let mut den = 1usize;
    for i in 0..k {
        num *= n - i;
        den *= i + 1;
    }
    num / den
}

/// The integrated solutions a scheme evaluation consumes: the scaled
/// fundamental solution and one mode solution per `k in -N..=N`.
pub struct SolutionSet {
    fundamental: SolutionTable,
    basis: Vec<SolutionTable>,
    n_modes: usize,
}

impl SolutionSet {
    pub fn build(ctx: &SchemeContext) -> Result<Self> {
        let n = ctx.cfg.n_modes as i32;
        let fundamental = fundamental_solution(&ctx.sys, ctx.cfg.m, &ctx.grid)?;
        // Integrate the nonnegative modes (in parallel), conjugate the rest:
        // x_{-k} = conj(x_k) exactly.
        let nonneg: Vec<SolutionTable> = (0..=n)
            .into_par_iter()
            .map(|k| basis_solution(&ctx.sys, k, &ctx.grid))
            .collect::<Result<_>>()?;
        let mut basis = Vec::with_capacity(2 * n as usize + 1);
        for k in -n..0 {
            basis.push(nonneg[(-k) as usize].conjugated());
        }
        basis.extend(nonneg);
        Ok(SolutionSet {
            fundamental,
            basis,
            n_modes: ctx.cfg.n_modes,
        })
    }

    pub fn fundamental(&self) -> &SolutionTable {
        &self.fundamental
    }

    pub fn basis(&self, k: i32) -> &SolutionTable {
        &self.basis[(k + self.n_modes as i32) as usize]
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    /// All tables, fundamental first, then modes in `-N..=N` order.
    pub fn iter(&self) -> impl Iterator<Item = &SolutionTable> {
        std::iter::once(&self.fundamental).chain(self.basis.iter())
    }
}

/// Antisymmetrized m-point evaluation
/// `(1/m!) det [ tables[i](t + thetas[j]) ]`.
///
/// This is the exterior-product bracket the measurement kernel integrates;
/// exposed for property tests. The angle columns are brought into sorted
/// order first and the permutation sign applied afterwards, so antisymmetry
/// under angle exchange holds bitwise, not just to rounding.
pub fn wedge_eval(tables: &[&SolutionTable], t: f64, thetas: &[f64]) -> Result<Complex64> {
    let m = tables.len();
    if m == 0 || thetas.len() != m {
        return Err(Error::Contract(format!(
            "wedge evaluation needs as many angles as factors, got {} and {m}",
            thetas.len()
        )));
    }
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| thetas[i].partial_cmp(&thetas[j]).unwrap());
    let mut sign = 1.0;
    for i in 0..m {
        for j in (i + 1)..m {
            if order[i] > order[j] {
                sign = -sign;
            }
        }
    }
    let mut mat = vec![Complex64::new(0.0, 0.0); m * m];
    for (i, tab) in tables.iter().enumerate() {
        for (j, &src) in order.iter().enumerate() {
            mat[i * m + j] = tab.eval(t + thetas[src])?;
        }
    }
    let fact: f64 = (1..=m as u64).product::<u64>() as f64;
    Ok(sign * det_small(&mut mat, m) / fact)
}

/// Determinant by Gaussian elimination with partial pivoting; sizes here are
/// tiny (m <= 4) so stability niceties are moot, but it is branch-free on
/// singular inputs (returns 0).
fn det_small(a: &mut [Complex64], n: usize) -> Complex64 {
    let mut det = Complex64::new(1.0, 0.0);
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| {
                a[i * n + col]
                    .norm_sqr()
                    .partial_cmp(&a[j * n + col].norm_sqr())
                    .unwrap()
            })
            .unwrap();
        if a[pivot * n + col].norm_sqr() == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        if pivot != col {
            for j in 0..n {
                a.swap(col * n + j, pivot * n + j);
            }
            det = -det;
        }
        let p = a[col * n + col];
        det *= p;
        for i in (col + 1)..n {
            let f = a[i * n + col] / p;
            for j in col..n {
                let v = a[col * n + j];
                a[i * n + j] -= f * v;
            }
        }
    }
    det
}

/// The transfer matrix `W(p)` of the truncated scheme at one frequency.
pub fn transfer_matrix(
    ctx: &SchemeContext,
    tables: &SolutionSet,
    p: Complex64,
) -> Result<ComplexMatrix> {
    matrix_at_horizon(ctx, tables, p, ctx.grid.horizon_steps())
}

/// Same, with the time integrals truncated at node `n_end` (used by the
/// horizon-tail diagnostics).
pub fn matrix_at_horizon(
    ctx: &SchemeContext,
    tables: &SolutionSet,
    p: Complex64,
    n_end: i64,
) -> Result<ComplexMatrix> {
    match ctx.cfg.path {
        SchemePath::Direct => direct::direct_matrix(ctx, tables, p, n_end),
        SchemePath::Fast => Ok(fast::fast_pass(ctx, tables, &[p], n_end, None)?
            .pop()
            .unwrap()),
    }
}

/// Progress callback `(stage, done, total)`; may be called from worker
/// threads.
pub type Progress<'a> = &'a (dyn Fn(&'static str, usize, usize) + Sync);

/// Transfer matrices for a batch of frequencies sharing all precomputation.
///
/// This is the sweep workhorse; for the fast route the per-entry kernels are
/// built once and contracted against every frequency.
pub fn transfer_matrices(
    ctx: &SchemeContext,
    tables: &SolutionSet,
    ps: &[Complex64],
) -> Result<Vec<ComplexMatrix>> {
    transfer_matrices_with_progress(ctx, tables, ps, None)
}

/// [`transfer_matrices`] with progress reporting.
pub fn transfer_matrices_with_progress(
    ctx: &SchemeContext,
    tables: &SolutionSet,
    ps: &[Complex64],
    progress: Option<Progress<'_>>,
) -> Result<Vec<ComplexMatrix>> {
    match ctx.cfg.path {
        SchemePath::Direct => ps
            .iter()
            .enumerate()
            .map(|(i, &p)| {
                let w = direct::direct_matrix(ctx, tables, p, ctx.grid.horizon_steps());
                if let Some(f) = progress {
                    f("frequencies", i + 1, ps.len());
                }
                w
            })
            .collect(),
        SchemePath::Fast => fast::fast_pass(ctx, tables, ps, ctx.grid.horizon_steps(), progress),
    }
}

/// The scalar compared against the stability threshold: largest singular
/// value under a norm-bound constraint, smallest eigenvalue of the Hermitian
/// part under a monotone-sector constraint.
pub fn alpha(sys: &LinearDelaySystem, w: &ComplexMatrix) -> Result<f64> {
    match sys.constraint {
        ConstraintKind::NormBound => largest_singular_value(w),
        ConstraintKind::MonotoneSector => smallest_hermitian_eigenvalue(&hermitian_symmetrize(w)),
    }
}

/// Horizon-truncation diagnostic at one frequency: compare `W` computed at
/// horizons `T/4`, `T/2`, `T` and fit the tail's exponential decay rate.
pub fn tail_gap(ctx: &SchemeContext, tables: &SolutionSet, p: Complex64) -> Result<TailReport> {
    fast::tail_gap(ctx, tables, p)
}

/// The measurement kernel of one control tuple, sampled on the (strided)
/// angle grid; exposed for oracle tests of the direct route. Layout is
/// row-major over the `m - 1` angle axes, each axis running over
/// `theta = -tau ..= 0` in `delay_steps / stride + 1` samples.
pub fn measurement_kernel(
    ctx: &SchemeContext,
    tables: &SolutionSet,
    p: Complex64,
    control: &[i32],
) -> Result<Vec<Complex64>> {
    if control.len() + 1 != ctx.cfg.m {
        return Err(Error::Contract(format!(
            "control tuple has {} entries, compound order {} needs {}",
            control.len(),
            ctx.cfg.m,
            ctx.cfg.m - 1
        )));
    }
    direct::kernel_samples(ctx, tables, p, control, ctx.grid.horizon_steps())
}

pub(crate) fn tuples_for(ctx: &SchemeContext) -> Vec<Vec<i32>> {
    ordered_tuples(ctx.cfg.n_modes, ctx.cfg.m)
}
