//! Swapped-order evaluation of the transfer matrices (`m <= 2`).
//!
//! Writing the `m = 2` matrix entry as a double integral and integrating the
//! measurement angle first turns it into
//!
//! ```text
//!     W_{lk}(p) = 2^{-1/2} * integral over t of exp(-p t) *
//!         [ x_k(t - tau0) I_{inf,l}(t) - x_inf(t - tau0) I_{k,l}(t) ] dt
//! ```
//!
//! where `I_{x,l}(t)` is the mode-weighted window integral of `x` (see the
//! window module). Everything except the `exp(-p t)` factor is independent of
//! the frequency, so a sweep builds each entry's kernel once and contracts it
//! against a precomputed table of frequency phases. Contractions are done in
//! small blocks of entries so that phase rows stream through cache once per
//! block rather than once per entry.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::quad::weights_with_splits;

use super::window::{modulation, WindowEngine};
use super::{SchemeContext, SolutionSet};

/// Time-integral weights shared by every entry of one evaluation: `wt1` for
/// integrands anchored at 0, `wt2` for those supported on `[tau0, T]` (stored
/// full-length with leading zeros). Both are split at every delay multiple
/// and every `tau0`-shifted delay multiple, which covers all kinks of the
/// window integrals and of the shifted solution factors.
struct OuterWeights {
    wt1: Vec<f64>,
    wt2: Vec<f64>,
}

fn outer_weights(ctx: &SchemeContext, n_end: i64) -> OuterWeights {
    let n_tau = ctx.grid.delay_steps();
    let t0 = ctx.tau0_steps;
    let mut d: Vec<i64> = Vec::new();
    let mut c = n_tau;
    while c < n_end {
        d.push(c);
        c += n_tau;
    }
    let mut c = t0;
    loop {
        if c > 0 && c < n_end {
            d.push(c);
        }
        if c >= n_end {
            break;
        }
        c += n_tau;
    }
    d.sort_unstable();
    d.dedup();
    let wt1 = weights_with_splits(0, n_end, &d);
    let d2: Vec<i64> = d.iter().copied().filter(|&s| s > t0).collect();
    let core = weights_with_splits(t0, n_end, &d2);
    let mut wt2 = vec![0.0; (n_end + 1) as usize];
    wt2[t0 as usize..].copy_from_slice(&core);
    OuterWeights { wt1, wt2 }
}

/// Rows of `exp(-p t_j)` split into real and imaginary parts.
///
/// Conjugate frequencies get bitwise-conjugate rows (the sine is computed
/// from `|Im p|` and the sign applied afterwards), so mirror-symmetry
/// comparisons are exact in the phases.
struct PhaseTable {
    re: Vec<f64>,
    im: Vec<f64>,
    n_cols: usize,
}

impl PhaseTable {
    fn build(ps: &[Complex64], ctx: &SchemeContext, n_end: i64) -> PhaseTable {
        let n_cols = (n_end + 1) as usize;
        let mut re = vec![0.0; ps.len() * n_cols];
        let mut im = vec![0.0; ps.len() * n_cols];
        for (r, &p) in ps.iter().enumerate() {
            let sign = if p.im >= 0.0 { 1.0 } else { -1.0 };
            let row_re = &mut re[r * n_cols..(r + 1) * n_cols];
            let row_im = &mut im[r * n_cols..(r + 1) * n_cols];
            for j in 0..n_cols {
                let t = ctx.grid.t(j as i64);
                let damp = (-p.re * t).exp();
                let (s, c) = (p.im.abs() * t).sin_cos();
                row_re[j] = damp * c;
                row_im[j] = -sign * damp * s;
            }
        }
        PhaseTable { re, im, n_cols }
    }

    #[inline]
    fn row(&self, r: usize) -> (&[f64], &[f64]) {
        (
            &self.re[r * self.n_cols..(r + 1) * self.n_cols],
            &self.im[r * self.n_cols..(r + 1) * self.n_cols],
        )
    }
}

/// `sum_j g[j] * phase[j]` with independent accumulator chains so the FMA
/// latency overlaps; this inner product is the sweep's hot loop.
#[inline]
fn contract(gr: &[f64], gi: &[f64], pr: &[f64], pi: &[f64]) -> Complex64 {
    let n = gr.len();
    let (mut arr, mut aii, mut ari, mut air) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let (mut brr, mut bii, mut bri, mut bir) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let mut j = 0;
    while j + 1 < n {
        arr = gr[j].mul_add(pr[j], arr);
        aii = gi[j].mul_add(pi[j], aii);
        ari = gr[j].mul_add(pi[j], ari);
        air = gi[j].mul_add(pr[j], air);
        brr = gr[j + 1].mul_add(pr[j + 1], brr);
        bii = gi[j + 1].mul_add(pi[j + 1], bii);
        bri = gr[j + 1].mul_add(pi[j + 1], bri);
        bir = gi[j + 1].mul_add(pr[j + 1], bir);
        j += 2;
    }
    if j < n {
        arr = gr[j].mul_add(pr[j], arr);
        aii = gi[j].mul_add(pi[j], aii);
        ari = gr[j].mul_add(pi[j], ari);
        air = gi[j].mul_add(pr[j], air);
    }
    Complex64::new((arr + brr) - (aii + bii), (ari + bri) + (air + bir))
}

/// How many entry kernels share one streaming pass over the phase table;
/// sized so a block stays cache-resident next to one phase row.
const ENTRY_BLOCK: usize = 12;

/// Transfer matrices at every `p` in `ps`, with time integrals truncated at
/// node `n_end`.
pub(super) fn fast_pass(
    ctx: &SchemeContext,
    tables: &SolutionSet,
    ps: &[Complex64],
    n_end: i64,
    progress: Option<super::Progress<'_>>,
) -> Result<Vec<ComplexMatrix>> {
    let m = ctx.cfg.m;
    if m > 2 {
        return Err(Error::Config(
            "the fast route supports m <= 2; use the direct route".into(),
        ));
    }
    if n_end < ctx.grid.delay_steps() || n_end > ctx.grid.horizon_steps() {
        return Err(Error::Contract(format!(
            "truncation node {n_end} outside [delay, horizon]"
        )));
    }
    if ps.is_empty() {
        return Ok(Vec::new());
    }
    let h = ctx.grid.h();
    let t0 = ctx.tau0_steps;
    let n_cols = (n_end + 1) as usize;
    let weights = outer_weights(ctx, n_end);
    let phases = PhaseTable::build(ps, ctx, n_end);
    let n_p = ps.len();
    let fund = tables.fundamental();

    if m == 1 {
        // Single entry: the weighted transform of the shifted fundamental
        // solution itself (the kernel is real).
        let gr: Vec<f64> = (0..n_cols)
            .map(|j| h * weights.wt2[j] * fund.value_or_zero(j as i64 - t0).re)
            .collect();
        let gi = vec![0.0; n_cols];
        let mats = (0..n_p)
            .map(|r| {
                let (pr, pi) = phases.row(r);
                let v = contract(&gr, &gi, pr, pi);
                ComplexMatrix::from_fn(1, 1, |_, _| v)
            })
            .collect();
        return Ok(mats);
    }

    let n = ctx.cfg.n_modes as i32;
    let dim = 2 * ctx.cfg.n_modes + 1;
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;

    let psis: Vec<Vec<Complex64>> = (-n..=n).map(|l| modulation(&ctx.grid, l)).collect();
    let fund_windows: Vec<Vec<Complex64>> = psis
        .par_iter()
        .map(|psi| {
            let engine = WindowEngine::new(fund, psi, true);
            (0..=n_end).map(|j| engine.eval(j, psi)).collect()
        })
        .collect();
    let xf_shift: Vec<f64> = (0..n_cols)
        .map(|j| fund.value_or_zero(j as i64 - t0).re)
        .collect();
    let c1: Vec<f64> = weights.wt1[..n_cols]
        .iter()
        .map(|&w| h * w * inv_sqrt2)
        .collect();
    let c2: Vec<f64> = weights.wt2[..n_cols]
        .iter()
        .map(|&w| h * w * inv_sqrt2)
        .collect();

    // One task per control mode k; inside, measurement modes l are processed
    // in blocks that share each streaming pass over the phase rows.
    let done = std::sync::atomic::AtomicUsize::new(0);
    let per_k: Vec<Vec<Complex64>> = (0..dim)
        .into_par_iter()
        .map(|k_idx| {
            let k = k_idx as i32 - n;
            let xk = tables.basis(k);
            let xk_shift: Vec<Complex64> = (0..n_cols)
                .map(|j| xk.value(j as i64 - t0))
                .collect();
            let mut out = vec![Complex64::new(0.0, 0.0); dim * n_p];
            let mut block_gr: Vec<Vec<f64>> = Vec::with_capacity(ENTRY_BLOCK);
            let mut block_gi: Vec<Vec<f64>> = Vec::with_capacity(ENTRY_BLOCK);
            for l_start in (0..dim).step_by(ENTRY_BLOCK) {
                let l_stop = (l_start + ENTRY_BLOCK).min(dim);
                block_gr.clear();
                block_gi.clear();
                for l_idx in l_start..l_stop {
                    let psi = &psis[l_idx];
                    let engine = WindowEngine::new(xk, psi, false);
                    let ifl = &fund_windows[l_idx];
                    let mut gr = Vec::with_capacity(n_cols);
                    let mut gi = Vec::with_capacity(n_cols);
                    for j in 0..n_cols {
                        let t1 = c1[j] * xk_shift[j] * ifl[j];
                        let t2 = (c2[j] * xf_shift[j]) * engine.eval(j as i64, psi);
                        let g = t1 - t2;
                        gr.push(g.re);
                        gi.push(g.im);
                    }
                    block_gr.push(gr);
                    block_gi.push(gi);
                }
                for r in 0..n_p {
                    let (pr, pi) = phases.row(r);
                    for (b, l_idx) in (l_start..l_stop).enumerate() {
                        out[l_idx * n_p + r] = contract(&block_gr[b], &block_gi[b], pr, pi);
                    }
                }
            }
            if let Some(f) = progress {
                let k_done = done.fetch_add(1, std::sync::atomic::Ordering::Relaxed) + 1;
                f("control-modes", k_done, dim);
            }
            out
        })
        .collect();

    let mats = (0..n_p)
        .map(|r| {
            ComplexMatrix::from_fn(dim, dim, |l_idx, k_idx| per_k[k_idx][l_idx * n_p + r])
        })
        .collect();
    Ok(mats)
}

/// Horizon-truncation diagnostic: the matrix at one frequency recomputed at
/// horizons `T/4`, `T/2`, `T`, with the tail decay rate fitted from the two
/// successive gaps.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct TailReport {
    /// The three horizons actually used (each at least one delay).
    pub horizons: [f64; 3],
    /// Max-entry gap between the `T/2` and `T/4` matrices.
    pub gap_quarter: f64,
    /// Max-entry gap between the `T` and `T/2` matrices.
    pub gap_half: f64,
    /// `ln(gap_quarter / gap_half)` per unit horizon, when both gaps are
    /// meaningful; roughly the exponential decay rate of the truncation tail.
    pub decay_rate: Option<f64>,
}

pub(super) fn tail_gap(
    ctx: &SchemeContext,
    tables: &SolutionSet,
    p: Complex64,
) -> Result<TailReport> {
    let n_full = ctx.grid.horizon_steps();
    let n_tau = ctx.grid.delay_steps();
    let even_clamped = |x: i64| ((x / 2) * 2).max(n_tau);
    let n_half = even_clamped(n_full / 2);
    let n_quarter = even_clamped(n_full / 4);
    let w_q = super::matrix_at_horizon(ctx, tables, p, n_quarter)?;
    let w_h = super::matrix_at_horizon(ctx, tables, p, n_half)?;
    let w_f = super::matrix_at_horizon(ctx, tables, p, n_full)?;
    let gap_quarter = w_h.max_abs_diff(&w_q);
    let gap_half = w_f.max_abs_diff(&w_h);
    let dt = ctx.grid.t(n_half) - ctx.grid.t(n_quarter);
    let decay_rate = if gap_quarter > 1e-300 && gap_half > 1e-300 && dt > 0.0 {
        let r = (gap_quarter / gap_half).ln() / dt;
        r.is_finite().then_some(r)
    } else {
        None
    };
    Ok(TailReport {
        horizons: [
            ctx.grid.t(n_quarter),
            ctx.grid.t(n_half),
            ctx.grid.t(n_full),
        ],
        gap_quarter,
        gap_half,
        decay_rate,
    })
}
