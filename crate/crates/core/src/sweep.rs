//! Frequency sweeps and the verdicts built on them.
//!
//! A sweep fixes the truncation, walks the frequency band `[-Omega, Omega]`
//! along the line `Re p = -nu0`, computes the constraint scalar `alpha` at
//! every grid frequency, and compares the worst value against the threshold
//! `1 / Lambda`. The spectral precondition (`-nu0` strictly above the
//! compound spectral bound) is verified first; without it the frequency-domain
//! inequality certifies nothing and the sweep is not even run.
//!
//! By conjugation symmetry `alpha(-omega) = alpha(omega)`, so by default only
//! the nonnegative half-band is computed and mirrored. `mirror: false`
//! evaluates the negative frequencies explicitly instead — slower, and
//! intended as a cross-check of that very symmetry.

use std::collections::BTreeMap;
use std::time::Instant;

use num_complex::Complex64;

use crate::dde::{ConstraintKind, LinearDelaySystem};
use crate::error::{Error, Result};
use crate::multi_index::restriction_positions;
use crate::scheme::{
    alpha, tail_gap, transfer_matrices_with_progress, SchemeConfig, SchemeContext, SolutionSet,
    TailReport,
};
use crate::spectrum::{
    compound_spectral_bound, default_search_box, leading_roots, SpectralBound,
};

/// Outcome of one verification run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    /// The frequency-domain inequality holds strictly on the whole grid.
    Satisfied,
    /// The inequality fails at some grid frequency.
    Violated,
    /// `-nu0` does not lie above the compound spectral bound; nothing was
    /// swept.
    PreconditionFailed,
}

pub use crate::scheme::Progress;

#[derive(Clone, Copy, Default)]
pub struct SweepOptions<'a> {
    /// Evaluate only `omega >= 0` and mirror (default). Off means every
    /// negative frequency is computed explicitly.
    pub no_mirror: bool,
    pub progress: Option<Progress<'a>>,
}

/// Result of the spectral precondition check.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct PrecheckReport {
    pub spectral_bound: SpectralBound,
    pub nu0: f64,
    /// `-nu0 - bound`; positive iff the precondition holds.
    pub margin: f64,
    pub ok: bool,
}

/// Verify `-nu0 > ` (sum of the m largest root real parts) for the system.
pub fn check_precondition(sys: &LinearDelaySystem, m: usize, nu0: f64) -> Result<PrecheckReport> {
    let spectrum = leading_roots(sys, m, &default_search_box(sys))?;
    let bound = compound_spectral_bound(&spectrum, m)?;
    let margin = -nu0 - bound.as_f64();
    Ok(PrecheckReport {
        spectral_bound: bound,
        nu0,
        margin,
        ok: margin > 0.0,
    })
}

/// Full record of one sweep.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct FrequencySweepReport {
    /// Swept frequencies, ascending over the full band (empty if the
    /// precondition failed).
    pub omegas: Vec<f64>,
    /// Constraint scalar at each frequency.
    pub alphas: Vec<f64>,
    /// `1 / Lambda`.
    pub threshold: f64,
    pub constraint: ConstraintKind,
    pub verdict: Verdict,
    /// Distance between the worst swept value and the threshold, with the
    /// sign convention "positive means satisfied"; absent when the
    /// precondition failed.
    pub margin: Option<f64>,
    /// Worst value within 5% of the threshold (in either direction).
    pub near_threshold: bool,
    pub spectral_bound: SpectralBound,
    pub nu0: f64,
    /// Frequency attaining the worst value.
    pub peak_omega: Option<f64>,
    /// Worst value over the outer half-band `|omega| in [Omega/2, Omega]` —
    /// a plausibility indicator for the unswept frequencies beyond the band
    /// edge, not a certificate of anything outside it.
    pub outer_band_worst: Option<f64>,
    /// Horizon-truncation diagnostic at the peak frequency.
    pub tail: Option<TailReport>,
    /// Whether negative frequencies were mirrored rather than computed.
    pub mirrored: bool,
    /// Wall-clock stage timings in seconds. Informational only: timings are
    /// the one nondeterministic part of a report and must be masked out of
    /// reproducibility comparisons.
    pub timings: BTreeMap<String, f64>,
}

/// One mode-truncation curve extracted from a larger run.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct ModeCurve {
    pub n_modes: usize,
    pub peak_alpha: f64,
    /// Over the same full frequency grid as the parent report.
    pub alphas: Vec<f64>,
}

fn stage(progress: Option<Progress<'_>>, name: &'static str, done: usize, total: usize) {
    if let Some(f) = progress {
        f(name, done, total);
    }
}

/// Sweep with the truncation of `ctx`, extracting in one pass the curves of
/// every mode cutoff in `sub_ns` (ascending, last = the context's own `N`).
///
/// The smaller truncations' matrices are exact sub-blocks of the full one,
/// so the extra cutoffs cost only their singular-value extractions.
pub fn sweep_with_curves(
    ctx: &SchemeContext,
    opts: &SweepOptions<'_>,
    sub_ns: &[usize],
) -> Result<(FrequencySweepReport, Vec<ModeCurve>)> {
    let n_max = ctx.cfg.n_modes;
    if sub_ns.is_empty() || *sub_ns.last().unwrap() != n_max {
        return Err(Error::Contract(format!(
            "sub_ns must end with the context's mode cutoff {n_max}"
        )));
    }
    if sub_ns.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Contract("sub_ns must be strictly ascending".into()));
    }
    let total_timer = Instant::now();
    let mut timings = BTreeMap::new();

    stage(opts.progress, "spectrum", 0, 1);
    let timer = Instant::now();
    let pre = check_precondition(&ctx.sys, ctx.cfg.m, ctx.cfg.nu0)?;
    timings.insert("spectrum_s".into(), timer.elapsed().as_secs_f64());
    stage(opts.progress, "spectrum", 1, 1);
    let threshold = 1.0 / ctx.sys.lambda_bound;
    if !pre.ok {
        timings.insert("total_s".into(), total_timer.elapsed().as_secs_f64());
        let report = FrequencySweepReport {
            omegas: Vec::new(),
            alphas: Vec::new(),
            threshold,
            constraint: ctx.sys.constraint,
            verdict: Verdict::PreconditionFailed,
            margin: None,
            near_threshold: false,
            spectral_bound: pre.spectral_bound,
            nu0: ctx.cfg.nu0,
            peak_omega: None,
            outer_band_worst: None,
            tail: None,
            mirrored: !opts.no_mirror,
            timings,
        };
        return Ok((report, Vec::new()));
    }

    stage(opts.progress, "integrate", 0, 1);
    let timer = Instant::now();
    let tables = SolutionSet::build(ctx)?;
    timings.insert("integrate_s".into(), timer.elapsed().as_secs_f64());
    stage(opts.progress, "integrate", 1, 1);

    let nonneg = ctx.omega_grid_nonneg();
    let eval_omegas: Vec<f64> = if opts.no_mirror {
        let mut v: Vec<f64> = nonneg.iter().rev().map(|&w| -w).collect();
        v.pop(); // drop duplicate 0
        v.extend(nonneg.iter().copied());
        v
    } else {
        nonneg.clone()
    };
    let ps: Vec<Complex64> = eval_omegas
        .iter()
        .map(|&w| Complex64::new(-ctx.cfg.nu0, w))
        .collect();

    let timer = Instant::now();
    let mats = transfer_matrices_with_progress(ctx, &tables, &ps, opts.progress)?;
    timings.insert("matrices_s".into(), timer.elapsed().as_secs_f64());

    stage(opts.progress, "alphas", 0, sub_ns.len());
    let timer = Instant::now();
    let mut eval_curves: Vec<Vec<f64>> = Vec::with_capacity(sub_ns.len());
    for (i, &n_sub) in sub_ns.iter().enumerate() {
        let curve = if n_sub == n_max {
            mats.iter()
                .map(|w| alpha(&ctx.sys, w))
                .collect::<Result<Vec<f64>>>()?
        } else {
            let pos = restriction_positions(n_max, n_sub, ctx.cfg.m);
            mats.iter()
                .map(|w| alpha(&ctx.sys, &w.gather(&pos, &pos)))
                .collect::<Result<Vec<f64>>>()?
        };
        eval_curves.push(curve);
        stage(opts.progress, "alphas", i + 1, sub_ns.len());
    }
    timings.insert("alphas_s".into(), timer.elapsed().as_secs_f64());

    // Assemble full-band curves.
    let mirror_curve = |c: &[f64]| -> (Vec<f64>, Vec<f64>) {
        if opts.no_mirror {
            (eval_omegas.clone(), c.to_vec())
        } else {
            let mut om: Vec<f64> = nonneg.iter().rev().map(|&w| -w).collect();
            om.pop();
            om.extend(nonneg.iter().copied());
            let mut al: Vec<f64> = c.iter().rev().copied().collect();
            al.pop();
            al.extend_from_slice(c);
            (om, al)
        }
    };
    let (omegas, alphas_full) = mirror_curve(eval_curves.last().unwrap());

    // Worst value and verdict; "worst" depends on the constraint class.
    let worse = |a: f64, b: f64| match ctx.sys.constraint {
        ConstraintKind::NormBound => a > b,
        ConstraintKind::MonotoneSector => a < b,
    };
    let mut peak_idx = 0;
    for i in 1..alphas_full.len() {
        if worse(alphas_full[i], alphas_full[peak_idx]) {
            peak_idx = i;
        }
    }
    let worst = alphas_full[peak_idx];
    let margin = match ctx.sys.constraint {
        ConstraintKind::NormBound => threshold - worst,
        ConstraintKind::MonotoneSector => worst + threshold,
    };
    let verdict = if margin > 0.0 {
        Verdict::Satisfied
    } else {
        Verdict::Violated
    };
    let outer = omegas
        .iter()
        .zip(&alphas_full)
        .filter(|(w, _)| w.abs() >= 0.5 * ctx.cfg.omega_max - 1e-12)
        .map(|(_, &a)| a)
        .reduce(|a, b| if worse(a, b) { a } else { b });

    stage(opts.progress, "tail", 0, 1);
    let timer = Instant::now();
    let peak_omega = omegas[peak_idx];
    let tail = tail_gap(
        ctx,
        &tables,
        Complex64::new(-ctx.cfg.nu0, peak_omega),
    )?;
    timings.insert("tail_s".into(), timer.elapsed().as_secs_f64());
    stage(opts.progress, "tail", 1, 1);
    timings.insert("total_s".into(), total_timer.elapsed().as_secs_f64());

    let report = FrequencySweepReport {
        omegas: omegas.clone(),
        alphas: alphas_full,
        threshold,
        constraint: ctx.sys.constraint,
        verdict,
        margin: Some(margin),
        near_threshold: margin.abs() < 0.05 * threshold,
        spectral_bound: pre.spectral_bound,
        nu0: ctx.cfg.nu0,
        peak_omega: Some(peak_omega),
        outer_band_worst: outer,
        tail: Some(tail),
        mirrored: !opts.no_mirror,
        timings,
    };
    let curves = sub_ns
        .iter()
        .zip(eval_curves.iter())
        .map(|(&n_sub, c)| {
            let (_, full) = mirror_curve(c);
            let peak = full
                .iter()
                .copied()
                .reduce(|a, b| if worse(a, b) { a } else { b })
                .unwrap();
            ModeCurve {
                n_modes: n_sub,
                peak_alpha: peak,
                alphas: full,
            }
        })
        .collect();
    Ok((report, curves))
}

/// Run the verification sweep for one system and configuration.
pub fn frequency_sweep(
    sys: &LinearDelaySystem,
    cfg: &SchemeConfig,
    opts: &SweepOptions<'_>,
) -> Result<FrequencySweepReport> {
    let ctx = SchemeContext::new(sys.clone(), cfg.clone())?;
    let sub_ns = [cfg.n_modes];
    Ok(sweep_with_curves(&ctx, opts, &sub_ns)?.0)
}

// ---------------------------------------------------------------------------
// Convergence study
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct ConvergenceRun {
    pub t_end: f64,
    pub report: FrequencySweepReport,
    pub curves: Vec<ModeCurve>,
}

/// Sup-norm gap between two mode cutoffs at one horizon.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct ModePair {
    pub t_end: f64,
    pub n_small: usize,
    pub n_large: usize,
    pub sup_diff: f64,
}

/// Sup-norm gap between two horizons at the largest mode cutoff.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct HorizonPair {
    pub n_modes: usize,
    pub t_small: f64,
    pub t_large: f64,
    pub sup_diff: f64,
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct ConvergenceReport {
    pub runs: Vec<ConvergenceRun>,
    pub mode_pairs: Vec<ModePair>,
    pub horizon_pairs: Vec<HorizonPair>,
    /// True when every final consecutive gap (mode gaps at each horizon, and
    /// the last horizon gap) is below `1e-2`.
    pub stabilized: bool,
}

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Rerun the sweep over a grid of mode cutoffs and horizons and tabulate the
/// successive differences of the alpha curves.
///
/// One heavy pass per horizon: all mode cutoffs come from sub-blocks of the
/// largest truncation's matrices.
pub fn convergence_report(
    sys: &LinearDelaySystem,
    cfg: &SchemeConfig,
    mode_cutoffs: &[usize],
    horizons: &[f64],
    opts: &SweepOptions<'_>,
) -> Result<ConvergenceReport> {
    if mode_cutoffs.is_empty() || horizons.is_empty() {
        return Err(Error::Config(
            "convergence study needs at least one mode cutoff and one horizon".into(),
        ));
    }
    if mode_cutoffs.windows(2).any(|w| w[0] >= w[1]) || horizons.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config(
            "mode cutoffs and horizons must be strictly ascending".into(),
        ));
    }
    let n_max = *mode_cutoffs.last().unwrap();
    let mut runs: Vec<ConvergenceRun> = Vec::with_capacity(horizons.len());
    for &t in horizons {
        let mut cfg_t = cfg.clone();
        cfg_t.n_modes = n_max;
        cfg_t.t_end = t;
        let ctx = SchemeContext::new(sys.clone(), cfg_t)?;
        let (report, curves) = sweep_with_curves(&ctx, opts, mode_cutoffs)?;
        if report.verdict == Verdict::PreconditionFailed {
            return Err(Error::Numeric(
                "convergence study: spectral precondition failed".into(),
            ));
        }
        runs.push(ConvergenceRun {
            t_end: t,
            report,
            curves,
        });
    }

    let mut mode_pairs = Vec::new();
    for run in &runs {
        for w in run.curves.windows(2) {
            mode_pairs.push(ModePair {
                t_end: run.t_end,
                n_small: w[0].n_modes,
                n_large: w[1].n_modes,
                sup_diff: sup_diff(&w[0].alphas, &w[1].alphas),
            });
        }
    }
    let mut horizon_pairs = Vec::new();
    for w in runs.windows(2) {
        horizon_pairs.push(HorizonPair {
            n_modes: n_max,
            t_small: w[0].t_end,
            t_large: w[1].t_end,
            sup_diff: sup_diff(
                &w[0].curves.last().unwrap().alphas,
                &w[1].curves.last().unwrap().alphas,
            ),
        });
    }
    let last_mode_ok = runs.iter().all(|run| {
        run.curves.len() < 2
            || mode_pairs
                .iter()
                .rfind(|p| p.t_end == run.t_end)
                .map_or(true, |p| p.sup_diff < 1e-2)
    });
    let horizon_ok = horizon_pairs.last().map_or(true, |p| p.sup_diff < 1e-2);
    Ok(ConvergenceReport {
        runs,
        mode_pairs,
        horizon_pairs,
        stabilized: last_mode_ok && horizon_ok,
    })
}

// ---------------------------------------------------------------------------
// Region scan
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ScanOutcome {
    Satisfied { margin: f64 },
    Violated { margin: f64 },
    PreconditionFailed,
    /// The parameter point itself is inadmissible (e.g. outside the
    /// dissipativity region); nothing was computed.
    Skipped { reason: String },
    /// The sweep was attempted but a numerical procedure failed.
    Failed { error: String },
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct ScanRow {
    pub label: String,
    pub outcome: ScanOutcome,
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct ScanReport {
    pub rows: Vec<ScanRow>,
}

/// Sweep every admissible point of a parameter family, recording one row per
/// point; inadmissible points and failed runs are recorded and skipped, never
/// fatal to the scan.
pub fn region_scan(
    points: Vec<(String, Result<LinearDelaySystem>)>,
    cfg: &SchemeConfig,
    opts: &SweepOptions<'_>,
) -> ScanReport {
    let rows = points
        .into_iter()
        .map(|(label, built)| {
            let outcome = match built {
                Err(e) => ScanOutcome::Skipped {
                    reason: e.to_string(),
                },
                Ok(sys) => match frequency_sweep(&sys, cfg, opts) {
                    Err(e) => ScanOutcome::Failed {
                        error: e.to_string(),
                    },
                    Ok(rep) => match rep.verdict {
                        Verdict::Satisfied => ScanOutcome::Satisfied {
                            margin: rep.margin.unwrap(),
                        },
                        Verdict::Violated => ScanOutcome::Violated {
                            margin: rep.margin.unwrap(),
                        },
                        Verdict::PreconditionFailed => ScanOutcome::PreconditionFailed,
                    },
                },
            };
            ScanRow { label, outcome }
        })
        .collect();
    ScanReport { rows }
}
