//! Subcommand implementations.

use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};

use compound_freq_core::models::{
    delayed_oscillator_radius, delayed_oscillator_system, feedback_model_system,
    DelayedOscillatorParams, FeedbackModelParams,
};
use compound_freq_core::spectrum::{characteristic_value, compound_spectral_bound, default_search_box, leading_roots};
use compound_freq_core::sweep::Progress;
use compound_freq_core::{
    check_precondition, convergence_report, frequency_sweep, region_scan, Error,
    LinearDelaySystem, Result, SweepOptions, Verdict,
};

use crate::config::{self, ModelKind, Resolved, RunConfig};
use crate::{artifacts, Command, ConvergenceArgs, DemoArgs, OutputArgs, RootsArgs, ScanArgs, SweepArgs};

pub fn dispatch(cmd: Command) -> Result<ExitCode> {
    match cmd {
        Command::Roots(a) => roots(a),
        Command::Sweep(a) => sweep_like(a, false),
        Command::Verify(a) => sweep_like(a, true),
        Command::Scan(a) => scan(a),
        Command::Convergence(a) => convergence(a),
        Command::DemoSs(a) => demo_ss(a),
        Command::DemoMg(a) => demo_mg(a),
    }
}

fn verdict_code(v: Verdict) -> u8 {
    match v {
        Verdict::Satisfied => 0,
        Verdict::Violated => 1,
        Verdict::PreconditionFailed => 2,
    }
}

/// Stage reporter for `--progress`: prints roughly every tenth of a stage,
/// deduplicating repeats (parallel stages report every completion).
fn progress_printer() -> impl Fn(&'static str, usize, usize) + Sync {
    let last = AtomicUsize::new(usize::MAX);
    move |stage: &'static str, done: usize, total: usize| {
        let step = (total / 10).max(1);
        if done == total || done % step == 0 {
            let key = (stage.as_ptr() as usize) ^ done.wrapping_mul(0x9e37_79b9);
            if last.swap(key, Ordering::Relaxed) != key {
                eprintln!("  [{stage}] {done}/{total}");
            }
        }
    }
}

/// Run one resolved sweep, print it, write artifacts, return the exit code.
fn execute(r: &Resolved, out: &OutputArgs, narrative: bool, subdir: Option<&str>) -> Result<u8> {
    let printer = progress_printer();
    let pref: Progress = &printer;
    let opts = SweepOptions {
        no_mirror: r.echo.no_mirror.unwrap_or(false),
        progress: out.progress.then_some(pref),
    };
    let report = frequency_sweep(&r.sys, &r.cfg, &opts)?;
    if narrative {
        artifacts::print_certificate(r, &report);
    } else {
        artifacts::print_summary(r, &report);
    }
    if let Some(dir) = &out.out_dir {
        let dir = match subdir {
            Some(s) => dir.join(s),
            None => dir.clone(),
        };
        artifacts::write_sweep(&dir, r, &report, out.dump_solutions)?;
        println!("wrote {}", dir.display());
    }
    Ok(verdict_code(report.verdict))
}

fn sweep_like(a: SweepArgs, narrative: bool) -> Result<ExitCode> {
    let file = a.config.as_deref().map(RunConfig::load).transpose()?;
    let r = config::resolve(config::merge(&a.model, &a.scheme, file))?;
    let code = execute(&r, &a.output, narrative, None)?;
    Ok(ExitCode::from(code))
}

fn roots(a: RootsArgs) -> Result<ExitCode> {
    let file = a.config.as_deref().map(RunConfig::load).transpose()?;
    let r = config::resolve(config::merge_model(&a.model, file.unwrap_or_default()))?;
    let spectrum = leading_roots(&r.sys, a.count, &default_search_box(&r.sys))?;
    let bound = compound_spectral_bound(&spectrum, a.m)?;
    let pre = check_precondition(&r.sys, a.m, a.nu0)?;
    let roots: Vec<_> = spectrum
        .roots
        .iter()
        .map(|p| {
            serde_json::json!({
                "re": p.re,
                "im": p.im,
                "residual": characteristic_value(&r.sys, *p).norm(),
            })
        })
        .collect();
    let doc = serde_json::json!({
        "model": r.echo.model.unwrap().name(),
        "system": r.sys,
        "roots": roots,
        "verified_count": spectrum.verified_count,
        "entire_spectrum_known": spectrum.entire_spectrum_known,
        "m": a.m,
        "spectral_bound": bound,
        "precondition": pre,
    });
    println!(
        "{}",
        serde_json::to_string_pretty(&doc).expect("root reports always serialize")
    );
    Ok(ExitCode::SUCCESS)
}

fn scan(a: ScanArgs) -> Result<ExitCode> {
    let file = a.config.as_deref().map(RunConfig::load).transpose()?;
    let merged = config::merge(&a.model, &a.scheme, file);
    let model = merged.model.ok_or_else(|| {
        Error::Config("no model selected: pass --model or set `model` in the config file".into())
    })?;
    let cfg = config::resolve_scheme(&merged);

    let mut points: Vec<(String, Result<LinearDelaySystem>)> = Vec::new();
    match model {
        ModelKind::SuarezSchopf => {
            let alphas = non_empty_or(&a.alphas, merged.alpha.unwrap_or(0.6));
            let taus = non_empty_or(&a.taus, merged.tau.unwrap_or(0.83));
            for &alpha in &alphas {
                for &tau in &taus {
                    let sys = match merged.radius {
                        Some(r) => Ok(r),
                        None => delayed_oscillator_radius(alpha, tau),
                    }
                    .and_then(|radius| {
                        delayed_oscillator_system(&DelayedOscillatorParams { alpha, tau, radius })
                    });
                    points.push((format!("alpha={alpha} tau={tau}"), sys));
                }
            }
        }
        ModelKind::MackeyGlass => {
            if !a.alphas.is_empty() {
                return Err(Error::Config(
                    "--alphas applies to the delayed oscillator only".into(),
                ));
            }
            let taus = non_empty_or(&a.taus, merged.tau.unwrap_or(4.5));
            for &tau in &taus {
                let p = FeedbackModelParams {
                    gamma: merged.gamma.unwrap_or(0.1),
                    beta: merged.beta.unwrap_or(0.2),
                    kappa: merged.kappa.unwrap_or(10.0),
                    tau,
                };
                points.push((format!("tau={tau}"), feedback_model_system(&p)));
            }
        }
    }

    let printer = progress_printer();
    let pref: Progress = &printer;
    let opts = SweepOptions {
        no_mirror: merged.no_mirror.unwrap_or(false),
        progress: a.output.progress.then_some(pref),
    };
    let report = region_scan(points, &cfg, &opts);
    artifacts::print_scan(&report);
    if let Some(dir) = &a.output.out_dir {
        artifacts::write_scan(dir, &report)?;
        println!("wrote {}", dir.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn non_empty_or(list: &[f64], fallback: f64) -> Vec<f64> {
    if list.is_empty() {
        vec![fallback]
    } else {
        list.to_vec()
    }
}

fn convergence(a: ConvergenceArgs) -> Result<ExitCode> {
    let file = a.config.as_deref().map(RunConfig::load).transpose()?;
    let r = config::resolve(config::merge(&a.model, &a.scheme, file))?;
    let printer = progress_printer();
    let pref: Progress = &printer;
    let opts = SweepOptions {
        no_mirror: r.echo.no_mirror.unwrap_or(false),
        progress: a.output.progress.then_some(pref),
    };
    let report = convergence_report(&r.sys, &r.cfg, &a.mode_cutoffs, &a.horizons, &opts)?;
    artifacts::print_convergence(&report);
    if let Some(dir) = &a.output.out_dir {
        artifacts::write_convergence(dir, &r, &report)?;
        println!("wrote {}", dir.display());
    }
    let last = report.runs.last().expect("at least one horizon");
    Ok(ExitCode::from(verdict_code(last.report.verdict)))
}

// ---------------------------------------------------------------------------
// Case-study presets
// ---------------------------------------------------------------------------

fn demo_ss(a: DemoArgs) -> Result<ExitCode> {
    eprintln!("delayed-oscillator case study: full sweep at the published operating point");
    eprintln!("(several minutes single-threaded at the default step; --step-hint 2e-3 roughly halves that)");
    let preset = RunConfig {
        model: Some(ModelKind::SuarezSchopf),
        alpha: Some(0.6),
        tau: Some(0.83),
        ..Default::default()
    };
    let r = config::resolve(config::merge_scheme(preset, &a.scheme))?;
    let code = execute(&r, &a.output, true, None)?;
    Ok(ExitCode::from(code))
}

fn demo_mg(a: DemoArgs) -> Result<ExitCode> {
    eprintln!("feedback-model case study: full sweeps at both published delays");
    eprintln!("(several minutes per delay single-threaded at the default step)");
    let mut worst = 0u8;
    for tau in [4.5_f64, 4.6] {
        let preset = RunConfig {
            model: Some(ModelKind::MackeyGlass),
            gamma: Some(0.1),
            beta: Some(0.2),
            kappa: Some(10.0),
            tau: Some(tau),
            ..Default::default()
        };
        let r = config::resolve(config::merge_scheme(preset, &a.scheme))?;
        println!("--- delay tau = {tau} ---");
        let sub = format!("tau-{tau}");
        worst = worst.max(execute(&r, &a.output, true, Some(&sub))?);
    }
    Ok(ExitCode::from(worst))
}
