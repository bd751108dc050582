//! What a run leaves behind: the files under `--out-dir` and the console
//! summaries.
//!
//! `sweep.csv` holds one row per swept frequency with full float precision;
//! `report.json` pairs the machine-readable report with the resolved config;
//! `config.toml` is that same config alone, ready to feed back via
//! `--config`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use compound_freq_core::dde::SolutionLabel;
use compound_freq_core::sweep::{ConvergenceReport, FrequencySweepReport, ScanOutcome, ScanReport};
use compound_freq_core::{Error, Result, SchemeContext, SolutionSet, SpectralBound, Verdict};

use crate::config::Resolved;

fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    fs::write(path, contents)
        .map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display())))
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)
        .map_err(|e| Error::Config(format!("cannot create {}: {e}", dir.display())))
}

pub fn fmt_bound(b: &SpectralBound) -> String {
    match b {
        SpectralBound::Finite(v) => format!("{v:.6}"),
        SpectralBound::MinusInfinity => "-inf".into(),
    }
}

fn verdict_word(v: Verdict) -> &'static str {
    match v {
        Verdict::Satisfied => "satisfied",
        Verdict::Violated => "VIOLATED",
        Verdict::PreconditionFailed => "precondition failed",
    }
}

fn path_name(r: &Resolved) -> &'static str {
    match r.cfg.path {
        compound_freq_core::SchemePath::Direct => "direct",
        compound_freq_core::SchemePath::Fast => "fast",
    }
}

// ---------------------------------------------------------------------------
// Files
// ---------------------------------------------------------------------------

pub fn write_sweep(dir: &Path, r: &Resolved, report: &FrequencySweepReport, dump: bool) -> Result<()> {
    create_dir(dir)?;
    let mut csv = String::from("omega,alpha,threshold\n");
    for (w, alpha) in report.omegas.iter().zip(&report.alphas) {
        let _ = writeln!(csv, "{:.14e},{:.14e},{:.14e}", w, alpha, report.threshold);
    }
    write_file(&dir.join("sweep.csv"), csv.as_bytes())?;
    let doc = serde_json::json!({ "config": r.echo, "report": report });
    let json = serde_json::to_string_pretty(&doc).expect("reports always serialize");
    write_file(&dir.join("report.json"), format!("{json}\n").as_bytes())?;
    let toml_text = toml::to_string_pretty(&r.echo).expect("echoes always serialize");
    write_file(&dir.join("config.toml"), toml_text.as_bytes())?;
    if dump {
        dump_solutions(&dir.join("solutions"), r)?;
    }
    Ok(())
}

fn dump_solutions(dir: &Path, r: &Resolved) -> Result<()> {
    create_dir(dir)?;
    let ctx = SchemeContext::new(r.sys.clone(), r.cfg.clone())?;
    let tables = SolutionSet::build(&ctx)?;
    for table in tables.iter() {
        let name = match table.label() {
            SolutionLabel::Fundamental => "fundamental.csv".to_string(),
            SolutionLabel::Basis(k) => format!("basis_{k:+}.csv"),
        };
        let mut buf = Vec::new();
        table
            .write_csv(&mut buf)
            .map_err(|e| Error::Config(format!("cannot render {name}: {e}")))?;
        write_file(&dir.join(name), &buf)?;
    }
    Ok(())
}

pub fn write_scan(dir: &Path, report: &ScanReport) -> Result<()> {
    create_dir(dir)?;
    let json = serde_json::to_string_pretty(report).expect("reports always serialize");
    write_file(&dir.join("scan.json"), format!("{json}\n").as_bytes())
}

pub fn write_convergence(dir: &Path, r: &Resolved, report: &ConvergenceReport) -> Result<()> {
    create_dir(dir)?;
    let doc = serde_json::json!({ "config": r.echo, "report": report });
    let json = serde_json::to_string_pretty(&doc).expect("reports always serialize");
    write_file(&dir.join("convergence.json"), format!("{json}\n").as_bytes())
}

// ---------------------------------------------------------------------------
// Console output
// ---------------------------------------------------------------------------

pub fn print_summary(r: &Resolved, rep: &FrequencySweepReport) {
    let e = &r.echo;
    println!(
        "model {}  m={}  route {}  N={}  T={}  nu0={}",
        e.model.unwrap().name(),
        r.cfg.m,
        path_name(r),
        r.cfg.n_modes,
        r.cfg.t_end,
        r.cfg.nu0,
    );
    if rep.verdict == Verdict::PreconditionFailed {
        println!(
            "spectral bound {} does not clear -nu0 = {}; nothing swept",
            fmt_bound(&rep.spectral_bound),
            -rep.nu0,
        );
        println!("verdict: {}", verdict_word(rep.verdict));
        return;
    }
    println!(
        "swept {} frequencies in [{}, {}]{}",
        rep.omegas.len(),
        -r.cfg.omega_max,
        r.cfg.omega_max,
        if rep.mirrored { " (negative half mirrored)" } else { "" },
    );
    println!(
        "peak alpha {:.14} at omega {}  threshold {:.14}",
        peak(rep),
        rep.peak_omega.unwrap_or(f64::NAN),
        rep.threshold,
    );
    let margin = rep.margin.unwrap_or(f64::NAN);
    println!(
        "verdict: {}  (margin {:.6}, {:.1}% of threshold){}",
        verdict_word(rep.verdict),
        margin,
        100.0 * margin / rep.threshold,
        if rep.near_threshold { "  [near threshold]" } else { "" },
    );
}

fn peak(rep: &FrequencySweepReport) -> f64 {
    rep.alphas.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

pub fn print_certificate(r: &Resolved, rep: &FrequencySweepReport) {
    let s = &r.sys;
    println!("system: x'(t) = a0 x(t) + a1 x(t - tau) + perturbation");
    println!(
        "  a0 = {}, a1 = {}, tau = {}, measurement delay tau0 = {}, gain b = {}",
        s.a0, s.a1, s.tau, s.tau0, s.b_tilde
    );
    let constraint = match s.constraint {
        compound_freq_core::ConstraintKind::NormBound => "norm-bound",
        compound_freq_core::ConstraintKind::MonotoneSector => "monotone-sector",
    };
    println!(
        "  perturbation bound Lambda = {}, constraint {constraint}, threshold 1/Lambda = {:.14}",
        s.lambda_bound, rep.threshold
    );
    println!("spectral precondition (m = {}):", r.cfg.m);
    println!(
        "  compound bound {} vs -nu0 = {} -> {}",
        fmt_bound(&rep.spectral_bound),
        -rep.nu0,
        if rep.verdict == Verdict::PreconditionFailed { "FAILED" } else { "ok" },
    );
    if rep.verdict == Verdict::PreconditionFailed {
        println!("verdict: {} -- nothing swept", verdict_word(rep.verdict));
        return;
    }
    println!("frequency sweep ({} route):", path_name(r));
    println!(
        "  {} frequencies in [{}, {}], step {}{}",
        rep.omegas.len(),
        -r.cfg.omega_max,
        r.cfg.omega_max,
        r.cfg.omega_step,
        if rep.mirrored { " (negative half mirrored)" } else { "" },
    );
    println!(
        "  peak alpha = {:.14} at omega = {}",
        peak(rep),
        rep.peak_omega.unwrap_or(f64::NAN),
    );
    if let Some(worst) = rep.outer_band_worst {
        println!("  outer half-band worst = {worst:.14}");
    }
    if let Some(tail) = &rep.tail {
        print!(
            "  horizon tail at the peak: gap {:.2e} (T/2 vs T/4) -> {:.2e} (T vs T/2)",
            tail.gap_quarter, tail.gap_half,
        );
        match tail.decay_rate {
            Some(rate) => println!(", decay rate {rate:.2}/unit"),
            None => println!(),
        }
    }
    let margin = rep.margin.unwrap_or(f64::NAN);
    println!(
        "verdict: {} -- margin {:.6} ({:.1}% of threshold)",
        verdict_word(rep.verdict),
        margin,
        100.0 * margin / rep.threshold,
    );
    if rep.near_threshold {
        println!("note: the peak is within 5% of the threshold; treat this verdict as borderline");
    }
    for (stage, secs) in &rep.timings {
        println!("  [timing] {stage}: {secs:.2}s");
    }
}

pub fn print_scan(rep: &ScanReport) {
    let mut satisfied = 0usize;
    let mut violated = 0usize;
    let mut other = 0usize;
    for row in &rep.rows {
        let cell = match &row.outcome {
            ScanOutcome::Satisfied { margin } => {
                satisfied += 1;
                format!("satisfied            margin {margin:+.6}")
            }
            ScanOutcome::Violated { margin } => {
                violated += 1;
                format!("VIOLATED             margin {margin:+.6}")
            }
            ScanOutcome::PreconditionFailed => {
                other += 1;
                "precondition failed".to_string()
            }
            ScanOutcome::Skipped { reason } => {
                other += 1;
                format!("skipped: {reason}")
            }
            ScanOutcome::Failed { error } => {
                other += 1;
                format!("FAILED: {error}")
            }
        };
        println!("{:<32} {cell}", row.label);
    }
    println!(
        "{} points: {satisfied} satisfied, {violated} violated, {other} other",
        rep.rows.len()
    );
}

pub fn print_convergence(rep: &ConvergenceReport) {
    for run in &rep.runs {
        println!(
            "horizon T = {:>6}: verdict {:<20} peak alpha {:.14}",
            run.t_end,
            verdict_word(run.report.verdict),
            peak(&run.report),
        );
    }
    if !rep.mode_pairs.is_empty() {
        println!("mode-cutoff gaps (sup over the frequency grid):");
        for p in &rep.mode_pairs {
            println!(
                "  T = {:>6}  N {:>3} -> {:<3}  sup|diff| = {:.3e}",
                p.t_end, p.n_small, p.n_large, p.sup_diff
            );
        }
    }
    if !rep.horizon_pairs.is_empty() {
        println!("horizon gaps (at the largest cutoff):");
        for p in &rep.horizon_pairs {
            println!(
                "  N = {:>3}  T {:>6} -> {:<6}  sup|diff| = {:.3e}",
                p.n_modes, p.t_small, p.t_large, p.sup_diff
            );
        }
    }
    println!("stabilized: {}", if rep.stabilized { "yes" } else { "no" });
}
