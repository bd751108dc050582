//! End-to-end tests of the binary: exit codes, artifact layout, and the
//! config-echo reproduction contract.
//!
//! Everything here runs deliberately tiny discretizations; the point is the
//! command surface, not numerical accuracy.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_compound-freq"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

/// A sweep that finishes in well under a second even unoptimized.
const TINY: &[&str] = &[
    "--model",
    "suarez-schopf",
    "--N",
    "3",
    "--T",
    "3",
    "--Omega",
    "3",
    "--omega-step",
    "0.5",
    "--step-hint",
    "0.01",
];

fn tiny_sweep(extra: &[&str]) -> Output {
    let mut args = vec!["sweep"];
    args.extend_from_slice(TINY);
    args.extend_from_slice(extra);
    run(&args)
}

#[test]
fn satisfied_sweep_exits_zero_and_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = tiny_sweep(&["--out-dir", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    assert!(stdout(&out).contains("verdict: satisfied"));

    let csv = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("omega,alpha,threshold"));
    // 13 grid frequencies in [-3, 3] at step 0.5
    assert_eq!(lines.count(), 13);

    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap())
            .unwrap();
    assert_eq!(report["config"]["model"], "suarez-schopf");
    assert_eq!(report["report"]["verdict"], "satisfied");
    assert_eq!(report["report"]["alphas"].as_array().unwrap().len(), 13);
}

#[test]
fn echoed_config_reproduces_the_run_bit_for_bit() {
    let dir1 = tempfile::tempdir().unwrap();
    let dir2 = tempfile::tempdir().unwrap();
    assert_eq!(
        tiny_sweep(&["--out-dir", dir1.path().to_str().unwrap()])
            .status
            .code(),
        Some(0)
    );
    let cfg = dir1.path().join("config.toml");
    let out = run(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--out-dir",
        dir2.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");

    let read = |d: &Path, f: &str| std::fs::read(d.join(f)).unwrap();
    assert_eq!(
        read(dir1.path(), "sweep.csv"),
        read(dir2.path(), "sweep.csv")
    );
    assert_eq!(
        read(dir1.path(), "config.toml"),
        read(dir2.path(), "config.toml")
    );
    // reports agree exactly once the wall-clock timings are masked out
    let masked = |d: &Path| -> serde_json::Value {
        let mut v: serde_json::Value =
            serde_json::from_slice(&read(d, "report.json")).unwrap();
        v["report"]["timings"] = serde_json::Value::Null;
        v
    };
    assert_eq!(masked(dir1.path()), masked(dir2.path()));
}

#[test]
fn flags_win_over_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        tiny_sweep(&["--out-dir", dir.path().to_str().unwrap()])
            .status
            .code(),
        Some(0)
    );
    // same config, but a huge perturbation bound forced on the command line
    let out = run(&[
        "sweep",
        "--config",
        dir.path().join("config.toml").to_str().unwrap(),
        "--lambda",
        "1000",
    ]);
    assert_eq!(out.status.code(), Some(1), "{out:?}");
    assert!(stdout(&out).contains("VIOLATED"));
}

#[test]
fn violated_inequality_exits_one() {
    let out = tiny_sweep(&["--lambda", "1000"]);
    assert_eq!(out.status.code(), Some(1), "{out:?}");
}

#[test]
fn failed_precondition_exits_two() {
    let out = tiny_sweep(&["--nu0", "5"]);
    assert_eq!(out.status.code(), Some(2), "{out:?}");
    assert!(stdout(&out).contains("nothing swept"));
}

#[test]
fn usage_errors_exit_three() {
    assert_eq!(run(&["sweep", "--model", "bogus"]).status.code(), Some(3));
    assert_eq!(run(&["--no-such-flag"]).status.code(), Some(3));
    // unknown keys in a config file are a configuration error, not a panic
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "modes = 3\n").unwrap();
    let out = run(&["sweep", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3), "{out:?}");
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["--version"]).status.code(), Some(0));
}

#[test]
fn roots_emits_json_with_located_roots_and_bound() {
    let out = run(&["roots", "--model", "mackey-glass", "--tau", "4.5", "--count", "2"]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["m"], 2);
    assert_eq!(doc["precondition"]["ok"], true);
    // the rightmost pair of the published operating point
    let pair: Vec<(f64, f64)> = doc["roots"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| (r["re"].as_f64().unwrap(), r["im"].as_f64().unwrap()))
        .collect();
    assert!(
        pair.iter()
            .any(|&(re, im)| (re + 0.99).abs() < 0.01 && (im - 1.12).abs() < 0.01),
        "{pair:?}"
    );
    assert!(
        pair.iter()
            .any(|&(re, im)| (re + 0.99).abs() < 0.01 && (im + 1.12).abs() < 0.01),
        "{pair:?}"
    );
}

#[test]
fn scan_isolates_inadmissible_points() {
    let mut args = vec!["scan"];
    args.extend_from_slice(TINY);
    // 2 alpha tau < 1 fails at tau = 5, so that column is skipped, not fatal
    args.extend_from_slice(&["--alphas", "0.6", "--taus", "0.83,5.0"]);
    let out = run(&args);
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let text = stdout(&out);
    assert!(text.contains("satisfied"));
    assert!(text.contains("skipped"));
}

#[test]
fn convergence_tabulates_gaps_and_exits_by_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["convergence"];
    args.extend_from_slice(TINY);
    args.extend_from_slice(&[
        "--mode-cutoffs",
        "2,3",
        "--horizons",
        "2,3",
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    let out = run(&args);
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    assert!(stdout(&out).contains("sup|diff|"));
    assert!(dir.path().join("convergence.json").exists());
}

#[test]
fn dump_solutions_writes_the_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = tiny_sweep(&["--out-dir", dir.path().to_str().unwrap(), "--dump-solutions"]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let solutions = dir.path().join("solutions");
    assert!(solutions.join("fundamental.csv").exists());
    // modes -3..=3 for N = 3
    assert!(solutions.join("basis_+3.csv").exists());
    assert!(solutions.join("basis_-3.csv").exists());
}

#[test]
fn thread_cap_from_the_environment_is_accepted() {
    let mut args = vec!["sweep"];
    args.extend_from_slice(TINY);
    let out = bin()
        .args(&args)
        .env("COMPOUND_FREQ_THREADS", "1")
        .output()
        .expect("binary runs");
    assert_eq!(out.status.code(), Some(0), "{out:?}");
}
