//! Structural and randomized properties that should hold at any scale.

mod support;

use proptest::prelude::*;

use compound_freq_core::dde::{ConstraintKind, LinearDelaySystem};
use compound_freq_core::grid::NodeGrid;
use compound_freq_core::multi_index::{ordered_tuples, restriction_positions};
use compound_freq_core::quad::range_weights;
use compound_freq_core::scheme::{wedge_eval, SchemeConfig, SolutionSet, SchemeContext};
use compound_freq_core::sweep::{frequency_sweep, region_scan, SweepOptions, Verdict};
use support::{small_cfg, stable_oscillator};

// ---------------------------------------------------------------------------
// Quadrature and index bookkeeping
// ---------------------------------------------------------------------------

proptest! {
    #![proptest_config(ProptestConfig {
        failure_persistence: None,
        ..ProptestConfig::default()
    })]

    // n = 1 is excluded: a single interval has no Simpson rule and the
    // documented trapezoid fallback is only first-degree exact.
    #[test]
    fn composite_weights_integrate_random_cubics(
        n in 2usize..40,
        c0 in -2.0f64..2.0,
        c1 in -2.0f64..2.0,
        c2 in -2.0f64..2.0,
        c3 in -2.0f64..2.0,
    ) {
        let w = range_weights(n);
        let f = |x: f64| c0 + c1 * x + c2 * x * x + c3 * x * x * x;
        let num: f64 = w.iter().enumerate().map(|(j, &wj)| wj * f(j as f64)).sum();
        let b = n as f64;
        let exact = c0 * b + c1 * b * b / 2.0 + c2 * b * b * b / 3.0 + c3 * b * b * b * b / 4.0;
        prop_assert!((num - exact).abs() <= 1e-11 * (1.0 + exact.abs()));
    }

    #[test]
    fn tuple_enumeration_is_ordered_and_complete(n in 0usize..8, m in 1usize..4) {
        let tuples = ordered_tuples(n, m);
        // Strictly increasing entries, lexicographic order, no duplicates.
        for t in &tuples {
            prop_assert!(t.windows(2).all(|w| w[0] < w[1]));
        }
        for w in tuples.windows(2) {
            prop_assert!(w[0] < w[1]);
        }
        let modes = 2 * n + 1;
        let k = m - 1;
        let expect = if k > modes {
            0
        } else {
            (0..k).fold(1usize, |acc, i| acc * (modes - i) / (i + 1))
        };
        prop_assert_eq!(tuples.len(), expect);
    }

    #[test]
    fn restriction_positions_pick_the_sub_enumeration(n_small in 0usize..5, extra in 1usize..4) {
        let n_big = n_small + extra;
        for m in 1usize..4 {
            let big = ordered_tuples(n_big, m);
            let small = ordered_tuples(n_small, m);
            let pos = restriction_positions(n_big, n_small, m);
            let picked: Vec<_> = pos.iter().map(|&i| big[i].clone()).collect();
            prop_assert_eq!(picked, small);
        }
    }

    #[test]
    fn delay_aligned_grids_hit_the_delay_exactly(
        tau in 0.3f64..5.0,
        factor in 1.5f64..8.0,
        steps in 10u32..200,
    ) {
        let hint = tau / steps as f64;
        let grid = NodeGrid::delay_aligned(tau, factor * tau, hint).unwrap();
        prop_assert_eq!(grid.delay_steps() % 2, 0);
        let back = grid.h() * grid.delay_steps() as f64;
        prop_assert!((back - tau).abs() <= 1e-12 * tau);
        prop_assert!(grid.t_end() >= tau);
    }
}

// ---------------------------------------------------------------------------
// Wedge bracket
// ---------------------------------------------------------------------------

#[test]
fn wedge_is_bitwise_antisymmetric_under_angle_exchange() {
    let sys = stable_oscillator();
    let cfg = small_cfg(2, 2, 3.0, 1e-2);
    let ctx = SchemeContext::new(sys, cfg).unwrap();
    let tables = SolutionSet::build(&ctx).unwrap();
    let pair = [tables.basis(1), tables.fundamental()];
    for (a, b) in [(-0.3, -0.7), (0.0, -0.83), (-0.11, -0.12)] {
        for t in [0.9, 1.7, 2.4] {
            let plus = wedge_eval(&pair, t, &[a, b]).unwrap();
            let minus = wedge_eval(&pair, t, &[b, a]).unwrap();
            assert_eq!(plus, -minus, "t={t}, angles=({a},{b})");
        }
    }
}

#[test]
fn wedge_vanishes_at_coincident_angles() {
    let sys = stable_oscillator();
    let cfg = small_cfg(2, 2, 3.0, 1e-2);
    let ctx = SchemeContext::new(sys, cfg).unwrap();
    let tables = SolutionSet::build(&ctx).unwrap();
    let pair = [tables.basis(2), tables.fundamental()];
    for t in [1.0, 1.9] {
        let v = wedge_eval(&pair, t, &[-0.4, -0.4]).unwrap();
        assert!(v.norm() < 1e-14);
    }
}

// ---------------------------------------------------------------------------
// Sweep-level symmetries and bookkeeping
// ---------------------------------------------------------------------------

fn tiny_cfg() -> SchemeConfig {
    SchemeConfig {
        n_modes: 3,
        t_end: 3.0,
        omega_max: 3.0,
        omega_step: 0.5,
        step_hint: 1e-2,
        ..SchemeConfig::default()
    }
}

#[test]
fn mirrored_and_explicit_sweeps_agree() {
    let sys = stable_oscillator();
    let mirrored = frequency_sweep(&sys, &tiny_cfg(), &SweepOptions::default()).unwrap();
    let explicit = frequency_sweep(
        &sys,
        &tiny_cfg(),
        &SweepOptions {
            no_mirror: true,
            ..SweepOptions::default()
        },
    )
    .unwrap();
    assert_eq!(mirrored.omegas, explicit.omegas);
    assert_eq!(mirrored.verdict, explicit.verdict);
    let gap: f64 = mirrored
        .alphas
        .iter()
        .zip(&explicit.alphas)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(gap <= 1e-12, "mirror symmetry gap {gap:.3e}");
}

#[test]
fn sweep_reports_serialize_and_round_trip() {
    let sys = stable_oscillator();
    let rep = frequency_sweep(&sys, &tiny_cfg(), &SweepOptions::default()).unwrap();
    let json = serde_json::to_string(&rep).unwrap();
    let back: compound_freq_core::FrequencySweepReport = serde_json::from_str(&json).unwrap();
    assert_eq!(back.verdict, rep.verdict);
    assert_eq!(back.omegas, rep.omegas);
    assert_eq!(back.alphas, rep.alphas);
    assert_eq!(back.margin, rep.margin);
}

#[test]
fn progress_callback_reaches_terminal_counts() {
    use std::sync::Mutex;
    let sys = stable_oscillator();
    let seen: Mutex<Vec<(&'static str, usize, usize)>> = Mutex::new(Vec::new());
    let cb = |stage: &'static str, done: usize, total: usize| {
        seen.lock().unwrap().push((stage, done, total));
    };
    let rep = frequency_sweep(
        &sys,
        &tiny_cfg(),
        &SweepOptions {
            progress: Some(&cb),
            ..SweepOptions::default()
        },
    )
    .unwrap();
    assert_eq!(rep.verdict, Verdict::Satisfied);
    let seen = seen.into_inner().unwrap();
    for stage in ["spectrum", "integrate", "control-modes", "alphas"] {
        let last = seen.iter().rfind(|s| s.0 == stage);
        let (_, done, total) = last.unwrap_or_else(|| panic!("no progress for {stage}"));
        assert_eq!(done, total, "{stage} did not complete");
    }
}

#[test]
fn region_scan_isolates_bad_points() {
    let good = stable_oscillator();
    // Strong delayed negative feedback far past its Hopf point: the leading
    // conjugate pair sits in the right half-plane, so the pair sum (the
    // 2-fold compound bound) is positive and the precondition must fail.
    let unstable = LinearDelaySystem::new(
        0.1,
        -2.0,
        1.5,
        0.0,
        1.0,
        1.0,
        ConstraintKind::NormBound,
    )
    .unwrap();
    let points = vec![
        ("good".to_string(), Ok(good)),
        (
            "bad-param".to_string(),
            Err(compound_freq_core::Error::Domain("no such point".into())),
        ),
        ("unstable".to_string(), Ok(unstable)),
    ];
    let scan = region_scan(points, &tiny_cfg(), &SweepOptions::default());
    assert_eq!(scan.rows.len(), 3);
    assert!(matches!(
        scan.rows[0].outcome,
        compound_freq_core::ScanOutcome::Satisfied { .. }
    ));
    assert!(matches!(
        scan.rows[1].outcome,
        compound_freq_core::ScanOutcome::Skipped { .. }
    ));
    assert!(matches!(
        scan.rows[2].outcome,
        compound_freq_core::ScanOutcome::PreconditionFailed
    ));
}

#[test]
fn convergence_report_tabulates_gaps() {
    let sys = stable_oscillator();
    let cfg = tiny_cfg();
    let rep = compound_freq_core::convergence_report(
        &sys,
        &cfg,
        &[1, 2, 3],
        &[3.0, 4.0],
        &SweepOptions::default(),
    )
    .unwrap();
    assert_eq!(rep.runs.len(), 2);
    assert_eq!(rep.mode_pairs.len(), 4);
    assert_eq!(rep.horizon_pairs.len(), 1);
    for run in &rep.runs {
        assert_eq!(run.curves.len(), 3);
        assert_eq!(run.report.verdict, Verdict::Satisfied);
    }
    // Mode truncations nest, so each gap row is a genuine refinement delta.
    for p in &rep.mode_pairs {
        assert!(p.sup_diff.is_finite());
        assert!(p.n_small < p.n_large);
    }
}
