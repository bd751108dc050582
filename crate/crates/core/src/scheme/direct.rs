//! Reference evaluation of the transfer matrix in the defining order: for
//! every control tuple, a time integral per measurement-angle point, then the
//! angle inner products against the antisymmetrized modes.
//!
//! Cost grows like (angle points)^(m-1) x (time nodes) per matrix, so this
//! route exists for semantics — oracle tests, cross-checking the fast route,
//! and experimental high orders — not for production sweeps.

use num_complex::Complex64;

use crate::error::Result;
use crate::linalg::ComplexMatrix;
use crate::quad::range_weights;

use super::{det_small, tuples_for, SchemeContext, SolutionSet};

/// Exact-phase samples of mode `l` on the strided angle grid
/// `theta_i = (i * stride - n_tau) h`, `i = 0..=n_tau/stride`.
///
/// The phase is reduced with integer arithmetic (`mu_l theta_i` is a rational
/// multiple of 2 pi on this grid), and negative modes are conjugates of the
/// positive ones bit for bit.
fn mode_angle_samples(ctx: &SchemeContext, l: i32) -> Vec<Complex64> {
    let n_tau = ctx.grid.delay_steps();
    let stride = ctx.cfg.theta_stride as i64;
    let n_sub = (n_tau / stride) as usize;
    let amp = 1.0 / ctx.sys.tau.sqrt();
    if l < 0 {
        return mode_angle_samples(ctx, -l)
            .into_iter()
            .map(|z| z.conj())
            .collect();
    }
    (0..=n_sub as i64)
        .map(|i| {
            let node = i * stride - n_tau;
            let r = (l as i64 * node).rem_euclid(n_tau);
            let angle = 2.0 * std::f64::consts::PI * r as f64 / n_tau as f64;
            Complex64::from_polar(amp, angle)
        })
        .collect()
}

/// Decompose a flat angle-point id into per-axis sample indices (row-major,
/// last axis fastest).
fn point_digits(mut id: usize, axes: usize, base: usize, out: &mut [usize]) {
    for d in (0..axes).rev() {
        out[d] = id % base;
        id /= base;
    }
}

/// Measurement-kernel samples for one control tuple: at each angle point the
/// weighted time integral of `exp(-p t)` times the antisymmetrized product of
/// the control modes and the fundamental solution, evaluated at the shifted
/// times `(t - tau0, t + theta_2, ..., t + theta_m)`.
pub(super) fn kernel_samples(
    ctx: &SchemeContext,
    tables: &SolutionSet,
    p: Complex64,
    control: &[i32],
    n_end: i64,
) -> Result<Vec<Complex64>> {
    let m = ctx.cfg.m;
    let n_tau = ctx.grid.delay_steps();
    let stride = ctx.cfg.theta_stride as i64;
    let n_sub = (n_tau / stride) as usize;
    let axes = m - 1;
    let n_points = (n_sub + 1).pow(axes as u32);
    let h = ctx.grid.h();
    let fact: f64 = (1..=m as u64).product::<u64>() as f64;

    let exp_t: Vec<Complex64> = (0..=n_end)
        .map(|j| {
            let t = ctx.grid.t(j);
            Complex64::from_polar((-p.re * t).exp(), -p.im * t)
        })
        .collect();

    let fund = tables.fundamental();
    let rows: Vec<&crate::dde::SolutionTable> = control.iter().map(|&k| tables.basis(k)).collect();

    let mut digits = vec![0usize; axes];
    let mut offsets = vec![0i64; m];
    let mut detbuf = vec![Complex64::new(0.0, 0.0); m * m];
    let mut out = Vec::with_capacity(n_points);

    for point in 0..n_points {
        point_digits(point, axes, n_sub + 1, &mut digits);
        offsets[0] = -ctx.tau0_steps;
        for (a, &d) in digits.iter().enumerate() {
            offsets[a + 1] = d as i64 * stride - n_tau;
        }

        // Time nodes where some factor crosses a delay multiple; each is a
        // one-sided boundary for the composite rule.
        let mut splits: Vec<i64> = Vec::new();
        for &o in &offsets {
            let mut c = (o.div_euclid(n_tau)) * n_tau;
            while c - o <= 0 {
                c += n_tau;
            }
            while c - o < n_end {
                splits.push(c - o);
                c += n_tau;
            }
        }
        splits.sort_unstable();
        splits.dedup();

        let mut acc = Complex64::new(0.0, 0.0);
        let mut a = 0i64;
        for &b in splits.iter().chain(std::iter::once(&n_end)) {
            let w = range_weights((b - a) as usize);
            for (i, t) in (a..=b).enumerate() {
                for (r, tab) in rows.iter().enumerate() {
                    for (c0, &o) in offsets.iter().enumerate() {
                        detbuf[r * m + c0] = tab.value(t + o);
                    }
                }
                for (c0, &o) in offsets.iter().enumerate() {
                    let u = t + o;
                    // The fundamental solution jumps at 0; a subrange ending
                    // exactly on the jump reads the left (vanishing) branch.
                    detbuf[(m - 1) * m + c0] = if u == 0 && t == b && b != a {
                        Complex64::new(0.0, 0.0)
                    } else {
                        fund.value_or_zero(u)
                    };
                }
                let det = det_small(&mut detbuf, m);
                acc += w[i] * exp_t[t as usize] * det;
            }
            a = b;
        }
        out.push(acc * h / fact);
    }
    Ok(out)
}

/// Full transfer matrix by the direct route.
pub(super) fn direct_matrix(
    ctx: &SchemeContext,
    tables: &SolutionSet,
    p: Complex64,
    n_end: i64,
) -> Result<ComplexMatrix> {
    let m = ctx.cfg.m;
    let n = ctx.cfg.n_modes as i32;
    let n_tau = ctx.grid.delay_steps();
    let stride = ctx.cfg.theta_stride as i64;
    let n_sub = (n_tau / stride) as usize;
    let axes = m - 1;
    let h_theta = stride as f64 * ctx.grid.h();

    let tuples = tuples_for(ctx);
    let dim = tuples.len();
    let modes: Vec<Vec<Complex64>> = (-n..=n).map(|l| mode_angle_samples(ctx, l)).collect();
    let w_axis = range_weights(n_sub);
    let mode_norm =
        1.0 / (m as f64).sqrt() / ((1..m.max(1) as u64).product::<u64>() as f64).sqrt();

    let mut w = ComplexMatrix::zeros(dim, dim);
    let mut digits = vec![0usize; axes];
    let mut udet = vec![Complex64::new(0.0, 0.0); axes * axes];
    for (jcol, ktuple) in tuples.iter().enumerate() {
        let kernel = kernel_samples(ctx, tables, p, ktuple, n_end)?;
        for (irow, ltuple) in tuples.iter().enumerate() {
            let mut c = Complex64::new(0.0, 0.0);
            for (point, &kv) in kernel.iter().enumerate() {
                point_digits(point, axes, n_sub + 1, &mut digits);
                let mut wprod = 1.0;
                for &d in digits.iter() {
                    wprod *= w_axis[d];
                }
                if wprod == 0.0 {
                    continue;
                }
                for (r, &l) in ltuple.iter().enumerate() {
                    let samples = &modes[(l + n) as usize];
                    for (cc, &d) in digits.iter().enumerate() {
                        udet[r * axes + cc] = samples[d];
                    }
                }
                let u = mode_norm * det_small(&mut udet, axes);
                c += wprod * kv * u.conj();
            }
            w.set(irow, jcol, m as f64 * c * h_theta.powi(axes as i32));
        }
    }
    Ok(w)
}
