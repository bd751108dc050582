//! Composite quadrature weights on uniform node ranges.
//!
//! Everything is expressed in units of the grid step: the returned weights
//! must be multiplied by `h` when forming the integral. A range of `n`
//! intervals gets composite Simpson when `n` is even and a 3/8 opening panel
//! followed by Simpson when `n` is odd, so every piece is of order four.
//! Ranges of one interval fall back to the trapezoid (only reachable for
//! degenerate split layouts) and empty ranges contribute nothing.
//!
//! Integrands here are piecewise smooth with kinks and jumps at known node
//! indices; the caller is responsible for splitting at those nodes (see
//! [`weights_with_splits`]). Integrating blindly across a jump would degrade
//! the composite rule to first order, which is the one failure mode this
//! module exists to prevent.

/// Weights for a contiguous range of `n` intervals (`n + 1` nodes).
pub fn range_weights(n: usize) -> Vec<f64> {
    let mut w = vec![0.0; n + 1];
    accumulate_range(&mut w, 0, n);
    w
}

/// Weights for the node interval `[a, b]` with interior split nodes.
///
/// `splits` must be strictly increasing and strictly inside `(a, b)`; each
/// subrange gets its own composite rule, and weights at split nodes add up.
/// The returned vector has `b - a + 1` entries, index 0 at node `a`.
pub fn weights_with_splits(a: i64, b: i64, splits: &[i64]) -> Vec<f64> {
    assert!(b >= a);
    debug_assert!(splits.windows(2).all(|p| p[0] < p[1]));
    debug_assert!(splits.iter().all(|&s| s > a && s < b));
    let mut w = vec![0.0; (b - a + 1) as usize];
    let mut lo = a;
    for &s in splits.iter().chain(std::iter::once(&b)) {
        accumulate_range(&mut w, (lo - a) as usize, (s - lo) as usize);
        lo = s;
    }
    w
}

/// Add the weights of one composite rule for `n` intervals starting at
/// `offset` into `w`.
fn accumulate_range(w: &mut [f64], offset: usize, n: usize) {
    match n {
        0 => {}
        1 => {
            w[offset] += 0.5;
            w[offset + 1] += 0.5;
        }
        n if n % 2 == 0 => simpson(w, offset, n),
        _ => {
            // 3/8 opening panel, then an even Simpson remainder.
            const OPEN: [f64; 4] = [3.0 / 8.0, 9.0 / 8.0, 9.0 / 8.0, 3.0 / 8.0];
            for (i, c) in OPEN.iter().enumerate() {
                w[offset + i] += c;
            }
            simpson(w, offset + 3, n - 3);
        }
    }
}

fn simpson(w: &mut [f64], offset: usize, n: usize) {
    debug_assert!(n % 2 == 0);
    if n == 0 {
        return;
    }
    w[offset] += 1.0 / 3.0;
    w[offset + n] += 1.0 / 3.0;
    for i in 1..n {
        w[offset + i] += if i % 2 == 1 { 4.0 / 3.0 } else { 2.0 / 3.0 };
    }
}
