//! Characteristic roots of the delay equation and the spectral bound of its
//! m-fold compound.
//!
//! The characteristic function is `h(p) = a0 + a1 exp(-p tau) - p`. Roots are
//! located by Newton iteration from a lattice of seeds and then *verified*:
//! an argument-principle contour count over the search box must agree with
//! the number of distinct roots found, otherwise the result is rejected. The
//! sum of the m largest real parts bounds the compound's spectrum; it is
//! `-inf` exactly when the equation has fewer than m characteristic roots in
//! total, which happens only in the degenerate undelayed case.

use num_complex::Complex64;

use crate::dde::LinearDelaySystem;
use crate::error::{Error, Result};

/// Closed axis-aligned search region in the complex plane.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ComplexBox {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl ComplexBox {
    pub fn contains(&self, p: Complex64) -> bool {
        p.re >= self.re_min && p.re <= self.re_max && p.im >= self.im_min && p.im <= self.im_max
    }
}

/// Verified set of characteristic roots inside some box.
#[derive(Debug, Clone)]
pub struct Spectrum {
    /// Distinct roots, sorted by descending real part, ties by ascending
    /// `|Im|` with the upper-half-plane member first.
    pub roots: Vec<Complex64>,
    /// Argument-principle count over the search box (equals `roots.len()`).
    pub verified_count: usize,
    /// True when the equation's full root set is known a priori — only the
    /// undelayed case `a1 = 0`, whose sole root is `a0`.
    pub entire_spectrum_known: bool,
}

/// Spectral bound of the m-fold compound; serialized as a tagged value since
/// JSON has no `-inf`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "kebab-case")]
pub enum SpectralBound {
    Finite(f64),
    MinusInfinity,
}

impl SpectralBound {
    pub fn as_f64(&self) -> f64 {
        match self {
            SpectralBound::Finite(v) => *v,
            SpectralBound::MinusInfinity => f64::NEG_INFINITY,
        }
    }
}

pub fn characteristic_value(sys: &LinearDelaySystem, p: Complex64) -> Complex64 {
    sys.a0 + sys.a1 * (-p * sys.tau).exp() - p
}

pub fn characteristic_derivative(sys: &LinearDelaySystem, p: Complex64) -> Complex64 {
    -sys.a1 * sys.tau * (-p * sys.tau).exp() - 1.0
}

/// Default box: generous along the real axis (all roots satisfy
/// `Re p <= a0 + |a1|`, and `Re p` below `-(|a0| + |a1|)` forces
/// `|a1| exp(-Re p tau)` to dominate, pushing roots right), and a few delay
/// harmonics tall.
pub fn default_search_box(sys: &LinearDelaySystem) -> ComplexBox {
    let half_height = (4.0 * std::f64::consts::PI / sys.tau).max(20.0);
    ComplexBox {
        re_min: -(sys.a0.abs() + sys.a1.abs() + 5.0),
        re_max: sys.a0 + sys.a1.abs() + 1.0,
        im_min: -half_height,
        im_max: half_height,
    }
}

const NEWTON_TOL: f64 = 1e-12;
const DEDUPE_TOL: f64 = 1e-8;

fn newton_root(sys: &LinearDelaySystem, seed: Complex64) -> Option<Complex64> {
    let mut p = seed;
    for _ in 0..100 {
        let f = characteristic_value(sys, p);
        if f.norm() < NEWTON_TOL * (1.0 + p.norm()) {
            return Some(p);
        }
        let df = characteristic_derivative(sys, p);
        if df.norm() < 1e-300 {
            return None;
        }
        let step = f / df;
        p -= step;
        if !p.re.is_finite() || !p.im.is_finite() {
            return None;
        }
    }
    None
}

/// Find the `count` rightmost characteristic roots within `bbox`.
///
/// Roots with positive imaginary part are mirrored to their conjugates (the
/// coefficients are real, so the spectrum is symmetric and the conjugate is a
/// root *exactly*). Finding fewer roots than requested is an error unless the
/// entire spectrum is known to be smaller.
pub fn leading_roots(sys: &LinearDelaySystem, count: usize, bbox: &ComplexBox) -> Result<Spectrum> {
    if bbox.re_min >= bbox.re_max || bbox.im_min >= bbox.im_max {
        return Err(Error::Config(format!("degenerate search box {bbox:?}")));
    }
    let entire = sys.a1 == 0.0;
    let mut roots: Vec<Complex64> = Vec::new();
    let push_unique = |p: Complex64, roots: &mut Vec<Complex64>| {
        if bbox.contains(p) && !roots.iter().any(|r| (r - p).norm() < DEDUPE_TOL) {
            roots.push(p);
        }
    };

    // Seed lattice over the upper half of the box; conjugates come for free.
    let re_step = 0.5;
    let im_step = (std::f64::consts::PI / sys.tau).min(1.0);
    let n_re = ((bbox.re_max - bbox.re_min) / re_step).ceil() as i64;
    let n_im = (bbox.im_max.max(0.0) / im_step).ceil() as i64;
    for i in 0..=n_re {
        for j in 0..=n_im {
            let seed = Complex64::new(
                bbox.re_min + i as f64 * re_step,
                (j as f64 * im_step).min(bbox.im_max),
            );
            if let Some(p) = newton_root(sys, seed) {
                // Snap near-real roots; their imaginary part is numerically 0.
                let p = if p.im.abs() < 1e-10 {
                    Complex64::new(p.re, 0.0)
                } else {
                    p
                };
                push_unique(p, &mut roots);
                if p.im != 0.0 {
                    push_unique(p.conj(), &mut roots);
                }
            }
        }
    }

    roots.sort_by(|a, b| {
        b.re.partial_cmp(&a.re)
            .unwrap()
            .then(a.im.abs().partial_cmp(&b.im.abs()).unwrap())
            .then(b.im.partial_cmp(&a.im).unwrap())
    });

    let counted = count_roots_in(sys, bbox)?;
    if counted != roots.len() {
        return Err(Error::SpectrumVerification {
            found: roots.len(),
            counted,
        });
    }
    let spectrum = Spectrum {
        roots,
        verified_count: counted,
        entire_spectrum_known: entire,
    };
    if spectrum.roots.len() < count && !entire {
        return Err(Error::IncompleteSpectrum {
            requested: count,
            partial: spectrum,
        });
    }
    Ok(spectrum)
}

/// Count characteristic roots inside `bbox` by the argument principle.
///
/// The phase of `h` along the boundary is tracked with adaptive bisection so
/// that no step turns by more than pi/2; a near-zero of `h` on the contour
/// aborts with a boundary error since the count would be meaningless.
pub fn count_roots_in(sys: &LinearDelaySystem, bbox: &ComplexBox) -> Result<usize> {
    let corners = [
        Complex64::new(bbox.re_min, bbox.im_min),
        Complex64::new(bbox.re_max, bbox.im_min),
        Complex64::new(bbox.re_max, bbox.im_max),
        Complex64::new(bbox.re_min, bbox.im_max),
    ];
    let mut total = 0.0;
    for e in 0..4 {
        let a = corners[e];
        let b = corners[(e + 1) % 4];
        // The exponential term's phase moves at rate tau along any edge, so
        // leaves shorter than pi/(2 tau) cannot hide a full extra turn; the
        // pi/2 acceptance test then refines wherever the linear term or a
        // nearby root speeds the phase up.
        let max_leaf = (std::f64::consts::FRAC_PI_2 / sys.tau).min(0.5);
        let min_depth = ((a - b).norm() / max_leaf).log2().ceil().max(1.0) as u32;
        total += edge_phase_change(
            sys,
            a,
            b,
            characteristic_value(sys, a),
            characteristic_value(sys, b),
            0,
            min_depth,
        )?;
    }
    let winding = total / (2.0 * std::f64::consts::PI);
    let rounded = winding.round();
    if (winding - rounded).abs() > 0.25 || rounded < -0.25 {
        return Err(Error::Numeric(format!(
            "argument-principle winding {winding} is not a nonnegative integer"
        )));
    }
    Ok(rounded as usize)
}

fn edge_phase_change(
    sys: &LinearDelaySystem,
    a: Complex64,
    b: Complex64,
    ha: Complex64,
    hb: Complex64,
    depth: u32,
    min_depth: u32,
) -> Result<f64> {
    let step = (hb / ha).arg();
    if step.abs() < std::f64::consts::FRAC_PI_2 && depth >= min_depth {
        return Ok(step);
    }
    if depth > 48 {
        return Err(Error::RootOnBoundary { at: (a.re, a.im) });
    }
    let mid = 0.5 * (a + b);
    let hm = characteristic_value(sys, mid);
    if hm.norm() < 1e-9 * (1.0 + mid.norm()) {
        return Err(Error::RootOnBoundary { at: (mid.re, mid.im) });
    }
    Ok(edge_phase_change(sys, a, mid, ha, hm, depth + 1, min_depth)?
        + edge_phase_change(sys, mid, b, hm, hb, depth + 1, min_depth)?)
}

/// Sum of the real parts of the `m` rightmost roots — the spectral bound of
/// the m-fold compound cocycle.
pub fn compound_spectral_bound(spectrum: &Spectrum, m: usize) -> Result<SpectralBound> {
    if m == 0 {
        return Err(Error::Config("compound order m must be at least 1".into()));
    }
    if spectrum.roots.len() >= m {
        Ok(SpectralBound::Finite(
            spectrum.roots[..m].iter().map(|p| p.re).sum(),
        ))
    } else if spectrum.entire_spectrum_known {
        // Fewer than m roots exist at all; no m-fold product of modes exists
        // and the compound evolution is eventually trivial.
        Ok(SpectralBound::MinusInfinity)
    } else {
        Err(Error::Numeric(format!(
            "only {} roots available for a compound bound of order {m}; \
             enlarge the search box",
            spectrum.roots.len()
        )))
    }
}
