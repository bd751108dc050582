//! Certified-by-computation stability analysis for scalar linear delay
//! differential equations and their exterior-power (compound) extensions.
//!
//! The library answers one question: given
//!
//! ```text
//! x'(t) = a0 x(t) + a1 x(t - tau) + (perturbation through a delayed output)
//! ```
//!
//! does the m-fold compound of the perturbed evolution stay uniformly
//! exponentially stable for every perturbation in a prescribed class? The
//! test is a frequency-domain inequality: along the vertical line
//! `Re p = -nu0` one forms a transfer matrix `W(p)` between delayed-output
//! measurements and perturbation inputs of the compound system, and the
//! inequality `alpha(W) < 1 / Lambda` (or a sector variant) over the line
//! implies the stability of the whole perturbed family. The library
//! discretizes that test — time-stepping for the solution tables, Fourier
//! modes on the delay interval for the truncation, quadrature for the
//! transfer-matrix entries — and reports the margin together with the
//! diagnostics needed to judge the truncations.
//!
//! Module map:
//!
//! * [`dde`] — solution tables for the delay equation (one-sided derivative
//!   bookkeeping included) and the fundamental/basis initial data.
//! * [`spectrum`] — characteristic roots by Newton refinement, verified by an
//!   argument-principle count; compound spectral bounds.
//! * [`scheme`] — the transfer matrix `W(p)`: a direct quadrature route and
//!   an algebraically identical fast route.
//! * [`sweep`] — frequency sweeps, verdicts, convergence studies, region
//!   scans.
//! * [`models`] — two worked parameter families: the Suarez–Schopf delayed
//!   oscillator and the Mackey–Glass feedback model.
//! * [`grid`], [`quad`], [`linalg`], [`multi_index`] — supporting numerics.

pub mod dde;
pub mod error;
pub mod grid;
pub mod linalg;
pub mod models;
pub mod multi_index;
pub mod quad;
pub mod scheme;
pub mod spectrum;
pub mod sweep;

pub use dde::{ConstraintKind, LinearDelaySystem};
pub use error::{Error, ErrorKind, Result};
pub use scheme::{SchemeConfig, SchemeContext, SchemePath, SolutionSet, TailReport};
pub use spectrum::{SpectralBound, Spectrum};
pub use sweep::{
    check_precondition, convergence_report, frequency_sweep, region_scan, ConvergenceReport,
    FrequencySweepReport, ScanOutcome, ScanReport, SweepOptions, Verdict,
};
