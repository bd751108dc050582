//! Error taxonomy for the verification pipeline.
//!
//! Variants are grouped so that callers (notably the CLI) can distinguish
//! "the request was malformed" from "the numerics refused": see [`Error::kind`].

use thiserror::Error;

/// Coarse classification used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Bad parameters, bad configuration, out-of-domain requests.
    Usage,
    /// A numerical procedure failed to meet its contract at runtime.
    Numeric,
}

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid configuration of the approximation scheme or solver grids.
    #[error("configuration: {0}")]
    Config(String),

    /// Model parameters outside the admissible domain of an operation.
    #[error("domain: {0}")]
    Domain(String),

    /// An input violated a documented API contract (e.g. a matrix passed to
    /// the Hermitian eigensolver that is not Hermitian to tolerance).
    #[error("contract violation: {0}")]
    Contract(String),

    /// An iterative procedure failed to converge or produced an
    /// uninterpretable result.
    #[error("numerics: {0}")]
    Numeric(String),

    /// Root finding and the argument-principle count disagree.
    #[error(
        "spectrum verification failed: iterative search found {found} roots in the box \
         but the winding number counts {counted}"
    )]
    SpectrumVerification { found: usize, counted: usize },

    /// A characteristic root lies (numerically) on the counting contour;
    /// the caller should perturb the search box and retry.
    #[error("characteristic root too close to the search-box boundary near {at:?}")]
    RootOnBoundary { at: (f64, f64) },

    /// Fewer roots than requested were found, and the system's spectrum is
    /// not known in its entirety, so the missing ones cannot be ruled out.
    #[error(
        "incomplete spectrum: found {} of {requested} requested roots; \
         enlarge the search box",
        partial.roots.len()
    )]
    IncompleteSpectrum {
        requested: usize,
        partial: crate::spectrum::Spectrum,
    },
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Config(_) | Error::Domain(_) => ErrorKind::Usage,
            Error::Contract(_)
            | Error::Numeric(_)
            | Error::SpectrumVerification { .. }
            | Error::RootOnBoundary { .. }
            | Error::IncompleteSpectrum { .. } => ErrorKind::Numeric,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
