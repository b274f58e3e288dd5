//! Error type shared by every module of the crate.

use std::path::PathBuf;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Sampled data does not vanish at `x = 0` or `x = π`.
    #[error("boundary violation: samples must vanish at both endpoints (got {left:e} at x=0, {right:e} at x=π)")]
    BoundaryViolation { left: f64, right: f64 },

    /// Requested mode cutoff cannot be resolved on the grid.
    #[error("aliasing: n_max = {n_max} must be smaller than the grid parameter K = {k}")]
    Aliasing { n_max: u64, k: usize },

    #[error("space grid parameter K = {0} must be even and at least 2")]
    InvalidGrid(usize),

    #[error("expected {expected} samples, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("{what} = {value} lies outside [{lower}, {upper}]")]
    OutOfDomain {
        what: &'static str,
        value: f64,
        lower: f64,
        upper: f64,
    },

    #[error("invalid spectrum: {0}")]
    InvalidSpectrum(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Successive refinement hit its interval limit before converging.
    #[error(
        "quadrature did not converge after {intervals} intervals: last estimate {last:e}, previous {previous:e} (relative change {achieved:e})"
    )]
    QuadratureNonConvergence {
        intervals: usize,
        last: f64,
        previous: f64,
        achieved: f64,
    },

    /// The weighted spectral energy of a smoothness constant diverges.
    #[error("smoothness sum is unbounded: mode {mode} at (t, s) = ({t}, {s}) overflows the exponential weight")]
    UnboundedSmoothness { mode: u64, t: f64, s: f64 },

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("problem file: {0}")]
    Format(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn out_of_domain(what: &'static str, value: f64, lower: f64, upper: f64) -> Self {
        Error::OutOfDomain {
            what,
            value,
            lower,
            upper,
        }
    }
}

/// Checks `lower <= value <= upper`, rejecting NaN.
pub(crate) fn check_range(what: &'static str, value: f64, lower: f64, upper: f64) -> Result<()> {
    if value >= lower && value <= upper {
        Ok(())
    } else {
        Err(Error::out_of_domain(what, value, lower, upper))
    }
}
