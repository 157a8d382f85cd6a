use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Caller supplied arguments that violate an operation's preconditions.
    #[error("usage error: {0}")]
    Usage(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite entry at index {index}")]
    NonFinite { index: usize },

    /// A size guard was exceeded (dense realizations, oracle caps).
    #[error("resource limit: {0}")]
    Resource(String),

    #[error("matrix is numerically singular (pivot {pivot:e} at step {step})")]
    Singular { step: usize, pivot: f64 },

    /// The scalar pivot of a Gohberg-Semencul representation is too small.
    #[error("degenerate pivot: |{name}| = {value:e} relative to {reference:e}")]
    DegeneratePivot {
        name: &'static str,
        value: f64,
        reference: f64,
    },

    /// A leading principal minor vanished during unpivoted elimination.
    #[error("degenerate leading minor at order {order}")]
    DegenerateMinor { order: usize },

    #[error("{what} did not converge after {iterations} iterations")]
    NonConvergence { what: &'static str, iterations: usize },

    #[error("argument outside the bound's domain: {0}")]
    Domain(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("validation probe failed: {0}")]
    Probe(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization error: {0}")]
    Format(String),
}

impl Error {
    /// Failures that the Monte Carlo driver handles by redrawing the trial.
    pub fn is_resamplable(&self) -> bool {
        matches!(
            self,
            Error::Singular { .. }
                | Error::DegeneratePivot { .. }
                | Error::DegenerateMinor { .. }
                | Error::NonConvergence { .. }
                | Error::Probe(_)
        )
    }
}

pub(crate) fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}

pub(crate) fn check_finite(x: &[f64]) -> Result<()> {
    match x.iter().position(|v| !v.is_finite()) {
        Some(index) => Err(Error::NonFinite { index }),
        None => Ok(()),
    }
}
