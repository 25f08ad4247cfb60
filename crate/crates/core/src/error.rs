use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Coarse classification used by front ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Validation,
    Io,
    Numerical,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("insufficient time points: need at least {needed}, got {got}")]
    InsufficientTimePoints { needed: usize, got: usize },

    #[error("{matrix} is not positive definite (pivot {index} = {pivot:e})")]
    NotPositiveDefinite {
        matrix: &'static str,
        index: usize,
        pivot: f64,
    },

    #[error("Jacobi eigensolver did not converge after {sweeps} sweeps (off-diagonal mass {off_diagonal:e})")]
    NoConvergence { sweeps: usize, off_diagonal: f64 },

    #[error("degenerate spectrum: {0}")]
    DegenerateSpectrum(String),

    #[error("parse error{}: {message}", line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    Parse { line: Option<u64>, message: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("replication with seed {seed:#018x} failed: {source}")]
    Replication {
        seed: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("parallel and serial runs disagree for replication {index}")]
    Nondeterminism { index: usize },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn parse(line: Option<u64>, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: msg.into(),
        }
    }

    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::InvalidArgument(_)
            | Error::InsufficientTimePoints { .. }
            | Error::NotPositiveDefinite { .. } => ErrorCategory::Validation,
            Error::Parse { .. } | Error::Io { .. } => ErrorCategory::Io,
            Error::NoConvergence { .. }
            | Error::DegenerateSpectrum(_)
            | Error::Nondeterminism { .. } => ErrorCategory::Numerical,
            Error::Replication { source, .. } => source.category(),
        }
    }
}
