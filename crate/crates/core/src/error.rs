//! Error type shared by every module of the crate.

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("non-finite component at index {index}")]
    NonFinite { index: usize },

    #[error("negative component {value} at index {index}; dissimilarity metrics require non-negative data")]
    Negative { index: usize, value: f64 },

    #[error("operation requires a non-empty cluster feature")]
    EmptyCluster,

    #[error("CF-tree holds no points")]
    EmptyTree,

    #[error("empty input set")]
    EmptySet,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("missing expected column(s): {0:?}")]
    MissingColumns(Vec<String>),

    #[error("no rows survived cleaning")]
    NoRows,

    #[error("malformed row at line {line}: {reason}")]
    Malformed { line: u64, reason: String },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

/// Coarse classification used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Data,
    Internal,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Config(_) => ErrorKind::Config,
            Error::Io { .. }
            | Error::MissingColumns(_)
            | Error::NoRows
            | Error::Malformed { .. }
            | Error::Csv(_)
            | Error::NonFinite { .. }
            | Error::Negative { .. }
            | Error::DimensionMismatch { .. } => ErrorKind::Data,
            Error::EmptyCluster | Error::EmptyTree | Error::EmptySet | Error::Json(_) => {
                ErrorKind::Internal
            }
        }
    }
}

pub(crate) fn check_dim(expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(Error::DimensionMismatch { expected, actual });
    }
    Ok(())
}

pub(crate) fn check_finite(x: &[f64]) -> Result<()> {
    match x.iter().position(|v| !v.is_finite()) {
        Some(index) => Err(Error::NonFinite { index }),
        None => Ok(()),
    }
}

/// Finite and non-negative, the domain of the abundance metrics.
pub(crate) fn check_abundance(x: &[f64]) -> Result<()> {
    check_finite(x)?;
    match x.iter().position(|v| *v < 0.0) {
        Some(index) => Err(Error::Negative {
            index,
            value: x[index],
        }),
        None => Ok(()),
    }
}
