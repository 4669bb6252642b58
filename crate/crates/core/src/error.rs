use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the engine and the analysis toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid sector: {0}")]
    InvalidSector(String),

    #[error("index {index} out of range for basis of dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("unknown observable tag `{0}` (expected A, B or C)")]
    UnknownObservable(String),

    #[error("matrix is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("spin resolution failed for state {state}: residual {residual:e} exceeds {limit:e}")]
    SpinResolution {
        state: usize,
        residual: f64,
        limit: f64,
    },

    #[error("sector mismatch: {0}")]
    SectorMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("too few samples: need at least {needed}, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("cache entry {path}: {reason}")]
    Cache { path: PathBuf, reason: String },

    #[error("missing cache entry for sector {0}; run the `spectrum` command first")]
    MissingCache(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Validation failures map to exit code 2, everything else to 1.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidSector(_)
                | Error::UnknownObservable(_)
                | Error::InvalidArgument(_)
                | Error::Config(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
