use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the localization pipeline, the simulator, or
/// the file readers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("window too short: {len} samples (need at least {min})")]
    TooShort { len: usize, min: usize },

    #[error("non-uniform sampling at sample {index}: relative jitter {jitter:.3e}")]
    NonUniformSampling { index: usize, jitter: f64 },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("duplicate machine label `{0}`")]
    DuplicateLabel(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid grid model: {0}")]
    InvalidModel(String),

    #[error("invalid forcing: {0}")]
    InvalidForcing(String),

    #[error("integration diverged at t = {t:.4} s")]
    Diverged { t: f64 },

    #[error("no equilibrium found (power balance residual {residual:.3e})")]
    NoEquilibrium { residual: f64 },

    #[error("operating point is not an equilibrium (power balance residual {residual:.3e})")]
    NotAnEquilibrium { residual: f64 },

    #[error("spectrum has {bins} usable bins, fewer than lag {lag}")]
    SpectrumTooShort { bins: usize, lag: usize },

    #[error("no candidate oscillation frequencies found")]
    NoCandidates,

    #[error("rank-deficient regression: feature column {column} (condition estimate {condition:.3e})")]
    RankDeficient { column: usize, condition: f64 },

    #[error("forcing block is dense and uniform; no source can be singled out")]
    Unlocatable,

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("unknown unit tag `{0}`")]
    Unit(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization error: {0}")]
    Serialization(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
