use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid classifier spec: {0}")]
    InvalidSpec(String),

    #[error("malformed identity descriptor {descriptor:?}: {reason}")]
    MalformedDescriptor { descriptor: String, reason: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("index {index} out of range (len {len})")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("bit matrix is malformed: {0}")]
    MalformedMatrix(String),

    #[error("{combinations} combinations exceed the enumeration cap of {cap}")]
    SizeLimit { combinations: u128, cap: u128 },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("empty batch or split")]
    Empty,

    #[error("feature column {column:?} is constant")]
    ConstantFeature { column: String },

    #[error("requested {requested} samples but only {available} are available")]
    InsufficientSamples { requested: usize, available: usize },

    #[error("{path}: line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("{path}: line {line}: label {value:?} is not 0 or 1")]
    NonBinaryLabel {
        path: PathBuf,
        line: u64,
        value: String,
    },

    #[error("{path}: missing column {column:?}")]
    MissingColumn { path: PathBuf, column: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("pool exhausted: accepted {accepted} of {requested} classifiers after {attempts} attempts")]
    PoolExhausted {
        accepted: usize,
        requested: usize,
        attempts: usize,
    },

    #[error("pool file format error: {0}")]
    Format(String),

    #[error("unsupported pool file version {found} (expected {expected})")]
    Version { found: u32, expected: u32 },

    #[error("pool file checksum mismatch")]
    Checksum,

    #[error("invalid ensemble selection: {0}")]
    InvalidSelection(String),

    #[error("even ensemble size {0}: majority vote needs an odd number of voters")]
    EvenEnsemble(usize),

    #[error("inconsistent report: {0}")]
    Report(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
