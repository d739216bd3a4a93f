use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dataset is empty")]
    DatasetEmpty,
    #[error("non-finite value at row {row}, column {col}")]
    InvalidData { row: usize, col: usize },
    #[error("radius level must be positive, got {0}")]
    InvalidRadius(i64),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid sensitivity parameters: {0}")]
    InvalidSensitivity(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("hash value of point {row} in projection {projection} does not fit in i32")]
    HashOverflow { row: usize, projection: usize },
    #[error("point id {id} out of range for {n} points")]
    PointOutOfRange { id: usize, n: usize },

    #[error("corrupt file at byte offset {offset}: {reason}")]
    CorruptFile { offset: u64, reason: String },
    #[error("record {record_index} has a different dimension than the first record")]
    DimensionVaries { record_index: usize },
    #[error("file contains no records")]
    EmptyDataset,
    #[error("unsupported format version: {0}")]
    UnknownVersion(String),

    #[error("sample pool too small: needed {needed}, have {have}")]
    PoolTooSmall { needed: usize, have: usize },
    #[error("{failed} of {total} ground-truth queries failed")]
    TooManyFailures { failed: usize, total: usize },

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
    #[error("too few samples: {samples} rows for {folds} folds")]
    TooFewSamples { samples: usize, folds: usize },

    #[error("empty input")]
    EmptyInput,
    #[error("actual values have zero variance")]
    ZeroVariance,
    #[error("duplicate report cell ({dataset}, {scenario}, {kind}, fold {fold})")]
    DuplicateCell {
        dataset: String,
        scenario: u8,
        kind: String,
        fold: i32,
    },
    #[error("timing refused: {0} workers active, including the timer")]
    ConcurrentTiming(usize),

    #[error("{0} artifacts differ from the manifest")]
    ManifestMismatch(usize),
    #[error("model not found: {0}")]
    ModelNotFound(PathBuf),
    #[error("config error: {0}")]
    Config(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
