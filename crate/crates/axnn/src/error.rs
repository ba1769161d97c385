//! Error type shared by every module in the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Matrix/vector dimensions do not line up. The message carries both shapes.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// A learner or subnet spec violates its structural invariants.
    #[error("invalid architecture: {0}")]
    InvalidArchitecture(String),

    /// One or more configuration fields are out of range. Each entry names a field.
    #[error("invalid config: {}", .0.join("; "))]
    InvalidConfig(Vec<String>),

    /// Training produced a non-finite loss or gradient.
    #[error("training diverged: {0}")]
    Divergence(String),

    /// A feature column is constant (or nearly so) and cannot be standardized.
    #[error("degenerate feature: {0}")]
    DegenerateFeature(String),

    /// Model predictions are constant; variance-based importances are undefined.
    #[error("degenerate model: {0}")]
    DegenerateModel(String),

    /// Input data does not match the expected schema (columns, task, label range).
    #[error("schema mismatch: {0}")]
    Schema(String),

    /// A CSV cell could not be parsed; row/column are 1-based and include the header row.
    #[error("csv parse error at row {row}, column {col}: {message}")]
    CsvParse {
        row: usize,
        col: usize,
        message: String,
    },

    /// Model file was written by an unsupported format version.
    #[error("model format version mismatch: {0}")]
    VersionMismatch(String),

    /// Model file is not a well-formed document.
    #[error("malformed model document: {0}")]
    MalformedModel(String),

    /// Model file parsed but violates a structural invariant (stage partition, shapes).
    #[error("model invariant violated: {0}")]
    InvariantViolation(String),

    /// An operation was asked to work on empty data.
    #[error("empty input: {0}")]
    EmptyInput(String),

    /// A metric was requested that the model's task does not support.
    #[error("unsupported metric: {0}")]
    UnsupportedMetric(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}
