use thiserror::Error;

/// Errors raised by the segmentation toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("inverse-variance weights requested but record {index} has no variance estimate")]
    MissingVariance { index: usize },

    #[error("weight at index {index} is not positive and finite ({value})")]
    NonPositiveWeight { index: usize, value: f64 },

    #[error("invalid triplet s={s}, b={b}, e={e} for series of length {n}")]
    InvalidTriplet {
        s: usize,
        b: usize,
        e: usize,
        n: usize,
    },

    #[error("range [{s}, {e}] contains fewer than two points")]
    DegenerateRange { s: usize, e: usize },

    #[error("scorer failure: {0}")]
    ScorerFailure(String),

    #[error("invalid series: {0}")]
    InvalidSeries(String),

    #[error("invalid segmentation: {0}")]
    InvalidSegmentation(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("segmentations have different lengths ({truth} vs {pred})")]
    LengthMismatch { truth: usize, pred: usize },

    #[error("window size {k} invalid for series of length {n}")]
    InvalidWindow { k: usize, n: usize },

    #[error("line {line}: parse error: {message}")]
    Parse { line: usize, message: String },

    #[error("line {line}: field `{field}`: {message}")]
    Schema {
        line: usize,
        field: &'static str,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
