use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: missing column `{column}`")]
    MissingColumn { path: PathBuf, column: String },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("{path}: duplicate row for id={id} eye={eye} t={t}")]
    DuplicateRow {
        path: PathBuf,
        id: String,
        eye: String,
        t: f64,
    },

    #[error("{0}: no data")]
    Empty(String),

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("{path}: {message}")]
    Image { path: PathBuf, message: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("required input {path} not found: {hint}")]
    MissingInput { path: PathBuf, hint: String },

    #[error("unrecoverable sequence: {valid} valid samples, at least {required} required")]
    Unrecoverable { valid: usize, required: usize },

    #[error("sequence rejected: {invalid_fraction:.3} of samples invalid after gap filling (limit {limit:.3})")]
    TooManyGaps { invalid_fraction: f64, limit: f64 },

    #[error("series mismatch: {0}")]
    SeriesMismatch(String),

    #[error("sequence too short: {duration:.3} s available, {required:.3} s required")]
    TooShort { duration: f64, required: f64 },

    #[error("mask has no {0} pixels")]
    NoTargetPixels(&'static str),

    #[error("circle fit needs at least 3 points, got {0}")]
    TooFewPoints(usize),

    #[error("points are collinear (normal-equation condition {0:.3e})")]
    Collinear(f64),

    #[error("point ({x}, {y}) lies outside the {width}x{height} mask")]
    OutsideGrid {
        x: f64,
        y: f64,
        width: usize,
        height: usize,
    },

    #[error("trend undefined: all sample times identical")]
    DegenerateTrend,

    #[error("{window}: {valid} valid samples, at least 2 required")]
    SparseWindow { window: &'static str, valid: usize },

    #[error("feature vector has {actual} values, expected {expected}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("training data: {0}")]
    TrainingData(String),

    #[error("class {class} has {count} samples, {required} folds requested")]
    InsufficientClassSamples {
        class: String,
        count: usize,
        required: usize,
    },

    #[error("hyperparameter grid is empty")]
    EmptyGrid,

    #[error("unsupported model format version {0}")]
    ModelVersion(u32),

    #[error("confusion matrix: {0}")]
    Confusion(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn json(path: impl Into<PathBuf>, source: serde_json::Error) -> Self {
        Error::Json {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by the caller's inputs (files, schemas,
    /// configuration) as opposed to failures inside the pipeline.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Io { .. }
                | Error::MissingColumn { .. }
                | Error::Parse { .. }
                | Error::DuplicateRow { .. }
                | Error::Empty(_)
                | Error::Json { .. }
                | Error::Image { .. }
                | Error::Config(_)
                | Error::MissingInput { .. }
                | Error::LengthMismatch { .. }
                | Error::ModelVersion(_)
                | Error::EmptyGrid
                | Error::InsufficientClassSamples { .. }
                | Error::TrainingData(_)
        )
    }
}
