use std::path::PathBuf;

use crate::catalogue::ParameterId;
use crate::pipeline::{StageId, Technique};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("stage `{stage}` is not part of the `{technique}` pipeline")]
    StageNotInTechnique { technique: Technique, stage: StageId },

    #[error("timing for stage `{stage}` missing from `{technique}` pipeline")]
    MissingStage { technique: Technique, stage: StageId },

    #[error("stage `{stage}` does not belong to `{technique}` or appears more than once")]
    UnknownStage { technique: Technique, stage: StageId },

    #[error("negative or non-finite time {seconds} for stage `{stage}`")]
    InvalidTiming { stage: StageId, seconds: f64 },

    #[error("sweep axis `{0}` is empty")]
    EmptySweep(&'static str),

    #[error("invalid scenario `{id}`: {reason}")]
    InvalidScenario { id: String, reason: String },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("polynomial expansion would produce {terms} columns (cap {cap})")]
    TermExplosion { terms: usize, cap: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("catalogue version mismatch: estimator built against {expected}, runtime has {got}")]
    CatalogueMismatch { expected: String, got: String },

    #[error("no records for {technique} / {direction}")]
    EmptyDataset { technique: Technique, direction: String },

    #[error("malformed record `{id}`: {reason}")]
    MalformedRecord { id: String, reason: String },

    #[error("need at least {needed} records, have {have}")]
    TooFewRecords { needed: usize, have: usize },

    #[error("k = {k} folds requested for {n} records")]
    KTooLarge { k: usize, n: usize },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("invariant violation: {0}")]
    InvariantViolation(String),

    #[error("unsupported format version `{0}`")]
    UnsupportedVersion(String),

    #[error("missing metric `{0}`")]
    MissingMetric(ParameterId),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
