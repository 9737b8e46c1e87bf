use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("unsupported audio format: {0}")]
    UnsupportedFormat(String),

    #[error("corrupt WAV header: {0}")]
    CorruptHeader(String),

    #[error("audio file contains no samples")]
    EmptyAudio,

    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: Box<Error>,
    },

    #[error("manifest schema error at `{path}`: {message}")]
    Schema { path: String, message: String },

    #[error("duplicate condition id `{0}`")]
    DuplicateConditionId(String),

    #[error("condition `{id}`: intelligibility {value} outside [0, 100]")]
    IntelligibilityOutOfRange { id: String, value: f64 },

    #[error("signal too short: need {needed} {unit}, got {got}")]
    SignalTooShort {
        needed: usize,
        got: usize,
        unit: &'static str,
    },

    #[error("every frame is below the silence threshold")]
    AllSilent,

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("too few samples for k-nearest-neighbour estimation: n = {n}, k = {k}")]
    TooFewSamples { n: usize, k: usize },

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("condition `{id}`: {source}")]
    Condition {
        id: String,
        #[source]
        source: Box<Error>,
    },

    #[error("dataset `{name}` aborted after {completed} of {total} conditions: {source}")]
    Dataset {
        name: String,
        completed: usize,
        total: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn at_path(self, path: impl Into<PathBuf>) -> Self {
        Error::File {
            path: path.into(),
            source: Box::new(self),
        }
    }

    pub(crate) fn in_condition(self, id: &str) -> Self {
        Error::Condition {
            id: id.to_owned(),
            source: Box::new(self),
        }
    }

    /// True for failures caused by reading or parsing input files, as opposed
    /// to a metric rejecting its input.
    pub fn is_input_error(&self) -> bool {
        match self {
            Error::Io(_)
            | Error::UnsupportedFormat(_)
            | Error::CorruptHeader(_)
            | Error::EmptyAudio
            | Error::Schema { .. }
            | Error::DuplicateConditionId(_)
            | Error::IntelligibilityOutOfRange { .. }
            | Error::Csv(_)
            | Error::Json(_) => true,
            Error::File { source, .. } | Error::Condition { source, .. } | Error::Dataset { source, .. } => {
                source.is_input_error()
            }
            _ => false,
        }
    }

    /// Innermost error, with path/condition annotations stripped.
    pub fn root(&self) -> &Error {
        match self {
            Error::File { source, .. } | Error::Condition { source, .. } | Error::Dataset { source, .. } => {
                source.root()
            }
            other => other,
        }
    }
}
