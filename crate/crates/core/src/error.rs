use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("context contains no sentences")]
    EmptyContext,

    #[error("claim contains no sentences")]
    EmptyClaim,

    #[error("tokenizer not loaded: {0}")]
    TokenizerNotLoaded(String),

    #[error("failed to load model from {}: {reason}", path.display())]
    ModelLoadFailure { path: PathBuf, reason: String },

    #[error("inference failed: {0}")]
    InferenceFailure(String),

    /// An error attached to one element of a batch.
    #[error("item {index}: {source}")]
    Item {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("file not found: {}", .0.display())]
    FileNotFound(PathBuf),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: malformed record: {reason}")]
    MalformedRecord { line: usize, reason: String },

    #[error("line {line}: label {value} outside [0, 1] after normalization")]
    LabelOutOfRange { line: usize, value: f64 },

    #[error("dataset {name}: manifest declares {expected} records, file has {found}")]
    CountMismatch {
        name: String,
        expected: usize,
        found: usize,
    },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("invalid value: {0}")]
    InvalidValue(String),

    #[error("gold labels contain a single class; ROC AUC and threshold calibration are undefined")]
    SingleClassAUC,

    #[error("gold values have zero variance; R² is undefined")]
    ZeroVariance,

    #[error("record {index} has task {found}, expected {expected}")]
    TaskMismatch {
        index: usize,
        expected: String,
        found: String,
    },

    #[error("configuration error: {0}")]
    Config(String),
}

impl Error {
    pub fn at(self, index: usize) -> Self {
        Error::Item {
            index,
            source: Box::new(self),
        }
    }

    /// True for faults originating in the model backend rather than the caller's input.
    pub fn is_backend(&self) -> bool {
        match self {
            Error::TokenizerNotLoaded(_) | Error::ModelLoadFailure { .. } | Error::InferenceFailure(_) => true,
            Error::Item { source, .. } => source.is_backend(),
            _ => false,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        let path = path.into();
        if source.kind() == std::io::ErrorKind::NotFound {
            Error::FileNotFound(path)
        } else {
            Error::Io { path, source }
        }
    }
}
