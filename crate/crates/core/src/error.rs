use std::path::PathBuf;

/// Errors raised across the analysis pipeline.
#[derive(Debug, thiserror::Error)]
pub enum GcaError {
    /// A required column was absent from a tabular input.
    #[error("schema error: missing required column `{column}`")]
    MissingColumn { column: String },

    /// A tabular or document input contained no records.
    #[error("empty input: {0}")]
    EmptyInput(String),

    /// Input bytes were not valid UTF-8.
    #[error("encoding error in {path}: input must be UTF-8")]
    Encoding { path: PathBuf },

    /// A file could not be read or written.
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("serialization error: {0}")]
    Serialization(String),

    /// A parameter was outside its valid domain.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// A model or space could not be built from the supplied data.
    #[error("build error: {0}")]
    Build(String),

    /// An iterative numerical routine failed to converge.
    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    /// Two inputs could not be joined on their keys.
    #[error("join error: {0}")]
    Join(String),

    /// The stored feature order does not match the canonical GCA order.
    #[error("feature order mismatch: expected {expected:?}, found {found:?}")]
    FeatureOrder {
        expected: Vec<String>,
        found: Vec<String>,
    },

    /// A validation statistic fell below its configured floor.
    #[error("validation threshold not met: {0}")]
    Threshold(String),

    /// A pipeline stage failed.
    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: String,
        #[source]
        source: Box<GcaError>,
    },
}

impl GcaError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        GcaError::Io {
            path: path.into(),
            source,
        }
    }

    /// True when the error stems from the caller's inputs rather than from
    /// an internal failure.
    pub fn is_input_error(&self) -> bool {
        match self {
            GcaError::Stage { source, .. } => source.is_input_error(),
            GcaError::Numeric(_) | GcaError::Serialization(_) | GcaError::Threshold(_) => false,
            _ => true,
        }
    }
}

impl From<serde_json::Error> for GcaError {
    fn from(e: serde_json::Error) -> Self {
        GcaError::Serialization(e.to_string())
    }
}

impl From<bincode::Error> for GcaError {
    fn from(e: bincode::Error) -> Self {
        GcaError::Serialization(e.to_string())
    }
}

impl GcaError {
    /// True for a (possibly stage-wrapped) [`GcaError::Threshold`].
    pub fn is_threshold(&self) -> bool {
        match self {
            GcaError::Threshold(_) => true,
            GcaError::Stage { source, .. } => source.is_threshold(),
            _ => false,
        }
    }
}

pub type Result<T, E = GcaError> = std::result::Result<T, E>;
