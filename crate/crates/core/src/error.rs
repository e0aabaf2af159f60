use std::path::PathBuf;

/// Errors produced by planning, estimation and the supporting I/O.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid chunk plan: {0}")]
    InvalidPlan(String),

    #[error("cannot combine chunk estimates: {0}")]
    Combination(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("singular design: the weighted normal equations are not positive definite")]
    SingularDesign,

    #[error("ties detected in {0}; use kendall-naive for tied data")]
    TiesUnsupported(&'static str),

    #[error("zero spread: {0}")]
    ZeroSpread(String),

    #[error("unknown estimator `{0}`")]
    UnknownEstimator(String),

    #[error("chunk {index} failed: {source}")]
    Chunk {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("bench config: {0}")]
    Config(#[from] toml::de::Error),
}

impl Error {
    /// Index of the failing chunk, if this error came from a chunk task.
    pub fn chunk_index(&self) -> Option<usize> {
        match self {
            Error::Chunk { index, .. } => Some(*index),
            _ => None,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
