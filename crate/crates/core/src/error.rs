use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dataset is empty")]
    EmptyDataset,

    #[error("point {point} has dimension {found}, expected {expected}")]
    DimensionMismatch {
        point: usize,
        expected: usize,
        found: usize,
    },

    #[error("non-finite coordinate at point {point}, dimension {dim}")]
    NonFinite { point: usize, dim: usize },

    #[error("invalid cluster parameters: {0}")]
    InvalidParams(String),

    #[error("index {index} out of range for {len} points")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("no cluster centers given")]
    NoCenters,

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid schema: {0}")]
    Schema(String),

    #[error("income {0} is outside [-10000, 720000]")]
    IncomeOutOfRange(i64),

    #[error("education code {0} is outside 1..=16")]
    EducationOutOfRange(i64),

    #[error("no value reaches the count threshold {threshold}")]
    EmptyWindow { threshold: usize },

    #[error("cluster {0} has no members")]
    EmptyCluster(usize),

    #[error("fraction {0} must lie in (0, 1]")]
    InvalidFraction(f64),

    #[error("cohort N1 is empty")]
    EmptyCohort,

    #[error("family {index} is missing clustering feature `{feature}`")]
    MissingFeature { index: usize, feature: String },

    #[error("invalid config: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{step}: {source}")]
    Step {
        step: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("output verification failed for {0}")]
    Verify(PathBuf),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn in_step(step: &'static str) -> impl FnOnce(Error) -> Error {
        move |source| Error::Step {
            step,
            source: Box::new(source),
        }
    }

    /// The innermost error, skipping pipeline step wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Step { source, .. } => source.root(),
            other => other,
        }
    }
}
