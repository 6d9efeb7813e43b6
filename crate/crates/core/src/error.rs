use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, CorrLogError>;

#[derive(Debug, Error)]
pub enum CorrLogError {
    #[error("dimension mismatch for {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("label index {index} out of range for {num_labels} labels")]
    LabelIndex { index: usize, num_labels: usize },

    #[error("label value {0} is not -1 or +1")]
    InvalidLabel(i64),

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("{num_labels} labels exceed the enumeration limit of {limit}")]
    TooManyLabels { num_labels: usize, limit: usize },

    #[error("non-finite value in {what}{}", instance.map(|i| format!(" (instance {i})")).unwrap_or_default())]
    NonFinite {
        what: &'static str,
        instance: Option<usize>,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("{}:{line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("malformed model document: {0}")]
    ModelFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl CorrLogError {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        CorrLogError::InvalidConfig(msg.into())
    }

    /// True for errors caused by numerical breakdown rather than bad input.
    pub fn is_numeric(&self) -> bool {
        matches!(self, CorrLogError::NonFinite { .. })
    }
}
