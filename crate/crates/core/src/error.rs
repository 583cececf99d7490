use thiserror::Error;

pub type Result<T, E = TscvError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum TscvError {
    /// An index or range falls outside the series.
    #[error("index out of bounds: {0}")]
    Bounds(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    /// A classifier could not be trained on the supplied samples.
    #[error("training failed: {0}")]
    Training(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    /// Precision/recall is undefined (single-class labels).
    #[error("undefined metric: {0}")]
    UndefinedMetric(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("invalid input: {0}")]
    Input(String),

    #[error("ingestion failed: {0}")]
    Ingestion(String),

    /// A statistic cannot be computed (degenerate series or singular regression).
    #[error("not computable: {0}")]
    NotComputable(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
