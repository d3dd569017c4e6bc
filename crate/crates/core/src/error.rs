use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("correlation undefined: input has zero variance")]
    UndefinedCorrelation,

    #[error("signal '{0}' has no observed values and cannot be imputed")]
    UnfillableSignal(String),

    #[error("contribution undefined: all individual reconstruction errors are zero")]
    UndefinedContribution,

    #[error("degenerate anomaly: first start equals last end")]
    DegenerateAnomaly,

    #[error("consistency score undefined: no anomaly with positive span")]
    UndefinedScore,

    #[error("root-cause analysis requires an anomalous detection result")]
    EmptyReport,

    #[error("duplicate entry '{0}'")]
    DuplicateEntry(String),

    #[error("integrity check failed: {0}")]
    Integrity(String),

    #[error("unsupported model file version {found} (supported: {supported})")]
    UnsupportedVersion { found: u32, supported: u32 },

    #[error("data error: {0}")]
    Data(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
