use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    /// A required artifact is missing; `stage` names the command that makes it.
    #[error("{what} not found at {path}; run `faultlens {stage}` first")]
    Missing {
        what: String,
        path: String,
        stage: &'static str,
    },

    /// An artifact was produced under a different configuration or from
    /// different inputs.
    #[error("{what} is stale (made with config hash {found}, expected {expected}); rerun `faultlens {stage}`")]
    Stale {
        what: String,
        found: String,
        expected: String,
        stage: &'static str,
    },

    #[error("data error: {0}")]
    Data(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Missing { .. } | CliError::Stale { .. } => 3,
            CliError::Data(_) => 4,
        }
    }
}

impl From<faultlens::Error> for CliError {
    fn from(e: faultlens::Error) -> Self {
        match e {
            faultlens::Error::Config(m) | faultlens::Error::Parameter(m) => CliError::Config(m),
            other => CliError::Data(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Data(e.to_string())
    }
}
