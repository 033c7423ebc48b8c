use thiserror::Error;
use wickward::anomaly::AnomalyError;
use wickward::dsl::DslError;
use wickward::ward::WardError;
use wickward::{FieldError, WickError};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("config: {0}")]
    Config(String),
    #[error("{0}: {1}")]
    Io(String, std::io::Error),
    #[error(transparent)]
    Dsl(#[from] DslError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Wick(#[from] WickError),
    #[error(transparent)]
    Ward(#[from] WardError),
    #[error(transparent)]
    Anomaly(#[from] AnomalyError),
    #[error("serialization: {0}")]
    Json(#[from] serde_json::Error),
}
