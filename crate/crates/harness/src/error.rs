use kljn_lab::LabError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid experiment: {}", .0.join("; "))]
    Validation(Vec<String>),
    #[error(transparent)]
    Lab(#[from] LabError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("malformed report: {0}")]
    Parse(String),
}

impl HarnessError {
    /// Process exit code: 2 for bad input, 1 for failures while running.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Validation(_) | Self::Lab(LabError::InvalidArgument(_)) => 2,
            _ => 1,
        }
    }
}
