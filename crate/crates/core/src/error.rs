use thiserror::Error;

/// Errors raised by the simulation core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum LabError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("unphysical configuration: {quantity} = {value}")]
    Unphysical { quantity: &'static str, value: f64 },
    #[error("singular configuration: {0}")]
    Singular(String),
    #[error("inconsistent knowledge: {0}")]
    InconsistentKnowledge(String),
    #[error("classification failed: {0}")]
    Classification(String),
}

pub type Result<T> = std::result::Result<T, LabError>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(LabError::InvalidArgument(msg.into()))
}
