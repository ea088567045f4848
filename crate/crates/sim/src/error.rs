use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    /// A configuration field is out of range or inconsistent.
    #[error("invalid {field}: {reason}")]
    Config { field: &'static str, reason: String },
    /// A buffer handed to a signal-processing step has the wrong shape.
    #[error("invalid input: {0}")]
    Input(String),
    #[error(transparent)]
    Coding(#[from] turbofec::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type SimResult<T> = Result<T, SimError>;

impl SimError {
    pub fn config(field: &'static str, reason: impl Into<String>) -> Self {
        SimError::Config {
            field,
            reason: reason.into(),
        }
    }

    pub fn input(reason: impl Into<String>) -> Self {
        SimError::Input(reason.into())
    }

    /// Process exit code: 1 for configuration problems, 2 for failures
    /// while running.
    pub fn exit_code(&self) -> i32 {
        match self {
            SimError::Config { .. } => 1,
            SimError::Coding(turbofec::Error::Unsupported(_)) => 1,
            _ => 2,
        }
    }
}
