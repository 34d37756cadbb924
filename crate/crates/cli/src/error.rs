use carpet_core::CarpetError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] CarpetError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("every row of the table failed")]
    AllRowsFailed,
    /// The partial report has already been written.
    #[error("solver did not converge; partial report written")]
    Incomplete,
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(CarpetError::BudgetExceeded { .. }) => 3,
            CliError::AllRowsFailed => 4,
            CliError::Incomplete | CliError::Core(CarpetError::NotConverged(_)) => 5,
            _ => 1,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
