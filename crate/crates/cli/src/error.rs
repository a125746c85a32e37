use thiserror::Error;

/// Failures mapped onto the process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Schema(String),
    #[error("numeric failure: {0}")]
    Numeric(#[from] brittle_core::Error),
    #[error("output: {0}")]
    Output(String),
    #[error("oracle `{name}` failed")]
    Oracle { name: String, code: u8 },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Schema(_) => 2,
            CliError::Numeric(_) | CliError::Output(_) => 1,
            CliError::Oracle { code, .. } => *code,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Output(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Output(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Output(e.to_string())
    }
}
