/// Failures of a command, mapped to process exit codes.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Unreadable or malformed input. Exit code 2.
    #[error("input error: {0}")]
    Input(String),
    /// The computation aborted or the two methods disagree. Exit code 3.
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Internal(_) => 3,
        }
    }
}
