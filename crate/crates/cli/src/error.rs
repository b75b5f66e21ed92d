use std::process::ExitCode;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] polykit::Error),

    /// Unreadable or undecodable input.
    #[error("{0}")]
    Input(String),

    /// Readable input that fails validation.
    #[error("{0}")]
    Invalid(String),
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        CliError::Input(message.into())
    }

    pub fn invalid(message: impl Into<String>) -> Self {
        CliError::Invalid(message.into())
    }

    /// 2 for input/IO problems, 1 for everything else.
    pub fn exit_code(&self) -> ExitCode {
        let input = match self {
            CliError::Core(e) => e.is_input_error(),
            CliError::Input(_) => true,
            CliError::Invalid(_) => false,
        };
        ExitCode::from(if input { 2 } else { 1 })
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Input(e.to_string())
    }
}
