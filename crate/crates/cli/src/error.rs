use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config parse error: {0}")]
    ConfigParse(String),
    #[error("invalid input: {0}")]
    Validation(String),
    #[error("i/o failure: {0}")]
    Io(String),
    #[error(transparent)]
    Core(#[from] warped::Error),
}

impl CliError {
    /// Every error is a rejected run; claim failures are reported separately.
    pub fn exit_code(&self) -> i32 {
        2
    }
}
