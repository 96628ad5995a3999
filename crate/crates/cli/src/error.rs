use std::fmt::Display;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid config: {0}")]
    Schema(String),

    #[error("validity check failed: {0} (rerun with --force to proceed)")]
    Validity(String),

    #[error(transparent)]
    Core(#[from] aqme_core::Error),

    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn schema(field: &str, detail: impl Display) -> Self {
        CliError::Schema(format!("{field}: {detail}"))
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Schema(_) => 2,
            CliError::Validity(_) => 3,
            CliError::Core(_) | CliError::Io(_) => 1,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
