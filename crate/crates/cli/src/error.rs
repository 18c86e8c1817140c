use magnify_core::Error as CoreError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("config: {0}")]
    Config(String),

    #[error("validity: {0}")]
    Validity(String),

    #[error("check failed: {0}")]
    Check(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// Process exit code: 1 usage/config, 2 validity range, 3 failed check.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config(_) | CliError::Io(_) => 1,
            CliError::Validity(_) => 2,
            CliError::Check(_) => 3,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Validity(_) | CoreError::Capacity(_) => CliError::Validity(e.to_string()),
            CoreError::InvalidParam { .. } | CoreError::Domain(_) => CliError::Config(e.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
