use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// The config could not be read or parsed.
    #[error("config error: {0}")]
    Config(String),

    /// The config parsed but violates a domain invariant.
    #[error("validation error: {0}")]
    Validation(String),

    #[error("size limit: {0}")]
    SizeLimit(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Validation(_) => 3,
            CliError::SizeLimit(_) => 4,
            CliError::Io(_) | CliError::Csv(_) => 1,
        }
    }

    pub(crate) fn at(path: &str, err: dynkin_core::Error) -> Self {
        match err {
            dynkin_core::Error::SizeLimit(m) => CliError::SizeLimit(format!("{path}: {m}")),
            other => CliError::Validation(format!("{path}: {other}")),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
