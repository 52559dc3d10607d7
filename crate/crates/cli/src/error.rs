//! Harness errors, classified by exit code.

/// Errors with their CLI exit-code class: configuration problems exit 2,
/// data problems exit 3, exceeded enumeration budgets exit 4.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("budget exceeded: {0}")]
    Budget(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) | CliError::Io { .. } => 3,
            CliError::Budget(_) => 4,
        }
    }
}

impl From<folio_core::Error> for CliError {
    fn from(e: folio_core::Error) -> Self {
        match e {
            folio_core::Error::BudgetExceeded { .. } => CliError::Budget(e.to_string()),
            folio_core::Error::InvalidData(_) | folio_core::Error::Io { .. } => {
                CliError::Data(e.to_string())
            }
            folio_core::Error::Dimension(_) | folio_core::Error::InvalidArgument(_) => {
                CliError::Config(e.to_string())
            }
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
