use thiserror::Error;

/// Failures of a CLI run, each mapped to a fixed exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("computation error: {0}")]
    Computation(String),
    #[error("verification failed: {0}")]
    Verification(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 1,
            Self::Io { .. } | Self::Computation(_) => 2,
            Self::Verification(_) => 3,
        }
    }

    pub fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        Self::Io { path: path.display().to_string(), source }
    }
}

impl From<tractlab_core::Error> for CliError {
    fn from(e: tractlab_core::Error) -> Self {
        Self::Computation(e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

pub fn config_err(field: &str, e: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{field}: {e}"))
}
