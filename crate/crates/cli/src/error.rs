use thiserror::Error;

pub type Result<T, E = CliError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] ipiag::Error),

    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },

    #[error("{path}: {source}")]
    Json { path: String, source: serde_json::Error },
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    /// 0 success, 1 I/O failure, 2 bad configuration, 3 divergence.
    /// Bound-check failures are not errors; the caller maps them to 4.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(ipiag::Error::Diverged { .. } | ipiag::Error::NonFinite { .. }) => 3,
            CliError::Core(ipiag::Error::Io(_)) | CliError::Io { .. } => 1,
            _ => 2,
        }
    }
}

pub(crate) fn io_error(path: &std::path::Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.display().to_string(), source }
}
