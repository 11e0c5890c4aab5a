use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Library(#[from] lpball::Error),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("report format error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("report has no quantity '{0}'")]
    UnknownQuantity(String),
}

pub type CliResult<T> = std::result::Result<T, CliError>;
