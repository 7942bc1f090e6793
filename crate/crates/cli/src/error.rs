use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("cannot start: {0}")]
    BadStart(String),
    #[error("trajectory left the domain at t = {t} (before t_end/2 = {half})")]
    Partial { t: f64, half: f64 },
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] magflow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Partial { .. } => 3,
            CliError::BadStart(_) => 4,
            CliError::Verification(_) => 5,
            CliError::Io { .. } => 1,
            CliError::Core(e) => match e {
                magflow::Error::InvalidConfig(_)
                | magflow::Error::UnknownExample(_)
                | magflow::Error::Overflow { .. } => 2,
                _ => 1,
            },
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
