use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("checkpoint {path}: {reason}")]
    Checkpoint { path: PathBuf, reason: String },

    #[error("CSV output: {0}")]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Library(#[from] ttrace::Error),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    /// 1 for configuration, I/O and checkpoint problems; 2 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Library(e) => match e {
                ttrace::Error::Io(_) | ttrace::Error::Format(_) | ttrace::Error::DenseCapExceeded { .. } => 1,
                _ => 2,
            },
            _ => 1,
        }
    }
}
