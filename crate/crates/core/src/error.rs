use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}:{line}: {message}")]
    Load {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{path}: file contains no examples")]
    EmptyFile { path: PathBuf },

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("model request failed after {attempts} attempt(s): {message}")]
    Client { attempts: u32, message: String },

    #[error("report error: {0}")]
    Report(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors raised before any model call (bad config, unreadable data).
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::Load { .. } | Error::EmptyFile { .. } | Error::Argument(_) | Error::Config(_)
        )
    }
}
