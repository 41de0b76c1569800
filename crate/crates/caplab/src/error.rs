use std::path::Path;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("config: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{0}")]
    Format(String),
    #[error(transparent)]
    Core(caplab_core::Error),
}

impl Error {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Error::Io { path: path.display().to_string(), source }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Format(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<caplab_core::Error> for Error {
    fn from(e: caplab_core::Error) -> Self {
        match e {
            caplab_core::Error::Config(m) => Error::Config(m),
            e => Error::Core(e),
        }
    }
}
