use std::io;
use std::path::PathBuf;

/// Errors raised by file formats, ingestion and the command line.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },

    #[error(transparent)]
    Stream(#[from] io::Error),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Core(#[from] borrowtag_core::Error),

    #[error("unsupported model format: {0}")]
    Version(String),

    #[error("model file ends early: {0}")]
    Truncated(String),

    #[error("model dimensions inconsistent: {0}")]
    Dimension(String),

    #[error("feed: {0}")]
    Feed(String),

    #[error("config: {0}")]
    Config(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Self::Parse {
            line,
            msg: msg.into(),
        }
    }

    pub(crate) fn at(path: impl Into<PathBuf>) -> impl FnOnce(io::Error) -> Self {
        let path = path.into();
        move |source| Self::Io { path, source }
    }
}
