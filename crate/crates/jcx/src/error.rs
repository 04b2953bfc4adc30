use std::path::PathBuf;

/// Everything the command line can fail with, grouped by exit code.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] jcx_core::Error),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}:{line}:{column}: {msg}", path.display())]
    Parse { path: PathBuf, line: usize, column: usize, msg: String },
    /// A well-formed file whose content the core rejects.
    #[error("{}: {source}", path.display())]
    Model { path: PathBuf, source: jcx_core::Error },
    #[error("{0}")]
    Usage(String),
    #[error("output: {0}")]
    Output(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// 2 input, 3 numeric, 4 capacity.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Core(e) | Error::Model { source: e, .. } => match e {
                jcx_core::Error::Numeric(_) | jcx_core::Error::Pole(_) => 3,
                jcx_core::Error::Capacity(_) => 4,
                jcx_core::Error::Input(_) => 2,
            },
            _ => 2,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Output(e.to_string())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Output(e.to_string())
    }
}
