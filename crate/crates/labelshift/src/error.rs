use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    File {
        path: PathBuf,
        #[source]
        source: Box<Error>,
    },

    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },

    #[error("line {line}: {source}")]
    Invalid {
        line: usize,
        #[source]
        source: labelshift_core::Error,
    },

    #[error("cannot write {0}")]
    Unrepresentable(String),

    #[error("remote embedding service: {0}")]
    Remote(String),

    #[error(transparent)]
    Core(#[from] labelshift_core::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn syntax(line: usize, message: impl Into<String>) -> Self {
        Error::Syntax {
            line,
            message: message.into(),
        }
    }

    pub(crate) fn in_file(self, path: impl Into<PathBuf>) -> Self {
        Error::File {
            path: path.into(),
            source: Box::new(self),
        }
    }

    /// True for failures of the computation itself, as opposed to bad
    /// input files, IO or transport problems.
    pub fn is_computation(&self) -> bool {
        match self {
            Error::File { source, .. } => source.is_computation(),
            Error::Core(_) => true,
            _ => false,
        }
    }
}
