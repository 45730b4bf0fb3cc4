use std::path::{Path, PathBuf};

/// Errors from ingestion, export and the CLI.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("{path}:{line}: {message}")]
    Row {
        path: PathBuf,
        line: u64,
        message: String,
    },
    #[error("{path}: unrecognized header; expected day,time,label,price or day,time,<label>...")]
    Header { path: PathBuf },
    #[error("configuration: {0}")]
    Config(String),
    #[error("output directory {path} is not writable: {source}")]
    Unwritable {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("no complete day found in the input")]
    NoDays,
    #[error("{0}")]
    Core(#[from] emdx_core::Error),
    #[error("day {day}: {source}")]
    Day {
        day: String,
        #[source]
        source: emdx_core::Error,
    },
    #[error("{0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        Error::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
