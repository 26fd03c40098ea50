use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("dataset: {0}")]
    Dataset(String),

    #[error("invalid trial {trial}: {msg}")]
    InvalidTrial { trial: String, msg: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("no sample reaches the {threshold} N stance threshold")]
    EmptyStance { threshold: f64 },

    #[error("degenerate waveform: {0}")]
    DegenerateWaveform(String),

    #[error("unsupported combination: {0}")]
    Unsupported(String),

    #[error("training: {0}")]
    Training(String),

    #[error("aggregation: {0}")]
    Aggregation(String),

    #[error("statistics: {0}")]
    Statistics(String),

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Wraps the error with an identifying prefix (trial, subject, fold...).
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    /// Process exit code for this error kind (distinct per kind; 2 is also
    /// clap's usage-error code).
    pub fn exit_code(&self) -> i32 {
        match self.root() {
            Error::InvalidArgument(_) => 2,
            Error::Io { .. } => 3,
            Error::Parse { .. } => 4,
            Error::Dataset(_) => 5,
            Error::InvalidTrial { .. } => 6,
            Error::EmptyStance { .. } => 7,
            Error::DegenerateWaveform(_) => 8,
            Error::Unsupported(_) => 9,
            Error::Training(_) => 10,
            Error::Aggregation(_) => 11,
            Error::Statistics(_) => 12,
            Error::Context { .. } => unreachable!("root() strips context"),
        }
    }

    /// Innermost error, skipping context wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Context { source, .. } => source.root(),
            other => other,
        }
    }
}

pub(crate) trait ResultExt<T> {
    fn context_with<F: FnOnce() -> String>(self, f: F) -> Result<T>;
}

impl<T> ResultExt<T> for Result<T> {
    fn context_with<F: FnOnce() -> String>(self, f: F) -> Result<T> {
        self.map_err(|e| e.context(f()))
    }
}
