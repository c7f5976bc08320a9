//! Toolkit-wide error type and the exit-code mapping used by the CLI.

use std::path::PathBuf;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Invalid configuration: bad hyperparameters, malformed config files,
    /// unusable specs.
    #[error("config error: {0}")]
    Config(String),

    /// Data ingestion or dataset construction failed.
    #[error("data error: {0}")]
    Data(String),

    /// Shape or dimension mismatch at an API boundary.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// Model training failed.
    #[error("training error: {0}")]
    Training(String),

    /// Report generation or artifact validation failed.
    #[error("report error: {0}")]
    Report(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    /// An error tagged with the pipeline stage it occurred in.
    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Wrap this error with the name of the pipeline stage that produced it.
    pub fn at_stage(self, stage: &'static str) -> Self {
        match self {
            Error::Stage { .. } => self,
            other => Error::Stage {
                stage,
                source: Box::new(other),
            },
        }
    }

    /// Process exit code for the CLI: 0 success, 2 config, 3 data, 4 training,
    /// 5 report.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Shape(_) => 2,
            Error::Data(_) | Error::Io { .. } => 3,
            Error::Training(_) => 4,
            Error::Report(_) => 5,
            Error::Stage { source, .. } => source.exit_code(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
