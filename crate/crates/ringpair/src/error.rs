use std::path::PathBuf;

use thiserror::Error;

/// Process exit status for a failure class.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitCode {
    /// Bad flags, malformed or invalid input.
    Usage = 2,
    /// The model or a fit could not produce a result.
    Model = 3,
    /// Reading or writing a file failed.
    Io = 4,
}

/// Failures of the file formats and the command-line tool.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: file not found", path.display())]
    MissingInput { path: PathBuf },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: invalid `{field}`: {reason}", path.display())]
    Config {
        path: PathBuf,
        field: String,
        reason: String,
    },

    #[error("{}:{line}: {reason}", path.display())]
    Parse {
        path: PathBuf,
        line: u64,
        reason: String,
    },

    #[error("{}: empty series, no data rows", path.display())]
    EmptySeries { path: PathBuf },

    #[error("invalid argument `{name}`: {reason}")]
    Argument { name: &'static str, reason: String },

    #[error("fit did not converge after {iterations} iterations")]
    NotConverged { iterations: usize },

    #[error(transparent)]
    Model(#[from] ringpair_core::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        let path = path.into();
        if source.kind() == std::io::ErrorKind::NotFound {
            Error::MissingInput { path }
        } else {
            Error::Io { path, source }
        }
    }

    /// How the command-line tool reports this failure.
    pub fn exit_code(&self) -> ExitCode {
        use ringpair_core::Error as Core;
        match self {
            Error::Io { .. } => ExitCode::Io,
            Error::MissingInput { .. }
            | Error::Config { .. }
            | Error::Parse { .. }
            | Error::EmptySeries { .. }
            | Error::Argument { .. } => ExitCode::Usage,
            Error::NotConverged { .. } => ExitCode::Model,
            Error::Model(e) => match e {
                Core::Domain { .. } | Core::Invalid { .. } | Core::Unsorted { .. } => ExitCode::Usage,
                Core::NoDip { .. } | Core::Degenerate(_) | Core::InsufficientCounts(_) => ExitCode::Model,
            },
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
