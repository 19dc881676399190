//! IO, file formats, dataset registry, and benchmark harness around
//! `pinsvm-core`.

pub mod bench;
pub mod io;
pub mod model_file;
pub mod registry;

use std::path::PathBuf;

/// Errors of the IO/benchmark layer.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}:{line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("model file: {0}")]
    ModelFormat(String),
    #[error("dataset {0:?} is not in the registry and no matching file was found")]
    UnknownDataset(String),
    #[error(transparent)]
    Core(#[from] pinsvm_core::Error),
}

impl CliError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        CliError::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }

    /// Infeasibility gets its own exit code in the CLI.
    pub fn is_infeasible(&self) -> bool {
        matches!(
            self,
            CliError::Core(
                pinsvm_core::Error::InfeasibleEquality | pinsvm_core::Error::InfeasibleBox { .. }
            )
        )
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
