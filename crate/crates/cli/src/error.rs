use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("{0}")]
    Validation(String),
    #[error(transparent)]
    Core(#[from] mtsfm_core::Error),
    #[error("line search stalled after {iterations} iterations; results written to {}", dir.display())]
    Stalled { iterations: usize, dir: PathBuf },
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// 0 success, 1 I/O, 2 validation, 3 numerical degeneracy, 4 stall.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } | CliError::Csv { .. } => 1,
            CliError::Validation(_) => 2,
            CliError::Core(e) if e.is_numerical_degeneracy() => 3,
            CliError::Core(mtsfm_core::Error::LineSearchStalled { .. }) => 4,
            CliError::Core(_) => 2,
            CliError::Stalled { .. } => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
