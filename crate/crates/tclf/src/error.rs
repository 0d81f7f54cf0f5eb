use std::fmt;
use std::path::PathBuf;

use thiserror::Error;

/// A problem with one input row, located by line and (when known) column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowError {
    pub line: u64,
    pub column: Option<String>,
    pub message: String,
}

impl fmt::Display for RowError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.column {
            Some(c) => write!(f, "line {}, column {c}: {}", self.line, self.message),
            None => write!(f, "line {}: {}", self.line, self.message),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("schema error: {0}")]
    Schema(String),
    #[error("{} row error(s) in {}:\n{}", errors.len(), source_name, join(errors))]
    Rows { source_name: String, errors: Vec<RowError> },
    #[error("conflicting duplicate records: {0}")]
    Conflict(String),
    #[error("no SST data within 5 degrees and 31 days for {} record(s): {}", .0.len(), .0.join(", "))]
    UnresolvedSst(Vec<String>),
    #[error("unsupported model file version: {0}")]
    Version(String),
    #[error("corrupted model file: {0}")]
    Corrupt(String),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] tclf_core::Error),
    #[error("internal error: {0}")]
    Internal(String),
}

fn join(errors: &[RowError]) -> String {
    errors.iter().map(|e| format!("  {e}")).collect::<Vec<_>>().join("\n")
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// 1 for internal faults, 2 for anything the user can fix.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Internal(_) | Error::Core(tclf_core::Error::TrainingFault { .. }) => 1,
            _ => 2,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
