use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    #[error("malformed results file {path}: {message}")]
    Results { path: PathBuf, message: String },
    #[error(transparent)]
    Engine(#[from] svqmc::Error),
    #[error("{0} experiment row(s) failed")]
    RowsFailed(usize),
    #[error("{0} expectation(s) failed")]
    Verification(usize),
}

impl CliError {
    /// Process exit code: 1 usage, 2 numerical failure, 3 failed verification.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Read { .. } | CliError::Write { .. } | CliError::Results { .. } => 1,
            CliError::Engine(svqmc::Error::Config(_)) => 1,
            CliError::Engine(_) | CliError::RowsFailed(_) => 2,
            CliError::Verification(_) => 3,
        }
    }
}

pub fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}
