use std::io;
use std::path::PathBuf;

use chanocc_core::sim::SimError;
use chanocc_core::tracekit::TraceError;
use chanocc_core::NodeId;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{}: {source}", path.display())]
    Trace { path: PathBuf, source: TraceError },
    #[error("node {node}: {source}")]
    NodeTrace { node: NodeId, source: Box<Error> },
    #[error("{}: {message}", path.display())]
    Scenario { path: PathBuf, message: String },
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    TraceOp(#[from] TraceError),
    #[error("{0}")]
    Invalid(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// 1 for bad input (files, arguments, scenario contents), 2 for failures
    /// while doing the work.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } => 2,
            Error::NodeTrace { source, .. } => source.exit_code(),
            _ => 1,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
