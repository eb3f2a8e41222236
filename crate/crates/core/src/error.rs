use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("size limit exceeded: {0}")]
    SizeLimit(String),
    #[error("capability: {0}")]
    Capability(String),
    #[error("index {index} out of range (order {order})")]
    IndexOutOfRange { index: String, order: String },
    #[error("solver: {0}")]
    Solver(#[from] crate::l1_solver::SolveError),
    #[error("cache file: {0}")]
    Cache(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
