use thiserror::Error;

/// Errors produced by instance parsing, the pheromone field and the solvers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("unsupported format: {0}")]
    Unsupported(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("not a permutation of 0..{0}")]
    NotPermutation(usize),

    #[error("construction failed: {0}")]
    ConstructionFailed(String),

    #[error("algorithm `{algorithm}` cannot solve problem `{problem}`")]
    Incompatible { algorithm: String, problem: String },

    #[error("i/o error on {path}: {msg}")]
    Io { path: String, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
