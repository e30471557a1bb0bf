use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("{0} qubits exceeds the supported maximum of {1}")]
    TooManyQubits(usize, usize),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid lattice: {0}")]
    Lattice(String),

    #[error("invalid model: {0}")]
    Model(String),

    #[error("partition precondition violated: {0}")]
    Partition(String),

    #[error("solver failure: {0}")]
    Solver(String),

    #[error("undefined quantity: {0}")]
    Undefined(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dims(left: usize, right: usize) -> Result<()> {
    if left == right {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { left, right })
    }
}
