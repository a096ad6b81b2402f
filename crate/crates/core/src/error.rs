use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("point is within {margin:e} of the simplex boundary (min coordinate {min:e})")]
    Boundary { min: f64, margin: f64 },

    #[error("singular mean: {0}")]
    SingularMean(String),

    #[error("graph is disconnected; restricted L(Theta) is singular")]
    Disconnected,

    #[error("eigensolver failure: {0}")]
    Eigen(String),

    #[error("integral diverges: {0}")]
    Divergence(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("assumption violated: {0}")]
    AssumptionViolated(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
