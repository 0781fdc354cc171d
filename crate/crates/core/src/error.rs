use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty input")]
    EmptyInput,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("shape mismatch: expected {expected:?}, found {found:?}")]
    ShapeMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },

    #[error("dilation factor must be nonnegative")]
    NegativeScale,

    #[error("one-parameter subgroup exponents must sum to zero (sum = {0})")]
    NotSumZero(String),

    #[error("zero polynomial")]
    ZeroPolynomial,

    #[error("group element is singular")]
    SingularGroupElement,

    #[error("non-finite value at sample {index}")]
    NonFinite { index: u64 },

    #[error("polynomial is not homogeneous of degree {degree}")]
    NotHomogeneous { degree: u32 },

    #[error("weight polytope unavailable: {0}")]
    PolytopeUnavailable(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn parse(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            location: location.into(),
            message: message.into(),
        }
    }
}
