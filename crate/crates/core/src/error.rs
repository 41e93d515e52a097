use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("out of range: {0}")]
    OutOfRange(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("point {0} is not a grid boundary")]
    UnsupportedPoint(String),

    #[error("truncation overflow: nonzero component of degree {degree} exceeds truncation {truncation}")]
    TruncationOverflow { degree: usize, truncation: usize },

    #[error("operator on cell {cell} is not L_M(t_{boundary})-measurable: {detail}")]
    MeasurabilityViolation {
        cell: usize,
        boundary: usize,
        detail: String,
    },

    #[error("integrand is not adapted on cell {cell}: {detail}")]
    NotAdapted { cell: usize, detail: String },

    #[error("not representable by the discrete chaos map: multiset {0:?} repeats a cell")]
    NotRepresentable(Vec<u32>),

    #[error("serialization: {0}")]
    Serialization(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serialization(e.to_string())
    }
}
