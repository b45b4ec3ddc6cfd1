use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("degenerate simplex: points are affinely dependent")]
    Degenerate,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("index {index} out of range 1..={max}")]
    IndexOutOfRange { index: usize, max: usize },
    #[error("repeated index {0} in tuple")]
    RepeatedIndex(usize),
    #[error("not a half-integer >= 1/2: {0}")]
    NotHalfInteger(String),
    #[error("degenerate equation: zero normal vector")]
    DegenerateEquation,
    #[error("chirotope shape mismatch: ({d1}, {n1}) vs ({d2}, {n2})")]
    ShapeMismatch {
        d1: usize,
        n1: usize,
        d2: usize,
        n2: usize,
    },
    #[error("coordinate {value} of point {point} is not a multiple of 1/{m}")]
    OffGrid {
        point: usize,
        value: String,
        m: String,
    },
    #[error("coordinate {value} of point {point} lies outside [-1, 1]")]
    OutOfRange { point: usize, value: String },
    #[error("malformed encoding: {0}")]
    Encoding(String),
    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("sampler fault: {0} consecutive rejections")]
    RngFault(usize),
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
