use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{op}: dimension {n} exceeds cap {cap}")]
    DimensionCap {
        op: &'static str,
        n: usize,
        cap: usize,
    },

    #[error("matrix is not {expected}: entry ({row}, {col}) violates the structure")]
    KindViolation {
        expected: &'static str,
        row: usize,
        col: usize,
    },

    #[error("{op} requires a {expected} matrix")]
    WrongKind {
        op: &'static str,
        expected: &'static str,
    },

    #[error("{op} requires an even dimension, got {n}")]
    OddDimension { op: &'static str, n: usize },

    #[error("{op}: non-finite floating point value")]
    NonFinite { op: &'static str },

    #[error("size mismatch: {0}")]
    SizeMismatch(String),

    #[error("matrix is not positive semi-definite")]
    NotPsd,

    #[error("matrix is not positive definite")]
    NotPosDef,

    #[error("interpolation nodes are not distinct")]
    DuplicateNodes,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("optimizer found no feasible start with nonzero product")]
    NoFeasibleStart,

    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
