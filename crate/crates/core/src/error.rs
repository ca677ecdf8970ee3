use thiserror::Error;

/// Errors produced by construction, enumeration, optimization and estimation.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid code parameters: {0}")]
    InvalidParams(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },

    #[error("entry ({row}, {col}) = {value} outside allowed range {allowed}")]
    EntryOutOfRange {
        row: usize,
        col: usize,
        value: i64,
        allowed: String,
    },

    #[error("entry ({row}, {col}) is absent from the base support")]
    AbsentEntry { row: usize, col: usize },

    #[error("unsupported cycle half-length g = {0} (expected 2, 3 or 4)")]
    UnsupportedHalfLength(usize),

    #[error("normalization constant is zero: the object list is empty")]
    EmptyObjective,

    #[error("initial vector is infeasible: {0}")]
    Infeasible(String),

    #[error("index is stale: built over {built} objects, list has {actual}")]
    StaleIndex { built: usize, actual: usize },

    #[error("tuple cardinality d = {d} exceeds the number of entries {entries}")]
    TupleTooLarge { d: usize, entries: usize },

    #[error("probability mass function is not normalized (sum = {0})")]
    Unnormalized(f64),

    #[error("state space too large for exhaustive search: {0}")]
    TooLarge(String),

    #[error("fit rejected: {0}")]
    FitRejected(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("I/O error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
