use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("transition matrix must be square and non-empty (got {rows} rows, row {bad_row} has {cols} entries)")]
    NotSquare {
        rows: usize,
        bad_row: usize,
        cols: usize,
    },
    #[error("row {row} sums to {sum}, expected 1")]
    RowSum { row: usize, sum: f64 },
    #[error("entry ({row}, {col}) = {value} is negative or not finite")]
    NegativeEntry { row: usize, col: usize, value: f64 },
    #[error("transition graph is not strongly connected")]
    NotIrreducible,
    #[error("transition graph is periodic with period {period}")]
    NotAperiodic { period: usize },
    #[error("{what} did not converge after {iterations} iterations (residual {residual:e})")]
    Convergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },
    #[error("state {state} out of range for a chain with {m} states")]
    StateOutOfRange { state: usize, m: usize },
    #[error("size too small: {0}")]
    SizeTooSmall(String),
    #[error("graph still disconnected after {attempts} attempts")]
    Disconnected { attempts: usize },
    #[error("{count} paths exceed the enumeration limit of {limit}")]
    TooManyPaths { count: f64, limit: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },
    #[error("could not invert the parametric curve at beta = {beta}: {reason}")]
    Inversion { beta: f64, reason: String },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }
}
