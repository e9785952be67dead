use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("malformed interval [{lo}, {hi}]")]
    MalformedInterval { lo: f64, hi: f64 },

    #[error("interval division by an interval containing zero")]
    DivisionByZeroInterval,

    #[error("domain error: {0}")]
    Domain(String),

    #[error("parse error at offset {position}: {message}")]
    Parse { position: usize, message: String },

    #[error("evaluation error: {0}")]
    Eval(String),

    #[error("unbound parameter `{0}`")]
    UnboundParameter(String),

    #[error("duplicate parameter `{0}`")]
    DuplicateParameter(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("non-finite matrix entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("noise value {value} for symbol {symbol} lies outside [-1, 1]")]
    OutOfBox { symbol: usize, value: f64 },

    #[error("negative radius {0}")]
    NegativeRadius(f64),

    #[error("vertex budget exceeded: 2^{symbols} vertices, cap is 2^{cap}")]
    VertexBudgetExceeded { symbols: usize, cap: usize },

    #[error("family is not symmetric (max asymmetry {asymmetry:e}, tolerance {tolerance:e})")]
    NotSymmetric { asymmetry: f64, tolerance: f64 },

    #[error("matrix is singular (pivot {pivot:e} below threshold {threshold:e})")]
    SingularMatrix { pivot: f64, threshold: f64 },

    #[error("{routine} did not converge after {iterations} iterations")]
    NoConvergence {
        routine: &'static str,
        iterations: usize,
    },

    #[error("matrix has a negative entry {value} at ({row}, {col})")]
    NotNonnegative { row: usize, col: usize, value: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
