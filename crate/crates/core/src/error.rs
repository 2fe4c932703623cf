use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("index {index} out of range for {len} points")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("invalid epsilon {0}: must lie in (0, 1]")]
    InvalidEpsilon(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid point set: {0}")]
    InvalidPointSet(String),

    #[error("invalid range: {0}")]
    InvalidRange(String),

    #[error("invalid ratios: {0}")]
    InvalidRatios(String),

    #[error("group {0} has no points")]
    EmptyGroup(usize),

    #[error("subset is empty")]
    EmptySubset,

    #[error("group {color} needs {needed} distinct points but only {available} exist")]
    InsufficientColorPoints {
        color: usize,
        needed: usize,
        available: usize,
    },

    #[error("weights sum to {0}, expected 1")]
    UnnormalizedWeights(f64),

    #[error("group {color} has odd count {count} in the working set")]
    OddColorCount { color: usize, count: usize },

    #[error("{what} = {value} is not a power of two")]
    NotPowerOfTwo { what: String, value: usize },

    #[error("leaf size 2^{exponent} incompatible with instance: {reason}")]
    LeafSizeIncompatible { exponent: u32, reason: String },

    #[error("range {0} contains no points")]
    EmptyRange(usize),

    #[error("linear program is infeasible (violated constraint {row:?})")]
    LpInfeasible { row: Option<usize> },

    #[error("linear program is unbounded")]
    LpUnbounded,

    #[error("no hitting sample accepted after {0} attempts")]
    RetriesExhausted(usize),

    #[error("numerical breakdown: {0}")]
    NumericalBreakdown(String),

    #[error("instance too large for exhaustive search: {size} > {limit}")]
    InstanceTooLarge { size: usize, limit: usize },

    #[error("bad color distribution: {0}")]
    BadDistribution(String),

    #[error("too many attributes: {0} (limit 20)")]
    TooManyAttributes(usize),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
