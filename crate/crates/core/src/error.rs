use thiserror::Error;

/// Errors shared by all modules of the crate.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("symbol {symbol} out of range for alphabet of size {alphabet}")]
    SymbolOutOfRange { symbol: usize, alphabet: usize },

    #[error("empty relation at row {row}")]
    EmptyRelation { row: usize },

    #[error("relation arity mismatch: expected {expected}, got {got}")]
    ArityMismatch { expected: usize, got: usize },

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("invalid solution: {0}")]
    InvalidSolution(String),

    #[error("work ceiling exceeded: estimated {estimated} states > ceiling {ceiling}")]
    WorkCeilingExceeded { estimated: u128, ceiling: u128 },

    #[error("oracle size guard exceeded: estimated {estimated} states > guard {guard}")]
    OracleGuardExceeded { estimated: u128, guard: u128 },
}

pub type Result<T> = std::result::Result<T, Error>;
