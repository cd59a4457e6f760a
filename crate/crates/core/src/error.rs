use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("malformed permutation: {0}")]
    MalformedPermutation(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("invalid index set: {0}")]
    InvalidIndexSet(String),
    #[error("permutation {0} is not layered")]
    NotLayered(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("infeasible problem: {0}")]
    Infeasible(String),
    #[error("hypothesis not satisfied: {0}")]
    Hypothesis(String),
    #[error("{what} = {value} exceeds the cap of {cap}")]
    CapExceeded { what: &'static str, value: u128, cap: u128 },
    #[error("internal inconsistency: {0}")]
    Inconsistency(String),
}
