use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum HofaError {
    #[error("group needs at least one cyclic factor")]
    EmptyFactors,
    #[error("cyclic factor {0} is not a positive integer")]
    InvalidFactor(i64),
    #[error("{what} = {size} exceeds the size cap {cap}")]
    SizeCap {
        what: &'static str,
        size: u128,
        cap: u128,
    },
    #[error("arity mismatch: expected {expected}, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("element residue {residue} out of range for factor {factor}")]
    Residue { residue: u64, factor: usize },
    #[error("operands live on different groups")]
    GroupMismatch,
    #[error("element list is not closed under the group law")]
    NotSubgroup,
    #[error("kernel is not self-adjoint (deviation {0:e})")]
    NotSelfAdjoint(f64),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("internal consistency error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, HofaError>;

pub(crate) fn invalid(msg: impl Into<String>) -> HofaError {
    HofaError::InvalidArgument(msg.into())
}
