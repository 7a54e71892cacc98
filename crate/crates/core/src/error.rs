use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("division by zero in the field")]
    DivisionByZero,

    #[error("invalid field: {0}")]
    InvalidField(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid degree {degree} (allowed range 0..={max})")]
    InvalidDegree { degree: usize, max: usize },

    #[error("index {index} out of range 1..={max}")]
    IndexOutOfRange { index: usize, max: usize },

    #[error("polynomials or oracles live over different fields or variable counts")]
    ContextMismatch,

    #[error("state of {requested} amplitudes exceeds the memory cap of {cap}")]
    MemoryLimitExceeded { requested: u128, cap: usize },

    #[error("exhaustive budget exceeded: {requested} > {budget}")]
    BudgetExceeded { requested: u128, budget: u128 },

    #[error("oracle is not affine: top measurement probability {probability}")]
    PromiseViolated { probability: f64 },

    #[error("inconsistent coefficient determinations: {0}")]
    InconsistentCoefficients(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by a size guard rather than bad input or a wrong answer.
    pub fn is_resource_limit(&self) -> bool {
        matches!(self, Error::MemoryLimitExceeded { .. } | Error::BudgetExceeded { .. })
    }
}
