use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("factor count mismatch: expected {expected}, got {got}")]
    FactorMismatch { expected: usize, got: usize },

    #[error("matrix {index} has determinant {det}, expected 1")]
    NotSpecialLinear { index: usize, det: String },

    #[error("modular evaluation requires integer tensor entries")]
    NonIntegerTensor,

    #[error("{modulus} is not usable as a modulus here: {reason}")]
    BadModulus { modulus: u64, reason: String },

    #[error("could not reach full rank {target} after {tried} candidates (reached {reached})")]
    BasisStalled {
        target: usize,
        reached: usize,
        tried: usize,
    },

    #[error("monomial interpolation limited to degree <= {max}, got {got}")]
    DegreeGuard { max: usize, got: usize },

    #[error("modular ranks disagree across primes: {0:?}")]
    RankInstability(Vec<(u64, usize)>),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::Invalid(msg.into())
}
