use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not positive definite (pivot {index} = {pivot:e})")]
    NotPositiveDefinite { index: usize, pivot: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("unknown floating-point format `{0}`")]
    UnknownFormat(String),

    #[error("invalid format: {exponent_bits} exponent bits, {mantissa_bits} mantissa bits")]
    InvalidFormat {
        exponent_bits: u32,
        mantissa_bits: u32,
    },

    #[error("invalid problem: {0}")]
    InvalidProblem(String),
}

pub type Result<T> = std::result::Result<T, Error>;
