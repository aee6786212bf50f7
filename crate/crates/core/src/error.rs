use thiserror::Error;

/// Errors raised by the `lsigma` operations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid exponent {0}")]
    InvalidExponent(f64),

    #[error("{name} = {value} is out of range")]
    OutOfRange { name: &'static str, value: f64 },

    #[error("invalid distortion: {0}")]
    InvalidDistortion(String),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("invalid slot coupling: {0}")]
    InvalidCoupling(String),

    #[error("random variable is identically zero")]
    ZeroVariable,

    #[error("variables live on different probability spaces")]
    SpaceMismatch,

    #[error(
        "rearrangement over unequal atom weights in dimension > 1 needs atom splitting \
         (an optimal-transport problem) and is not supported"
    )]
    UnequalWeights,

    #[error("problem size {n} exceeds the oracle limit {max}")]
    TooLarge { n: usize, max: usize },

    #[error("envelope refinement did not settle within {points} probe points")]
    RefinementDiverged { points: usize },

    #[error("certificate gap {gap:e} exceeds the allowed {allowed:e}")]
    CertificateGap {
        gap: f64,
        allowed: f64,
        certificate: Box<crate::dual::DualityCertificate>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
