use thiserror::Error;

/// Errors raised by the walk toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("component index must be 1 or 2, got {0}")]
    InvalidComponent(usize),

    #[error("norm exponent must satisfy p >= 1, got {0}")]
    InvalidExponent(f64),

    #[error("operation requires a nonzero state")]
    ZeroState,

    #[error("matrix is not unitary (max |M^*M - I| = {defect:e})")]
    NotUnitary { defect: f64 },

    #[error("matrix is not Hermitian (max |H - H^*| = {defect:e})")]
    NotHermitian { defect: f64 },

    #[error("coin parameters must satisfy |a|^2 + |b|^2 = 1 (got {norm_sq})")]
    NotNormalized { norm_sq: f64 },

    #[error("|a| must lie strictly between 0 and 1 (got {0})")]
    DegenerateCoin(f64),

    #[error("coin family `{0}` has no nonlinear factor")]
    NoNonlinearFactor(&'static str),

    #[error("coin family `{0}` does not support this operation")]
    UnsupportedFamily(&'static str),

    #[error("linear part of the coin does not match the supplied C0")]
    LinearPartMismatch,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("series did not satisfy the stopping rule within {max_terms} terms (trailing sum {trailing:e})")]
    NotConverged { max_terms: usize, trailing: f64 },

    #[error("value at t = {t} is not positive ({value})")]
    NonPositive { t: usize, value: f64 },

    #[error("malformed state csv at line {line}: {reason}")]
    Csv { line: usize, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;
