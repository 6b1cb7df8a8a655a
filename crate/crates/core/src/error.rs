use thiserror::Error;

use crate::expr::{EvalError, ParseError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GaugeError {
    #[error("degenerate invariant: {0}")]
    DegenerateInvariant(String),
    #[error("degenerate spinor: {0}")]
    DegenerateSpinor(String),
    #[error("singular K matrix (det = {0:e})")]
    SingularK(f64),
    #[error("denominator vanishes: {0}")]
    DenominatorZero(String),
    #[error("inversion failed: pointwise deviation {deviation:.3e} exceeds {tolerance:.1e}")]
    InversionFailure { deviation: f64, tolerance: f64 },
    #[error("invalid specification: {0}")]
    InvalidSpec(String),
    #[error("point outside the field domain: {0}")]
    OutOfDomain(String),
    #[error("incompatible operands: {0}")]
    Incompatible(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

pub type Result<T, E = GaugeError> = std::result::Result<T, E>;
