use thiserror::Error;

/// Errors reported by the library.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("not full rank")]
    NotFullRank,
    #[error("singular principal minor")]
    SingularPrincipalMinor,
    #[error("singular")]
    Singular,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("form is not positive definite")]
    NotPositiveDefinite,
    #[error("matrix is not symmetric")]
    NotSymmetric,
    #[error("Minkowski reduction by sign vectors needs n <= 4 (got {0})")]
    MinkowskiDimension(usize),
    #[error("greedy reduction does not produce a basis for n = {0}")]
    GreedyDimension(usize),
    #[error("uniqueness violation: {0} Schiemann-reduced representatives")]
    UniquenessViolation(usize),
    #[error("not pointed")]
    NotPointed,
    #[error("vacuous containment")]
    VacuousContainment,
    #[error("integer overflow in cone arithmetic")]
    Overflow,
    #[error("not a duet cone")]
    NotDuetCone,
    #[error("in-tune violation: {0}")]
    InTuneViolation(String),
    #[error("form is not even")]
    NotEven,
    #[error("odd dimension {0}")]
    OddDimension(usize),
    #[error("code too large: more than {0} codewords")]
    CodeTooLarge(usize),
    #[error("basis is not integral")]
    NotIntegral,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
