use std::fmt;

/// Coarse classification used by front ends to map failures onto exit codes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorClass {
    /// Malformed or structurally invalid input.
    Schema,
    /// Input is well formed but violates a mathematical precondition.
    Precondition,
    /// An integral or energy diverges to `+inf`.
    Divergence,
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid cone: {0}")]
    InvalidCone(String),

    #[error("invalid divisorial space: {0}")]
    InvalidSpace(String),

    #[error("boundary element is not >= 0 in the order")]
    BoundaryNotNonnegative,

    #[error("completion elements are not comparable: {0}")]
    MismatchedCompletion(String),

    #[error("admissibility witness missing or invalid: {0}")]
    Admissibility(String),

    #[error("intersection map axiom violated: {0}")]
    IntersectionAxiom(String),

    #[error("invalid concave function: {0}")]
    InvalidFunction(String),

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("crossing solver failed to bracket a root in [{lo}, {hi}]")]
    CrossingNotBracketed { lo: f64, hi: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("integral diverges to +inf: {0}")]
    DivergesToPlusInfinity(String),

    #[error("zero has no absolute value")]
    ZeroRational,

    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("integer too large for factorization: {0}")]
    TooLarge(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Parse(_)
            | Error::Json(_)
            | Error::DimensionMismatch { .. }
            | Error::InvalidCone(_)
            | Error::InvalidSpace(_)
            | Error::InvalidFunction(_)
            | Error::InvalidMeasure(_)
            | Error::NotPrime(_)
            | Error::TooLarge(_)
            | Error::ZeroRational => ErrorClass::Schema,
            Error::DivergesToPlusInfinity(_) => ErrorClass::Divergence,
            Error::BoundaryNotNonnegative
            | Error::MismatchedCompletion(_)
            | Error::Admissibility(_)
            | Error::IntersectionAxiom(_)
            | Error::CrossingNotBracketed { .. }
            | Error::Precondition(_) => ErrorClass::Precondition,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

impl fmt::Display for ErrorClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ErrorClass::Schema => "schema",
            ErrorClass::Precondition => "precondition",
            ErrorClass::Divergence => "divergence",
        };
        f.write_str(s)
    }
}
