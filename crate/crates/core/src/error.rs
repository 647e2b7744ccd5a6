use thiserror::Error;

/// Errors raised by driftlab operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("Laplace kernel gradient is undefined at coincident points")]
    LaplaceSingularity,

    #[error("empty sample batch")]
    EmptyBatch,

    #[error("sample set has role {found}, expected {expected}")]
    WrongRole {
        expected: &'static str,
        found: &'static str,
    },

    #[error("friction coefficient {0} outside [0, 1]")]
    GammaOutOfRange(f64),

    #[error("step {index} outside schedule horizon {horizon}")]
    StepOutOfRange { index: usize, horizon: usize },

    #[error("kernel normalizer underflowed to zero")]
    NormalizerUnderflow,

    #[error("degenerate finite-difference step {0}")]
    DegenerateStep(f64),

    #[error("need at least two past positions for the heavy-ball recurrence")]
    InsufficientHistory,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("matrix is not symmetric positive definite")]
    NotPositiveDefinite,

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for violations of a numerical precondition (as opposed to bad
    /// input shapes or parse failures).
    pub fn is_precondition(&self) -> bool {
        matches!(
            self,
            Error::Precondition(_)
                | Error::LaplaceSingularity
                | Error::NormalizerUnderflow
                | Error::DegenerateStep(_)
                | Error::NotPositiveDefinite
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
