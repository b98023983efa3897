use thiserror::Error;

/// Errors raised by the numerical routines in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not Hermitian (max |m - m^dagger| = {0:e})")]
    NotHermitian(f64),

    #[error("eigenvalue {0:e} is below the PSD clamping window")]
    NegativeEigenvalue(f64),

    #[error("state is not normalized (norm = {0})")]
    NotNormalized(f64),

    #[error("non-finite entry encountered")]
    NonFinite,

    #[error("pre- and post-selected states are orthogonal (|overlap| = {0:e})")]
    OrthogonalSelection(f64),

    #[error("pointer grid too coarse: {0}")]
    GridTooCoarse(String),

    #[error("index {index} out of range 0..={max}")]
    IndexOutOfRange { index: usize, max: usize },

    #[error("Kraus operators are not trace preserving (residual {0:e})")]
    NotTracePreserving(f64),

    #[error("expected exactly {expected} Kraus operators, found {found}")]
    WrongKrausCount { expected: usize, found: usize },

    #[error("exceptional point: eigenvectors coalesce (st - r^2 sin^2(theta) = {0:e})")]
    ExceptionalPoint(f64),

    #[error("closed-form polar factor unavailable: {0}")]
    SingularR(String),

    #[error("basis vectors are orthogonal, projector-product unitary undefined (|overlap| = {0:e})")]
    ZeroOverlap(f64),

    #[error("states are not orthogonal (|overlap| = {0:e})")]
    NotOrthogonal(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invariant violated: {name} ({detail})")]
    InvariantViolation { name: &'static str, detail: String },
}

impl Error {
    pub(crate) fn invariant(name: &'static str, detail: impl Into<String>) -> Self {
        Error::InvariantViolation {
            name,
            detail: detail.into(),
        }
    }

    /// True when the error signals a violated internal identity rather than bad input.
    pub fn is_invariant_violation(&self) -> bool {
        matches!(self, Error::InvariantViolation { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
