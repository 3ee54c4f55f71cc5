use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A value violates a type invariant; `field` names the offending field.
    #[error("invalid {field}: {reason}")]
    Invalid { field: &'static str, reason: String },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("no guided slab mode: {0}")]
    NoGuidedMode(String),
    #[error("mode-volume grid too coarse: half and full resolution differ by {0:.3}%")]
    GridTooCoarse(f64),
    #[error("length mismatch in {what}: {left} vs {right}")]
    LengthMismatch {
        what: &'static str,
        left: usize,
        right: usize,
    },
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("all histogram counts are zero in the fit window")]
    AllZeroCounts,
    #[error("degenerate detuning scan: {0}")]
    DegenerateScan(String),
    #[error("singular normal equations: Jacobian is rank deficient")]
    SingularNormalEquations,
    #[error("invalid histogram: {0}")]
    Histogram(String),
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Error::Invalid {
            field,
            reason: reason.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
