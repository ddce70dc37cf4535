use thiserror::Error;

/// Errors produced by the numerical kernels and the performance models.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error in {op}: {detail}")]
    Domain { op: &'static str, detail: String },

    /// A series or iteration did not reach its tolerance within the term budget.
    #[error("{op} did not converge within {terms} terms")]
    NonConvergence { op: &'static str, terms: usize },

    /// Adaptive quadrature hit its subdivision limit before meeting the tolerance.
    #[error("quadrature failed on [{lower}, {upper}]: error estimate {error:e} after {intervals} intervals")]
    Quadrature {
        lower: f64,
        upper: f64,
        error: f64,
        intervals: usize,
    },

    /// The requested combination of options is not covered by the method.
    #[error("unsupported mode: {0}")]
    Unsupported(String),

    /// The scenario produced no usable signal (for example all rates are zero).
    #[error("degenerate scenario: {0}")]
    Degenerate(String),
}

impl Error {
    pub(crate) fn domain(op: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            op,
            detail: detail.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
