use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Evaluation of a tabulated profile outside its knot range.
    #[error("argument {t} outside tabulated range [{lo}, {hi}]")]
    Range { t: f64, lo: f64, hi: f64 },

    #[error("invalid weight: {0}")]
    InvalidWeight(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Malformed record in an input file.
    #[error("{record}: {message}")]
    Parse { record: String, message: String },

    #[error("quadrature did not converge ({context}): estimate {estimate:e}, error {abs_err:e}, {intervals} intervals")]
    Quadrature {
        context: String,
        estimate: f64,
        abs_err: f64,
        intervals: usize,
    },

    #[error("construction failed: {0}")]
    Construction(String),

    #[error("invariant violation: {0}")]
    Invariant(String),
}

impl Error {
    /// True for failures of the numerics rather than of the input.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::Quadrature { .. } | Error::Construction(_) | Error::Invariant(_)
        )
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
