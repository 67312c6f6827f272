use thiserror::Error;

/// Errors raised by the restoration library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    /// The envelope has no interior minimum (existence condition violated).
    #[error("envelope has no minimum: norm_A*eta/sqrt(g) = {lhs:.6} >= {bound:.6}")]
    NoMinimum { lhs: f64, bound: f64 },

    /// The contact equation for g has a non-positive denominator at an iterate.
    #[error(
        "infeasible contact at alpha = {alpha:.6e}: sigma_rel = {sigma:.6e} does not exceed the data term {data_term:.6e}"
    )]
    InfeasibleContact { alpha: f64, sigma: f64, data_term: f64 },

    #[error("alpha = {alpha:.6e} outside the tabulated range [{min:.6e}, {max:.6e}]")]
    Range { alpha: f64, min: f64, max: f64 },

    /// No g on the scan grid yields an envelope dominating the curves.
    #[error("no g in the scan grid dominates the error curves (largest tried: {largest_g:.6e}); widen the g grid toward smaller values")]
    NoContact { largest_g: f64 },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
