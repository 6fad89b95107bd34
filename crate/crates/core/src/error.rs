use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

/// Errors raised by the numerical model.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Operand shapes do not agree.
    Dimension {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    /// A factorization pivot fell below the singularity threshold.
    Singular { pivot: f64 },
    /// An argument lies outside the operation's domain.
    Domain(&'static str),
    /// A configuration value violates its invariant.
    Config {
        field: &'static str,
        reason: &'static str,
    },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Dimension {
                what,
                expected,
                found,
            } => write!(f, "dimension mismatch in {what}: expected {expected}, found {found}"),
            Error::Singular { pivot } => write!(f, "singular matrix (pivot {pivot:e})"),
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::Config { field, reason } => write!(f, "invalid `{field}`: {reason}"),
        }
    }
}

impl core::error::Error for Error {}

pub(crate) fn check_len(what: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::Dimension {
            what,
            expected,
            found,
        })
    }
}
