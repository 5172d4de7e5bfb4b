use thiserror::Error;

/// Errors reported by the sampling and analysis routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("permutation must have at least one element")]
    Empty,
    #[error("not a permutation of 1..={n}: {reason}")]
    NotABijection { n: usize, reason: String },
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("{what} {value} is outside {range}")]
    OutOfRange {
        what: &'static str,
        value: i64,
        range: String,
    },
    #[error("n = {n} exceeds the enumeration cap of {cap}")]
    TooLarge { n: usize, cap: usize },
    #[error("normalizing constant overflows f64 (log value {log_value}); use the log-domain variant")]
    Overflow { log_value: f64 },
    #[error("distributions have mismatched supports ({left} vs {right} entries)")]
    MismatchedSupport { left: usize, right: usize },
    #[error("monotone coupling violated at t = {t}: lower chain {low} > upper chain {high}")]
    CouplingViolation { t: usize, low: u32, high: u32 },
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

pub(crate) fn out_of_range(what: &'static str, value: i64, range: impl Into<String>) -> Error {
    Error::OutOfRange {
        what,
        value,
        range: range.into(),
    }
}
