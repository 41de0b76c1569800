use alloc::string::String;
use core::fmt;

/// Errors reported by the numerical core.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Curve, capacitor or grid violates one of its invariants.
    InvalidGeometry(String),
    /// Rasterization produced a degenerate mask (hole touching the outer
    /// boundary, disconnected interior, hole below the resolution limit).
    DegenerateGeometry(String),
    /// Evaluation at a singular point of a closed-form field.
    Singular { field: &'static str, at: (f64, f64) },
    /// Argument outside the domain of an operation.
    Domain(String),
    /// Solver or estimator configuration rejected.
    Config(String),
    /// Empty input where a nonempty one is required.
    Empty(&'static str),
    /// Winding computation could not certify the border (|f| below floor).
    Inconclusive(String),
}

pub type Result<T> = core::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidGeometry(m) => write!(f, "invalid geometry: {m}"),
            Error::DegenerateGeometry(m) => write!(f, "degenerate geometry: {m}"),
            Error::Singular { field, at } => {
                write!(f, "{field} is singular at ({}, {})", at.0, at.1)
            }
            Error::Domain(m) => write!(f, "domain error: {m}"),
            Error::Config(m) => write!(f, "bad configuration: {m}"),
            Error::Empty(what) => write!(f, "empty {what}"),
            Error::Inconclusive(m) => write!(f, "inconclusive: {m}"),
        }
    }
}

impl core::error::Error for Error {}
