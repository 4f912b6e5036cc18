use alloc::string::String;
use core::fmt;

/// Errors for data-dependent failures. Structural misuse of the arithmetic
/// primitives (mixing truncations or variable counts) panics instead, since
/// callers are expected to keep one ring context per computation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// A substituted series or coordinate change has a nonzero constant term.
    NonzeroConstantTerm,
    /// `F(0, 0) != 0`; the expansion point must be shifted first.
    NonzeroAtOrigin,
    /// Variable index out of range.
    VariableOutOfRange { index: usize, nvars: usize },
    /// Operation requires `p <= n` (e.g. maximal minors of a wide matrix).
    ShapeNotSupported(String),
    /// A degree bound is too small for the requested computation.
    DegreeBoundTooSmall { required: u32, given: u32 },
    /// Mismatched filtrations or traces passed to a comparison.
    FiltrationMismatch,
    /// Input violates a documented precondition.
    Domain(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::NonzeroConstantTerm => {
                write!(f, "assigned series has a nonzero constant term")
            }
            Error::NonzeroAtOrigin => {
                write!(
                    f,
                    "F(0,0) != 0; shift the expansion point before decomposing"
                )
            }
            Error::VariableOutOfRange { index, nvars } => {
                write!(f, "variable index {index} out of range (nvars = {nvars})")
            }
            Error::ShapeNotSupported(msg) => write!(f, "unsupported shape: {msg}"),
            Error::DegreeBoundTooSmall { required, given } => {
                write!(
                    f,
                    "degree bound {given} too small (need at least {required})"
                )
            }
            Error::FiltrationMismatch => write!(f, "filtration or trace mismatch"),
            Error::Domain(msg) => write!(f, "{msg}"),
        }
    }
}

pub type Result<T> = core::result::Result<T, Error>;
