use alloc::string::String;
use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A weight sequence broke one of its invariants.
    InvalidWeights(String),
    /// A parameter was out of its allowed range.
    InvalidParam(String),
    /// Two sequences that must agree in length did not.
    LengthMismatch { expected: usize, found: usize },
    /// A score has no defined value, e.g. zero token pairs or zero scored time.
    Undefined(&'static str),
    /// A synthetic corpus layout could not be satisfied.
    Synth(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidWeights(msg) => write!(f, "invalid weights: {msg}"),
            Error::InvalidParam(msg) => write!(f, "invalid parameter: {msg}"),
            Error::LengthMismatch { expected, found } => {
                write!(f, "length mismatch: expected {expected}, found {found}")
            }
            Error::Undefined(what) => write!(f, "undefined score: {what}"),
            Error::Synth(msg) => write!(f, "synthetic spec error: {msg}"),
        }
    }
}

impl core::error::Error for Error {}
