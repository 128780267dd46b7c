//! Error type shared across the crate.

use std::fmt;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors surfaced by vector primitives, objectives, optimizer kernels and
/// the experiment harness.
#[derive(Debug)]
pub enum Error {
    /// A vector with zero Euclidean norm was passed where a direction is
    /// required (normalization, projection, cosine).
    ZeroNorm,
    /// Standard deviation of the input is exactly zero; the normalization
    /// operator is undefined on constant inputs.
    DegenerateStd,
    /// Two vectors that must share a length do not.
    ShapeMismatch { expected: usize, actual: usize },
    /// A point lies outside the domain of a coordinate transform.
    OutOfDomain(String),
    /// A scalar argument violates its mathematical domain (e.g. momentum
    /// coefficient outside [0, 1)).
    DomainError(String),
    /// A vector element is NaN or infinite.
    NonFinite { index: usize },
    /// Attempt to build a vector with no elements.
    Empty,
    /// Channel ranges do not partition the index space, or a channel is too
    /// short to support tangent projection.
    InvalidScope(String),
    /// Experiment configuration is unusable (unknown keys, bad values,
    /// missing fields).
    Config(String),
    /// Filesystem failure while reading configs or writing artifacts.
    Io(std::io::Error),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::ZeroNorm => write!(f, "vector has zero norm"),
            Error::DegenerateStd => write!(f, "standard deviation is zero (constant input)"),
            Error::ShapeMismatch { expected, actual } => {
                write!(f, "shape mismatch: expected length {expected}, got {actual}")
            }
            Error::OutOfDomain(msg) => write!(f, "out of domain: {msg}"),
            Error::DomainError(msg) => write!(f, "domain error: {msg}"),
            Error::NonFinite { index } => write!(f, "non-finite element at index {index}"),
            Error::Empty => write!(f, "vector must have at least one element"),
            Error::InvalidScope(msg) => write!(f, "invalid projection scope: {msg}"),
            Error::Config(msg) => write!(f, "config error: {msg}"),
            Error::Io(err) => write!(f, "io error: {err}"),
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io(err) => Some(err),
            _ => None,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err)
    }
}
