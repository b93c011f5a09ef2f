//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed argument: bad graph, bad state, bad file contents, ...
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A model parameter outside its admissible range (e.g. p ∉ (0,1)).
    #[error("parameter out of range: {0}")]
    ParamOutOfRange(String),

    /// An enumerated state space is larger than the configured cap.
    #[error("state space size {size} exceeds cap {cap}")]
    CapExceeded { size: u128, cap: usize },

    /// Numerical breakage: eigensolver did not converge, a matrix failed
    /// its reversibility precondition, and similar.
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
