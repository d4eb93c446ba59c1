use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// Transition matrix is not primitive, so the shift is not mixing.
    #[error("not mixing: transition matrix is not primitive")]
    NotMixing,

    #[error("malformed spec at {location}: {message}")]
    Parse { location: String, message: String },

    #[error("{what} too large: {size} exceeds budget {budget}")]
    TooLarge {
        what: &'static str,
        size: usize,
        budget: usize,
    },

    #[error("word {0:?} is not admissible")]
    Inadmissible(String),

    #[error("depth {0} invalid for this variant: distance potentials need an odd depth")]
    DepthParity(usize),

    #[error("word of length {got} shorter than potential depth {depth}")]
    WordTooShort { got: usize, depth: usize },

    /// Power iteration failed to bracket the eigenvalue; carries the last two
    /// Collatz-Wielandt midpoints.
    #[error("power iteration did not converge: last estimates {last} / {previous}")]
    NonConvergence { last: f64, previous: f64 },

    #[error("measure order {order} below potential depth {depth} and refinement failed")]
    OrderMismatch { order: usize, depth: usize },

    #[error("search exhausted at length budget {0}")]
    SearchExhausted(usize),

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("sample of length {got} too short: need at least {need}")]
    InsufficientSample { got: usize, need: usize },

    #[error("window not aligned to a valid decomposition: {0}")]
    Misaligned(String),

    #[error("digit sequence is not a valid finite expansion of 1: {0}")]
    InvalidDigits(String),

    #[error("{0}")]
    OutOfRange(String),

    #[error("no {kind} word of length {len}; try a longer length")]
    EmptyAtLength { kind: &'static str, len: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
