use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("eigenvalue iteration did not converge in block starting at index {block}")]
    NoConvergence { block: usize },

    #[error("path length {requested} exceeds the enumeration cap of {cap}")]
    PathCapExceeded { requested: usize, cap: usize },

    #[error("path starting at site {start} is not admissible in a matrix of dimension {n}")]
    Inadmissible { start: i64, n: usize },

    #[error("exact formula requires n >= {required}, got n = {n}")]
    OutsideValidity { n: usize, required: usize },

    /// An exact result violated a structural property it must satisfy.
    #[error("internal consistency failure: {0}")]
    Structure(String),

    #[error("quadrature accuracy not achieved: {0}")]
    Accuracy(String),

    #[error("too few samples: need at least {needed}, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("experiment exceeds the operation budget: estimated {estimate:.3e} > {budget:.3e}")]
    Budget { estimate: f64, budget: f64 },

    #[error("too many eigensolver failures at n = {n}: {failures} of {replicates}")]
    TooManyFailures {
        n: usize,
        failures: usize,
        replicates: usize,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
