use thiserror::Error;

/// Errors raised by chain construction, estimation and I/O.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("state space must have at least 2 states, got {0}")]
    TooSmall(usize),

    #[error("matrix is not row-stochastic: {0}")]
    NonStochastic(String),

    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("chain is not ergodic: {0}")]
    NotErgodic(String),

    #[error("chain is not reversible: detailed-balance residual {0:.3e}")]
    NotReversible(f64),

    #[error("matrix is not symmetric: max asymmetry {0:.3e}")]
    NotSymmetric(f64),

    #[error("eigenvalue iteration did not converge after {0} sweeps")]
    NoConvergence(usize),

    #[error("linear system is singular (pivot {pivot:.3e} in column {column})")]
    Singular { column: usize, pivot: f64 },

    #[error("group inverse axiom violated: residual {0:.3e}")]
    AxiomViolation(f64),

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("bad chain family parameters: {0}")]
    BadParams(String),

    #[error("bad initial distribution: {0}")]
    BadInit(String),

    #[error("sample path too short: need at least {needed} states, got {got}")]
    PathTooShort { needed: usize, got: usize },

    #[error("state {state} out of range for d = {d}")]
    StateOutOfRange { state: usize, d: usize },

    #[error("skipping by {skip} leaves fewer than 2 states out of {len}")]
    EmptyResult { skip: usize, len: usize },

    #[error("TV iteration did not reach threshold within {0} steps")]
    Diverged(u64),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("I/O error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
