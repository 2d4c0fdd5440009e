use thiserror::Error;

use crate::modulus::Density;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("nodes {a} and {b} are disconnected")]
    Disconnected { a: usize, b: usize },

    #[error("disconnected domain: {0}")]
    DisconnectedDomain(String),

    #[error("scale too fine: {0}")]
    ScaleTooFine(String),

    #[error("graph too large: {nodes} nodes exceeds budget {budget}")]
    TooLarge { nodes: usize, budget: usize },

    #[error("degenerate continuum: {0}")]
    DegenerateContinuum(String),

    #[error("vertex map is not bijective: {0}")]
    NonBijective(String),

    /// The restricted convex program did not reach its tolerance; `best`
    /// carries the last iterate.
    #[error("inner solve failed: residual {residual:.3e} after {sweeps} sweeps")]
    InnerSolveFailed {
        residual: f64,
        sweeps: usize,
        best: Box<Density>,
    },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }
}
