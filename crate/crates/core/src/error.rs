use thiserror::Error;

/// Errors raised by the geometry engines and the functionals built on them.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    /// The metric defined by a potential is not positive definite (or falls
    /// below the admissibility margin) somewhere on the grid.
    #[error("inadmissible potential: smallest metric eigenvalue {min_eig:.3e} at node {node}")]
    Admissibility { node: usize, min_eig: f64 },

    #[error("path is inadmissible at s = {s}")]
    Path {
        s: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("theorem not applicable: {0}")]
    NotApplicable(String),

    /// Numerical corruption: a quantity that cannot be out of range was.
    #[error("internal consistency violated: {0}")]
    InternalConsistency(String),

    #[error("grid mismatch: expected {expected} values, got {got}")]
    GridMismatch { expected: usize, got: usize },

    #[error("grid of {nodes} nodes exceeds the memory budget of {budget} nodes")]
    Budget { nodes: usize, budget: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::GridMismatch { expected, got });
    }
    Ok(())
}
