//! Error taxonomy shared by every solver entry point.

use crate::inner::SubproblemSolution;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong, from bad configuration to solver breakdown.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A caller-supplied setting is invalid (unknown key, bad range, wrong variant).
    #[error("configuration error: {0}")]
    Config(String),

    /// A weight vector could not be normalized (empty, negative entry, all zeros).
    #[error("weight error: {0}")]
    Weight(String),

    /// An objective evaluation produced a non-finite value.
    #[error("evaluation error: {0}")]
    Evaluation(String),

    /// An API precondition was violated (dimension mismatch, missing oracle,
    /// capability not supported by the problem class).
    #[error("contract violation: {0}")]
    Contract(String),

    /// The inner solver could not reach the requested grade; the best feasible
    /// iterate found is carried along for diagnostics.
    #[error("inner solver failure: {message}")]
    InnerSolve {
        message: String,
        best: Box<SubproblemSolution>,
    },

    /// A recorded inexactness term exceeded its budget at outer iteration `k`.
    #[error("budget exceeded at iteration {k}: recorded {recorded:e} > allowed {allowed:e}")]
    Budget {
        k: usize,
        recorded: f64,
        allowed: f64,
    },

    /// A validation oracle itself failed (not the property under test).
    #[error("oracle error: {0}")]
    Oracle(String),

    /// Filesystem or serialization trouble while emitting artifacts.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    /// JSON serialization trouble while emitting reports.
    #[error("serialization error: {0}")]
    Serialize(#[from] serde_json::Error),
}
