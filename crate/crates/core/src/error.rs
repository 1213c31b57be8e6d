//! Error type shared across the crate.
//!
//! Parse-time problems carry a byte offset into the source text so callers
//! can point at the offending token. Numerical failures carry enough context
//! (residual norms, iteration counts, sample counts) to be actionable
//! without re-running the computation.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Malformed source text. `offset` is the byte position of the first
    /// token that could not be consumed; `expected` is a short hint.
    #[error("syntax error at byte {offset}: expected {expected}")]
    Syntax { offset: usize, expected: String },

    /// A variable index is outside `1..=arity`.
    #[error("variable x{index} out of range for arity {arity}")]
    Arity { index: usize, arity: usize },

    /// Evaluation left the domain of a primitive (log of a non-positive
    /// number, division by zero, …) or produced a non-finite value.
    #[error("domain error: {0}")]
    Domain(String),

    /// An iterative scheme exhausted its budget.
    #[error("failed to converge after {iterations} iterations: {message}")]
    Convergence { iterations: usize, message: String },

    /// A linear solve hit a pivot too small to trust.
    #[error("jacobian is numerically singular")]
    SingularJacobian,

    /// A point claimed to be a singularity of the field is not one.
    #[error("not a singularity: |field| = {residual_norm:e} exceeds tolerance")]
    NotASingularity { residual_norm: f64 },

    /// Too few usable samples for a fit or estimate.
    #[error("insufficient samples: have {have}, need {need}")]
    InsufficientSamples { have: usize, need: usize },

    /// Orbit samples coincide exactly with the limit point and had to be
    /// discarded, leaving nothing to fit.
    #[error("degenerate orbit: {excluded} samples exactly at the limit point")]
    DegenerateOrbit { excluded: usize },

    /// Every sample was flagged; no finite ratio exists.
    #[error("no valid samples: |f| below floor at every sample point")]
    NoValidSamples,

    /// The lower-bound witness could not be constructed.
    #[error("witness unavailable: {reason}")]
    WitnessUnavailable { reason: String },

    /// A Lyapunov candidate fails the local-minimum precheck at the origin.
    #[error("V(0) = {v0} is not a local minimum: sampled min {v_min}")]
    NotALocalMinimum { v0: f64, v_min: f64 },

    /// Structurally invalid input (bad configuration, mismatched
    /// dimensions, non-uniform grids where uniform ones are required, …).
    #[error("invalid input: {0}")]
    InvalidInput(String),
}
