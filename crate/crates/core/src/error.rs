use thiserror::Error;

use crate::geometry::Vector;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("index {index} out of range for {len} terms")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("non-finite objective value at iteration {iter}")]
    NonFinite { iter: usize },

    #[error("{what} did not converge within {iters} iterations")]
    NonConvergence { what: &'static str, iters: usize },

    /// The outer center is not farther than `R` from the ball intersection.
    #[error("precondition failed: d(c, C1) - R = {margin:.6e} is not positive")]
    PreconditionFailed { margin: f64 },

    #[error("the ball intersection is empty (min merit value {g_tilde_min:.6e})")]
    EmptyIntersection { g_tilde_min: f64 },

    #[error("inner check undetermined: {0}")]
    InnerUndetermined(String),

    #[error("hypothesis violated ({hypothesis}): point at distance {distance:.6e}")]
    HypothesisViolated {
        hypothesis: &'static str,
        counterexample: Vector,
        distance: f64,
    },

    #[error("undefined ascent direction: the farthest point coincides with the outer center")]
    UndefinedDirection,

    #[error("grid has {points} points, above the limit of {limit}")]
    GridTooLarge { points: u128, limit: u128 },

    #[error("no grid point falls inside the sampled set")]
    EmptySample,
}
