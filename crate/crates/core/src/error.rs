//! Error type shared across the crate.

use thiserror::Error;

/// Errors raised by graph generation, placement, spectral estimation,
/// routing, and budget arithmetic.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied parameter violates an operation precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Random regular generation exhausted its retry budget.
    #[error(
        "regular graph generation failed after {attempts} attempts \
         (n={n}, degree={degree}): {last_failure}"
    )]
    GenerationFailed {
        n: usize,
        degree: usize,
        attempts: usize,
        last_failure: String,
    },

    /// Block placement exhausted its restart budget; the occupancy is
    /// over-constrained for the requested guard distance.
    #[error(
        "block placement failed after {restarts} restarts \
         (placed {placed_blocks}/{requested} blocks of size {block_size} on {n} vertices)"
    )]
    PlacementFailed {
        n: usize,
        requested: usize,
        placed_blocks: usize,
        block_size: usize,
        restarts: usize,
    },

    /// Lanczos did not reach the requested residual within the iteration cap.
    #[error(
        "eigensolver did not converge within {iterations} iterations (residual {residual:.3e})"
    )]
    NoConvergence { iterations: usize, residual: f64 },

    /// A matrix handed to the spectral module is not symmetric.
    #[error("matrix is not symmetric at entry ({row},{col})")]
    NotSymmetric { row: usize, col: usize },

    /// Quotient support graph is disconnected; routing is undefined on it.
    #[error("quotient support graph is disconnected ({reachable} of {n_blocks} supervertices reachable)")]
    QuotientDisconnected { n_blocks: usize, reachable: usize },

    /// A block hop has an atom with no admissible target within range.
    #[error(
        "block hop infeasible: no assignment keeps every atom within {range} hops of its target"
    )]
    HopInfeasible { block: usize, range: usize },

    /// The greedy scheduler made no progress while paths remain. Should be
    /// unreachable; indicates corrupted paths.
    #[error("scheduler stalled with {remaining} blocks still in transit")]
    ScheduleStalled { remaining: usize },

    /// No admissible correction window exists (K_max = 0).
    #[error("syndrome budget infeasible: no admissible correction window (K_max = 0)")]
    BudgetInfeasible,

    /// An invariant audit failed on a constructed object.
    #[error("invariant violated: {0}")]
    InvariantViolated(String),
}

pub type Result<T> = std::result::Result<T, Error>;
