//! Library surface of the experiment runner; the `blockroute` binary is a
//! thin wrapper over these modules.

pub mod config;
pub mod emit;
pub mod runner;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] blockroute::Error),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, CliError>;

/// Process exit code for an error, per the documented contract:
/// 2 config, 3 generation/placement, 4 routing/quotient/spectral,
/// 5 budget infeasible.
pub fn exit_code(err: &CliError) -> i32 {
    match err {
        CliError::Config(_) => 2,
        CliError::Io(_) => 4,
        CliError::Core(core) => match core {
            blockroute::Error::InvalidInput(_) => 2,
            blockroute::Error::GenerationFailed { .. }
            | blockroute::Error::PlacementFailed { .. } => 3,
            blockroute::Error::BudgetInfeasible => 5,
            _ => 4,
        },
    }
}
