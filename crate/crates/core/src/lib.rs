// Index-pair loops over small dense matrices read better than iterator
// chains in the quotient/spectral code.
#![allow(clippy::needless_range_loop)]

//! Block permutation routing of rigid logical patches on expander hosts.
//!
//! The pipeline: generate a random regular host ([`graphs`]), place guarded
//! blocks ([`blocks`]), build the weighted quotient graph and measure its
//! expansion ([`quotient`], [`spectral`]), run Valiant two-phase routing with
//! congestion/dilation accounting and serialize block hops into physical
//! matchings ([`routing`]), and evaluate the fault-tolerance budget
//! ([`ft_budget`]).

pub mod blocks;
pub mod error;
pub mod ft_budget;
pub mod graphs;
pub mod quotient;
pub mod routing;
pub mod spectral;

pub use blocks::{BlockConfiguration, BlockTemplate};
pub use error::{Error, Result};
pub use ft_budget::{FtBudget, FtParams};
pub use graphs::{HostGraph, Hypergraph};
pub use quotient::QuotientGraph;
pub use routing::{HopPlan, RoutingOutcome};
pub use spectral::{SpectralOptions, SpectralSummary};
