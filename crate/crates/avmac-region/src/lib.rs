//! Achievable-rate regions for two-sender channels with an adversarial state.
//!
//! Three coordination regimes are computed, differing in how much shared
//! randomness the senders hold against the jammer:
//!
//! - [`random_code_region`]: unrestricted common randomness. The jammer picks
//!   one state distribution against the whole time-sharing mixture, and the
//!   region is convex.
//! - [`divided_randomness_region`]: each sender randomizes on its own, so the
//!   jammer can adapt to the time-sharing letter. Rate bounds decompose per
//!   letter and the region need not be convex.
//! - [`deterministic_region`]: no common randomness at all. Which rates
//!   survive depends on how the jammer's cheapest imitation budgets compare
//!   to its actual budget; the four resulting shapes are labeled by
//!   [`CaseLabel`].
//!
//! All rate bounds reduce to minimizing a conditional mutual information over
//! a cost-constrained set of state distributions ([`min_info_over_states`]),
//! a convex problem solved to a certified linearization gap. Pentagons from
//! individual input ensembles ([`pentagon`]) are the building blocks that the
//! region searches assemble.

use avmac_core::CoreError;
use avmac_symmetry::SymError;
use thiserror::Error;

mod ensembles;
mod pentagon;
mod region;
mod stateopt;

pub use pentagon::{pentagon, Pentagon};
pub use region::{
    deterministic_region, divided_randomness_region, random_code_region, CaseLabel, RateRegion,
    RegionFlags, Resolution,
};
pub use stateopt::{min_info_over_states, MinInfoReport, StateFeasibleSet, WhichInfo};

#[derive(Debug, Error)]
pub enum RegionError {
    /// Caller-supplied data has the wrong shape or an invalid value.
    #[error("invalid input: {0}")]
    Input(String),
    /// An ensemble or budget violates the stated constraints.
    #[error("constraint violation: {0}")]
    Constraint(String),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error(transparent)]
    Sym(#[from] SymError),
}

/// Which coordination regime a pentagon or region is computed for.
///
/// The regime fixes how the state minimization conditions on the
/// time-sharing letter: one shared state distribution for
/// [`RegionMode::RandomCode`], an independent distribution per letter for
/// the other two.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegionMode {
    RandomCode,
    DividedRandomness,
    Deterministic,
}

impl RegionMode {
    /// True when the jammer may adapt its state distribution to the
    /// time-sharing letter.
    pub fn per_letter_state(self) -> bool {
        !matches!(self, RegionMode::RandomCode)
    }
}

impl std::fmt::Display for RegionMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RegionMode::RandomCode => write!(f, "random-code"),
            RegionMode::DividedRandomness => write!(f, "divided-randomness"),
            RegionMode::Deterministic => write!(f, "deterministic"),
        }
    }
}
