//! Worked channel families with closed-form reference values.
//!
//! Each constructor returns a full [`ChannelDocument`] (tensor, costs, and
//! default constraint levels) ready for analysis, region computation, or
//! export in the text format. The closed forms in [`closed_form`] give
//! independently derivable values (thresholds, corner rates) that the
//! numerical machinery is tested against.

mod closed_form;
mod families;

pub use closed_form::{
    binary_entropy, bsmac_corner_rates, bsmac_thresholds, convolve_prob, gaussian_corner_rates,
    OracleResult,
};
pub use families::{
    adder_channel, ahlswede_cai_channel, bsmac_channel, erasure_adder_channel,
    gaussian_discretized, GaussianGrids,
};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BuildError {
    #[error("state alphabet size {0} is not supported (expected 2 or 3)")]
    UnsupportedStateSize(usize),
    #[error("input alphabet size {0} is too small (need at least 2)")]
    AlphabetTooSmall(usize),
    #[error("parameter {name} = {value} must be positive")]
    NonPositiveParameter { name: &'static str, value: f64 },
    #[error("grid of {got} {which} points is degenerate (need an odd count of at least 3)")]
    DegenerateGrid { which: &'static str, got: usize },
    #[error("argument {name} = {value} lies outside [0, 1]")]
    OutOfUnitInterval { name: &'static str, value: f64 },
}
