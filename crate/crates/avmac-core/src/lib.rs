//! Data model and probability primitives for finite-alphabet state-dependent
//! multiple-access channels.
//!
//! A channel is a stochastic tensor `W(y|x1,x2,s)` over finite alphabets,
//! paired with per-letter input costs `g1`, `g2`, a state cost `l`, and
//! constraint levels `(gamma1, gamma2, lambda)`. Everything downstream
//! (symmetrizability analysis, capacity regions, simulation) consumes the
//! types defined here.
//!
//! Conventions:
//! - probability vectors are validated to sum to 1 within `PROB_TOL` and are
//!   renormalized only when the deviation exceeds `RENORM_TOL`, so freshly
//!   normalized data is not perturbed again on re-load;
//! - information quantities are in bits (base-2 logs) with `0 log 0 = 0`;
//! - all types are immutable after construction and all operations are pure.

mod channel;
mod ensemble;
mod info;
mod pmf;
pub mod textfmt;
mod validate;

pub use channel::{averaged_channel, AveragedChannel, ChannelSpec, ConstraintSpec, CostModel};
pub use ensemble::{InputEnsemble, StateLaw};
pub use info::{expected_cost, mutual_informations, InfoTriple};
pub use pmf::{Pmf, PROB_TOL, RENORM_TOL};
pub use validate::{validate, ValidationReport, Violation};

use thiserror::Error;

/// Errors from constructing or combining core types.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CoreError {
    #[error("empty probability vector")]
    EmptyPmf,
    #[error("probability entry {index} is {value}, not a finite nonnegative number")]
    BadProbability { index: usize, value: f64 },
    #[error("probabilities sum to {sum}, more than {PROB_TOL} away from 1")]
    BadSum { sum: f64 },
    #[error("alphabet sizes must all be at least 1")]
    EmptyAlphabet,
    #[error("tensor has {got} entries, expected {expected}")]
    TensorLen { expected: usize, got: usize },
    #[error("row ({x1},{x2},{s}) of W is not a probability vector: {source}")]
    BadRow {
        x1: usize,
        x2: usize,
        s: usize,
        source: Box<CoreError>,
    },
    #[error("dimension mismatch: {context} (expected {expected}, got {got})")]
    Dimension {
        context: &'static str,
        expected: usize,
        got: usize,
    },
}
