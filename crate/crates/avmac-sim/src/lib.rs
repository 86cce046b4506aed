//! Finite-blocklength simulation of two-sender coding over a channel with
//! an adversarially chosen state.
//!
//! The crate builds constant-composition codebooks, runs jamming strategies
//! (i.i.d. states, fixed sequences, and symmetrizing attacks driven by
//! witnesses from `avmac-symmetry`), decodes with either a joint-type
//! decoder or a likelihood baseline, and estimates error probabilities by
//! Monte Carlo with an exact enumeration oracle for small instances.
//!
//! All sequence-level costs are per-letter averages: a state sequence is
//! within budget when `(1/n) Σ l(s_i) ≤ Λ`, mirroring the constraint the
//! region computations place on state laws.

mod codebook;
mod decoder;
mod jammer;
mod simulate;

pub use codebook::{
    build_codebook, gather, sample_permutation, scatter, Codebook, PermutationCode, REDRAW_CAP,
};
pub use decoder::{decode, DecodeOutcome, DecoderSpec, DEFAULT_ETA, DEFAULT_STATE_BITS_CAP};
pub use jammer::{run_jammer, JammerDraw, JammerStrategy};
pub use simulate::{
    attack_error_exact, conditional_error_exact, conditional_error_exact_permuted, simulate,
    wilson_interval, AttackReport, CodeUnderTest, SimReport, DEFAULT_OUTPUT_BITS_CAP,
};

use avmac_core::CoreError;
use thiserror::Error;

/// Slack used when comparing accumulated per-letter costs against budgets,
/// absorbing rounding from the division by `n`.
pub(crate) const COST_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    Dimension {
        context: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("message counts must be positive")]
    EmptyCode,
    #[error(
        "sender {sender} codeword type costs {cost:.6} per letter against the budget \
         {budget:.6}; every word in the class shares that cost, so redrawing cannot help"
    )]
    ConstraintUnsatisfiable { sender: u8, cost: f64, budget: f64 },
    #[error("jamming witness is for {got}, the strategy needs {expected}")]
    WitnessKind {
        expected: &'static str,
        got: &'static str,
    },
    #[error("fallback letter {letter} costs {cost}; the escape route must be free")]
    FallbackCost { letter: usize, cost: f64 },
    #[error("decoder threshold {which} must be positive, got {value}")]
    Threshold { which: &'static str, value: f64 },
    #[error("state search needs {needed:.1} bits of enumeration, cap is {cap}")]
    StateCap { needed: f64, cap: u32 },
    #[error("output enumeration needs {needed:.1} bits, cap is {cap}")]
    OutputCap { needed: f64, cap: u32 },
    #[error("attack support of {support} state sequences exceeds the enumeration cap {cap}")]
    SupportCap { support: u128, cap: u64 },
    #[error("trial count must be positive")]
    NoTrials,
}

/// Samples an index from a probability row using a single uniform draw.
/// The final index absorbs any residual mass so rounding in the row's sum
/// cannot push the draw out of range.
pub(crate) fn sample_row<R: rand::Rng>(row: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.gen_range(0.0..1.0);
    let mut acc = 0.0;
    for (i, &p) in row.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    row.len() - 1
}

/// Per-letter average of a cost function over a sequence.
pub(crate) fn mean_cost(seq: &[usize], cost: &[f64]) -> f64 {
    if seq.is_empty() {
        return 0.0;
    }
    seq.iter().map(|&i| cost[i]).sum::<f64>() / seq.len() as f64
}
