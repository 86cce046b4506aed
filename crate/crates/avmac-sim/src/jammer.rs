use crate::codebook::Codebook;
use crate::{mean_cost, sample_row, SimError, COST_TOL};
use avmac_core::{ChannelSpec, ConstraintSpec, CostModel, Pmf};
use avmac_symmetry::{SymKind, Symmetrizer};
use rand::Rng;

/// How the adversary picks the state sequence for one transmission.
///
/// The symmetrizing variants impersonate codewords: a uniformly chosen
/// impostor message is pushed through the witness kernel letter by letter.
/// When the resulting sequence overshoots the state budget, the draw is
/// replaced by the all-`fallback` sequence, so the emitted states always
/// respect the budget; the fallback letter must be free.
#[derive(Debug, Clone, PartialEq)]
pub enum JammerStrategy {
    /// Independent letters from a fixed state law. Not budget-checked.
    IIDState(Pmf),
    /// A verbatim sequence, replayed every trial. Not budget-checked.
    FixedSequence(Vec<usize>),
    /// Impersonates a codeword pair through a joint witness kernel.
    SymJoint { witness: Symmetrizer, fallback: usize },
    /// Impersonates a first-sender codeword through a single-sender kernel.
    SymCond1 { witness: Symmetrizer, fallback: usize },
    /// Impersonates a second-sender codeword through a single-sender kernel.
    SymCond2 { witness: Symmetrizer, fallback: usize },
}

fn kind_name(kind: SymKind) -> &'static str {
    match kind {
        SymKind::Joint => "the joint map",
        SymKind::Sender1 => "the first-sender map",
        SymKind::Sender2 => "the second-sender map",
    }
}

impl JammerStrategy {
    /// Checks alphabet shapes, witness kinds, and the fallback letter's cost.
    pub fn validate(
        &self,
        spec: &ChannelSpec,
        costs: &CostModel,
        code: &Codebook,
    ) -> Result<(), SimError> {
        let ns = spec.ns();
        let check_witness = |witness: &Symmetrizer,
                             expected: SymKind,
                             rows: usize,
                             fallback: usize|
         -> Result<(), SimError> {
            if witness.kind != expected {
                return Err(SimError::WitnessKind {
                    expected: kind_name(expected),
                    got: kind_name(witness.kind),
                });
            }
            if witness.rows().len() != rows {
                return Err(SimError::Dimension {
                    context: "witness rows",
                    expected: rows,
                    got: witness.rows().len(),
                });
            }
            if witness.rows().iter().any(|r| r.len() != ns) {
                return Err(SimError::Dimension {
                    context: "witness row length",
                    expected: ns,
                    got: witness.rows().iter().map(|r| r.len()).max().unwrap_or(0),
                });
            }
            if fallback >= ns {
                return Err(SimError::Dimension {
                    context: "fallback letter",
                    expected: ns,
                    got: fallback,
                });
            }
            if costs.l[fallback].abs() > 1e-12 {
                return Err(SimError::FallbackCost {
                    letter: fallback,
                    cost: costs.l[fallback],
                });
            }
            Ok(())
        };
        match self {
            JammerStrategy::IIDState(q) => {
                if q.len() != ns {
                    return Err(SimError::Dimension {
                        context: "state law",
                        expected: ns,
                        got: q.len(),
                    });
                }
            }
            JammerStrategy::FixedSequence(s) => {
                if s.len() != code.n() {
                    return Err(SimError::Dimension {
                        context: "fixed state sequence",
                        expected: code.n(),
                        got: s.len(),
                    });
                }
                if let Some(&bad) = s.iter().find(|&&v| v >= ns) {
                    return Err(SimError::Dimension {
                        context: "fixed state letter",
                        expected: ns,
                        got: bad,
                    });
                }
            }
            JammerStrategy::SymJoint { witness, fallback } => {
                check_witness(witness, SymKind::Joint, spec.nx1() * spec.nx2(), *fallback)?;
            }
            JammerStrategy::SymCond1 { witness, fallback } => {
                check_witness(witness, SymKind::Sender1, spec.nx1(), *fallback)?;
            }
            JammerStrategy::SymCond2 { witness, fallback } => {
                check_witness(witness, SymKind::Sender2, spec.nx2(), *fallback)?;
            }
        }
        Ok(())
    }
}

/// One state sequence together with whether the budget escape fired.
#[derive(Debug, Clone, PartialEq)]
pub struct JammerDraw {
    pub states: Vec<usize>,
    pub fell_back: bool,
}

/// Draws one state sequence for a transmission over `code`.
///
/// Consumes randomness in a fixed order: impostor message indices first,
/// then one state letter per position. Symmetrizing draws that overshoot
/// the budget are replaced by the all-fallback sequence.
pub fn run_jammer<R: Rng>(
    strategy: &JammerStrategy,
    spec: &ChannelSpec,
    code: &Codebook,
    costs: &CostModel,
    cons: &ConstraintSpec,
    rng: &mut R,
) -> Result<JammerDraw, SimError> {
    strategy.validate(spec, costs, code)?;
    Ok(draw_states(strategy, spec, code, costs, cons, rng))
}

/// Draw without revalidating; callers must have run `validate` once.
pub(crate) fn draw_states<R: Rng>(
    strategy: &JammerStrategy,
    spec: &ChannelSpec,
    code: &Codebook,
    costs: &CostModel,
    cons: &ConstraintSpec,
    rng: &mut R,
) -> JammerDraw {
    let n = code.n();
    match strategy {
        JammerStrategy::IIDState(q) => {
            let states = (0..n).map(|_| sample_row(q.as_slice(), rng)).collect();
            JammerDraw {
                states,
                fell_back: false,
            }
        }
        JammerStrategy::FixedSequence(s) => JammerDraw {
            states: s.clone(),
            fell_back: false,
        },
        JammerStrategy::SymJoint { witness, fallback } => {
            let a = rng.gen_range(0..code.m1());
            let b = rng.gen_range(0..code.m2());
            let w1 = code.word1(a);
            let w2 = code.word2(b);
            let states: Vec<usize> = (0..n)
                .map(|i| sample_row(witness.row(w1[i] * spec.nx2() + w2[i]), rng))
                .collect();
            enforce_budget(states, *fallback, costs, cons, n)
        }
        JammerStrategy::SymCond1 { witness, fallback } => {
            let a = rng.gen_range(0..code.m1());
            let w1 = code.word1(a);
            let states: Vec<usize> = (0..n).map(|i| sample_row(witness.row(w1[i]), rng)).collect();
            enforce_budget(states, *fallback, costs, cons, n)
        }
        JammerStrategy::SymCond2 { witness, fallback } => {
            let b = rng.gen_range(0..code.m2());
            let w2 = code.word2(b);
            let states: Vec<usize> = (0..n).map(|i| sample_row(witness.row(w2[i]), rng)).collect();
            enforce_budget(states, *fallback, costs, cons, n)
        }
    }
}

fn enforce_budget(
    states: Vec<usize>,
    fallback: usize,
    costs: &CostModel,
    cons: &ConstraintSpec,
    n: usize,
) -> JammerDraw {
    if mean_cost(&states, &costs.l) > cons.lambda + COST_TOL {
        JammerDraw {
            states: vec![fallback; n],
            fell_back: true,
        }
    } else {
        JammerDraw {
            states,
            fell_back: false,
        }
    }
}
