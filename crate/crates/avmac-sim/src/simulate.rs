use crate::codebook::{gather, sample_permutation, scatter, Codebook, PermutationCode};
use crate::decoder::{prepare, DecodeOutcome, DecoderSpec, Prepared};
use crate::jammer::{draw_states, JammerStrategy};
use crate::{mean_cost, SimError, COST_TOL};
use avmac_core::{ChannelSpec, ConstraintSpec, CostModel};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use std::collections::HashMap;

/// Ceiling on `n * log2(|Y|)` for exact output enumeration.
pub const DEFAULT_OUTPUT_BITS_CAP: u32 = 24;

/// Ceiling on the number of state sequences an exact attack average may
/// enumerate per impostor context.
const ATTACK_SUPPORT_CAP: u64 = 1 << 20;

/// Output chunk width for the parallel exact sums. Chunk boundaries are
/// fixed by index, and the chunk partials are added back in index order,
/// so the result does not depend on thread scheduling.
const EXACT_CHUNK: u64 = 4096;

/// Two-sided 95% critical value of the standard normal.
const WILSON_Z: f64 = 1.9599639845400545;

/// Monte Carlo tally for one (code, decoder, jammer) configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct SimReport {
    pub trials: u64,
    pub errors: u64,
    /// Empirical error fraction.
    pub p_hat: f64,
    pub wilson_low: f64,
    pub wilson_high: f64,
    /// Largest per-letter state cost the jammer actually emitted across
    /// trials; an audit that the budget escape worked.
    pub max_state_cost: f64,
}

/// Code handed to the simulator or the exact evaluators.
#[derive(Clone, Copy)]
pub enum CodeUnderTest<'a> {
    Deterministic(&'a Codebook),
    /// Codewords pass through a position permutation shared by the senders
    /// and the receiver but hidden from the jammer.
    Permutation(&'a PermutationCode),
}

impl<'a> CodeUnderTest<'a> {
    fn base(&self) -> &'a Codebook {
        match self {
            CodeUnderTest::Deterministic(c) => c,
            CodeUnderTest::Permutation(p) => p.base(),
        }
    }
}

/// 95% Wilson score interval for `errors` successes in `trials` draws,
/// clamped to the unit interval. Zero trials carry no information and map
/// to the whole interval.
pub fn wilson_interval(errors: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = errors as f64 / n;
    let z2 = WILSON_Z * WILSON_Z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = WILSON_Z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    // The score bounds are exactly 0 and 1 at the empirical endpoints; the
    // closed form only reaches them up to rounding, so pin them here.
    let low = if errors == 0 { 0.0 } else { (center - half).max(0.0) };
    let high = if errors == trials { 1.0 } else { (center + half).min(1.0) };
    (low, high)
}

/// Runs `trials` independent transmissions and tallies decoding errors.
///
/// Each trial has its own counter-indexed random stream derived from
/// `seed`, so reports are identical across runs and thread counts. Within
/// a trial the draw order is: true message pair, jammer (impostor indices
/// then state letters), the position permutation when the code carries one,
/// then the channel noise letter by letter.
///
/// A permuted code gets a fresh uniform permutation every trial; the
/// permutation stored in the [`PermutationCode`] is a single realization
/// for the exact evaluators and is not consulted here. The jammer draws
/// against the base codebook, its state sequence lands in channel-frame
/// positions, and the decoder sees the received word pulled back into the
/// base frame.
#[allow(clippy::too_many_arguments)]
pub fn simulate(
    spec: &ChannelSpec,
    costs: &CostModel,
    cons: &ConstraintSpec,
    code: CodeUnderTest<'_>,
    decoder: &DecoderSpec,
    strategy: &JammerStrategy,
    trials: u64,
    seed: u64,
) -> Result<SimReport, SimError> {
    if trials == 0 {
        return Err(SimError::NoTrials);
    }
    let base = code.base();
    strategy.validate(spec, costs, base)?;
    let prep = prepare(decoder, spec, costs, cons, base)?;
    let n = base.n();
    let permuted = matches!(code, CodeUnderTest::Permutation(_));

    let (errors, max_state_cost) = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            rng.set_stream(t);
            let a = rng.gen_range(0..base.m1());
            let b = rng.gen_range(0..base.m2());
            let draw = draw_states(strategy, spec, base, costs, cons, &mut rng);
            let pi = permuted.then(|| sample_permutation(n, &mut rng));
            let (w1, w2) = match &pi {
                Some(pi) => (scatter(pi, base.word1(a)), scatter(pi, base.word2(b))),
                None => (base.word1(a).to_vec(), base.word2(b).to_vec()),
            };
            let y: Vec<usize> = (0..n)
                .map(|j| crate::sample_row(spec.row(w1[j], w2[j], draw.states[j]), &mut rng))
                .collect();
            let outcome = match &pi {
                Some(pi) => prep.run(&gather(pi, &y)),
                None => prep.run(&y),
            };
            let err = (outcome != DecodeOutcome::Decoded(a, b)) as u64;
            (err, mean_cost(&draw.states, &costs.l))
        })
        .reduce(
            || (0u64, f64::NEG_INFINITY),
            |x, y| (x.0 + y.0, x.1.max(y.1)),
        );

    let p_hat = errors as f64 / trials as f64;
    let (wilson_low, wilson_high) = wilson_interval(errors, trials);
    Ok(SimReport {
        trials,
        errors,
        p_hat,
        wilson_low,
        wilson_high,
        max_state_cost,
    })
}

/// Exact error probability of `code` against the fixed state sequence `s`,
/// averaged over uniform message pairs, by enumerating every output word.
pub fn conditional_error_exact(
    spec: &ChannelSpec,
    costs: &CostModel,
    cons: &ConstraintSpec,
    code: &Codebook,
    decoder: &DecoderSpec,
    s: &[usize],
) -> Result<f64, SimError> {
    check_states(spec, code.n(), s)?;
    check_output_cap(spec, code.n())?;
    let prep = prepare(decoder, spec, costs, cons, code)?;
    Ok(exact_error_core(
        spec,
        code.words1(),
        code.words2(),
        None,
        &prep,
        s,
    ))
}

/// Exact error probability of a permuted code against the channel-frame
/// state sequence `t`.
///
/// The enumeration runs literally in the channel frame: codewords are
/// pushed through the stored permutation, the channel acts on `t`, and the
/// decoder sees each output pulled back into the base frame. Relabeling
/// positions in this sum recovers the base code against the pulled-back
/// states, so the two evaluators agree whenever `t` is the push-forward of
/// a base-frame sequence.
pub fn conditional_error_exact_permuted(
    spec: &ChannelSpec,
    costs: &CostModel,
    cons: &ConstraintSpec,
    code: &PermutationCode,
    decoder: &DecoderSpec,
    t: &[usize],
) -> Result<f64, SimError> {
    let base = code.base();
    check_states(spec, base.n(), t)?;
    check_output_cap(spec, base.n())?;
    let prep = prepare(decoder, spec, costs, cons, base)?;
    let words1: Vec<Vec<usize>> = (0..base.m1()).map(|m| code.transmitted_word1(m)).collect();
    let words2: Vec<Vec<usize>> = (0..base.m2()).map(|m| code.transmitted_word2(m)).collect();
    Ok(exact_error_core(
        spec,
        &words1,
        &words2,
        Some(code.pi()),
        &prep,
        t,
    ))
}

/// Exact error probability and budget-escape mass for a jamming strategy,
/// obtained by enumerating its state-sequence support.
#[derive(Debug, Clone, PartialEq)]
pub struct AttackReport {
    pub error: f64,
    /// Probability that the drawn sequence overshoots the budget and is
    /// replaced by the all-fallback sequence. Always zero for the fixed
    /// and memoryless strategies, which never reroute.
    pub fallback_mass: f64,
}

/// State law at one sequence position: a probability row over state
/// letters plus the indices carrying positive mass.
struct PositionLaw {
    row: Vec<f64>,
    support: Vec<usize>,
}

fn position_law(row: &[f64]) -> PositionLaw {
    PositionLaw {
        row: row.to_vec(),
        support: (0..row.len()).filter(|&s| row[s] > 0.0).collect(),
    }
}

fn support_size(laws: &[PositionLaw]) -> Result<(), SimError> {
    let mut size: u128 = 1;
    for law in laws {
        size = size.saturating_mul(law.support.len() as u128);
    }
    if size > ATTACK_SUPPORT_CAP as u128 {
        return Err(SimError::SupportCap {
            support: size,
            cap: ATTACK_SUPPORT_CAP,
        });
    }
    Ok(())
}

/// Averages the exact conditional error over the strategy's state law,
/// matching the distribution [`crate::run_jammer`] samples from: impostor
/// message contexts are uniform, and symmetrizing mass that overshoots the
/// budget is rerouted to the all-fallback sequence.
pub fn attack_error_exact(
    spec: &ChannelSpec,
    costs: &CostModel,
    cons: &ConstraintSpec,
    code: &Codebook,
    decoder: &DecoderSpec,
    strategy: &JammerStrategy,
) -> Result<AttackReport, SimError> {
    strategy.validate(spec, costs, code)?;
    check_output_cap(spec, code.n())?;
    let prep = prepare(decoder, spec, costs, cons, code)?;
    let n = code.n();
    let mut memo: HashMap<Vec<usize>, f64> = HashMap::new();
    let mut err_for = |s: &[usize]| -> f64 {
        if let Some(&e) = memo.get(s) {
            return e;
        }
        let e = exact_error_core(spec, code.words1(), code.words2(), None, &prep, s);
        memo.insert(s.to_vec(), e);
        e
    };

    match strategy {
        JammerStrategy::FixedSequence(s) => Ok(AttackReport {
            error: err_for(s),
            fallback_mass: 0.0,
        }),
        JammerStrategy::IIDState(q) => {
            let laws: Vec<PositionLaw> = (0..n).map(|_| position_law(q.as_slice())).collect();
            support_size(&laws)?;
            let (error, _) = walk_support(&laws, &costs.l, f64::INFINITY, &mut err_for);
            Ok(AttackReport {
                error,
                fallback_mass: 0.0,
            })
        }
        JammerStrategy::SymJoint { witness, fallback } => {
            let contexts: Vec<Vec<usize>> = (0..code.m1() * code.m2())
                .map(|c| {
                    let (a, b) = (c / code.m2(), c % code.m2());
                    let (w1, w2) = (code.word1(a), code.word2(b));
                    (0..n).map(|i| w1[i] * spec.nx2() + w2[i]).collect()
                })
                .collect();
            sym_attack(cons, &contexts, witness, *fallback, n, &costs.l, &mut err_for)
        }
        JammerStrategy::SymCond1 { witness, fallback } => {
            let contexts: Vec<Vec<usize>> =
                (0..code.m1()).map(|a| code.word1(a).to_vec()).collect();
            sym_attack(cons, &contexts, witness, *fallback, n, &costs.l, &mut err_for)
        }
        JammerStrategy::SymCond2 { witness, fallback } => {
            let contexts: Vec<Vec<usize>> =
                (0..code.m2()).map(|b| code.word2(b).to_vec()).collect();
            sym_attack(cons, &contexts, witness, *fallback, n, &costs.l, &mut err_for)
        }
    }
}

/// Averages the symmetrizing attack over uniform impostor contexts, where
/// `contexts[c][i]` is the witness row index used at position `i`.
fn sym_attack(
    cons: &ConstraintSpec,
    contexts: &[Vec<usize>],
    witness: &avmac_symmetry::Symmetrizer,
    fallback: usize,
    n: usize,
    state_costs: &[f64],
    err_for: &mut dyn FnMut(&[usize]) -> f64,
) -> Result<AttackReport, SimError> {
    let budget = n as f64 * (cons.lambda + COST_TOL);
    let weight = 1.0 / contexts.len() as f64;
    let mut error = 0.0;
    let mut fallback_mass = 0.0;
    for ctx in contexts {
        let laws: Vec<PositionLaw> = ctx.iter().map(|&r| position_law(witness.row(r))).collect();
        support_size(&laws)?;
        let (mut ctx_error, ctx_fallback) = walk_support(&laws, state_costs, budget, err_for);
        if ctx_fallback > 0.0 {
            ctx_error += ctx_fallback * err_for(&vec![fallback; n]);
        }
        error += weight * ctx_error;
        fallback_mass += weight * ctx_fallback;
    }
    Ok(AttackReport {
        error,
        fallback_mass,
    })
}

/// Depth-first walk of the product law, returning the accumulated
/// error mass and the mass rerouted by the budget escape. Once the running
/// cost overshoots the budget no completion can recover (letter costs are
/// nonnegative for well-formed models), so the subtree's whole probability
/// reroutes in one step.
fn walk_support(
    laws: &[PositionLaw],
    state_costs: &[f64],
    budget: f64,
    err_for: &mut dyn FnMut(&[usize]) -> f64,
) -> (f64, f64) {
    fn recurse(
        laws: &[PositionLaw],
        state_costs: &[f64],
        budget: f64,
        seq: &mut Vec<usize>,
        i: usize,
        prob: f64,
        cost: f64,
        error: &mut f64,
        fallback_mass: &mut f64,
        err_for: &mut dyn FnMut(&[usize]) -> f64,
    ) {
        if cost > budget {
            *fallback_mass += prob;
            return;
        }
        if i == laws.len() {
            *error += prob * err_for(seq);
            return;
        }
        for &s in &laws[i].support {
            seq[i] = s;
            recurse(
                laws,
                state_costs,
                budget,
                seq,
                i + 1,
                prob * laws[i].row[s],
                cost + state_costs[s],
                error,
                fallback_mass,
                err_for,
            );
        }
    }

    let mut seq = vec![0usize; laws.len()];
    let mut error = 0.0;
    let mut fallback_mass = 0.0;
    recurse(
        laws,
        state_costs,
        budget,
        &mut seq,
        0,
        1.0,
        0.0,
        &mut error,
        &mut fallback_mass,
        err_for,
    );
    (error, fallback_mass)
}

fn check_states(spec: &ChannelSpec, n: usize, s: &[usize]) -> Result<(), SimError> {
    if s.len() != n {
        return Err(SimError::Dimension {
            context: "state sequence length",
            expected: n,
            got: s.len(),
        });
    }
    if let Some(&bad) = s.iter().find(|&&v| v >= spec.ns()) {
        return Err(SimError::Dimension {
            context: "state letter",
            expected: spec.ns(),
            got: bad,
        });
    }
    Ok(())
}

fn check_output_cap(spec: &ChannelSpec, n: usize) -> Result<(), SimError> {
    let bits = n as f64 * (spec.ny() as f64).log2();
    if bits > DEFAULT_OUTPUT_BITS_CAP as f64 {
        return Err(SimError::OutputCap {
            needed: bits,
            cap: DEFAULT_OUTPUT_BITS_CAP,
        });
    }
    Ok(())
}

/// Sums error mass over every output word. `words1`/`words2` are the
/// channel-frame codewords; with `pi` set, outputs are pulled back through
/// it before decoding. Chunked so the additions happen in a fixed order.
fn exact_error_core(
    spec: &ChannelSpec,
    words1: &[Vec<usize>],
    words2: &[Vec<usize>],
    pi: Option<&[usize]>,
    prep: &Prepared<'_>,
    s: &[usize],
) -> f64 {
    let n = s.len();
    let ny = spec.ny();
    let (m1, m2) = (words1.len(), words2.len());
    let total: u64 = (ny as u64).pow(n as u32);
    let chunks = total.div_ceil(EXACT_CHUNK);

    let partials: Vec<f64> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = 0.0;
            let mut y = vec![0usize; n];
            let mut probs = vec![0.0; m1 * m2];
            for idx in c * EXACT_CHUNK..(c * EXACT_CHUNK + EXACT_CHUNK).min(total) {
                let mut rest = idx;
                for i in (0..n).rev() {
                    y[i] = (rest % ny as u64) as usize;
                    rest /= ny as u64;
                }
                let mut any = 0.0;
                for a in 0..m1 {
                    for b in 0..m2 {
                        let (w1, w2) = (&words1[a], &words2[b]);
                        let mut p = 1.0;
                        for i in 0..n {
                            p *= spec.w(w1[i], w2[i], s[i], y[i]);
                            if p == 0.0 {
                                break;
                            }
                        }
                        probs[a * m2 + b] = p;
                        any += p;
                    }
                }
                if any == 0.0 {
                    continue;
                }
                let outcome = match pi {
                    Some(pi) => prep.run(&gather(pi, &y)),
                    None => prep.run(&y),
                };
                for a in 0..m1 {
                    for b in 0..m2 {
                        if outcome != DecodeOutcome::Decoded(a, b) {
                            acc += probs[a * m2 + b];
                        }
                    }
                }
            }
            acc
        })
        .collect();

    partials.iter().sum::<f64>() / (m1 * m2) as f64
}
