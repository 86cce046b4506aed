use crate::{mean_cost, SimError, COST_TOL};
use avmac_core::{ChannelSpec, ConstraintSpec, CostModel, InputEnsemble};
use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// Attempts per codeword before the input budget is declared unsatisfiable.
///
/// Every word drawn from one conditional type class carries the same
/// per-letter cost, so in practice the loop either succeeds immediately or
/// exhausts the cap; the cap keeps the draw loop total.
pub const REDRAW_CAP: usize = 1000;

/// A pair of constant-composition codebooks over a shared time-sharing
/// sequence.
///
/// All codewords of one sender have the same conditional type given the
/// time-sharing sequence, hence the same per-letter input cost; both are
/// recorded per message for auditability.
#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    n: usize,
    m1: usize,
    m2: usize,
    u_seq: Vec<usize>,
    words1: Vec<Vec<usize>>,
    words2: Vec<Vec<usize>>,
    cost1: Vec<f64>,
    cost2: Vec<f64>,
}

impl Codebook {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m1(&self) -> usize {
        self.m1
    }

    pub fn m2(&self) -> usize {
        self.m2
    }

    pub fn u_seq(&self) -> &[usize] {
        &self.u_seq
    }

    pub fn word1(&self, m: usize) -> &[usize] {
        &self.words1[m]
    }

    pub fn word2(&self, m: usize) -> &[usize] {
        &self.words2[m]
    }

    pub fn words1(&self) -> &[Vec<usize>] {
        &self.words1
    }

    pub fn words2(&self) -> &[Vec<usize>] {
        &self.words2
    }

    /// Per-letter input cost of each first-sender codeword.
    pub fn cost1(&self) -> &[f64] {
        &self.cost1
    }

    pub fn cost2(&self) -> &[f64] {
        &self.cost2
    }
}

/// Integer letter counts summing to `k`, nearest to `k * p` in the
/// largest-remainder sense. Ties go to the smaller letter so the result is
/// deterministic.
fn nearest_counts(p: &[f64], k: usize) -> Vec<usize> {
    let mut counts: Vec<usize> = p.iter().map(|&v| (v * k as f64).floor() as usize).collect();
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..p.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = p[a] * k as f64 - (p[a] * k as f64).floor();
        let rb = p[b] * k as f64 - (p[b] * k as f64).floor();
        rb.partial_cmp(&ra).unwrap().then(a.cmp(&b))
    });
    for &letter in order.iter().take(k.saturating_sub(assigned)) {
        counts[letter] += 1;
    }
    counts
}

/// Uniform draw from the set of sequences with the given letter counts,
/// written into `out[start..start+len]` via a multiset shuffle.
fn draw_class_segment<R: Rng>(counts: &[usize], out: &mut [usize], rng: &mut R) {
    let mut letters: Vec<usize> = Vec::with_capacity(out.len());
    for (letter, &c) in counts.iter().enumerate() {
        letters.extend(std::iter::repeat(letter).take(c));
    }
    letters.shuffle(rng);
    out.copy_from_slice(&letters);
}

/// Builds a constant-composition codebook pair for the given ensemble.
///
/// The time-sharing sequence is the fixed concatenation of letter runs whose
/// counts are nearest to `n * P_U`. Within each run, every codeword segment
/// is drawn uniformly from the conditional type class nearest to the
/// ensemble's conditional law. Draw order is fixed (sender 1's messages in
/// order, then sender 2's), so the result is fully determined by `seed`.
#[allow(clippy::too_many_arguments)]
pub fn build_codebook(
    spec: &ChannelSpec,
    costs: &CostModel,
    cons: &ConstraintSpec,
    n: usize,
    m1: usize,
    m2: usize,
    ens: &InputEnsemble,
    seed: u64,
) -> Result<Codebook, SimError> {
    if n == 0 {
        return Err(SimError::Dimension {
            context: "blocklength",
            expected: 1,
            got: 0,
        });
    }
    if m1 == 0 || m2 == 0 {
        return Err(SimError::EmptyCode);
    }
    if ens.nx1() != spec.nx1() {
        return Err(SimError::Dimension {
            context: "first input alphabet",
            expected: spec.nx1(),
            got: ens.nx1(),
        });
    }
    if ens.nx2() != spec.nx2() {
        return Err(SimError::Dimension {
            context: "second input alphabet",
            expected: spec.nx2(),
            got: ens.nx2(),
        });
    }

    let u_counts = nearest_counts(ens.pu().as_slice(), n);
    let mut u_seq = Vec::with_capacity(n);
    for (letter, &c) in u_counts.iter().enumerate() {
        u_seq.extend(std::iter::repeat(letter).take(c));
    }

    // Conditional letter counts per time-sharing run, one table per sender.
    let counts1: Vec<Vec<usize>> = (0..ens.nu())
        .map(|u| nearest_counts(ens.px1(u).as_slice(), u_counts[u]))
        .collect();
    let counts2: Vec<Vec<usize>> = (0..ens.nu())
        .map(|u| nearest_counts(ens.px2(u).as_slice(), u_counts[u]))
        .collect();

    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let draw_word = |counts: &[Vec<usize>], rng: &mut ChaCha12Rng| -> Vec<usize> {
        let mut word = vec![0usize; n];
        let mut start = 0;
        for u in 0..counts.len() {
            let len = u_counts[u];
            if len > 0 {
                draw_class_segment(&counts[u], &mut word[start..start + len], rng);
            }
            start += len;
        }
        word
    };

    let draw_constrained = |counts: &[Vec<usize>],
                                g: &[f64],
                                gamma: f64,
                                sender: u8,
                                rng: &mut ChaCha12Rng|
     -> Result<(Vec<usize>, f64), SimError> {
        let mut draws = 0;
        loop {
            let word = draw_word(counts, rng);
            let cost = mean_cost(&word, g);
            draws += 1;
            if cost <= gamma + COST_TOL {
                return Ok((word, cost));
            }
            if draws >= REDRAW_CAP {
                return Err(SimError::ConstraintUnsatisfiable {
                    sender,
                    cost,
                    budget: gamma,
                });
            }
        }
    };

    let mut words1 = Vec::with_capacity(m1);
    let mut cost1 = Vec::with_capacity(m1);
    for _ in 0..m1 {
        let (word, cost) = draw_constrained(&counts1, &costs.g1, cons.gamma1, 1, &mut rng)?;
        words1.push(word);
        cost1.push(cost);
    }
    let mut words2 = Vec::with_capacity(m2);
    let mut cost2 = Vec::with_capacity(m2);
    for _ in 0..m2 {
        let (word, cost) = draw_constrained(&counts2, &costs.g2, cons.gamma2, 2, &mut rng)?;
        words2.push(word);
        cost2.push(cost);
    }

    Ok(Codebook {
        n,
        m1,
        m2,
        u_seq,
        words1,
        words2,
        cost1,
        cost2,
    })
}

/// Moves letter `i` of `v` to slot `pi[i]`: the transmit-side reordering.
pub fn scatter(pi: &[usize], v: &[usize]) -> Vec<usize> {
    let mut out = vec![0usize; v.len()];
    for (i, &x) in v.iter().enumerate() {
        out[pi[i]] = x;
    }
    out
}

/// Reads slot `pi[i]` of `v` back into position `i`: undoes [`scatter`].
pub fn gather(pi: &[usize], v: &[usize]) -> Vec<usize> {
    pi.iter().map(|&j| v[j]).collect()
}

/// A codebook wrapped in one sampled position permutation.
///
/// Codeword letters enter the channel in permuted order; the receiver
/// restores the original order before handing the output to the base
/// decoder. Reordering never changes a word's letter histogram, so all
/// per-codeword costs are those of the base book.
#[derive(Debug, Clone, PartialEq)]
pub struct PermutationCode {
    base: Codebook,
    pi: Vec<usize>,
}

impl PermutationCode {
    pub fn new(base: Codebook, pi: Vec<usize>) -> Result<Self, SimError> {
        if pi.len() != base.n() {
            return Err(SimError::Dimension {
                context: "permutation length",
                expected: base.n(),
                got: pi.len(),
            });
        }
        let mut seen = vec![false; pi.len()];
        for &j in &pi {
            if j >= pi.len() || seen[j] {
                return Err(SimError::Dimension {
                    context: "permutation image",
                    expected: pi.len(),
                    got: j,
                });
            }
            seen[j] = true;
        }
        Ok(PermutationCode { base, pi })
    }

    /// Wraps `base` in a uniformly random permutation.
    pub fn sample<R: Rng>(base: Codebook, rng: &mut R) -> Self {
        let pi = sample_permutation(base.n(), rng);
        PermutationCode { base, pi }
    }

    pub fn base(&self) -> &Codebook {
        &self.base
    }

    pub fn pi(&self) -> &[usize] {
        &self.pi
    }

    /// First-sender word as transmitted, letters in channel order.
    pub fn transmitted_word1(&self, m: usize) -> Vec<usize> {
        scatter(&self.pi, self.base.word1(m))
    }

    pub fn transmitted_word2(&self, m: usize) -> Vec<usize> {
        scatter(&self.pi, self.base.word2(m))
    }
}

/// Uniformly random permutation of `0..n` as a slot map.
pub fn sample_permutation<R: Rng>(n: usize, rng: &mut R) -> Vec<usize> {
    let mut pi: Vec<usize> = (0..n).collect();
    pi.shuffle(rng);
    pi
}
