use crate::codebook::Codebook;
use crate::{SimError, COST_TOL};
use avmac_core::{averaged_channel, ChannelSpec, ConstraintSpec, CostModel, Pmf};
use std::collections::HashMap;

/// Default acceptance threshold, in nats, for all three decoding tests.
pub const DEFAULT_ETA: f64 = 0.05;

/// Default ceiling on `n * log2(|S|)` for the exhaustive state search.
pub const DEFAULT_STATE_BITS_CAP: u32 = 20;

/// Decoding rule to apply to a received word.
#[derive(Debug, Clone, PartialEq)]
pub enum DecoderSpec {
    /// Joint-type decoder. A pair qualifies when some in-budget state
    /// sequence explains the output (a divergence test against the
    /// memoryless factorization, within `eta` nats) and every competing
    /// message that is similarly explainable stays disentangled from the
    /// received word (conditional-information tests within `eta` for a
    /// double impostor, `eta1`/`eta2` for single-sender impostors). The
    /// state search is exhaustive, so `n * log2(|S|)` must stay within
    /// `state_bits_cap`.
    TypeDecoder {
        eta: f64,
        eta1: f64,
        eta2: f64,
        state_bits_cap: u32,
    },
    /// Maximum likelihood under the state-averaged channel for a fixed state
    /// law, ties broken toward the smallest message index. Not part of the
    /// type-decoding construction; a tractable baseline for blocklengths
    /// where the state search is out of reach.
    MaxLikelihoodWorstQ(Pmf),
}

impl DecoderSpec {
    /// Type decoder with all thresholds at [`DEFAULT_ETA`] and the default
    /// state-search cap.
    pub fn type_decoder_default() -> Self {
        Self::type_decoder(DEFAULT_ETA, DEFAULT_ETA, DEFAULT_ETA)
    }

    pub fn type_decoder(eta: f64, eta1: f64, eta2: f64) -> Self {
        DecoderSpec::TypeDecoder {
            eta,
            eta1,
            eta2,
            state_bits_cap: DEFAULT_STATE_BITS_CAP,
        }
    }
}

/// Verdict for one received word. Zero or multiple qualifying pairs are
/// legal runtime outcomes of the type decoder and count as errors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecodeOutcome {
    Decoded(usize, usize),
    Ambiguous,
    NoMatch,
}

/// Decodes one received word. Validation and precomputation run per call;
/// the simulation loop prepares once and reuses the tables.
pub fn decode(
    decoder: &DecoderSpec,
    spec: &ChannelSpec,
    costs: &CostModel,
    cons: &ConstraintSpec,
    code: &Codebook,
    y: &[usize],
) -> Result<DecodeOutcome, SimError> {
    let prep = prepare(decoder, spec, costs, cons, code)?;
    if y.len() != code.n() {
        return Err(SimError::Dimension {
            context: "received word length",
            expected: code.n(),
            got: y.len(),
        });
    }
    if let Some(&bad) = y.iter().find(|&&v| v >= spec.ny()) {
        return Err(SimError::Dimension {
            context: "received letter",
            expected: spec.ny(),
            got: bad,
        });
    }
    Ok(prep.run(y))
}

/// A decoder bound to one channel and codebook, ready to run on outputs.
pub(crate) enum Prepared<'a> {
    Ml(MlTable<'a>),
    Type(TypeMachine<'a>),
}

impl Prepared<'_> {
    pub(crate) fn run(&self, y: &[usize]) -> DecodeOutcome {
        match self {
            Prepared::Ml(t) => t.run(y),
            Prepared::Type(t) => t.run(y),
        }
    }
}

pub(crate) fn prepare<'a>(
    decoder: &DecoderSpec,
    spec: &'a ChannelSpec,
    costs: &CostModel,
    cons: &ConstraintSpec,
    code: &'a Codebook,
) -> Result<Prepared<'a>, SimError> {
    match decoder {
        DecoderSpec::MaxLikelihoodWorstQ(q) => {
            if q.len() != spec.ns() {
                return Err(SimError::Dimension {
                    context: "averaging state law",
                    expected: spec.ns(),
                    got: q.len(),
                });
            }
            let avg = averaged_channel(spec, q)?;
            let (nx1, nx2, ny) = avg.sizes();
            let mut lnw = vec![0.0; nx1 * nx2 * ny];
            for x1 in 0..nx1 {
                for x2 in 0..nx2 {
                    for y in 0..ny {
                        lnw[(x1 * nx2 + x2) * ny + y] = avg.v(x1, x2, y).ln();
                    }
                }
            }
            Ok(Prepared::Ml(MlTable {
                code,
                nx2,
                ny,
                lnw,
            }))
        }
        DecoderSpec::TypeDecoder {
            eta,
            eta1,
            eta2,
            state_bits_cap,
        } => {
            for (which, &value) in [("eta", eta), ("eta1", eta1), ("eta2", eta2)] {
                if !(value > 0.0) {
                    return Err(SimError::Threshold { which, value });
                }
            }
            let n = code.n();
            let bits = n as f64 * (spec.ns() as f64).log2();
            if bits > *state_bits_cap as f64 {
                return Err(SimError::StateCap {
                    needed: bits,
                    cap: *state_bits_cap,
                });
            }
            let feasible = enumerate_feasible(spec.ns(), n, &costs.l, cons.lambda);
            let nu = code.u_seq().iter().copied().max().unwrap_or(0) + 1;
            Ok(Prepared::Type(TypeMachine {
                spec,
                code,
                nu,
                eta: *eta,
                eta1: *eta1,
                eta2: *eta2,
                feasible,
            }))
        }
    }
}

/// All state sequences whose per-letter cost stays within the budget,
/// flattened with stride `n`. Costs are nonnegative for well-formed
/// models, so subtrees are pruned as soon as the running total overshoots.
fn enumerate_feasible(ns: usize, n: usize, l: &[f64], lambda: f64) -> Vec<u8> {
    let budget = n as f64 * (lambda + COST_TOL);
    let mut out = Vec::new();
    let mut seq = vec![0u8; n];
    fill_feasible(ns, n, l, budget, 0, 0.0, &mut seq, &mut out);
    out
}

#[allow(clippy::too_many_arguments)]
fn fill_feasible(
    ns: usize,
    n: usize,
    l: &[f64],
    budget: f64,
    i: usize,
    cost: f64,
    seq: &mut Vec<u8>,
    out: &mut Vec<u8>,
) {
    if i == n {
        out.extend_from_slice(seq);
        return;
    }
    for s in 0..ns {
        let c = cost + l[s];
        if c <= budget {
            seq[i] = s as u8;
            fill_feasible(ns, n, l, budget, i + 1, c, seq, out);
        }
    }
}

pub(crate) struct MlTable<'a> {
    code: &'a Codebook,
    nx2: usize,
    ny: usize,
    lnw: Vec<f64>,
}

impl MlTable<'_> {
    fn run(&self, y: &[usize]) -> DecodeOutcome {
        let code = self.code;
        let mut best = f64::NEG_INFINITY;
        let mut arg = (0, 0);
        for a in 0..code.m1() {
            let w1 = code.word1(a);
            for b in 0..code.m2() {
                let w2 = code.word2(b);
                let mut score = 0.0;
                for i in 0..code.n() {
                    score += self.lnw[(w1[i] * self.nx2 + w2[i]) * self.ny + y[i]];
                }
                // Strict improvement only, so exact ties keep the earlier
                // (smaller) message pair.
                if score > best {
                    best = score;
                    arg = (a, b);
                }
            }
        }
        if best == f64::NEG_INFINITY {
            DecodeOutcome::NoMatch
        } else {
            DecodeOutcome::Decoded(arg.0, arg.1)
        }
    }
}

pub(crate) struct TypeMachine<'a> {
    spec: &'a ChannelSpec,
    code: &'a Codebook,
    nu: usize,
    eta: f64,
    eta1: f64,
    eta2: f64,
    feasible: Vec<u8>,
}

struct Scratch {
    joint: Vec<u32>,
    touched: Vec<u32>,
    cu: Vec<u32>,
    cux1: Vec<u32>,
    cux2: Vec<u32>,
    cus: Vec<u32>,
}

impl TypeMachine<'_> {
    fn run(&self, y: &[usize]) -> DecodeOutcome {
        let (m1, m2) = (self.code.m1(), self.code.m2());
        let n = self.code.n();
        let count = if n == 0 { 0 } else { self.feasible.len() / n };
        let spec = self.spec;
        let mut scratch = Scratch {
            joint: vec![0; self.nu * spec.nx1() * spec.nx2() * spec.ns() * spec.ny()],
            touched: Vec::with_capacity(n),
            cu: vec![0; self.nu],
            cux1: vec![0; self.nu * spec.nx1()],
            cux2: vec![0; self.nu * spec.nx2()],
            cus: vec![0; self.nu * spec.ns()],
        };

        // Stage 1: for every message pair, the in-budget state sequences
        // that explain the output within eta. A nonempty list doubles as
        // the trigger for that pair acting as a competitor.
        let mut passing: Vec<Vec<u32>> = vec![Vec::new(); m1 * m2];
        for a in 0..m1 {
            for b in 0..m2 {
                let list = &mut passing[a * m2 + b];
                for si in 0..count {
                    let s = &self.feasible[si * n..(si + 1) * n];
                    let d = self.divergence(&mut scratch, a, b, s, y);
                    if d <= self.eta {
                        list.push(si as u32);
                    }
                }
            }
        }

        // Stage 2: a pair qualifies when one of its explaining sequences
        // also passes every triggered disentanglement test.
        let mut qualified: Vec<(usize, usize)> = Vec::new();
        for a in 0..m1 {
            'candidate: for b in 0..m2 {
                'state: for &si in &passing[a * m2 + b] {
                    let s = &self.feasible[si as usize * n..(si as usize + 1) * n];
                    for a2 in 0..m1 {
                        if a2 != a
                            && !passing[a2 * m2 + b].is_empty()
                            && self.impostor_info1(a, b, a2, s, y) > self.eta1
                        {
                            continue 'state;
                        }
                    }
                    for b2 in 0..m2 {
                        if b2 != b
                            && !passing[a * m2 + b2].is_empty()
                            && self.impostor_info2(a, b, b2, s, y) > self.eta2
                        {
                            continue 'state;
                        }
                    }
                    for a2 in 0..m1 {
                        for b2 in 0..m2 {
                            if a2 != a
                                && b2 != b
                                && !passing[a2 * m2 + b2].is_empty()
                                && self.impostor_info_pair(a, b, a2, b2, s, y) > self.eta
                            {
                                continue 'state;
                            }
                        }
                    }
                    qualified.push((a, b));
                    continue 'candidate;
                }
            }
        }

        match qualified.as_slice() {
            [] => DecodeOutcome::NoMatch,
            [(a, b)] => DecodeOutcome::Decoded(*a, *b),
            _ => DecodeOutcome::Ambiguous,
        }
    }

    /// Divergence, in nats, of the joint type of (u, word1, word2, s, y)
    /// from the product of its own per-u marginals pushed through the
    /// channel. Infinite when the output uses a zero-probability transition.
    fn divergence(&self, sc: &mut Scratch, a: usize, b: usize, s: &[u8], y: &[usize]) -> f64 {
        let spec = self.spec;
        let (nx1, nx2, ns, ny) = (spec.nx1(), spec.nx2(), spec.ns(), spec.ny());
        let code = self.code;
        let n = code.n();
        for &t in &sc.touched {
            sc.joint[t as usize] = 0;
        }
        sc.touched.clear();
        sc.cu.fill(0);
        sc.cux1.fill(0);
        sc.cux2.fill(0);
        sc.cus.fill(0);

        let u_seq = code.u_seq();
        let w1 = code.word1(a);
        let w2 = code.word2(b);
        for i in 0..n {
            let (u, x1, x2, si, yi) = (u_seq[i], w1[i], w2[i], s[i] as usize, y[i]);
            let idx = (((u * nx1 + x1) * nx2 + x2) * ns + si) * ny + yi;
            if sc.joint[idx] == 0 {
                sc.touched.push(idx as u32);
            }
            sc.joint[idx] += 1;
            sc.cu[u] += 1;
            sc.cux1[u * nx1 + x1] += 1;
            sc.cux2[u * nx2 + x2] += 1;
            sc.cus[u * ns + si] += 1;
        }

        let mut d = 0.0;
        for &t in &sc.touched {
            let mut rest = t as usize;
            let yi = rest % ny;
            rest /= ny;
            let si = rest % ns;
            rest /= ns;
            let x2 = rest % nx2;
            rest /= nx2;
            let x1 = rest % nx1;
            let u = rest / nx1;
            let w = spec.w(x1, x2, si, yi);
            if w <= 0.0 {
                return f64::INFINITY;
            }
            let cnt = sc.joint[t as usize] as f64;
            let cu = sc.cu[u] as f64;
            let denom =
                sc.cux1[u * nx1 + x1] as f64 * sc.cux2[u * nx2 + x2] as f64 * sc.cus[u * ns + si] as f64;
            d += cnt / n as f64 * (cnt * cu * cu / (denom * w)).ln();
        }
        d
    }

    /// I(word pair, output; impostor first-sender word | u, tested states).
    fn impostor_info1(&self, a: usize, b: usize, a2: usize, s: &[u8], y: &[usize]) -> f64 {
        let (nx2, ns, ny) = (self.spec.nx2(), self.spec.ns(), self.spec.ny());
        let code = self.code;
        let (u_seq, w1, w2, v1) = (code.u_seq(), code.word1(a), code.word2(b), code.word1(a2));
        conditional_information(code.n(), |i| {
            (
                ((w1[i] * nx2 + w2[i]) * ny + y[i]) as u64,
                v1[i] as u64,
                (u_seq[i] * ns + s[i] as usize) as u64,
            )
        })
    }

    /// I(word pair, output; impostor second-sender word | u, tested states).
    fn impostor_info2(&self, a: usize, b: usize, b2: usize, s: &[u8], y: &[usize]) -> f64 {
        let (nx2, ns, ny) = (self.spec.nx2(), self.spec.ns(), self.spec.ny());
        let code = self.code;
        let (u_seq, w1, w2, v2) = (code.u_seq(), code.word1(a), code.word2(b), code.word2(b2));
        conditional_information(code.n(), |i| {
            (
                ((w1[i] * nx2 + w2[i]) * ny + y[i]) as u64,
                v2[i] as u64,
                (u_seq[i] * ns + s[i] as usize) as u64,
            )
        })
    }

    /// I(word pair, output; impostor word pair | u, tested states).
    fn impostor_info_pair(
        &self,
        a: usize,
        b: usize,
        a2: usize,
        b2: usize,
        s: &[u8],
        y: &[usize],
    ) -> f64 {
        let (nx2, ns, ny) = (self.spec.nx2(), self.spec.ns(), self.spec.ny());
        let code = self.code;
        let (u_seq, w1, w2) = (code.u_seq(), code.word1(a), code.word2(b));
        let (v1, v2) = (code.word1(a2), code.word2(b2));
        conditional_information(code.n(), |i| {
            (
                ((w1[i] * nx2 + w2[i]) * ny + y[i]) as u64,
                (v1[i] * nx2 + v2[i]) as u64,
                (u_seq[i] * ns + s[i] as usize) as u64,
            )
        })
    }
}

/// Empirical conditional mutual information `I(A; B | C)` in nats, from the
/// per-position key triples of length-`n` sequences.
fn conditional_information(n: usize, keys: impl Fn(usize) -> (u64, u64, u64)) -> f64 {
    let mut abc: HashMap<(u64, u64, u64), u32> = HashMap::new();
    let mut ac: HashMap<(u64, u64), u32> = HashMap::new();
    let mut bc: HashMap<(u64, u64), u32> = HashMap::new();
    let mut c: HashMap<u64, u32> = HashMap::new();
    for i in 0..n {
        let (ka, kb, kc) = keys(i);
        *abc.entry((ka, kb, kc)).or_insert(0) += 1;
        *ac.entry((ka, kc)).or_insert(0) += 1;
        *bc.entry((kb, kc)).or_insert(0) += 1;
        *c.entry(kc).or_insert(0) += 1;
    }
    let mut info = 0.0;
    for (&(ka, kb, kc), &cnt) in &abc {
        let num = cnt as f64 * c[&kc] as f64;
        let den = ac[&(ka, kc)] as f64 * bc[&(kb, kc)] as f64;
        info += cnt as f64 / n as f64 * (num / den).ln();
    }
    info
}
