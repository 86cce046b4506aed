//! Search over input ensembles for the pentagons that shape a rate region.
//!
//! Small input alphabets get an exhaustive dyadic grid over product
//! ensembles; larger ones start from a handful of structured distributions
//! (cheapest letter, budget-saturating blends, cost-tilted families). The
//! best seeds are refined by greedy mass transfers scored against the most
//! recent worst-case state laws, which is cheap, and revalidated by an exact
//! minimization each pass. Time-sharing mixtures of the strongest seeds are
//! added at the end.
//!
//! The search is deterministic: candidate order is fixed, parallel sweeps
//! collect in input order, and refinements run sequentially, so two runs
//! over the same inputs produce identical pentagons.

use avmac_core::{
    mutual_informations, ChannelSpec, ConstraintSpec, CostModel, InputEnsemble, Pmf, StateLaw,
};
use avmac_symmetry::{tilde_lambda_with, CostValue, SymKind, SymSolver};
use rayon::prelude::*;

use crate::pentagon::pentagon_with_status;
use crate::stateopt::StateFeasibleSet;
use crate::{Pentagon, RegionError};

/// Gap tolerance while scanning and refining candidates.
const SCOUT_GAP_TOL: f64 = 1e-5;

/// Gap tolerance for the pentagons that are actually reported.
const FINAL_GAP_TOL: f64 = 1e-7;

/// Exhaustive product grids are capped at this many input pairs.
const GRID_PAIR_LIMIT: usize = 200_000;

/// Slack when testing the restriction thresholds against the state budget.
const ACCEPT_SLACK: f64 = 1e-9;

/// A finite threshold this close to the state budget marks the verdict as
/// numerically fragile.
const NEAR_BAND: f64 = 1e-6;

/// Refinement passes (each ends with an exact re-minimization).
const ASCENT_PASSES: usize = 5;

/// Greedy transfer sweeps per pass.
const ASCENT_SWEEPS: usize = 6;

/// Mass-transfer step sizes, largest first.
const DELTAS: [f64; 4] = [1.0 / 8.0, 1.0 / 32.0, 1.0 / 128.0, 1.0 / 512.0];

/// Directions (weights on `r1` versus `r2`) used to pick refinement seeds.
const SEED_DIRECTIONS: [f64; 3] = [0.999, 0.5, 0.001];

/// Result of an ensemble search.
pub(crate) struct SearchOutcome {
    /// Exactly re-solved pentagons for the selected ensembles.
    pub pentagons: Vec<Pentagon>,
    /// True when any reported minimization hit its iteration cap.
    pub unconverged: bool,
    /// Reported ensembles whose restriction threshold sits within
    /// `NEAR_BAND` of the state budget.
    pub near_boundary: usize,
}

/// Restriction thresholds of one ensemble, kept as extended reals.
#[derive(Debug, Clone)]
struct TildeValues {
    joint: CostValue,
    sender1: CostValue,
    sender2: CostValue,
}

impl TildeValues {
    fn min_value(&self) -> CostValue {
        let mut best = CostValue::Infinite;
        for v in [&self.joint, &self.sender1, &self.sender2] {
            if let CostValue::Finite(x) = v {
                best = match best {
                    CostValue::Infinite => CostValue::Finite(*x),
                    CostValue::Finite(b) => CostValue::Finite(b.min(*x)),
                };
            }
        }
        best
    }

    fn accept(&self, lambda: f64) -> bool {
        match self.min_value() {
            CostValue::Infinite => true,
            CostValue::Finite(x) => x >= lambda - ACCEPT_SLACK,
        }
    }

    fn near(&self, lambda: f64) -> bool {
        match self.min_value() {
            CostValue::Infinite => false,
            CostValue::Finite(x) => (x - lambda).abs() <= NEAR_BAND,
        }
    }

    /// Thresholds of a time-sharing mixture: each threshold is the weighted
    /// sum of the component thresholds, and an unbounded component makes
    /// the mixture unbounded.
    fn blend(parts: &[(f64, &TildeValues)]) -> TildeValues {
        let combine = |pick: fn(&TildeValues) -> &CostValue| -> CostValue {
            let mut total = 0.0;
            for (w, t) in parts {
                match pick(t) {
                    CostValue::Infinite => return CostValue::Infinite,
                    CostValue::Finite(x) => total += w * x,
                }
            }
            CostValue::Finite(total)
        };
        TildeValues {
            joint: combine(|t| &t.joint),
            sender1: combine(|t| &t.sender1),
            sender2: combine(|t| &t.sender2),
        }
    }
}

/// Gate that keeps only ensembles whose symmetrization cost thresholds sit
/// at or above the state budget, the legitimacy condition for counting a
/// pentagon toward the deterministic-code region.
pub(crate) struct TildeFilter {
    lambda: f64,
    joint: SymSolver,
    sender1: SymSolver,
    sender2: SymSolver,
}

impl TildeFilter {
    pub(crate) fn new(spec: &ChannelSpec, lambda: f64) -> Result<TildeFilter, RegionError> {
        Ok(TildeFilter {
            lambda,
            joint: SymSolver::new(spec, SymKind::Joint)?,
            sender1: SymSolver::new(spec, SymKind::Sender1)?,
            sender2: SymSolver::new(spec, SymKind::Sender2)?,
        })
    }

    fn values(&self, costs: &CostModel, ens: &InputEnsemble) -> Result<TildeValues, RegionError> {
        Ok(TildeValues {
            joint: tilde_lambda_with(&self.joint, costs, ens)?,
            sender1: tilde_lambda_with(&self.sender1, costs, ens)?,
            sender2: tilde_lambda_with(&self.sender2, costs, ens)?,
        })
    }
}

/// One evaluated ensemble: scout-grade corner rates plus the state laws
/// that achieved them.
#[derive(Clone)]
struct Candidate {
    ens: InputEnsemble,
    triple: [f64; 3],
    laws: [StateLaw; 3],
    tilde: Option<TildeValues>,
}

/// Shared inputs of one search.
struct Ctx<'a> {
    spec: &'a ChannelSpec,
    costs: &'a CostModel,
    cons: &'a ConstraintSpec,
    feasible: StateFeasibleSet,
    per_letter: bool,
    filter: Option<&'a TildeFilter>,
}

impl Ctx<'_> {
    /// Restriction gate; `None` means rejected.
    fn gate(&self, ens: &InputEnsemble) -> Result<Option<Option<TildeValues>>, RegionError> {
        match self.filter {
            None => Ok(Some(None)),
            Some(f) => {
                let t = f.values(self.costs, ens)?;
                if t.accept(f.lambda) {
                    Ok(Some(Some(t)))
                } else {
                    Ok(None)
                }
            }
        }
    }

    /// Exact corner-rate solve at the given tolerance, with the restriction
    /// thresholds already known.
    fn solve(
        &self,
        ens: InputEnsemble,
        tilde: Option<TildeValues>,
        gap_tol: f64,
    ) -> Result<Candidate, RegionError> {
        let (pentagon, status) = pentagon_with_status(
            self.spec,
            self.costs,
            &ens,
            self.cons,
            &self.feasible,
            self.per_letter,
            gap_tol,
        )?;
        Ok(Candidate {
            ens,
            triple: [pentagon.r1_max, pentagon.r2_max, pentagon.sum_max],
            laws: status.laws,
            tilde,
        })
    }

    /// Gate plus scout-grade solve; `None` means the gate rejected it.
    fn scout(&self, ens: InputEnsemble) -> Result<Option<Candidate>, RegionError> {
        match self.gate(&ens)? {
            None => Ok(None),
            Some(tilde) => self.solve(ens, tilde, SCOUT_GAP_TOL).map(Some),
        }
    }
}

/// Support value of the pentagon `{r1 <= a, r2 <= b, r1 + r2 <= c}` in the
/// direction `(mu, 1 - mu)`.
fn support3(triple: [f64; 3], mu: f64) -> f64 {
    let [r1, r2, sum] = triple;
    let x_hi = r1.min(sum).max(0.0);
    let y_hi = r2.min(sum).max(0.0);
    let y_at_x = r2.min((sum - x_hi).max(0.0)).max(0.0);
    let x_at_y = r1.min((sum - y_hi).max(0.0)).max(0.0);
    let corners = [(x_hi, 0.0), (x_hi, y_at_x), (x_at_y, y_hi), (0.0, y_hi)];
    corners
        .iter()
        .map(|&(x, y)| mu * x + (1.0 - mu) * y)
        .fold(0.0, f64::max)
}

/// All probability vectors of length `n` with denominator `denom`.
fn compositions(n: usize, denom: usize) -> Vec<Vec<f64>> {
    fn rec(left: usize, slots: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if slots == 1 {
            prefix.push(left);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for take in 0..=left {
            prefix.push(take);
            rec(left - take, slots - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut raw = Vec::new();
    rec(denom, n, &mut Vec::new(), &mut raw);
    raw.into_iter()
        .map(|counts| {
            counts
                .into_iter()
                .map(|c| c as f64 / denom as f64)
                .collect()
        })
        .collect()
}

pub(crate) fn composition_count(n: usize, denom: usize) -> usize {
    // C(denom + n - 1, n - 1), saturating.
    let mut value: u128 = 1;
    for i in 0..(n - 1) {
        value = value.saturating_mul((denom + n - 1 - i) as u128);
        value /= (i + 1) as u128;
        if value > usize::MAX as u128 {
            return usize::MAX;
        }
    }
    value as usize
}

fn expected(p: &[f64], g: &[f64]) -> f64 {
    p.iter().zip(g).map(|(a, b)| a * b).sum()
}

/// Structured starting distributions for one sender: cheapest letter,
/// budget-saturating uniform blend, and cost-tilted families.
fn sender_starts(g: &[f64], gamma: f64) -> Vec<Vec<f64>> {
    let n = g.len();
    let cheapest = argmin(g);
    if g[cheapest] > gamma + 1e-12 {
        return Vec::new();
    }
    let mut delta = vec![0.0; n];
    delta[cheapest] = 1.0;
    let blend_to_budget = |p: &[f64]| -> Vec<f64> {
        let cost = expected(p, g);
        let base = g[cheapest];
        if cost <= gamma {
            return p.to_vec();
        }
        let t = (gamma - base) / (cost - base);
        p.iter()
            .zip(&delta)
            .map(|(a, d)| t * a + (1.0 - t) * d)
            .collect()
    };
    let mut starts = vec![delta.clone()];
    let uniform = vec![1.0 / n as f64; n];
    starts.push(blend_to_budget(&uniform));
    let gmin = g[cheapest];
    for tau in [0.25, 1.0, 4.0] {
        let weights: Vec<f64> = g.iter().map(|&c| (-tau * (c - gmin)).exp()).collect();
        let z: f64 = weights.iter().sum();
        let tilted: Vec<f64> = weights.iter().map(|w| w / z).collect();
        starts.push(blend_to_budget(&tilted));
    }
    let mut unique: Vec<Vec<f64>> = Vec::new();
    for s in starts {
        let dup = unique
            .iter()
            .any(|u| u.iter().zip(&s).all(|(a, b)| (a - b).abs() <= 1e-9));
        if !dup {
            unique.push(s);
        }
    }
    unique
}

fn singleton(p1: &[f64], p2: &[f64]) -> Result<InputEnsemble, RegionError> {
    Ok(InputEnsemble::singleton(
        Pmf::new(p1.to_vec())?,
        Pmf::new(p2.to_vec())?,
    ))
}

fn argmin(g: &[f64]) -> usize {
    g.iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap_or(0)
}

/// Directed mass-transfer moves for a distribution of the given size: all
/// pairs when small, otherwise neighbors plus the center and cheapest slots.
fn transfer_moves(n: usize, cheapest: usize) -> Vec<(usize, usize)> {
    let mut moves = Vec::new();
    if n <= 4 {
        for from in 0..n {
            for to in 0..n {
                if from != to {
                    moves.push((from, to));
                }
            }
        }
        return moves;
    }
    for from in 0..n {
        let mut targets = Vec::with_capacity(4);
        if from > 0 {
            targets.push(from - 1);
        }
        if from + 1 < n {
            targets.push(from + 1);
        }
        targets.push(n / 2);
        targets.push(cheapest);
        targets.sort_unstable();
        targets.dedup();
        for to in targets {
            if to != from {
                moves.push((from, to));
            }
        }
    }
    moves
}

/// Corner rates of a singleton ensemble when each state law is frozen at a
/// previously solved worst case. Upper-bounds the true corner rates, and is
/// tight at the ensemble the laws were solved for.
fn frozen_triple(
    spec: &ChannelSpec,
    p1: &[f64],
    p2: &[f64],
    laws: &[StateLaw; 3],
) -> Result<[f64; 3], RegionError> {
    let ens = singleton(p1, p2)?;
    let a = mutual_informations(spec, &ens, &laws[0])?;
    let b = mutual_informations(spec, &ens, &laws[1])?;
    let c = mutual_informations(spec, &ens, &laws[2])?;
    Ok([a.i1, b.i2, c.isum])
}

/// Greedy refinement of a singleton seed toward larger support in one
/// direction. Moves are scored against frozen state laws; each pass ends by
/// re-solving the minimizations exactly and refreshing the laws.
fn ascend(ctx: &Ctx<'_>, seed: &Candidate, mu: f64) -> Result<Candidate, RegionError> {
    let mut best = seed.clone();
    let mut p1 = best.ens.px1(0).as_slice().to_vec();
    let mut p2 = best.ens.px2(0).as_slice().to_vec();
    let moves1 = transfer_moves(p1.len(), argmin(&ctx.costs.g1));
    let moves2 = transfer_moves(p2.len(), argmin(&ctx.costs.g2));
    for _pass in 0..ASCENT_PASSES {
        let laws = best.laws.clone();
        let mut cur_score = support3(frozen_triple(ctx.spec, &p1, &p2, &laws)?, mu);
        let mut moved = false;
        for _sweep in 0..ASCENT_SWEEPS {
            let mut improved = false;
            for sender in 0..2 {
                let moves = if sender == 0 { &moves1 } else { &moves2 };
                for &(from, to) in moves {
                    for &base_delta in DELTAS.iter() {
                        let have = if sender == 0 { p1[from] } else { p2[from] };
                        if have <= 1e-15 {
                            break;
                        }
                        let delta = base_delta.min(have);
                        let mut q1 = p1.clone();
                        let mut q2 = p2.clone();
                        {
                            let q = if sender == 0 { &mut q1 } else { &mut q2 };
                            q[from] -= delta;
                            q[from] = q[from].max(0.0);
                            q[to] += delta;
                        }
                        if expected(&q1, &ctx.costs.g1) > ctx.cons.gamma1
                            || expected(&q2, &ctx.costs.g2) > ctx.cons.gamma2
                        {
                            continue;
                        }
                        if ctx.gate(&singleton(&q1, &q2)?)?.is_none() {
                            continue;
                        }
                        let score = support3(frozen_triple(ctx.spec, &q1, &q2, &laws)?, mu);
                        if score > cur_score + 1e-12 {
                            p1 = q1;
                            p2 = q2;
                            cur_score = score;
                            improved = true;
                            moved = true;
                        }
                    }
                }
            }
            if !improved {
                break;
            }
        }
        if !moved {
            break;
        }
        let ens = singleton(&p1, &p2)?;
        let cand = match ctx.gate(&ens)? {
            Some(tilde) => ctx.solve(ens, tilde, SCOUT_GAP_TOL)?,
            None => break,
        };
        if support3(cand.triple, mu) > support3(best.triple, mu) + 1e-9 {
            best = cand;
        } else {
            break;
        }
    }
    Ok(best)
}

fn law_rows(law: &StateLaw) -> Vec<Pmf> {
    match law {
        StateLaw::PerU(rows) => rows.clone(),
        StateLaw::Unconditional(q) => vec![q.clone()],
    }
}

/// Time-sharing mixtures of singleton components. With a per-letter state
/// law the corner rates decompose over letters, so mixture rates are
/// weighted sums of component rates and need no new minimization.
fn synthesize_mixtures(comps: &[&Candidate], lambda: Option<f64>) -> Vec<Candidate> {
    let build = |idx: &[usize], counts: &[usize]| -> Option<Candidate> {
        let total: usize = counts.iter().sum();
        let w: Vec<f64> = counts.iter().map(|&c| c as f64 / total as f64).collect();
        let pu = Pmf::new(w.clone()).ok()?;
        let mut px1 = Vec::with_capacity(idx.len());
        let mut px2 = Vec::with_capacity(idx.len());
        let mut rows: [Vec<Pmf>; 3] = [Vec::new(), Vec::new(), Vec::new()];
        let mut triple = [0.0; 3];
        let mut tilde_parts = Vec::with_capacity(idx.len());
        for (k, &i) in idx.iter().enumerate() {
            let c = comps[i];
            px1.push(c.ens.px1(0).clone());
            px2.push(c.ens.px2(0).clone());
            for b in 0..3 {
                triple[b] += w[k] * c.triple[b];
                rows[b].extend(law_rows(&c.laws[b]));
            }
            if let Some(t) = &c.tilde {
                tilde_parts.push((w[k], t));
            }
        }
        let ens = InputEnsemble::new(pu, px1, px2).ok()?;
        let tilde = (tilde_parts.len() == idx.len()).then(|| TildeValues::blend(&tilde_parts));
        if let (Some(lam), Some(t)) = (lambda, &tilde) {
            if !t.accept(lam) {
                return None;
            }
        }
        let [a, b, c] = rows;
        Some(Candidate {
            ens,
            triple,
            laws: [StateLaw::PerU(a), StateLaw::PerU(b), StateLaw::PerU(c)],
            tilde,
        })
    };
    let mut out = Vec::new();
    let m = comps.len();
    for i in 0..m {
        for j in (i + 1)..m {
            for k in 1..8usize {
                out.extend(build(&[i, j], &[k, 8 - k]));
            }
        }
    }
    for i in 0..m {
        for j in (i + 1)..m {
            for k in (j + 1)..m {
                for a in 1..7usize {
                    for b in 1..(8 - a) {
                        out.extend(build(&[i, j, k], &[a, b, 8 - a - b]));
                    }
                }
            }
        }
    }
    out
}

/// Indices of the candidates worth exact re-solution: the support maximizer
/// in a fan of directions plus the componentwise maximizers.
fn select_pool(cands: &[Candidate]) -> Vec<usize> {
    let mut picks: Vec<usize> = Vec::new();
    let push = |picks: &mut Vec<usize>, i: usize| {
        if !picks.contains(&i) {
            picks.push(i);
        }
    };
    for step in 0..=16 {
        let mu = step as f64 / 16.0;
        if let Some(i) = argmax_by(cands, |c| support3(c.triple, mu)) {
            push(&mut picks, i);
        }
    }
    for b in 0..3 {
        if let Some(i) = argmax_by(cands, |c| c.triple[b]) {
            push(&mut picks, i);
        }
    }
    picks
}

fn argmax_by(cands: &[Candidate], score: impl Fn(&Candidate) -> f64) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, c) in cands.iter().enumerate() {
        let s = score(c);
        if best.is_none_or(|(_, b)| s > b) {
            best = Some((i, s));
        }
    }
    best.map(|(i, _)| i)
}

fn same_ensemble(a: &InputEnsemble, b: &InputEnsemble) -> bool {
    if a.nu() != b.nu() || a.nx1() != b.nx1() || a.nx2() != b.nx2() {
        return false;
    }
    let eq = |x: &[f64], y: &[f64]| x.iter().zip(y).all(|(p, q)| (p - q).abs() <= 1e-12);
    if !eq(a.pu().as_slice(), b.pu().as_slice()) {
        return false;
    }
    (0..a.nu()).all(|u| {
        eq(a.px1(u).as_slice(), b.px1(u).as_slice())
            && eq(a.px2(u).as_slice(), b.px2(u).as_slice())
    })
}

/// Searches product-and-mixture input ensembles and returns exact pentagons
/// for the strongest ones. `filter` restricts the search to ensembles whose
/// symmetrization cost thresholds clear the state budget.
pub(crate) fn collect_pentagons(
    spec: &ChannelSpec,
    costs: &CostModel,
    cons: &ConstraintSpec,
    grid_scale: u32,
    per_letter: bool,
    filter: Option<&TildeFilter>,
) -> Result<SearchOutcome, RegionError> {
    let ctx = Ctx {
        spec,
        costs,
        cons,
        feasible: StateFeasibleSet::CostConstrained(cons.lambda),
        per_letter,
        filter,
    };
    let empty = || SearchOutcome {
        pentagons: Vec::new(),
        unconverged: false,
        near_boundary: 0,
    };

    let scale = grid_scale.max(1) as usize;
    let (n1, n2) = (spec.nx1(), spec.nx2());
    let denom1 = if n1 == 2 { 16 * scale } else { 8 * scale };
    let denom2 = if n2 == 2 { 16 * scale } else { 8 * scale };

    let mut pairs: Vec<(Vec<f64>, Vec<f64>)> = Vec::new();
    let grid_total = composition_count(n1, denom1).saturating_mul(composition_count(n2, denom2));
    if grid_total <= GRID_PAIR_LIMIT {
        let grid1: Vec<Vec<f64>> = compositions(n1, denom1)
            .into_iter()
            .filter(|p| expected(p, &costs.g1) <= cons.gamma1)
            .collect();
        let grid2: Vec<Vec<f64>> = compositions(n2, denom2)
            .into_iter()
            .filter(|p| expected(p, &costs.g2) <= cons.gamma2)
            .collect();
        for p1 in &grid1 {
            for p2 in &grid2 {
                pairs.push((p1.clone(), p2.clone()));
            }
        }
    }
    for s1 in sender_starts(&costs.g1, cons.gamma1) {
        for s2 in sender_starts(&costs.g2, cons.gamma2) {
            let dup = pairs.iter().any(|(a, b)| {
                a.iter().zip(&s1).all(|(x, y)| (x - y).abs() <= 1e-12)
                    && b.iter().zip(&s2).all(|(x, y)| (x - y).abs() <= 1e-12)
            });
            if !dup {
                pairs.push((s1.clone(), s2.clone()));
            }
        }
    }
    if pairs.is_empty() {
        return Ok(empty());
    }

    // Scout every candidate in parallel, collected in input order.
    let scouted: Vec<Option<Candidate>> = pairs
        .par_iter()
        .map(|(p1, p2)| ctx.scout(singleton(p1, p2)?))
        .collect::<Result<Vec<_>, _>>()?;
    let mut cands: Vec<Candidate> = scouted.into_iter().flatten().collect();
    if cands.is_empty() {
        return Ok(empty());
    }

    // Refine the strongest seeds in a few directions.
    let mut seeds: Vec<(usize, f64)> = Vec::new();
    for &mu in &SEED_DIRECTIONS {
        let mut ranked: Vec<usize> = (0..cands.len()).collect();
        ranked.sort_by(|&a, &b| {
            support3(cands[b].triple, mu).total_cmp(&support3(cands[a].triple, mu))
        });
        for &i in ranked.iter().take(2) {
            if !seeds.iter().any(|&(j, m)| j == i && m == mu) {
                seeds.push((i, mu));
            }
        }
    }
    seeds.truncate(6);
    for (i, mu) in seeds {
        let refined = ascend(&ctx, &cands[i], mu)?;
        if !same_ensemble(&refined.ens, &cands[i].ens) {
            cands.push(refined);
        }
    }

    // Time-sharing mixtures of the componentwise best singletons.
    let mut comp_idx: Vec<usize> = Vec::new();
    let singles: Vec<usize> = (0..cands.len()).filter(|&i| cands[i].ens.nu() == 1).collect();
    let consider = |comp_idx: &mut Vec<usize>, pick: Option<usize>| {
        if let Some(i) = pick {
            if !comp_idx.contains(&i) {
                comp_idx.push(i);
            }
        }
    };
    for b in 0..3 {
        let pick = singles
            .iter()
            .copied()
            .max_by(|&a, &c| cands[a].triple[b].total_cmp(&cands[c].triple[b]));
        consider(&mut comp_idx, pick);
    }
    let pick = singles.iter().copied().max_by(|&a, &c| {
        support3(cands[a].triple, 0.5).total_cmp(&support3(cands[c].triple, 0.5))
    });
    consider(&mut comp_idx, pick);
    if comp_idx.len() >= 2 {
        // Weighted sums of the component rates are achievable in every
        // regime (a shared state law only tightens the minimum), so the
        // synthesized mixtures are added unconditionally. Their order and
        // values do not depend on the regime, which keeps the single-letter
        // and shared-law searches aligned for the nesting guarantees.
        let comps: Vec<&Candidate> = comp_idx.iter().map(|&i| &cands[i]).collect();
        let mixtures = synthesize_mixtures(&comps, filter.map(|f| f.lambda));
        cands.extend(mixtures);
    }
    let shared_len = cands.len();
    if comp_idx.len() >= 2 && !per_letter {
        // One shared state law couples the letters and can beat the
        // per-letter decomposition, so also solve a small weight grid
        // of pair mixtures outright.
        let mut jobs: Vec<InputEnsemble> = Vec::new();
        for ai in 0..comp_idx.len() {
            for bi in (ai + 1)..comp_idx.len() {
                let (ca, cb) = (&cands[comp_idx[ai]], &cands[comp_idx[bi]]);
                for w in [0.25, 0.5, 0.75] {
                    jobs.push(InputEnsemble::new(
                        Pmf::new(vec![w, 1.0 - w])?,
                        vec![ca.ens.px1(0).clone(), cb.ens.px1(0).clone()],
                        vec![ca.ens.px2(0).clone(), cb.ens.px2(0).clone()],
                    )?);
                }
            }
        }
        let solved: Vec<Option<Candidate>> = jobs
            .into_par_iter()
            .map(|ens| ctx.scout(ens))
            .collect::<Result<Vec<_>, _>>()?;
        cands.extend(solved.into_iter().flatten());
    }

    // Exact re-solution of the selected pool. Selection runs over the
    // regime-independent candidates first so every pentagon the per-letter
    // search would report has a counterpart here, then separately over the
    // shared-law mixtures, which only add to the pool.
    let mut pool = select_pool(&cands[..shared_len]);
    if shared_len < cands.len() {
        for i in select_pool(&cands[shared_len..]) {
            let j = shared_len + i;
            if !pool.contains(&j) {
                pool.push(j);
            }
        }
    }
    let mut kept: Vec<&Candidate> = Vec::new();
    for i in pool {
        if !kept.iter().any(|k| same_ensemble(&k.ens, &cands[i].ens)) {
            kept.push(&cands[i]);
        }
    }
    let resolved: Vec<(Candidate, bool)> = kept
        .par_iter()
        .map(|c| -> Result<(Candidate, bool), RegionError> {
            let (pentagon, status) = pentagon_with_status(
                spec,
                costs,
                &c.ens,
                cons,
                &ctx.feasible,
                per_letter,
                FINAL_GAP_TOL,
            )?;
            let exact = Candidate {
                ens: pentagon.ensemble.clone(),
                triple: [pentagon.r1_max, pentagon.r2_max, pentagon.sum_max],
                laws: status.laws,
                tilde: c.tilde.clone(),
            };
            Ok((exact, status.converged))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut outcome = empty();
    for (cand, converged) in resolved {
        outcome.unconverged |= !converged;
        if let (Some(t), Some(f)) = (&cand.tilde, filter) {
            outcome.near_boundary += usize::from(t.near(f.lambda));
        }
        outcome.pentagons.push(Pentagon {
            r1_max: cand.triple[0],
            r2_max: cand.triple[1],
            sum_max: cand.triple[2],
            ensemble: cand.ens,
        });
    }
    Ok(outcome)
}

/// Corner rates of the best product ensembles in the restricted set used by
/// the single-sender regimes: products `p1 x p2` meeting the input budgets
/// whose named thresholds clear the state budget. Returns the candidate
/// marginals, gated, without solving anything.
pub(crate) fn restricted_products(
    spec: &ChannelSpec,
    costs: &CostModel,
    cons: &ConstraintSpec,
    grid_scale: u32,
    admit: &mut dyn FnMut(&InputEnsemble) -> Result<bool, RegionError>,
) -> Result<Vec<InputEnsemble>, RegionError> {
    let scale = grid_scale.max(1) as usize;
    let (n1, n2) = (spec.nx1(), spec.nx2());
    let denom1 = if n1 == 2 { 16 * scale } else { 8 * scale };
    let denom2 = if n2 == 2 { 16 * scale } else { 8 * scale };
    let mut list1: Vec<Vec<f64>> = Vec::new();
    let mut list2: Vec<Vec<f64>> = Vec::new();
    let grid_total = composition_count(n1, denom1).saturating_mul(composition_count(n2, denom2));
    if grid_total <= GRID_PAIR_LIMIT {
        list1 = compositions(n1, denom1);
        list2 = compositions(n2, denom2);
    }
    let extend_unique = |list: &mut Vec<Vec<f64>>, extra: Vec<Vec<f64>>| {
        for s in extra {
            let dup = list
                .iter()
                .any(|u| u.iter().zip(&s).all(|(a, b)| (a - b).abs() <= 1e-12));
            if !dup {
                list.push(s);
            }
        }
    };
    extend_unique(&mut list1, sender_starts(&costs.g1, cons.gamma1));
    extend_unique(&mut list2, sender_starts(&costs.g2, cons.gamma2));
    list1.retain(|p| expected(p, &costs.g1) <= cons.gamma1);
    list2.retain(|p| expected(p, &costs.g2) <= cons.gamma2);
    let mut out = Vec::new();
    for p1 in &list1 {
        for p2 in &list2 {
            let ens = singleton(p1, p2)?;
            if admit(&ens)? {
                out.push(ens);
            }
        }
    }
    Ok(out)
}
