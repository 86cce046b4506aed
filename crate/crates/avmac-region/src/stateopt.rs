//! Minimization of conditional mutual information over state distributions.
//!
//! For fixed inputs the map `q -> I_q` is convex (the averaged channel is
//! linear in `q` and mutual information is convex in the channel), so the
//! minimum over a budget polytope `{q : E_q l(S) <= lambda}` is found by
//! Frank-Wolfe descent with away steps over the polytope's vertex list. The
//! vertex list is exact: unit masses on affordable states plus two-state
//! mixtures that hit the budget with equality.

use avmac_core::{ChannelSpec, CostModel, InputEnsemble, Pmf, StateLaw};

use crate::RegionError;

/// Stop when the linearization gap falls below this; the gap bounds the
/// distance to the true minimum, so converged values are within it.
const GAP_TOL: f64 = 1e-7;

/// Iteration cap per minimization; hitting it clears the converged flag.
const MAX_ITERS: usize = 20_000;

/// Steps stay strictly inside the current face so averaged-channel entries
/// that can be positive stay positive and gradients stay finite.
const STEP_MARGIN: f64 = 1e-9;

/// Set of state distributions the jammer may choose from.
#[derive(Debug, Clone)]
pub enum StateFeasibleSet {
    /// `{q : sum_s q(s) l(s) <= lambda}` intersected with the simplex.
    CostConstrained(f64),
    /// A finite list of candidate distributions, searched exhaustively.
    ExplicitList(Vec<Pmf>),
}

/// Which conditional mutual information to minimize, in bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WhichInfo {
    /// `I(X1; Y | X2, U)`
    I1,
    /// `I(X2; Y | X1, U)`
    I2,
    /// `I(X1, X2; Y | U)`
    Sum,
}

/// Outcome of a state minimization.
#[derive(Debug, Clone)]
pub struct MinInfoReport {
    /// Minimized value in bits.
    pub value: f64,
    /// Minimizing state law: unconditional for a shared minimization, one
    /// row per time-sharing letter otherwise.
    pub law: StateLaw,
    /// False when an iteration cap was hit first; `value` is then the best
    /// point found, still an upper bound on the true minimum.
    pub converged: bool,
    /// Final linearization gap: the objective drop still available to the
    /// best vertex of the feasible set, zero for exhaustive enumeration.
    pub optimality_gap: f64,
}

/// Minimizes the chosen conditional mutual information over the feasible
/// state set. With `per_letter` the jammer picks a separate distribution for
/// every time-sharing letter (each under the same budget) and the problem
/// decomposes; otherwise one shared distribution faces the whole ensemble.
pub fn min_info_over_states(
    spec: &ChannelSpec,
    costs: &CostModel,
    ens: &InputEnsemble,
    feasible: &StateFeasibleSet,
    which: WhichInfo,
    per_letter: bool,
) -> Result<MinInfoReport, RegionError> {
    min_info_with_tol(spec, costs, ens, feasible, which, per_letter, GAP_TOL)
}

/// Same minimization with a caller-chosen gap tolerance; loose tolerances
/// are used while scouting input ensembles, the default for final answers.
pub(crate) fn min_info_with_tol(
    spec: &ChannelSpec,
    costs: &CostModel,
    ens: &InputEnsemble,
    feasible: &StateFeasibleSet,
    which: WhichInfo,
    per_letter: bool,
    gap_tol: f64,
) -> Result<MinInfoReport, RegionError> {
    check_dims(spec, costs, ens)?;
    match feasible {
        StateFeasibleSet::ExplicitList(list) => {
            if list.is_empty() {
                return Err(RegionError::Input(
                    "explicit state list is empty".into(),
                ));
            }
            for q in list {
                if q.len() != spec.ns() {
                    return Err(RegionError::Input(format!(
                        "state distribution has {} entries, the channel has {} states",
                        q.len(),
                        spec.ns()
                    )));
                }
            }
            Ok(minimize_over_list(spec, ens, list, which, per_letter))
        }
        StateFeasibleSet::CostConstrained(lambda) => {
            let vertices = budget_polytope_vertices(&costs.l, *lambda)?;
            Ok(minimize_over_polytope_set(
                spec, ens, &vertices, which, per_letter, gap_tol,
            ))
        }
    }
}

fn check_dims(
    spec: &ChannelSpec,
    costs: &CostModel,
    ens: &InputEnsemble,
) -> Result<(), RegionError> {
    if ens.nx1() != spec.nx1() || ens.nx2() != spec.nx2() {
        return Err(RegionError::Input(format!(
            "ensemble is over {}x{} inputs, the channel has {}x{}",
            ens.nx1(),
            ens.nx2(),
            spec.nx1(),
            spec.nx2()
        )));
    }
    if costs.l.len() != spec.ns() {
        return Err(RegionError::Input(format!(
            "state cost has {} entries, the channel has {} states",
            costs.l.len(),
            spec.ns()
        )));
    }
    Ok(())
}

/// Vertices of `{q in simplex : <l, q> <= lambda}`: affordable unit masses
/// and two-state mixtures that meet the budget with equality.
pub(crate) fn budget_polytope_vertices(
    l: &[f64],
    lambda: f64,
) -> Result<Vec<Vec<f64>>, RegionError> {
    if !lambda.is_finite() || lambda < -1e-12 {
        return Err(RegionError::Input(format!(
            "state budget {lambda} must be a nonnegative real"
        )));
    }
    if l.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(RegionError::Input(
            "state costs must be finite and nonnegative".into(),
        ));
    }
    let n = l.len();
    let mut vertices = Vec::new();
    for (s, &ls) in l.iter().enumerate() {
        if ls <= lambda + 1e-12 {
            let mut v = vec![0.0; n];
            v[s] = 1.0;
            vertices.push(v);
        }
    }
    for (i, &li) in l.iter().enumerate() {
        if li >= lambda - 1e-15 {
            continue;
        }
        for (j, &lj) in l.iter().enumerate() {
            if lj <= lambda + 1e-12 {
                continue;
            }
            let alpha = (lj - lambda) / (lj - li);
            let mut v = vec![0.0; n];
            v[i] = alpha;
            v[j] = 1.0 - alpha;
            vertices.push(v);
        }
    }
    if vertices.is_empty() {
        return Err(RegionError::Constraint(format!(
            "no state distribution meets the budget {lambda}; cheapest state costs {}",
            l.iter().cloned().fold(f64::INFINITY, f64::min)
        )));
    }
    Ok(vertices)
}

/// One conditioning context of the objective: `weight` times the mutual
/// information between the letters in `inputs` and the output, under the
/// averaged channel. Each input entry is `(prob, x1, x2)`.
struct Block {
    weight: f64,
    inputs: Vec<(f64, usize, usize)>,
}

fn blocks_for(scale: f64, p1: &[f64], p2: &[f64], which: WhichInfo) -> Vec<Block> {
    let mut blocks = Vec::new();
    match which {
        WhichInfo::I1 => {
            for (x2, &w2) in p2.iter().enumerate() {
                if w2 == 0.0 {
                    continue;
                }
                let inputs = p1
                    .iter()
                    .enumerate()
                    .filter(|(_, &p)| p > 0.0)
                    .map(|(x1, &p)| (p, x1, x2))
                    .collect();
                blocks.push(Block {
                    weight: scale * w2,
                    inputs,
                });
            }
        }
        WhichInfo::I2 => {
            for (x1, &w1) in p1.iter().enumerate() {
                if w1 == 0.0 {
                    continue;
                }
                let inputs = p2
                    .iter()
                    .enumerate()
                    .filter(|(_, &p)| p > 0.0)
                    .map(|(x2, &p)| (p, x1, x2))
                    .collect();
                blocks.push(Block {
                    weight: scale * w1,
                    inputs,
                });
            }
        }
        WhichInfo::Sum => {
            let mut inputs = Vec::new();
            for (x1, &a) in p1.iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                for (x2, &b) in p2.iter().enumerate() {
                    if a * b > 0.0 {
                        inputs.push((a * b, x1, x2));
                    }
                }
            }
            blocks.push(Block {
                weight: scale,
                inputs,
            });
        }
    }
    blocks
}

/// Convex objective over state distributions, as a weighted sum of
/// per-context mutual informations.
pub(crate) struct InfoObjective<'a> {
    spec: &'a ChannelSpec,
    blocks: Vec<Block>,
}

impl<'a> InfoObjective<'a> {
    /// Objective for a single time-sharing letter, unscaled.
    fn for_letter(spec: &'a ChannelSpec, ens: &InputEnsemble, u: usize, which: WhichInfo) -> Self {
        let blocks = blocks_for(1.0, ens.px1(u).as_slice(), ens.px2(u).as_slice(), which);
        InfoObjective { spec, blocks }
    }

    /// Objective for the whole ensemble against one shared distribution:
    /// letter objectives scaled by the time-sharing weights.
    fn for_ensemble(spec: &'a ChannelSpec, ens: &InputEnsemble, which: WhichInfo) -> Self {
        let mut blocks = Vec::new();
        for u in 0..ens.nu() {
            let pu = ens.pu()[u];
            if pu == 0.0 {
                continue;
            }
            blocks.extend(blocks_for(
                pu,
                ens.px1(u).as_slice(),
                ens.px2(u).as_slice(),
                which,
            ));
        }
        InfoObjective { spec, blocks }
    }

    pub(crate) fn from_product(
        spec: &'a ChannelSpec,
        p1: &[f64],
        p2: &[f64],
        which: WhichInfo,
    ) -> Self {
        InfoObjective {
            spec,
            blocks: blocks_for(1.0, p1, p2, which),
        }
    }
}

impl ConvexObjective for InfoObjective<'_> {
    fn value(&self, q: &[f64]) -> f64 {
        let ny = self.spec.ny();
        let mut total = 0.0;
        let mut avg = vec![0.0; ny];
        let mut out = vec![0.0; ny];
        for block in &self.blocks {
            out.iter_mut().for_each(|v| *v = 0.0);
            let mut mi = 0.0;
            for &(pa, x1, x2) in &block.inputs {
                average_row(self.spec, x1, x2, q, &mut avg);
                for (o, &t) in out.iter_mut().zip(avg.iter()) {
                    *o += pa * t;
                }
            }
            for &(pa, x1, x2) in &block.inputs {
                average_row(self.spec, x1, x2, q, &mut avg);
                for (y, &t) in avg.iter().enumerate() {
                    if t > 0.0 {
                        mi += pa * t * (t / out[y]).log2();
                    }
                }
            }
            total += block.weight * mi;
        }
        total
    }

    fn value_and_grad(&self, q: &[f64]) -> (f64, Vec<f64>) {
        let (ns, ny) = (self.spec.ns(), self.spec.ny());
        let mut total = 0.0;
        let mut grad = vec![0.0; ns];
        let mut avg = vec![0.0; ny];
        let mut out = vec![0.0; ny];
        let mut ratio = vec![0.0; ny];
        for block in &self.blocks {
            out.iter_mut().for_each(|v| *v = 0.0);
            for &(pa, x1, x2) in &block.inputs {
                average_row(self.spec, x1, x2, q, &mut avg);
                for (o, &t) in out.iter_mut().zip(avg.iter()) {
                    *o += pa * t;
                }
            }
            let mut mi = 0.0;
            for &(pa, x1, x2) in &block.inputs {
                average_row(self.spec, x1, x2, q, &mut avg);
                for y in 0..ny {
                    let t = avg[y];
                    if t > 0.0 {
                        let r = (t / out[y]).log2();
                        mi += pa * t * r;
                        ratio[y] = r;
                    } else {
                        // Unreached output under q; the floor keeps the
                        // entry finite if a state could still open it.
                        ratio[y] =
                            (t.max(f64::MIN_POSITIVE) / out[y].max(f64::MIN_POSITIVE)).log2();
                    }
                }
                let w = block.weight * pa;
                for s in 0..ns {
                    let row = self.spec.row(x1, x2, s);
                    let mut acc = 0.0;
                    for (y, &wy) in row.iter().enumerate() {
                        if wy > 0.0 {
                            acc += wy * ratio[y];
                        }
                    }
                    grad[s] += w * acc;
                }
            }
            total += block.weight * mi;
        }
        (total, grad)
    }
}

#[inline]
fn average_row(spec: &ChannelSpec, x1: usize, x2: usize, q: &[f64], out: &mut [f64]) {
    out.iter_mut().for_each(|v| *v = 0.0);
    for (s, &qs) in q.iter().enumerate() {
        if qs == 0.0 {
            continue;
        }
        for (o, &w) in out.iter_mut().zip(spec.row(x1, x2, s)) {
            *o += qs * w;
        }
    }
}

pub(crate) trait ConvexObjective {
    fn value(&self, q: &[f64]) -> f64;
    fn value_and_grad(&self, q: &[f64]) -> (f64, Vec<f64>);
}

/// Pointwise maximum of convex objectives, still convex; the gradient is a
/// subgradient taken at the first maximizer.
pub(crate) struct MaxInfoObjective<'a> {
    pub objs: Vec<InfoObjective<'a>>,
}

impl ConvexObjective for MaxInfoObjective<'_> {
    fn value(&self, q: &[f64]) -> f64 {
        self.objs
            .iter()
            .map(|o| o.value(q))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    fn value_and_grad(&self, q: &[f64]) -> (f64, Vec<f64>) {
        let mut best = 0usize;
        let mut best_value = f64::NEG_INFINITY;
        for (i, o) in self.objs.iter().enumerate() {
            let v = o.value(q);
            if v > best_value {
                best_value = v;
                best = i;
            }
        }
        self.objs[best].value_and_grad(q)
    }
}

pub(crate) struct FwOutcome {
    pub q: Vec<f64>,
    pub value: f64,
    pub gap: f64,
    pub converged: bool,
}

/// Frank-Wolfe with away steps over the convex hull of `vertices`.
///
/// The iterate is carried as an explicit convex combination; both step kinds
/// keep a sliver of every active weight (`STEP_MARGIN`) so the iterate stays
/// in the relative interior of its face and gradients stay exact.
pub(crate) fn minimize_over_polytope(
    obj: &dyn ConvexObjective,
    vertices: &[Vec<f64>],
    gap_tol: f64,
    max_iters: usize,
) -> FwOutcome {
    let n = vertices[0].len();
    let m = vertices.len();
    let mut weights = vec![1.0 / m as f64; m];
    let combine = |w: &[f64]| -> Vec<f64> {
        let mut q = vec![0.0; n];
        for (wi, v) in w.iter().zip(vertices) {
            if *wi > 0.0 {
                for (qs, &vs) in q.iter_mut().zip(v) {
                    *qs += wi * vs;
                }
            }
        }
        q
    };
    let mut q = combine(&weights);
    if m == 1 {
        return FwOutcome {
            value: obj.value(&q),
            q,
            gap: 0.0,
            converged: true,
        };
    }
    let (mut value, mut grad) = obj.value_and_grad(&q);
    let mut gap = f64::INFINITY;
    let mut converged = false;
    let mut stalls = 0usize;
    for _ in 0..max_iters {
        let score = |v: &Vec<f64>| dot(&grad, v);
        let mut fw = 0;
        let mut fw_score = f64::INFINITY;
        for (i, v) in vertices.iter().enumerate() {
            let s = score(v);
            if s < fw_score {
                fw_score = s;
                fw = i;
            }
        }
        let here = dot(&grad, &q);
        gap = here - fw_score;
        if gap <= gap_tol {
            converged = true;
            break;
        }
        let mut away = usize::MAX;
        let mut away_score = f64::NEG_INFINITY;
        for (i, v) in vertices.iter().enumerate() {
            if weights[i] > 0.0 {
                let s = score(v);
                if s > away_score {
                    away_score = s;
                    away = i;
                }
            }
        }
        let use_away = away != usize::MAX
            && weights[away] < 1.0 - 1e-12
            && (away_score - here) > (here - fw_score);
        let (dir, max_step): (Vec<f64>, f64) = if use_away {
            let d = q
                .iter()
                .zip(&vertices[away])
                .map(|(a, b)| a - b)
                .collect();
            let wa = weights[away];
            (d, wa * (1.0 - STEP_MARGIN) / (1.0 - wa))
        } else {
            let d = vertices[fw]
                .iter()
                .zip(&q)
                .map(|(a, b)| a - b)
                .collect();
            (d, 1.0 - STEP_MARGIN)
        };
        let slope = |gamma: f64| -> f64 {
            let point: Vec<f64> = q.iter().zip(&dir).map(|(a, b)| a + gamma * b).collect();
            let (_, g) = obj.value_and_grad(&point);
            dot(&g, &dir)
        };
        let slope_here = dot(&grad, &dir);
        let step = if slope_here >= -1e-15 {
            0.0
        } else if slope(max_step) <= 0.0 {
            max_step
        } else {
            // The slope is increasing along a convex section; bisect its sign.
            let mut lo = 0.0;
            let mut hi = max_step;
            for _ in 0..40 {
                let mid = 0.5 * (lo + hi);
                if slope(mid) < 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        };
        if step <= 0.0 {
            stalls += 1;
            if stalls >= 2 {
                break;
            }
            continue;
        }
        stalls = 0;
        if use_away {
            for w in weights.iter_mut() {
                *w *= 1.0 + step;
            }
            weights[away] -= step;
            weights[away] = weights[away].max(0.0);
        } else {
            for w in weights.iter_mut() {
                *w *= 1.0 - step;
            }
            weights[fw] += step;
        }
        let total: f64 = weights.iter().sum();
        for w in weights.iter_mut() {
            *w /= total;
        }
        q = combine(&weights);
        let next = obj.value_and_grad(&q);
        value = next.0;
        grad = next.1;
    }
    FwOutcome {
        q,
        value,
        gap,
        converged,
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn minimize_over_polytope_set(
    spec: &ChannelSpec,
    ens: &InputEnsemble,
    vertices: &[Vec<f64>],
    which: WhichInfo,
    per_letter: bool,
    gap_tol: f64,
) -> MinInfoReport {
    if per_letter {
        let mut rows = Vec::with_capacity(ens.nu());
        let mut value = 0.0;
        let mut converged = true;
        let mut gap = 0.0f64;
        let fallback = || {
            let mut q = vec![0.0; spec.ns()];
            for v in vertices {
                for (qs, &vs) in q.iter_mut().zip(v) {
                    *qs += vs / vertices.len() as f64;
                }
            }
            q
        };
        for u in 0..ens.nu() {
            let pu = ens.pu()[u];
            if pu == 0.0 {
                rows.push(to_pmf(&fallback()));
                continue;
            }
            let obj = InfoObjective::for_letter(spec, ens, u, which);
            let out = minimize_over_polytope(&obj, vertices, gap_tol, MAX_ITERS);
            value += pu * out.value.max(0.0);
            converged &= out.converged;
            gap = gap.max(out.gap);
            rows.push(to_pmf(&out.q));
        }
        MinInfoReport {
            value: value.max(0.0),
            law: StateLaw::PerU(rows),
            converged,
            optimality_gap: gap,
        }
    } else {
        let obj = InfoObjective::for_ensemble(spec, ens, which);
        let out = minimize_over_polytope(&obj, vertices, gap_tol, MAX_ITERS);
        MinInfoReport {
            value: out.value.max(0.0),
            law: StateLaw::Unconditional(to_pmf(&out.q)),
            converged: out.converged,
            optimality_gap: out.gap,
        }
    }
}

fn minimize_over_list(
    spec: &ChannelSpec,
    ens: &InputEnsemble,
    list: &[Pmf],
    which: WhichInfo,
    per_letter: bool,
) -> MinInfoReport {
    if per_letter {
        let mut rows = Vec::with_capacity(ens.nu());
        let mut value = 0.0;
        for u in 0..ens.nu() {
            let pu = ens.pu()[u];
            let obj = InfoObjective::for_letter(spec, ens, u, which);
            let (best, v) = argmin_over_list(&obj, list);
            if pu > 0.0 {
                value += pu * v.max(0.0);
            }
            rows.push(best.clone());
        }
        MinInfoReport {
            value: value.max(0.0),
            law: StateLaw::PerU(rows),
            converged: true,
            optimality_gap: 0.0,
        }
    } else {
        let obj = InfoObjective::for_ensemble(spec, ens, which);
        let (best, v) = argmin_over_list(&obj, list);
        MinInfoReport {
            value: v.max(0.0),
            law: StateLaw::Unconditional(best.clone()),
            converged: true,
            optimality_gap: 0.0,
        }
    }
}

fn argmin_over_list<'q>(obj: &InfoObjective<'_>, list: &'q [Pmf]) -> (&'q Pmf, f64) {
    let mut best = &list[0];
    let mut best_value = f64::INFINITY;
    for q in list {
        let v = obj.value(q.as_slice());
        if v < best_value {
            best_value = v;
            best = q;
        }
    }
    (best, best_value)
}

fn to_pmf(q: &[f64]) -> Pmf {
    let cleaned: Vec<f64> = q.iter().map(|v| v.max(0.0)).collect();
    Pmf::new(cleaned).expect("convex combination of distributions")
}
