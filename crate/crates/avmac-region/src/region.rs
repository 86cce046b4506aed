//! Achievable-rate regions under the three coordination regimes.
//!
//! The random-code region convexifies everything the searched pentagons
//! reach. The divided-randomness region keeps the plain union of pentagons,
//! each evaluated against per-letter worst-case states. The deterministic
//! region first classifies the channel by comparing symmetrization cost
//! thresholds against the state budget, then assembles the region the
//! classification prescribes: the full pentagon union over restricted
//! ensembles, a single surviving sender, or the origin alone.

use avmac_core::{ChannelSpec, ConstraintSpec, CostModel, InputEnsemble, Pmf};
use avmac_symmetry::{
    thresholds, tilde_lambda_with, CostValue, SymKind, SymSolver, ThresholdEntry, Thresholds,
};

use crate::ensembles::{collect_pentagons, composition_count, restricted_products, TildeFilter};
use crate::stateopt::{
    budget_polytope_vertices, minimize_over_polytope, ConvexObjective, InfoObjective,
    MaxInfoObjective, WhichInfo,
};
use crate::{Pentagon, RegionError, RegionMode};

/// Upper-boundary sample count for nonconvex pentagon unions.
const BOUNDARY_SAMPLES: usize = 256;

/// A threshold this close to the state budget makes the case dispatch
/// numerically fragile.
const CASE_BAND: f64 = 1e-6;

/// Slack when admitting ensembles into a restricted set.
const ACCEPT_SLACK: f64 = 1e-9;

/// Band around the budget in which an ensemble's restriction verdict is
/// counted as fragile.
const NEAR_BAND: f64 = 1e-6;

/// Denominator of the state-distribution grid in the single-sender bound.
const Q_GRID_DENOM: usize = 100;

/// The state grid is enumerated only up to this many points; larger state
/// alphabets fall back to convex descent on the pointwise maximum.
const Q_GRID_LIMIT: usize = 200_000;

/// Improve-and-rescan rounds in the single-sender bound.
const SS_ROUNDS: usize = 5;

/// Greedy sweeps per improvement attempt in the single-sender bound.
const SS_SWEEPS: usize = 6;

/// Which theorem case a deterministic-code region landed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaseLabel {
    /// Budget below every threshold: full pentagon union over the
    /// restricted ensembles.
    A,
    /// Sender 1 symmetrizable within budget: only sender 2 carries rate.
    B,
    /// Sender 2 symmetrizable within budget: only sender 1 carries rate.
    C,
    /// Jointly symmetrizable within budget, or both senders are: no
    /// positive rate pair survives.
    D,
}

impl std::fmt::Display for CaseLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CaseLabel::A => "A",
            CaseLabel::B => "B",
            CaseLabel::C => "C",
            CaseLabel::D => "D",
        })
    }
}

/// Numerical-health flags accompanying a computed region.
#[derive(Debug, Clone, Copy, Default)]
pub struct RegionFlags {
    /// A case-dispatch threshold sits within `1e-6` of the budget (or its
    /// own search did not converge), so the case label could flip under
    /// small perturbations.
    pub boundary_undetermined: bool,
    /// Some reported rate bound hit an iteration cap before its gap
    /// certificate closed.
    pub minimization_unconverged: bool,
    /// Ensembles whose restriction threshold fell within `1e-6` of the
    /// budget during the search.
    pub near_restriction_boundary: usize,
}

/// Search effort knob. `grid_scale` multiplies the density of the input
/// composition grids; 1 is the tested default.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Resolution {
    pub grid_scale: u32,
}

impl Default for Resolution {
    fn default() -> Self {
        Resolution { grid_scale: 1 }
    }
}

/// A computed achievable-rate region.
#[derive(Debug, Clone)]
pub struct RateRegion {
    pub mode: RegionMode,
    /// Theorem case, set only by the deterministic regime.
    pub case_label: Option<CaseLabel>,
    /// Symmetrization cost thresholds, set only by the deterministic
    /// regime.
    pub thresholds: Option<Thresholds>,
    /// For the random-code regime: the convex boundary polygon, counter-
    /// clockwise from the origin. Otherwise: upper-boundary points with
    /// nondecreasing `r1` (a single point when only `r1 = 0` is reachable).
    pub boundary: Vec<(f64, f64)>,
    /// Pentagons backing the region, empty when the region is an axis
    /// segment or the origin.
    pub pentagons: Vec<Pentagon>,
    pub flags: RegionFlags,
}

impl RateRegion {
    /// Support value `max { mu r1 + (1 - mu) r2 }` over the region.
    pub fn support(&self, mu: f64) -> f64 {
        if self.mode != RegionMode::RandomCode && !self.pentagons.is_empty() {
            return self
                .pentagons
                .iter()
                .map(|p| p.support(mu))
                .fold(0.0, f64::max);
        }
        self.boundary
            .iter()
            .map(|&(x, y)| mu * x + (1.0 - mu) * y)
            .fold(0.0, f64::max)
    }

    /// Largest `r2` paired with the given `r1`, or `None` when `r1` is
    /// outside the region's reach.
    pub fn max_r2_at(&self, r1: f64) -> Option<f64> {
        if r1 < -1e-12 {
            return None;
        }
        let r1 = r1.max(0.0);
        if self.mode == RegionMode::RandomCode {
            return polygon_max_y_at(&self.boundary, r1);
        }
        if !self.pentagons.is_empty() {
            let mut best: Option<f64> = None;
            for p in &self.pentagons {
                if let Some(y) = p.r2_at(r1) {
                    best = Some(best.map_or(y, |b: f64| b.max(y)));
                }
            }
            return best;
        }
        chain_max_y_at(&self.boundary, r1)
    }

    /// Largest reachable `r1`.
    pub fn r1_extent(&self) -> f64 {
        self.boundary
            .iter()
            .map(|&(x, _)| x)
            .fold(0.0, f64::max)
    }
}

/// Largest `y` of a convex polygon at abscissa `x`, scanning edges.
fn polygon_max_y_at(poly: &[(f64, f64)], x: f64) -> Option<f64> {
    if poly.is_empty() {
        return None;
    }
    let max_x = poly.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    if x > max_x + 1e-9 {
        return None;
    }
    let x = x.min(max_x);
    let mut best: Option<f64> = None;
    let mut keep = |y: f64| best = Some(best.map_or(y, |b: f64| b.max(y)));
    for i in 0..poly.len() {
        let a = poly[i];
        let b = poly[(i + 1) % poly.len()];
        let (lo, hi) = (a.0.min(b.0), a.0.max(b.0));
        if x < lo - 1e-12 || x > hi + 1e-12 {
            continue;
        }
        if (hi - lo).abs() <= 1e-15 {
            keep(a.1.max(b.1));
        } else {
            let t = ((x - a.0) / (b.0 - a.0)).clamp(0.0, 1.0);
            keep(a.1 + t * (b.1 - a.1));
        }
    }
    best.map(|y| y.max(0.0))
}

/// Largest `y` on an upper-boundary chain with nondecreasing `x`.
fn chain_max_y_at(chain: &[(f64, f64)], x: f64) -> Option<f64> {
    let last = chain.last()?;
    if x > last.0 + 1e-9 {
        return None;
    }
    let first = chain[0];
    if x <= first.0 {
        return Some(first.1);
    }
    for w in chain.windows(2) {
        let (a, b) = (w[0], w[1]);
        if x <= b.0 {
            if (b.0 - a.0).abs() <= 1e-15 {
                return Some(a.1.max(b.1));
            }
            let t = (x - a.0) / (b.0 - a.0);
            return Some(a.1 + t * (b.1 - a.1));
        }
    }
    Some(last.1)
}

/// Counterclockwise convex hull (monotone chain), collinear points dropped.
fn convex_hull(mut pts: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    pts.dedup_by(|a, b| (a.0 - b.0).abs() <= 1e-15 && (a.1 - b.1).abs() <= 1e-15);
    if pts.len() <= 2 {
        return pts;
    }
    let cross = |o: (f64, f64), a: (f64, f64), b: (f64, f64)| -> f64 {
        (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
    };
    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(pts.len() + 1);
    for &p in &pts {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 1e-12 {
            hull.pop();
        }
        hull.push(p);
    }
    let lower_len = hull.len() + 1;
    for &p in pts.iter().rev() {
        while hull.len() >= lower_len
            && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 1e-12
        {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    hull
}

/// Upper boundary of a pentagon union: uniform samples plus every
/// pentagon's own corner abscissas, so corners survive sampling exactly.
fn sample_upper_boundary(pentagons: &[Pentagon]) -> Vec<(f64, f64)> {
    if pentagons.is_empty() {
        return vec![(0.0, 0.0)];
    }
    let extent = pentagons
        .iter()
        .map(|p| p.r1_max.min(p.sum_max).max(0.0))
        .fold(0.0, f64::max);
    let top_at = |x: f64| -> f64 {
        pentagons
            .iter()
            .filter_map(|p| p.r2_at(x))
            .fold(0.0, f64::max)
    };
    if extent <= 1e-12 {
        return vec![(0.0, top_at(0.0))];
    }
    let mut xs: Vec<f64> = (0..BOUNDARY_SAMPLES)
        .map(|i| extent * i as f64 / (BOUNDARY_SAMPLES - 1) as f64)
        .collect();
    for p in pentagons {
        let x_hi = p.r1_max.min(p.sum_max).max(0.0);
        let y_hi = p.r2_max.min(p.sum_max).max(0.0);
        let x_at_y = p.r1_max.min((p.sum_max - y_hi).max(0.0)).max(0.0);
        for x in [x_hi, x_at_y] {
            if x >= 0.0 && x <= extent {
                xs.push(x);
            }
        }
    }
    xs.sort_by(f64::total_cmp);
    xs.dedup_by(|a, b| (*a - *b).abs() <= 1e-15);
    xs.into_iter().map(|x| (x, top_at(x))).collect()
}

/// Region reachable when the decoder shares unbounded common randomness
/// with both encoders. Convex; reported as its boundary polygon.
pub fn random_code_region(
    spec: &ChannelSpec,
    costs: &CostModel,
    cons: &ConstraintSpec,
    res: Resolution,
) -> Result<RateRegion, RegionError> {
    let outcome = collect_pentagons(spec, costs, cons, res.grid_scale, false, None)?;
    let mut pts = vec![(0.0, 0.0)];
    for p in &outcome.pentagons {
        pts.extend(p.vertices());
    }
    Ok(RateRegion {
        mode: RegionMode::RandomCode,
        case_label: None,
        thresholds: None,
        boundary: convex_hull(pts),
        pentagons: outcome.pentagons,
        flags: RegionFlags {
            boundary_undetermined: false,
            minimization_unconverged: outcome.unconverged,
            near_restriction_boundary: 0,
        },
    })
}

/// Region reachable when each encoder holds private randomness but the
/// decoder shares none: the plain union of per-letter worst-case pentagons.
pub fn divided_randomness_region(
    spec: &ChannelSpec,
    costs: &CostModel,
    cons: &ConstraintSpec,
    res: Resolution,
) -> Result<RateRegion, RegionError> {
    let outcome = collect_pentagons(spec, costs, cons, res.grid_scale, true, None)?;
    Ok(RateRegion {
        mode: RegionMode::DividedRandomness,
        case_label: None,
        thresholds: None,
        boundary: sample_upper_boundary(&outcome.pentagons),
        pentagons: outcome.pentagons,
        flags: RegionFlags {
            boundary_undetermined: false,
            minimization_unconverged: outcome.unconverged,
            near_restriction_boundary: outcome.near_boundary,
        },
    })
}

/// Region reachable by deterministic codes, assembled per the case the
/// symmetrization thresholds select at this budget.
pub fn deterministic_region(
    spec: &ChannelSpec,
    costs: &CostModel,
    cons: &ConstraintSpec,
    res: Resolution,
) -> Result<RateRegion, RegionError> {
    let th = thresholds(spec, costs, cons)?;
    let lambda = cons.lambda;
    let above = |e: &ThresholdEntry| match e.value {
        CostValue::Infinite => true,
        CostValue::Finite(x) => x > lambda,
    };
    let fragile = |e: &ThresholdEntry| match e.value {
        CostValue::Finite(x) => (x - lambda).abs() < CASE_BAND || !e.converged,
        CostValue::Infinite => false,
    };
    let case = if above(&th.joint) && above(&th.sender1) && above(&th.sender2) {
        CaseLabel::A
    } else if !above(&th.sender1) && above(&th.joint) && above(&th.sender2) {
        CaseLabel::B
    } else if !above(&th.sender2) && above(&th.joint) && above(&th.sender1) {
        CaseLabel::C
    } else {
        CaseLabel::D
    };
    let mut flags = RegionFlags {
        boundary_undetermined: fragile(&th.joint) || fragile(&th.sender1) || fragile(&th.sender2),
        minimization_unconverged: false,
        near_restriction_boundary: 0,
    };
    let (boundary, pentagons) = match case {
        CaseLabel::A => {
            let filter = TildeFilter::new(spec, lambda)?;
            let outcome =
                collect_pentagons(spec, costs, cons, res.grid_scale, true, Some(&filter))?;
            flags.minimization_unconverged = outcome.unconverged;
            flags.near_restriction_boundary = outcome.near_boundary;
            (sample_upper_boundary(&outcome.pentagons), outcome.pentagons)
        }
        CaseLabel::B => {
            let bound = single_sender_bound(spec, costs, cons, res.grid_scale, WhichInfo::I2)?;
            flags.minimization_unconverged = bound.unconverged;
            flags.near_restriction_boundary = bound.near;
            (vec![(0.0, bound.value)], Vec::new())
        }
        CaseLabel::C => {
            let bound = single_sender_bound(spec, costs, cons, res.grid_scale, WhichInfo::I1)?;
            flags.minimization_unconverged = bound.unconverged;
            flags.near_restriction_boundary = bound.near;
            let boundary = if bound.value <= 1e-12 {
                vec![(0.0, 0.0)]
            } else {
                vec![(0.0, 0.0), (bound.value, 0.0)]
            };
            (boundary, Vec::new())
        }
        CaseLabel::D => (vec![(0.0, 0.0)], Vec::new()),
    };
    Ok(RateRegion {
        mode: RegionMode::Deterministic,
        case_label: Some(case),
        thresholds: Some(th),
        boundary,
        pentagons,
        flags,
    })
}

struct SingleSenderBound {
    value: f64,
    near: usize,
    unconverged: bool,
}

/// Admission gate for the single-sender restricted set: the joint threshold
/// and the surviving sender's partner threshold must clear the budget.
struct SurvivorGate<'a> {
    joint: SymSolver,
    partner: SymSolver,
    costs: &'a CostModel,
    lambda: f64,
    near: usize,
}

impl SurvivorGate<'_> {
    fn admit(&mut self, ens: &InputEnsemble) -> Result<bool, RegionError> {
        let a = tilde_lambda_with(&self.joint, self.costs, ens)?;
        let b = tilde_lambda_with(&self.partner, self.costs, ens)?;
        let min = match (a, b) {
            (CostValue::Finite(x), CostValue::Finite(y)) => CostValue::Finite(x.min(y)),
            (CostValue::Finite(x), _) | (_, CostValue::Finite(x)) => CostValue::Finite(x),
            _ => CostValue::Infinite,
        };
        Ok(match min {
            CostValue::Infinite => true,
            CostValue::Finite(x) => {
                if (x - self.lambda).abs() <= NEAR_BAND {
                    self.near += 1;
                }
                x >= self.lambda - ACCEPT_SLACK
            }
        })
    }
}

/// Worst-state rate of the surviving sender: the smallest, over feasible
/// state distributions, of the best restricted product ensemble's
/// conditional mutual information.
fn single_sender_bound(
    spec: &ChannelSpec,
    costs: &CostModel,
    cons: &ConstraintSpec,
    grid_scale: u32,
    which: WhichInfo,
) -> Result<SingleSenderBound, RegionError> {
    let partner_kind = match which {
        WhichInfo::I1 => SymKind::Sender1,
        WhichInfo::I2 => SymKind::Sender2,
        WhichInfo::Sum => {
            return Err(RegionError::Input(
                "single-sender bound needs a per-sender information measure".into(),
            ))
        }
    };
    let mut gate = SurvivorGate {
        joint: SymSolver::new(spec, SymKind::Joint)?,
        partner: SymSolver::new(spec, partner_kind)?,
        costs,
        lambda: cons.lambda,
        near: 0,
    };
    let candidates = {
        let mut admit = |ens: &InputEnsemble| gate.admit(ens);
        restricted_products(spec, costs, cons, grid_scale, &mut admit)?
    };
    if candidates.is_empty() {
        return Ok(SingleSenderBound {
            value: 0.0,
            near: gate.near,
            unconverged: false,
        });
    }
    let mut margs: Vec<(Vec<f64>, Vec<f64>)> = candidates
        .iter()
        .map(|e| {
            (
                e.px1(0).as_slice().to_vec(),
                e.px2(0).as_slice().to_vec(),
            )
        })
        .collect();
    let value;
    let mut unconverged = false;
    if composition_count(spec.ns(), Q_GRID_DENOM) <= Q_GRID_LIMIT {
        value = grid_min_max(spec, costs, cons, which, &mut margs, &mut gate)?;
    } else {
        let (v, conv) = descent_min_max(spec, costs, cons, which, &mut margs, &mut gate)?;
        value = v;
        unconverged = !conv;
    }
    Ok(SingleSenderBound {
        value: value.max(0.0),
        near: gate.near,
        unconverged,
    })
}

/// Feasible state grid: all denominator-`denom` distributions with expected
/// cost within the budget, generated with branch pruning.
fn feasible_q_grid(l: &[f64], lambda: f64, denom: usize) -> Result<Vec<Vec<f64>>, RegionError> {
    let budget = lambda + 1e-12;
    let mut out = Vec::new();
    let mut counts = vec![0usize; l.len()];
    fn rec(
        l: &[f64],
        denom: usize,
        budget: f64,
        slot: usize,
        left: usize,
        cost: f64,
        counts: &mut [usize],
        out: &mut Vec<Vec<f64>>,
    ) {
        if slot + 1 == l.len() {
            let total = cost + left as f64 * l[slot] / denom as f64;
            if total <= budget {
                counts[slot] = left;
                out.push(counts.iter().map(|&c| c as f64 / denom as f64).collect());
            }
            return;
        }
        for take in 0..=left {
            let c = cost + take as f64 * l[slot] / denom as f64;
            if c > budget {
                break;
            }
            counts[slot] = take;
            rec(l, denom, budget, slot + 1, left - take, c, counts, out);
        }
        counts[slot] = 0;
    }
    if l.is_empty() {
        return Err(RegionError::Input("empty state alphabet".into()));
    }
    rec(l, denom, budget, 0, denom, 0.0, &mut counts, &mut out);
    if out.is_empty() {
        return Err(RegionError::Constraint(format!(
            "no state distribution meets the budget {lambda}"
        )));
    }
    Ok(out)
}

/// Exact min-max over the state grid and the candidate pool, with the
/// previous maximizer evaluated first so most grid points are cut after a
/// single evaluation. The winning state law's maximizer is then refined by
/// greedy transfers and the grid rescanned, until stable.
fn grid_min_max(
    spec: &ChannelSpec,
    costs: &CostModel,
    cons: &ConstraintSpec,
    which: WhichInfo,
    margs: &mut Vec<(Vec<f64>, Vec<f64>)>,
    gate: &mut SurvivorGate<'_>,
) -> Result<f64, RegionError> {
    let qs = feasible_q_grid(&costs.l, cons.lambda, Q_GRID_DENOM)?;
    let scan = |objs: &[InfoObjective<'_>], hot: &mut usize| -> (f64, usize) {
        let mut best: Option<(f64, usize)> = None;
        for (qi, q) in qs.iter().enumerate() {
            if let Some((bv, _)) = best {
                if objs[*hot].value(q) >= bv - 1e-12 {
                    continue;
                }
            }
            let mut vmax = f64::NEG_INFINITY;
            let mut amax = 0;
            for (i, o) in objs.iter().enumerate() {
                let v = o.value(q);
                if v > vmax {
                    vmax = v;
                    amax = i;
                }
            }
            *hot = amax;
            if best.is_none_or(|(bv, _)| vmax < bv) {
                best = Some((vmax, qi));
            }
        }
        best.expect("nonempty state grid")
    };
    let mut objs = build_objectives(spec, margs, which);
    let mut hot = 0usize;
    let (mut value, mut best_qi) = scan(&objs, &mut hot);
    for _round in 0..SS_ROUNDS {
        let q_star = &qs[best_qi];
        let (v_now, a_now) = {
            let mut vmax = f64::NEG_INFINITY;
            let mut amax = 0;
            for (i, o) in objs.iter().enumerate() {
                let v = o.value(q_star);
                if v > vmax {
                    vmax = v;
                    amax = i;
                }
            }
            (vmax, amax)
        };
        match improve_at_q(spec, costs, cons, which, q_star, &margs[a_now], v_now, gate)? {
            Some(better) => {
                margs.push(better);
                objs = build_objectives(spec, margs, which);
                hot = objs.len() - 1;
                let (v2, q2) = scan(&objs, &mut hot);
                let settled = q2 == best_qi && (v2 - value).abs() <= 1e-9;
                value = v2;
                best_qi = q2;
                if settled {
                    break;
                }
            }
            None => break,
        }
    }
    Ok(value)
}

fn build_objectives<'s>(
    spec: &'s ChannelSpec,
    margs: &[(Vec<f64>, Vec<f64>)],
    which: WhichInfo,
) -> Vec<InfoObjective<'s>> {
    margs
        .iter()
        .map(|(p1, p2)| InfoObjective::from_product(spec, p1, p2, which))
        .collect()
}

/// Convex descent on the pointwise maximum over candidates, for state
/// alphabets too large to enumerate. Improve-and-rescan as in the grid
/// path.
fn descent_min_max(
    spec: &ChannelSpec,
    costs: &CostModel,
    cons: &ConstraintSpec,
    which: WhichInfo,
    margs: &mut Vec<(Vec<f64>, Vec<f64>)>,
    gate: &mut SurvivorGate<'_>,
) -> Result<(f64, bool), RegionError> {
    let vertices = budget_polytope_vertices(&costs.l, cons.lambda)?;
    let mut value = f64::INFINITY;
    let mut converged = true;
    for _round in 0..SS_ROUNDS {
        let max_obj = MaxInfoObjective {
            objs: build_objectives(spec, margs, which),
        };
        let out = minimize_over_polytope(&max_obj, &vertices, 1e-7, 20_000);
        value = out.value;
        converged = out.converged;
        let (v_now, a_now) = {
            let mut vmax = f64::NEG_INFINITY;
            let mut amax = 0;
            for (i, o) in max_obj.objs.iter().enumerate() {
                let v = o.value(&out.q);
                if v > vmax {
                    vmax = v;
                    amax = i;
                }
            }
            (vmax, amax)
        };
        match improve_at_q(spec, costs, cons, which, &out.q, &margs[a_now], v_now, gate)? {
            Some(better) => margs.push(better),
            None => break,
        }
    }
    Ok((value, converged))
}

/// Greedy mass-transfer maximization of one conditional mutual information
/// at a fixed state distribution, inside the restricted set. Returns the
/// improved marginals when they beat `baseline`.
#[allow(clippy::too_many_arguments)]
fn improve_at_q(
    spec: &ChannelSpec,
    costs: &CostModel,
    cons: &ConstraintSpec,
    which: WhichInfo,
    q: &[f64],
    start: &(Vec<f64>, Vec<f64>),
    baseline: f64,
    gate: &mut SurvivorGate<'_>,
) -> Result<Option<(Vec<f64>, Vec<f64>)>, RegionError> {
    const DELTAS: [f64; 4] = [1.0 / 8.0, 1.0 / 32.0, 1.0 / 128.0, 1.0 / 512.0];
    let eval = |p1: &[f64], p2: &[f64]| -> f64 {
        InfoObjective::from_product(spec, p1, p2, which).value(q)
    };
    let expected = |p: &[f64], g: &[f64]| -> f64 { p.iter().zip(g).map(|(a, b)| a * b).sum() };
    let moves_for = |n: usize| -> Vec<(usize, usize)> {
        let mut moves = Vec::new();
        for from in 0..n {
            for to in 0..n {
                if from != to {
                    moves.push((from, to));
                }
            }
        }
        moves
    };
    let (mut p1, mut p2) = start.clone();
    let mut cur = eval(&p1, &p2);
    let moves1 = moves_for(p1.len());
    let moves2 = moves_for(p2.len());
    for _sweep in 0..SS_SWEEPS {
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
                        let t = if sender == 0 { &mut q1 } else { &mut q2 };
                        t[from] = (t[from] - delta).max(0.0);
                        t[to] += delta;
                    }
                    if expected(&q1, &costs.g1) > cons.gamma1
                        || expected(&q2, &costs.g2) > cons.gamma2
                    {
                        continue;
                    }
                    let ens =
                        InputEnsemble::singleton(Pmf::new(q1.clone())?, Pmf::new(q2.clone())?);
                    if !gate.admit(&ens)? {
                        continue;
                    }
                    let v = eval(&q1, &q2);
                    if v > cur + 1e-12 {
                        p1 = q1;
                        p2 = q2;
                        cur = v;
                        improved = true;
                    }
                }
            }
        }
        if !improved {
            break;
        }
    }
    if cur > baseline + 1e-9 {
        Ok(Some((p1, p2)))
    } else {
        Ok(None)
    }
}
