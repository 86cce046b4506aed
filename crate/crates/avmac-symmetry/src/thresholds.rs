//! Maximization of the mixed symmetrization cost over cost-constrained
//! input distributions, which yields the jammer-budget thresholds.
//!
//! The objective `p -> min_J sum_r p[r] J[r].l` is a pointwise minimum of
//! linear functions of `p`, hence concave and piecewise linear. It is
//! maximized by an outer-linearization loop: every evaluation returns an
//! optimal map whose cost vector is a tight overestimating cut, and a small
//! master program over the accumulated cuts proposes the next iterate
//! together with a certified upper bound.

use avmac_core::{ChannelSpec, ConstraintSpec, CostModel};

use crate::simplex::{self, Phase1, Phase2};
use crate::system::SymSolver;
use crate::{CostValue, SymError, SymKind, ThresholdEntry, Thresholds};

const MAX_CUTS: usize = 300;
const GAP_TOL: f64 = 1e-9;

/// Per-row budget data for one threshold problem: `rows[j][r]` is the cost
/// letter `r` charges against budget `caps[j]`.
struct Budget {
    rows: Vec<Vec<f64>>,
    caps: Vec<f64>,
}

fn budget_for(kind: SymKind, spec: &ChannelSpec, costs: &CostModel, cons: &ConstraintSpec) -> Budget {
    let (n1, n2, _, _) = spec.sizes();
    match kind {
        SymKind::Joint => {
            let mut g1 = vec![0.0; n1 * n2];
            let mut g2 = vec![0.0; n1 * n2];
            for x1 in 0..n1 {
                for x2 in 0..n2 {
                    g1[x1 * n2 + x2] = costs.g1[x1];
                    g2[x1 * n2 + x2] = costs.g2[x2];
                }
            }
            Budget { rows: vec![g1, g2], caps: vec![cons.gamma1, cons.gamma2] }
        }
        SymKind::Sender1 => Budget { rows: vec![costs.g1.clone()], caps: vec![cons.gamma1] },
        SymKind::Sender2 => Budget { rows: vec![costs.g2.clone()], caps: vec![cons.gamma2] },
    }
}

/// Index of a letter that charges nothing against any budget, if one exists.
fn free_letter(budget: &Budget, n: usize) -> Option<usize> {
    (0..n).find(|&r| budget.rows.iter().all(|g| g[r] == 0.0))
}

fn feasible(budget: &Budget, p: &[f64]) -> bool {
    budget.rows.iter().zip(&budget.caps).all(|(g, &cap)| {
        let e: f64 = g.iter().zip(p).map(|(a, b)| a * b).sum();
        e <= cap + 1e-12
    })
}

/// Deterministic starting distributions spread over the budget polytope.
fn starting_points(budget: &Budget, n: usize) -> Vec<Vec<f64>> {
    let mut starts: Vec<Vec<f64>> = Vec::new();
    let zero = free_letter(budget, n);
    let push = |p: Vec<f64>, starts: &mut Vec<Vec<f64>>| {
        if feasible(budget, &p) && !starts.iter().any(|q| q == &p) {
            starts.push(p);
        }
    };
    if let Some(z) = zero {
        let mut p = vec![0.0; n];
        p[z] = 1.0;
        push(p, &mut starts);

        // Uniform pulled toward the free letter until every budget holds.
        let mut alpha = 1.0f64;
        for (g, &cap) in budget.rows.iter().zip(&budget.caps) {
            let e: f64 = g.iter().sum::<f64>() / n as f64;
            if e > cap {
                alpha = alpha.min(cap / e);
            }
        }
        let mut p = vec![alpha / n as f64; n];
        p[z] += 1.0 - alpha;
        push(p, &mut starts);

        if n <= 16 {
            for r in 0..n {
                if r == z {
                    continue;
                }
                let mut beta = 1.0f64;
                for (g, &cap) in budget.rows.iter().zip(&budget.caps) {
                    if g[r] > cap {
                        beta = beta.min(cap / g[r]);
                    }
                }
                if beta <= 0.0 {
                    continue;
                }
                let mut p = vec![0.0; n];
                p[r] = beta;
                p[z] += 1.0 - beta;
                push(p, &mut starts);
            }
        }
    } else {
        // No strictly free letter; try the cheapest single letters.
        for r in 0..n {
            let mut p = vec![0.0; n];
            p[r] = 1.0;
            push(p, &mut starts);
        }
        let p = vec![1.0 / n as f64; n];
        push(p, &mut starts);
    }
    starts
}

/// Solves the master program over the cuts gathered so far: maximize `t`
/// subject to `t <= p.c_i` for every cut and `p` in the budget polytope.
/// Returns the proposing distribution and the bound value.
fn master(cuts: &[Vec<f64>], budget: &Budget, n: usize) -> Result<(Vec<f64>, f64), SymError> {
    let k = cuts.len();
    let mc = budget.caps.len();
    let nv = n + 2 + k + mc;
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(1 + k + mc);
    let mut rhs: Vec<f64> = Vec::with_capacity(1 + k + mc);

    let mut norm = vec![0.0; nv];
    for j in 0..n {
        norm[j] = 1.0;
    }
    rows.push(norm);
    rhs.push(1.0);

    for (i, cut) in cuts.iter().enumerate() {
        let mut row = vec![0.0; nv];
        row[..n].copy_from_slice(cut);
        row[n] = -1.0;
        row[n + 1] = 1.0;
        row[n + 2 + i] = -1.0;
        rows.push(row);
        rhs.push(0.0);
    }
    for (j, (g, &cap)) in budget.rows.iter().zip(&budget.caps).enumerate() {
        let mut row = vec![0.0; nv];
        row[..n].copy_from_slice(g);
        row[n + 2 + k + j] = 1.0;
        rows.push(row);
        rhs.push(cap);
    }

    let mut c = vec![0.0; nv];
    c[n] = -1.0;
    c[n + 1] = 1.0;

    let state = match simplex::phase1(&rows, &rhs, nv) {
        Phase1::Feasible(s) => s,
        Phase1::Residual(r) => {
            return Err(SymError::NumericalFailure(format!(
                "threshold master program infeasible with residual {r:.3e}; the budget polytope is empty"
            )));
        }
        Phase1::IterationLimit => {
            return Err(SymError::NumericalFailure(
                "threshold master program hit its iteration limit".into(),
            ));
        }
    };
    match state.minimize(&c) {
        Phase2::Optimal { x, value } => {
            let mut p = x[..n].to_vec();
            let sum: f64 = p.iter().sum();
            if sum > 0.0 {
                for v in p.iter_mut() {
                    *v /= sum;
                }
            }
            Ok((p, -value))
        }
        Phase2::Unbounded => Err(SymError::NumericalFailure(
            "threshold master program is unbounded; no cut bounds the objective".into(),
        )),
        Phase2::IterationLimit => Err(SymError::NumericalFailure(
            "threshold master program hit its iteration limit".into(),
        )),
    }
}

/// Maximizes the symmetrization cost for `solver`'s kind over the budget
/// polytope induced by `costs` and `cons`. Infeasible kinds short-circuit
/// to an infinite threshold.
pub fn threshold_for(
    solver: &SymSolver,
    costs: &CostModel,
    cons: &ConstraintSpec,
) -> Result<ThresholdEntry, SymError> {
    if !solver.is_feasible() {
        return Ok(ThresholdEntry {
            value: CostValue::Infinite,
            maximizer: None,
            converged: true,
            upper_bound: None,
        });
    }
    let spec = solver.spec_ref();
    let kind = solver.kind();
    let n = kind.map_rows(spec);
    let budget = budget_for(kind, spec, costs, cons);
    let l = &costs.l;

    let mut cuts: Vec<Vec<f64>> = Vec::new();
    let mut lb = f64::NEG_INFINITY;
    let mut best_p: Option<Vec<f64>> = None;

    let evaluate = |p: &[f64],
                        cuts: &mut Vec<Vec<f64>>,
                        lb: &mut f64,
                        best_p: &mut Option<Vec<f64>>|
     -> Result<(), SymError> {
        let report = solver.min_cost(p, l)?;
        let value = match report.value {
            CostValue::Finite(v) => v,
            CostValue::Infinite => {
                return Err(SymError::NumericalFailure(
                    "cost query reported infeasible on a feasible solver".into(),
                ));
            }
        };
        let witness = report.witness.expect("finite cost carries a witness");
        let mut cut = vec![0.0; n];
        for (r, row) in witness.rows().iter().enumerate() {
            cut[r] = row.iter().zip(l).map(|(j, c)| j * c).sum();
        }
        cuts.push(cut);
        if value > *lb {
            *lb = value;
            *best_p = Some(p.to_vec());
        }
        Ok(())
    };

    for p in starting_points(&budget, n) {
        evaluate(&p, &mut cuts, &mut lb, &mut best_p)?;
    }
    if cuts.is_empty() {
        return Err(SymError::NumericalFailure(
            "no feasible starting distribution found for the threshold search".into(),
        ));
    }

    let mut upper = f64::INFINITY;
    let mut converged = false;
    while cuts.len() < MAX_CUTS {
        let (p, ub) = master(&cuts, &budget, n)?;
        upper = ub;
        evaluate(&p, &mut cuts, &mut lb, &mut best_p)?;
        if upper - lb <= GAP_TOL * upper.abs().max(1.0) {
            converged = true;
            break;
        }
    }

    Ok(ThresholdEntry {
        value: CostValue::Finite(lb),
        maximizer: best_p,
        converged,
        upper_bound: Some(upper),
    })
}

/// Thresholds for all three map kinds.
pub fn thresholds(
    spec: &ChannelSpec,
    costs: &CostModel,
    cons: &ConstraintSpec,
) -> Result<Thresholds, SymError> {
    let joint = threshold_for(&SymSolver::new(spec, SymKind::Joint)?, costs, cons)?;
    let sender1 = threshold_for(&SymSolver::new(spec, SymKind::Sender1)?, costs, cons)?;
    let sender2 = threshold_for(&SymSolver::new(spec, SymKind::Sender2)?, costs, cons)?;
    Ok(Thresholds { joint, sender1, sender2 })
}

/// All distributions with denominator `steps` on the simplex of size `n`.
fn simplex_grid(n: usize, steps: usize) -> Vec<Vec<f64>> {
    fn rec(n: usize, left: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if n == 1 {
            prefix.push(left);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for take in 0..=left {
            prefix.push(take);
            rec(n - 1, left - take, prefix, out);
            prefix.pop();
        }
    }
    let mut counts = Vec::new();
    rec(n, steps, &mut Vec::new(), &mut counts);
    counts
        .into_iter()
        .map(|c| c.into_iter().map(|k| k as f64 / steps as f64).collect())
        .collect()
}

const GRID_ATOM_LIMIT: usize = 200_000;

/// Cross-check for the threshold search: evaluates the symmetrization cost
/// on a grid of product input distributions and then optimally blends at
/// most `1 + budgets` grid atoms by a small linear program. The blend
/// weights play the role of a shared time-sharing variable, so the result
/// is the exact optimum over grid-supported ensembles and a lower bound on
/// the true threshold.
pub fn thresholds_product_grid(
    spec: &ChannelSpec,
    costs: &CostModel,
    cons: &ConstraintSpec,
    steps: usize,
) -> Result<Thresholds, SymError> {
    if steps == 0 {
        return Err(SymError::Input("grid needs at least one step".into()));
    }
    let (n1, n2, _, _) = spec.sizes();
    let g1 = simplex_grid(n1, steps);
    let g2 = simplex_grid(n2, steps);
    if g1.len() * g2.len() > GRID_ATOM_LIMIT {
        return Err(SymError::Input(format!(
            "product grid would hold {} atoms, above the {} limit",
            g1.len() * g2.len(),
            GRID_ATOM_LIMIT
        )));
    }

    let blend = |atoms: &[(f64, Vec<f64>)], caps: &[f64]| -> Result<CostValue, SymError> {
        // Maximize the blended value over weights meeting every cap.
        let a = atoms.len();
        let mc = caps.len();
        let nv = a + mc;
        let mut rows = Vec::with_capacity(1 + mc);
        let mut rhs = Vec::with_capacity(1 + mc);
        let mut norm = vec![0.0; nv];
        for j in 0..a {
            norm[j] = 1.0;
        }
        rows.push(norm);
        rhs.push(1.0);
        for j in 0..mc {
            let mut row = vec![0.0; nv];
            for (i, atom) in atoms.iter().enumerate() {
                row[i] = atom.1[j];
            }
            row[a + j] = 1.0;
            rows.push(row);
            rhs.push(caps[j]);
        }
        let mut c = vec![0.0; nv];
        for (i, atom) in atoms.iter().enumerate() {
            c[i] = -atom.0;
        }
        match simplex::phase1(&rows, &rhs, nv) {
            Phase1::Feasible(state) => match state.minimize(&c) {
                Phase2::Optimal { value, .. } => Ok(CostValue::Finite(-value)),
                _ => Err(SymError::NumericalFailure("grid blend program failed".into())),
            },
            Phase1::Residual(r) => Err(SymError::NumericalFailure(format!(
                "grid blend program infeasible with residual {r:.3e}"
            ))),
            Phase1::IterationLimit => Err(SymError::NumericalFailure(
                "grid blend program hit its iteration limit".into(),
            )),
        }
    };

    let entry = |value: CostValue| ThresholdEntry {
        value,
        maximizer: None,
        converged: true,
        upper_bound: None,
    };

    let e_cost = |p: &[f64], g: &[f64]| -> f64 { p.iter().zip(g).map(|(a, b)| a * b).sum() };

    let joint_solver = SymSolver::new(spec, SymKind::Joint)?;
    let joint = if joint_solver.is_feasible() {
        let mut atoms = Vec::with_capacity(g1.len() * g2.len());
        for p1 in &g1 {
            for p2 in &g2 {
                let mut p = vec![0.0; n1 * n2];
                for (i, &a) in p1.iter().enumerate() {
                    for (j, &b) in p2.iter().enumerate() {
                        p[i * n2 + j] = a * b;
                    }
                }
                let v = match joint_solver.min_cost(&p, &costs.l)?.value {
                    CostValue::Finite(v) => v,
                    CostValue::Infinite => unreachable!("feasible solver"),
                };
                atoms.push((v, vec![e_cost(p1, &costs.g1), e_cost(p2, &costs.g2)]));
            }
        }
        entry(blend(&atoms, &[cons.gamma1, cons.gamma2])?)
    } else {
        entry(CostValue::Infinite)
    };

    let sender = |kind: SymKind, grid: &[Vec<f64>], g: &[f64], cap: f64| -> Result<ThresholdEntry, SymError> {
        let solver = SymSolver::new(spec, kind)?;
        if !solver.is_feasible() {
            return Ok(entry(CostValue::Infinite));
        }
        let mut atoms = Vec::with_capacity(grid.len());
        for p in grid {
            let v = match solver.min_cost(p, &costs.l)?.value {
                CostValue::Finite(v) => v,
                CostValue::Infinite => unreachable!("feasible solver"),
            };
            atoms.push((v, vec![e_cost(p, g)]));
        }
        Ok(entry(blend(&atoms, &[cap])?))
    };

    let sender1 = sender(SymKind::Sender1, &g1, &costs.g1, cons.gamma1)?;
    let sender2 = sender(SymKind::Sender2, &g2, &costs.g2, cons.gamma2)?;
    Ok(Thresholds { joint, sender1, sender2 })
}
