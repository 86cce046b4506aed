//! Dense two-phase primal simplex for equality-form problems
//! `min c.x  s.t.  A x = b, x >= 0`.
//!
//! Sized for the small systems this crate produces (hundreds of rows).
//! Dantzig pricing with an automatic switch to Bland's rule after a
//! degenerate stall, so cycling cannot occur. Phase 1 minimizes the sum of
//! artificial variables; its optimal value is the infeasibility residual the
//! symmetrizability verdicts are built on.

pub(crate) const PIVOT_TOL: f64 = 1e-9;
pub(crate) const RC_TOL: f64 = 1e-9;
const MAX_PIVOTS: usize = 200_000;

/// Tableau after a successful phase 1, reusable for several phase-2
/// objectives over the same constraint set.
#[derive(Debug, Clone)]
pub(crate) struct SimplexState {
    /// `m + 1` rows by `n + m + 1` columns: structural vars, artificials,
    /// rhs; the last row is the active objective (rhs entry = -value).
    t: Vec<Vec<f64>>,
    basis: Vec<usize>,
    n: usize,
    m: usize,
}

pub(crate) enum Phase1 {
    Feasible(SimplexState),
    /// Optimal phase-1 objective, strictly positive: the least total
    /// constraint violation achievable with `x >= 0`.
    Residual(f64),
    IterationLimit,
}

pub(crate) enum Phase2 {
    Optimal { x: Vec<f64>, value: f64 },
    Unbounded,
    IterationLimit,
}

enum Run {
    Optimal,
    Unbounded,
    IterationLimit,
}

/// Phase-1 feasibility threshold used by callers to accept a solution.
pub(crate) const PHASE1_FEASIBLE: f64 = 1e-7;

pub(crate) fn phase1(rows: &[Vec<f64>], rhs: &[f64], n: usize) -> Phase1 {
    let m = rows.len();
    let width = n + m + 1;
    let mut t: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
    for (i, row) in rows.iter().enumerate() {
        debug_assert_eq!(row.len(), n);
        let flip = rhs[i] < 0.0;
        let mut tr = vec![0.0; width];
        for (j, &v) in row.iter().enumerate() {
            tr[j] = if flip { -v } else { v };
        }
        tr[n + i] = 1.0;
        tr[width - 1] = rhs[i].abs();
        t.push(tr);
    }
    // Objective row: minimize the artificial sum. Artificials are basic, so
    // their reduced costs start at zero and the structural columns pick up
    // the negated column sums.
    let mut obj = vec![0.0; width];
    for tr in &t {
        for j in 0..n {
            obj[j] -= tr[j];
        }
        obj[width - 1] -= tr[width - 1];
    }
    t.push(obj);
    let mut basis: Vec<usize> = (n..n + m).collect();

    match run(&mut t, &mut basis, n, m, n + m) {
        Run::IterationLimit => return Phase1::IterationLimit,
        Run::Unbounded => unreachable!("phase-1 objective is bounded below by 0"),
        Run::Optimal => {}
    }
    let value = -t[m][width - 1];
    if value > PHASE1_FEASIBLE {
        return Phase1::Residual(value.max(0.0));
    }

    // Pivot leftover artificials out wherever a structural column allows it;
    // rows that stay artificial are redundant and carry (near) zero rhs.
    for i in 0..m {
        if basis[i] >= n {
            if let Some(pc) = (0..n).find(|&j| t[i][j].abs() > PIVOT_TOL) {
                pivot(&mut t, &mut basis, i, pc);
            }
        }
    }
    Phase1::Feasible(SimplexState { t, basis, n, m })
}

impl SimplexState {
    /// Runs phase 2 with objective `c` (length `n`) from this feasible basis.
    /// `self` keeps the phase-1 snapshot; work happens on a clone.
    pub(crate) fn minimize(&self, c: &[f64]) -> Phase2 {
        debug_assert_eq!(c.len(), self.n);
        let mut state = self.clone();
        let (n, m) = (state.n, state.m);
        let width = n + m + 1;
        let cost = |j: usize| if j < n { c[j] } else { 0.0 };
        let mut obj = vec![0.0; width];
        for j in 0..n {
            obj[j] = c[j];
        }
        for i in 0..m {
            let cb = cost(state.basis[i]);
            if cb != 0.0 {
                for j in 0..width {
                    obj[j] -= cb * state.t[i][j];
                }
            }
        }
        // Zero the reduced costs over the basis exactly.
        for i in 0..m {
            obj[state.basis[i]] = 0.0;
        }
        state.t[m] = obj;

        // Artificials may not re-enter: price only structural columns.
        match run(&mut state.t, &mut state.basis, n, m, n) {
            Run::Optimal => {}
            Run::Unbounded => return Phase2::Unbounded,
            Run::IterationLimit => return Phase2::IterationLimit,
        }
        let mut x = vec![0.0; n];
        for i in 0..m {
            if state.basis[i] < n {
                x[state.basis[i]] = state.t[i][width - 1].max(0.0);
            }
        }
        let value = x.iter().zip(c).map(|(xi, ci)| xi * ci).sum();
        Phase2::Optimal { x, value }
    }

    pub(crate) fn structural_len(&self) -> usize {
        self.n
    }

    pub(crate) fn basis_ref(&self) -> &[usize] {
        &self.basis
    }

    pub(crate) fn rhs_of(&self, i: usize) -> f64 {
        let width = self.n + self.m + 1;
        self.t[i][width - 1]
    }
}

/// Simplex iterations on the prepared tableau. Columns `>= enterable` are
/// never priced in (used to lock artificials out in phase 2).
fn run(t: &mut [Vec<f64>], basis: &mut [usize], n: usize, m: usize, enterable: usize) -> Run {
    let width = t[0].len();
    let mut bland = false;
    let mut stall = 0usize;
    let stall_limit = 3 * (m + 5);
    for _ in 0..MAX_PIVOTS {
        // Entering column.
        let mut enter: Option<usize> = None;
        if bland {
            for j in 0..enterable {
                if t[m][j] < -RC_TOL {
                    enter = Some(j);
                    break;
                }
            }
        } else {
            let mut best = -RC_TOL;
            for j in 0..enterable {
                if t[m][j] < best {
                    best = t[m][j];
                    enter = Some(j);
                }
            }
        }
        let Some(pc) = enter else { return Run::Optimal };
        let _ = n;

        // Ratio test; ties go to the smallest basis index (Bland-compatible).
        let mut leave: Option<usize> = None;
        let mut best_ratio = f64::INFINITY;
        for i in 0..m {
            let a = t[i][pc];
            if a > PIVOT_TOL {
                let ratio = t[i][width - 1] / a;
                let better = ratio < best_ratio - 1e-12
                    || (ratio < best_ratio + 1e-12
                        && leave.is_some_and(|l| basis[i] < basis[l]));
                if better {
                    best_ratio = ratio;
                    leave = Some(i);
                }
            }
        }
        let Some(pr) = leave else { return Run::Unbounded };

        let before = t[m][width - 1];
        pivot(t, basis, pr, pc);
        if (t[m][width - 1] - before).abs() <= 1e-12 {
            stall += 1;
            if stall > stall_limit {
                bland = true;
            }
        } else {
            stall = 0;
        }
    }
    Run::IterationLimit
}

fn pivot(t: &mut [Vec<f64>], basis: &mut [usize], pr: usize, pc: usize) {
    let width = t[0].len();
    let piv = t[pr][pc];
    let inv = 1.0 / piv;
    for v in t[pr].iter_mut() {
        *v *= inv;
    }
    t[pr][pc] = 1.0;
    let pivot_row = t[pr].clone();
    for (i, row) in t.iter_mut().enumerate() {
        if i == pr {
            continue;
        }
        let f = row[pc];
        if f != 0.0 {
            for j in 0..width {
                row[j] -= f * pivot_row[j];
            }
            row[pc] = 0.0;
        }
    }
    basis[pr] = pc;
}
