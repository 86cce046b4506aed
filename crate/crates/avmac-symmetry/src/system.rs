//! Assembly of the symmetrizing-map equations, streaming rank reduction,
//! and the cached feasibility solver behind every verdict and cost query.
//!
//! A candidate map assigns each conditioning row `r` a distribution over
//! states. The defining equations pair up two rows `a < b` and require, for
//! every output letter (and every opposite-sender letter in the per-sender
//! variants), that averaging the channel under the map attached to one row
//! reproduces the channel seen from the other. All equations for a fixed
//! pair touch only the `2 * ns` unknowns of that pair, which keeps the
//! elimination local before anything global is built.

use avmac_core::ChannelSpec;

use crate::simplex::{self, Phase1, Phase2, SimplexState};
use crate::{CostValue, PsiReport, SymError, SymKind, Symmetrizer};

/// Infeasibility verdicts need at least this much phase-1 residual; the
/// feasible band boundary lives in [`simplex::PHASE1_FEASIBLE`]. Between
/// the two the solver refuses to choose and reports a numerical failure.
pub(crate) const INFEASIBLE_BAND: f64 = 1e-4;

/// Residual bound a returned map must satisfy on the raw equations.
const WITNESS_TOL: f64 = 1e-7;

/// Elimination rows whose largest entry exceeds this are considered
/// numerically untrustworthy.
const GROWTH_LIMIT: f64 = 1e8;

/// Entries below this after elimination count as a dependent row.
const ADOPT_TOL: f64 = 1e-9;

impl SymKind {
    /// Number of conditioning rows a map of this kind has.
    pub fn map_rows(self, spec: &ChannelSpec) -> usize {
        match self {
            SymKind::Joint => spec.nx1() * spec.nx2(),
            SymKind::Sender1 => spec.nx1(),
            SymKind::Sender2 => spec.nx2(),
        }
    }
}

/// Walks every defining equation for `kind`, block by block. Each block
/// holds all equations for one unordered row pair `(a, b)`; a local row
/// stores the coefficients on the `a` map row in `[0, ns)` and on the `b`
/// map row in `[ns, 2 * ns)`. Returns early when `f` asks to stop.
fn for_each_pair_block(
    spec: &ChannelSpec,
    kind: SymKind,
    mut f: impl FnMut(usize, usize, &[Vec<f64>]) -> bool,
) {
    let (n1, n2, ns, ny) = spec.sizes();
    let mut block: Vec<Vec<f64>> = Vec::new();
    match kind {
        SymKind::Joint => {
            let nr = n1 * n2;
            for a in 0..nr {
                let (a1, a2) = (a / n2, a % n2);
                for b in a + 1..nr {
                    let (b1, b2) = (b / n2, b % n2);
                    block.clear();
                    for y in 0..ny {
                        let mut row = vec![0.0; 2 * ns];
                        for s in 0..ns {
                            row[ns + s] += spec.w(a1, a2, s, y);
                            row[s] -= spec.w(b1, b2, s, y);
                        }
                        block.push(row);
                    }
                    if !f(a, b, &block) {
                        return;
                    }
                }
            }
        }
        SymKind::Sender1 => {
            for a in 0..n1 {
                for b in a + 1..n1 {
                    block.clear();
                    for x2 in 0..n2 {
                        for y in 0..ny {
                            let mut row = vec![0.0; 2 * ns];
                            for s in 0..ns {
                                row[ns + s] += spec.w(a, x2, s, y);
                                row[s] -= spec.w(b, x2, s, y);
                            }
                            block.push(row);
                        }
                    }
                    if !f(a, b, &block) {
                        return;
                    }
                }
            }
        }
        SymKind::Sender2 => {
            for a in 0..n2 {
                for b in a + 1..n2 {
                    block.clear();
                    for x1 in 0..n1 {
                        for y in 0..ny {
                            let mut row = vec![0.0; 2 * ns];
                            for s in 0..ns {
                                row[ns + s] += spec.w(x1, a, s, y);
                                row[s] -= spec.w(x1, b, s, y);
                            }
                            block.push(row);
                        }
                    }
                    if !f(a, b, &block) {
                        return;
                    }
                }
            }
        }
    }
}

/// Largest violation of the defining equations and the per-row
/// normalization by the candidate map `rows` (one state distribution per
/// conditioning row). Computed against the raw channel entries, not the
/// reduced system, so it certifies the returned witness independently of
/// how the feasibility problem was solved.
pub fn symmetrization_residual(spec: &ChannelSpec, kind: SymKind, rows: &[Vec<f64>]) -> f64 {
    let ns = spec.ns();
    let mut worst: f64 = 0.0;
    for row in rows {
        let sum: f64 = row.iter().sum();
        worst = worst.max((sum - 1.0).abs());
        for &v in row {
            worst = worst.max((-v).max(0.0));
        }
    }
    for_each_pair_block(spec, kind, |a, b, block| {
        for eq in block {
            let mut lhs = 0.0;
            for s in 0..ns {
                lhs += eq[s] * rows[a][s] + eq[ns + s] * rows[b][s];
            }
            worst = worst.max(lhs.abs());
        }
        true
    });
    worst
}

/// Maintains a reduced row-echelon basis of the homogeneous equation rows
/// seen so far. The basis spans exactly the row space of everything fed in,
/// so the kept rows have the same solution set as the full system.
struct Reducer {
    n: usize,
    rows: Vec<Vec<f64>>,
    pivot_cols: Vec<usize>,
    max_entry: f64,
}

impl Reducer {
    fn new(n: usize) -> Self {
        Reducer { n, rows: Vec::new(), pivot_cols: Vec::new(), max_entry: 1.0 }
    }

    fn full_rank(&self) -> bool {
        self.rows.len() == self.n
    }

    /// Eliminates `row` against the basis and adopts what is left when it
    /// is independent. Fails when entries grow past the trust limit.
    fn add(&mut self, mut row: Vec<f64>) -> Result<(), SymError> {
        for (k, &pc) in self.pivot_cols.iter().enumerate() {
            let f = row[pc];
            if f != 0.0 {
                let basis = &self.rows[k];
                for j in 0..self.n {
                    row[j] -= f * basis[j];
                }
                row[pc] = 0.0;
            }
        }
        let mut pc = 0;
        let mut best = 0.0f64;
        for (j, &v) in row.iter().enumerate() {
            if v.abs() > best {
                best = v.abs();
                pc = j;
            }
        }
        if best <= ADOPT_TOL {
            return Ok(());
        }
        let inv = 1.0 / row[pc];
        for v in row.iter_mut() {
            *v *= inv;
        }
        row[pc] = 1.0;
        for r in self.rows.iter_mut() {
            let f = r[pc];
            if f != 0.0 {
                for j in 0..self.n {
                    r[j] -= f * row[j];
                }
                r[pc] = 0.0;
            }
        }
        for &v in &row {
            self.max_entry = self.max_entry.max(v.abs());
        }
        for r in &self.rows {
            for &v in r {
                self.max_entry = self.max_entry.max(v.abs());
            }
        }
        self.rows.push(row);
        self.pivot_cols.push(pc);
        if self.max_entry > GROWTH_LIMIT {
            return Err(SymError::NumericalFailure(format!(
                "elimination entries grew to {:.3e} while reducing the equation system",
                self.max_entry
            )));
        }
        Ok(())
    }
}

/// Reduces the full homogeneous system for `(spec, kind)` to an equivalent
/// basis of at most `map_rows * ns` rows. Per-pair blocks are eliminated
/// locally first (rank at most `2 * ns` each), so the global pass only sees
/// a small multiple of the unknown count.
fn reduce_equations(spec: &ChannelSpec, kind: SymKind) -> Result<Vec<Vec<f64>>, SymError> {
    let ns = spec.ns();
    let n = kind.map_rows(spec) * ns;
    let mut global = Reducer::new(n);
    let mut failure: Option<SymError> = None;
    for_each_pair_block(spec, kind, |a, b, block| {
        let mut local = Reducer::new(2 * ns);
        for eq in block {
            let norm = eq.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if norm <= 1e-15 {
                continue;
            }
            let scaled: Vec<f64> = eq.iter().map(|v| v / norm).collect();
            if let Err(e) = local.add(scaled) {
                failure = Some(e);
                return false;
            }
        }
        for lrow in &local.rows {
            let mut grow = vec![0.0; n];
            for s in 0..ns {
                grow[a * ns + s] = lrow[s];
                grow[b * ns + s] = lrow[ns + s];
            }
            let norm = grow.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if norm <= 1e-15 {
                continue;
            }
            for v in grow.iter_mut() {
                *v /= norm;
            }
            if let Err(e) = global.add(grow) {
                failure = Some(e);
                return false;
            }
        }
        // Full rank pins the solution set to the origin; later rows cannot
        // change that, so stop reading them.
        !global.full_rank()
    });
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(global.rows)
}

enum Verdict {
    Feasible { state: SimplexState, witness: Symmetrizer },
    Infeasible { residual: f64 },
}

/// Feasibility solver for one `(channel, kind)` pair.
///
/// Building it settles whether any symmetrizing map exists; the reduced
/// constraint tableau is kept so that minimum-cost queries for many input
/// distributions reuse the same factorized system. Construction fails with
/// [`SymError::NumericalFailure`] when the evidence lands between the
/// feasible and infeasible bands.
pub struct SymSolver {
    spec: ChannelSpec,
    kind: SymKind,
    nj: usize,
    ns: usize,
    verdict: Verdict,
}

impl SymSolver {
    pub fn new(spec: &ChannelSpec, kind: SymKind) -> Result<Self, SymError> {
        let ns = spec.ns();
        let nj = kind.map_rows(spec);
        let n = nj * ns;
        let reduced = reduce_equations(spec, kind)?;

        let mut rows = reduced;
        let mut rhs = vec![0.0; rows.len()];
        for r in 0..nj {
            let mut norm_row = vec![0.0; n];
            for s in 0..ns {
                norm_row[r * ns + s] = 1.0;
            }
            rows.push(norm_row);
            rhs.push(1.0);
        }

        let verdict = match simplex::phase1(&rows, &rhs, n) {
            Phase1::Feasible(state) => {
                let witness = extract_map(&state.solution(), nj, ns);
                let residual = symmetrization_residual(spec, kind, &witness);
                if residual > WITNESS_TOL {
                    return Err(SymError::NumericalFailure(format!(
                        "feasibility phase accepted a map whose equation residual is {residual:.3e}"
                    )));
                }
                Verdict::Feasible {
                    state,
                    witness: Symmetrizer { kind, rows: witness, residual },
                }
            }
            Phase1::Residual(r) => {
                if r >= INFEASIBLE_BAND {
                    Verdict::Infeasible { residual: r }
                } else {
                    return Err(SymError::NumericalFailure(format!(
                        "feasibility residual {r:.3e} falls between the decision bands"
                    )));
                }
            }
            Phase1::IterationLimit => {
                return Err(SymError::NumericalFailure(
                    "feasibility phase hit its iteration limit".into(),
                ));
            }
        };

        Ok(SymSolver { spec: spec.clone(), kind, nj, ns, verdict })
    }

    pub fn kind(&self) -> SymKind {
        self.kind
    }

    pub(crate) fn spec_ref(&self) -> &ChannelSpec {
        &self.spec
    }

    /// Number of conditioning rows the map has.
    pub fn map_row_count(&self) -> usize {
        self.nj
    }

    pub fn is_feasible(&self) -> bool {
        matches!(self.verdict, Verdict::Feasible { .. })
    }

    /// A symmetrizing map when one exists.
    pub fn symmetrizer(&self) -> Option<&Symmetrizer> {
        match &self.verdict {
            Verdict::Feasible { witness, .. } => Some(witness),
            Verdict::Infeasible { .. } => None,
        }
    }

    /// Best-effort total constraint violation when no map exists.
    pub fn infeasibility_residual(&self) -> Option<f64> {
        match &self.verdict {
            Verdict::Feasible { .. } => None,
            Verdict::Infeasible { residual } => Some(*residual),
        }
    }

    /// Cheapest expected state cost any symmetrizing map can realize when
    /// the conditioning rows are weighted by `p`: minimizes
    /// `sum_r p[r] * sum_s J[r][s] * l[s]` over the feasible maps.
    pub fn min_cost(&self, p: &[f64], l: &[f64]) -> Result<PsiReport, SymError> {
        if p.len() != self.nj {
            return Err(SymError::Input(format!(
                "weight vector has {} entries, the map has {} rows",
                p.len(),
                self.nj
            )));
        }
        if l.len() != self.ns {
            return Err(SymError::Input(format!(
                "state cost vector has {} entries, the channel has {} states",
                l.len(),
                self.ns
            )));
        }
        let state = match &self.verdict {
            Verdict::Infeasible { .. } => {
                return Ok(PsiReport { value: CostValue::Infinite, witness: None });
            }
            Verdict::Feasible { state, .. } => state,
        };
        let mut c = vec![0.0; self.nj * self.ns];
        for r in 0..self.nj {
            for s in 0..self.ns {
                c[r * self.ns + s] = p[r] * l[s];
            }
        }
        match state.minimize(&c) {
            Phase2::Optimal { x, value } => {
                let rows = extract_map(&x, self.nj, self.ns);
                let residual = symmetrization_residual(&self.spec, self.kind, &rows);
                if residual > WITNESS_TOL {
                    return Err(SymError::NumericalFailure(format!(
                        "cost minimization produced a map with equation residual {residual:.3e}"
                    )));
                }
                Ok(PsiReport {
                    value: CostValue::Finite(value),
                    witness: Some(Symmetrizer { kind: self.kind, rows, residual }),
                })
            }
            Phase2::Unbounded => Err(SymError::NumericalFailure(
                "cost minimization reported an unbounded objective on a bounded set".into(),
            )),
            Phase2::IterationLimit => Err(SymError::NumericalFailure(
                "cost minimization hit its iteration limit".into(),
            )),
        }
    }
}

impl SimplexState {
    /// Current values of the structural variables.
    pub(crate) fn solution(&self) -> Vec<f64> {
        let n = self.structural_len();
        let mut x = vec![0.0; n];
        for (i, &b) in self.basis_ref().iter().enumerate() {
            if b < n {
                x[b] = self.rhs_of(i).max(0.0);
            }
        }
        x
    }
}

fn extract_map(x: &[f64], nj: usize, ns: usize) -> Vec<Vec<f64>> {
    (0..nj).map(|r| x[r * ns..(r + 1) * ns].to_vec()).collect()
}
