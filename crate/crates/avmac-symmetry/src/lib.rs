//! Symmetrizability analysis for two-sender state-dependent channels.
//!
//! A channel of this kind can be attacked by a jammer that imitates one or
//! both senders: a *symmetrizing map* turns input letters into state
//! distributions so that the averaged channel cannot tell the real inputs
//! from the imitated ones. This crate decides whether such maps exist
//! ([`check_symmetrizable`]), prices the cheapest one against a state cost
//! ([`min_symmetrizing_cost`], [`tilde_lambda`]), and maximizes that price
//! over cost-constrained input distributions ([`thresholds`]), which is the
//! jammer budget below which reliable communication becomes possible.
//!
//! All decisions go through one linear-programming engine with explicit
//! verdict bands: answers that fall between "clearly feasible" and "clearly
//! infeasible" surface as [`SymError::NumericalFailure`] instead of a guess.

use avmac_core::{ChannelSpec, CostModel, InputEnsemble};
use thiserror::Error;

mod simplex;
mod system;
mod thresholds;

pub use system::{symmetrization_residual, SymSolver};
pub use thresholds::{threshold_for, thresholds, thresholds_product_grid};

#[derive(Debug, Error)]
pub enum SymError {
    /// The numerical evidence does not support a clean verdict: ambiguous
    /// feasibility residual, iteration cap, or uncontrolled growth.
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    /// Caller-supplied data has the wrong shape or an invalid value.
    #[error("invalid input: {0}")]
    Input(String),
}

/// Which inputs the jammer imitates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SymKind {
    /// Both senders at once: the map conditions on an input pair.
    Joint,
    /// Sender 1 only.
    Sender1,
    /// Sender 2 only.
    Sender2,
}

impl std::fmt::Display for SymKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SymKind::Joint => write!(f, "joint"),
            SymKind::Sender1 => write!(f, "sender1"),
            SymKind::Sender2 => write!(f, "sender2"),
        }
    }
}

/// An expected state cost that may be unbounded. The infinite case arises
/// exactly when no symmetrizing map of the requested kind exists.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CostValue {
    Finite(f64),
    Infinite,
}

impl CostValue {
    pub fn as_finite(self) -> Option<f64> {
        match self {
            CostValue::Finite(v) => Some(v),
            CostValue::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, CostValue::Infinite)
    }
}

impl std::fmt::Display for CostValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CostValue::Finite(v) => write!(f, "{v}"),
            CostValue::Infinite => write!(f, "inf"),
        }
    }
}

/// A concrete symmetrizing map: one state distribution per conditioning
/// row, together with the worst violation it leaves in the defining
/// equations (see [`symmetrization_residual`]).
#[derive(Debug, Clone, PartialEq)]
pub struct Symmetrizer {
    pub kind: SymKind,
    rows: Vec<Vec<f64>>,
    pub residual: f64,
}

impl Symmetrizer {
    /// State distributions, one per conditioning row. Rows are indexed by
    /// the input letter (per-sender kinds) or by `x1 * |X2| + x2` (joint).
    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.rows[r]
    }

    pub fn into_rows(self) -> Vec<Vec<f64>> {
        self.rows
    }

    /// True when every entry is within `tol` of 0 or 1, i.e. the map is a
    /// deterministic state assignment.
    pub fn is_zero_one(&self, tol: f64) -> bool {
        self.rows
            .iter()
            .flatten()
            .all(|&v| v.abs() <= tol || (v - 1.0).abs() <= tol)
    }
}

/// Result of a minimum-cost query: the cheapest expected state cost and,
/// when finite, a map achieving it.
#[derive(Debug, Clone)]
pub struct PsiReport {
    pub value: CostValue,
    pub witness: Option<Symmetrizer>,
}

/// One threshold value with diagnostics from the search that produced it.
#[derive(Debug, Clone)]
pub struct ThresholdEntry {
    pub value: CostValue,
    /// Input distribution attaining `value`, when the search tracked one.
    pub maximizer: Option<Vec<f64>>,
    /// False when the iteration cap was hit before the bound gap closed;
    /// `value` is then still a valid lower bound.
    pub converged: bool,
    /// Certified upper bound from the last master program, when finite
    /// maximization ran.
    pub upper_bound: Option<f64>,
}

/// Thresholds for the three map kinds. Reliable rates exist only where the
/// jammer budget stays below the relevant entries.
#[derive(Debug, Clone)]
pub struct Thresholds {
    pub joint: ThresholdEntry,
    pub sender1: ThresholdEntry,
    pub sender2: ThresholdEntry,
}

/// Decides whether a symmetrizing map of `kind` exists for `spec`,
/// returning one when it does. `None` means certified nonexistence.
pub fn check_symmetrizable(
    spec: &ChannelSpec,
    kind: SymKind,
) -> Result<Option<Symmetrizer>, SymError> {
    let solver = SymSolver::new(spec, kind)?;
    Ok(solver.symmetrizer().cloned())
}

/// Cheapest expected state cost of a symmetrizing map of `kind`, with the
/// conditioning rows weighted by `p` and states priced by `costs.l`.
/// `p` is a distribution over the input letters of the imitated sender, or
/// over input pairs (flattened `x1 * |X2| + x2`) for the joint kind.
pub fn min_symmetrizing_cost(
    spec: &ChannelSpec,
    costs: &CostModel,
    kind: SymKind,
    p: &[f64],
) -> Result<PsiReport, SymError> {
    check_weights(p)?;
    let solver = SymSolver::new(spec, kind)?;
    solver.min_cost(p, &costs.l)
}

/// Minimum jammer budget needed to symmetrize against the given input
/// ensemble: the time-sharing average of the per-letter minimum costs.
pub fn tilde_lambda(
    spec: &ChannelSpec,
    costs: &CostModel,
    ens: &InputEnsemble,
    kind: SymKind,
) -> Result<CostValue, SymError> {
    let solver = SymSolver::new(spec, kind)?;
    tilde_lambda_with(&solver, costs, ens)
}

/// [`tilde_lambda`] against a prebuilt solver, so many ensembles can share
/// one feasibility factorization.
pub fn tilde_lambda_with(
    solver: &SymSolver,
    costs: &CostModel,
    ens: &InputEnsemble,
) -> Result<CostValue, SymError> {
    if !solver.is_feasible() {
        return Ok(CostValue::Infinite);
    }
    let spec = solver.spec_ref();
    let (n1, n2, _, _) = spec.sizes();
    if ens.nx1() != n1 || ens.nx2() != n2 {
        return Err(SymError::Input(format!(
            "ensemble is over {}x{} inputs, the channel has {}x{}",
            ens.nx1(),
            ens.nx2(),
            n1,
            n2
        )));
    }
    let mut total = 0.0;
    for u in 0..ens.nu() {
        let pu = ens.pu()[u];
        if pu == 0.0 {
            continue;
        }
        let p: Vec<f64> = match solver.kind() {
            SymKind::Sender1 => ens.px1(u).as_slice().to_vec(),
            SymKind::Sender2 => ens.px2(u).as_slice().to_vec(),
            SymKind::Joint => {
                let p1 = ens.px1(u).as_slice();
                let p2 = ens.px2(u).as_slice();
                let mut p = vec![0.0; n1 * n2];
                for (i, &a) in p1.iter().enumerate() {
                    for (j, &b) in p2.iter().enumerate() {
                        p[i * n2 + j] = a * b;
                    }
                }
                p
            }
        };
        match solver.min_cost(&p, &costs.l)?.value {
            CostValue::Finite(v) => total += pu * v,
            CostValue::Infinite => return Ok(CostValue::Infinite),
        }
    }
    Ok(CostValue::Finite(total))
}

fn check_weights(p: &[f64]) -> Result<(), SymError> {
    if p.is_empty() {
        return Err(SymError::Input("weight vector is empty".into()));
    }
    if p.iter().any(|v| !v.is_finite() || *v < -1e-12) {
        return Err(SymError::Input("weights must be nonnegative and finite".into()));
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > 1e-6 {
        return Err(SymError::Input(format!("weights sum to {sum}, expected 1")));
    }
    Ok(())
}
