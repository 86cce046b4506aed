//! Worst-state rate pentagon for one input ensemble.
//!
//! Each corner rate is its own minimization over the feasible state set, so
//! the three bounds generally come from three different jamming
//! distributions. The resulting set is the intersection of three half-planes
//! with the nonnegative quadrant.

use avmac_core::{ChannelSpec, ConstraintSpec, CostModel, InputEnsemble, StateLaw};

use crate::stateopt::{min_info_with_tol, StateFeasibleSet, WhichInfo};
use crate::{RegionError, RegionMode};

/// Slack allowed when checking expected input costs against their caps.
const COST_SLACK: f64 = 1e-9;

/// Final-answer gap tolerance for the three corner minimizations.
const FINAL_GAP_TOL: f64 = 1e-7;

/// Rate pentagon `{r1 <= r1_max, r2 <= r2_max, r1 + r2 <= sum_max}` in the
/// nonnegative quadrant, tagged with the ensemble that produced it.
#[derive(Debug, Clone)]
pub struct Pentagon {
    /// Worst-state `I(X1; Y | X2, U)` in bits.
    pub r1_max: f64,
    /// Worst-state `I(X2; Y | X1, U)` in bits.
    pub r2_max: f64,
    /// Worst-state `I(X1, X2; Y | U)` in bits.
    pub sum_max: f64,
    /// Input ensemble the bounds were evaluated at.
    pub ensemble: InputEnsemble,
}

impl Pentagon {
    /// Corner points in counterclockwise order starting from the origin,
    /// with degenerate (repeated) corners removed.
    pub fn vertices(&self) -> Vec<(f64, f64)> {
        let x_hi = self.r1_max.min(self.sum_max).max(0.0);
        let y_hi = self.r2_max.min(self.sum_max).max(0.0);
        let y_at_x_hi = self.r2_max.min((self.sum_max - x_hi).max(0.0));
        let x_at_y_hi = self.r1_max.min((self.sum_max - y_hi).max(0.0));
        let raw = [
            (0.0, 0.0),
            (x_hi, 0.0),
            (x_hi, y_at_x_hi),
            (x_at_y_hi, y_hi),
            (0.0, y_hi),
        ];
        let mut out: Vec<(f64, f64)> = Vec::with_capacity(5);
        for p in raw {
            if out
                .last()
                .is_none_or(|q| (q.0 - p.0).abs() > 1e-12 || (q.1 - p.1).abs() > 1e-12)
            {
                out.push(p);
            }
        }
        while out.len() > 1 {
            let first = out[0];
            let last = *out.last().expect("nonempty");
            if (first.0 - last.0).abs() <= 1e-12 && (first.1 - last.1).abs() <= 1e-12 {
                out.pop();
            } else {
                break;
            }
        }
        out
    }

    /// Support value `max { mu r1 + (1 - mu) r2 }` over the pentagon.
    pub fn support(&self, mu: f64) -> f64 {
        self.vertices()
            .iter()
            .map(|&(x, y)| mu * x + (1.0 - mu) * y)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Largest `r2` paired with the given `r1`, or `None` when `r1` exceeds
    /// the pentagon's reach.
    pub fn r2_at(&self, r1: f64) -> Option<f64> {
        let x_hi = self.r1_max.min(self.sum_max);
        if r1 > x_hi + 1e-12 || r1 < -1e-12 {
            return None;
        }
        Some(self.r2_max.min(self.sum_max - r1).max(0.0))
    }
}

/// Convergence record for one pentagon solve, kept alongside the rates when
/// regions need to aggregate solver health.
pub(crate) struct PentagonStatus {
    pub converged: bool,
    /// Minimizing state laws for the `r1`, `r2`, and sum bounds in order.
    pub laws: [StateLaw; 3],
}

/// Evaluates the pentagon for one ensemble under the given constraints.
/// State coordination follows the mode: the random-code regime faces one
/// state distribution per block, the others one per time-sharing letter.
pub fn pentagon(
    spec: &ChannelSpec,
    costs: &CostModel,
    ens: &InputEnsemble,
    cons: &ConstraintSpec,
    mode: RegionMode,
) -> Result<Pentagon, RegionError> {
    let feasible = StateFeasibleSet::CostConstrained(cons.lambda);
    let (p, _) = pentagon_with_status(
        spec,
        costs,
        ens,
        cons,
        &feasible,
        mode.per_letter_state(),
        FINAL_GAP_TOL,
    )?;
    Ok(p)
}

pub(crate) fn pentagon_with_status(
    spec: &ChannelSpec,
    costs: &CostModel,
    ens: &InputEnsemble,
    cons: &ConstraintSpec,
    feasible: &StateFeasibleSet,
    per_letter: bool,
    gap_tol: f64,
) -> Result<(Pentagon, PentagonStatus), RegionError> {
    let (c1, c2) = ens.expected_input_costs(&costs.g1, &costs.g2)?;
    if c1 > cons.gamma1 + COST_SLACK || c2 > cons.gamma2 + COST_SLACK {
        return Err(RegionError::Constraint(format!(
            "expected input costs ({c1:.6}, {c2:.6}) exceed caps ({:.6}, {:.6})",
            cons.gamma1, cons.gamma2
        )));
    }
    let r1 = min_info_with_tol(spec, costs, ens, feasible, WhichInfo::I1, per_letter, gap_tol)?;
    let r2 = min_info_with_tol(spec, costs, ens, feasible, WhichInfo::I2, per_letter, gap_tol)?;
    let sum = min_info_with_tol(
        spec,
        costs,
        ens,
        feasible,
        WhichInfo::Sum,
        per_letter,
        gap_tol,
    )?;
    let status = PentagonStatus {
        converged: r1.converged && r2.converged && sum.converged,
        laws: [r1.law, r2.law, sum.law],
    };
    let pentagon = Pentagon {
        r1_max: r1.value,
        r2_max: r2.value,
        sum_max: sum.value,
        ensemble: ens.clone(),
    };
    Ok((pentagon, status))
}

#[cfg(test)]
mod tests {
    use super::*;
    use avmac_core::Pmf;

    fn pent(r1: f64, r2: f64, sum: f64) -> Pentagon {
        Pentagon {
            r1_max: r1,
            r2_max: r2,
            sum_max: sum,
            ensemble: InputEnsemble::singleton(Pmf::uniform(2).unwrap(), Pmf::uniform(2).unwrap()),
        }
    }

    #[test]
    fn five_corner_shape() {
        let p = pent(1.0, 1.0, 1.5);
        let v = p.vertices();
        assert_eq!(v.len(), 5);
        assert_eq!(v[0], (0.0, 0.0));
        assert_eq!(v[1], (1.0, 0.0));
        assert_eq!(v[2], (1.0, 0.5));
        assert_eq!(v[3], (0.5, 1.0));
        assert_eq!(v[4], (0.0, 1.0));
    }

    #[test]
    fn inactive_sum_gives_a_rectangle() {
        let p = pent(0.5, 0.5, 2.0);
        let v = p.vertices();
        assert_eq!(v.len(), 4);
        assert!(v.contains(&(0.5, 0.5)));
    }

    #[test]
    fn degenerate_point_region() {
        let p = pent(0.0, 0.0, 0.0);
        assert_eq!(p.vertices(), vec![(0.0, 0.0)]);
        assert_eq!(p.r2_at(0.0), Some(0.0));
        assert_eq!(p.r2_at(0.5), None);
    }

    #[test]
    fn boundary_profile_matches_corners() {
        let p = pent(1.0, 0.8, 1.5);
        assert_eq!(p.r2_at(0.0), Some(0.8));
        assert_eq!(p.r2_at(0.7), Some(0.8));
        assert_eq!(p.r2_at(1.0), Some(0.5));
        assert!(p.r2_at(1.2).is_none());
        assert!((p.support(1.0) - 1.0).abs() < 1e-12);
        assert!((p.support(0.0) - 0.8).abs() < 1e-12);
        // Best half-half tradeoff sits at the sum facet: (1, 0.5) or (0.7, 0.8).
        assert!((p.support(0.5) - 0.75).abs() < 1e-12);
    }
}
