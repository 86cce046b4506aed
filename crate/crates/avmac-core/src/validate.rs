use crate::{ChannelSpec, ConstraintSpec, CostModel, PROB_TOL};
use std::fmt;

/// One problem found by [`validate`].
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    RowSum { x1: usize, x2: usize, s: usize, sum: f64 },
    NegativeTensorEntry { x1: usize, x2: usize, s: usize, y: usize, value: f64 },
    NonFiniteTensorEntry { x1: usize, x2: usize, s: usize, y: usize },
    CostLength { which: &'static str, expected: usize, got: usize },
    NegativeCost { which: &'static str, index: usize, value: f64 },
    NonFiniteCost { which: &'static str, index: usize },
    NoZeroCost { which: &'static str },
    ConstraintOutOfRange { which: &'static str, value: f64, max: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::RowSum { x1, x2, s, sum } => write!(
                f,
                "W row (x1={x1}, x2={x2}, s={s}) sums to {sum}, not 1 within {PROB_TOL}"
            ),
            Violation::NegativeTensorEntry { x1, x2, s, y, value } => write!(
                f,
                "W({y}|{x1},{x2},{s}) = {value} is negative"
            ),
            Violation::NonFiniteTensorEntry { x1, x2, s, y } => write!(
                f,
                "W({y}|{x1},{x2},{s}) is not finite"
            ),
            Violation::CostLength { which, expected, got } => write!(
                f,
                "cost vector {which} has {got} entries, expected {expected}"
            ),
            Violation::NegativeCost { which, index, value } => write!(
                f,
                "cost {which}[{index}] = {value} is negative"
            ),
            Violation::NonFiniteCost { which, index } => write!(
                f,
                "cost {which}[{index}] is not finite"
            ),
            Violation::NoZeroCost { which } => write!(
                f,
                "cost vector {which} has no zero entry, so the constrained problem \
                 may be infeasible at level 0"
            ),
            Violation::ConstraintOutOfRange { which, value, max } => write!(
                f,
                "constraint {which} = {value} lies outside [0, {max}] and will be clamped"
            ),
        }
    }
}

/// Outcome of checking a channel, costs, and constraints together.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            writeln!(f, "ok")
        } else {
            for v in &self.violations {
                writeln!(f, "{v}")?;
            }
            Ok(())
        }
    }
}

/// Checks stochasticity of every channel row, cost well-formedness (finite,
/// nonnegative, at least one zero entry per vector, lengths matching the
/// alphabets), and that constraint levels lie in `[0, max cost]`.
///
/// Collects every violation instead of stopping at the first, so a report can
/// drive a complete fix-up of a hand-written channel file.
pub fn validate(
    spec: &ChannelSpec,
    costs: &CostModel,
    constraints: &ConstraintSpec,
) -> ValidationReport {
    let mut violations = Vec::new();
    let (nx1, nx2, ns, _ny) = spec.sizes();

    for x1 in 0..nx1 {
        for x2 in 0..nx2 {
            for s in 0..ns {
                let row = spec.row(x1, x2, s);
                let mut sum = 0.0;
                let mut row_ok = true;
                for (y, &v) in row.iter().enumerate() {
                    if !v.is_finite() {
                        violations.push(Violation::NonFiniteTensorEntry { x1, x2, s, y });
                        row_ok = false;
                    } else if v < 0.0 {
                        violations.push(Violation::NegativeTensorEntry { x1, x2, s, y, value: v });
                        row_ok = false;
                    } else {
                        sum += v;
                    }
                }
                if row_ok && (sum - 1.0).abs() > PROB_TOL {
                    violations.push(Violation::RowSum { x1, x2, s, sum });
                }
            }
        }
    }

    let cost_checks: [(&'static str, &[f64], usize); 3] = [
        ("g1", &costs.g1, nx1),
        ("g2", &costs.g2, nx2),
        ("l", &costs.l, ns),
    ];
    for (which, v, expected) in cost_checks {
        if v.len() != expected {
            violations.push(Violation::CostLength {
                which,
                expected,
                got: v.len(),
            });
            continue;
        }
        let mut has_zero = false;
        let mut well_formed = true;
        for (index, &value) in v.iter().enumerate() {
            if !value.is_finite() {
                violations.push(Violation::NonFiniteCost { which, index });
                well_formed = false;
            } else if value < 0.0 {
                violations.push(Violation::NegativeCost { which, index, value });
                well_formed = false;
            } else if value == 0.0 {
                has_zero = true;
            }
        }
        if well_formed && !has_zero {
            violations.push(Violation::NoZeroCost { which });
        }
    }

    let constraint_checks = [
        ("gamma1", constraints.gamma1, costs.max_g1()),
        ("gamma2", constraints.gamma2, costs.max_g2()),
        ("lambda", constraints.lambda, costs.max_l()),
    ];
    for (which, value, max) in constraint_checks {
        if !(0.0..=max).contains(&value) {
            violations.push(Violation::ConstraintOutOfRange { which, value, max });
        }
    }

    ValidationReport { violations }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ChannelSpec;

    fn ok_inputs() -> (ChannelSpec, CostModel, ConstraintSpec) {
        let spec = ChannelSpec::new(2, 1, 1, 2, vec![1.0, 0.0, 0.0, 1.0], None).unwrap();
        let costs = CostModel::new(vec![0.0, 1.0], vec![0.0], vec![0.0]);
        let cons = ConstraintSpec::new(0.5, 0.0, 0.0);
        (spec, costs, cons)
    }

    #[test]
    fn clean_inputs_pass() {
        let (spec, costs, cons) = ok_inputs();
        let report = validate(&spec, &costs, &cons);
        assert!(report.is_valid(), "{report}");
    }

    #[test]
    fn flags_bad_row_sum() {
        let spec =
            ChannelSpec::from_parts_unchecked(2, 1, 1, 2, vec![0.6, 0.3, 0.0, 1.0], None).unwrap();
        let (_, costs, cons) = ok_inputs();
        let report = validate(&spec, &costs, &cons);
        assert_eq!(report.violations.len(), 1);
        assert!(matches!(
            report.violations[0],
            Violation::RowSum { x1: 0, x2: 0, s: 0, sum } if (sum - 0.9).abs() < 1e-12
        ));
    }

    #[test]
    fn flags_cost_without_zero_and_out_of_range_constraint() {
        let (spec, _, _) = ok_inputs();
        let costs = CostModel::new(vec![0.5, 1.0], vec![0.0], vec![0.0]);
        let cons = ConstraintSpec::new(2.0, 0.0, -0.1);
        let report = validate(&spec, &costs, &cons);
        assert!(report
            .violations
            .contains(&Violation::NoZeroCost { which: "g1" }));
        assert!(report.violations.iter().any(|v| matches!(
            v,
            Violation::ConstraintOutOfRange { which: "gamma1", .. }
        )));
        assert!(report.violations.iter().any(|v| matches!(
            v,
            Violation::ConstraintOutOfRange { which: "lambda", .. }
        )));
    }

    #[test]
    fn flags_wrong_cost_length() {
        let (spec, _, cons) = ok_inputs();
        let costs = CostModel::new(vec![0.0], vec![0.0], vec![0.0]);
        let report = validate(&spec, &costs, &cons);
        assert!(report.violations.contains(&Violation::CostLength {
            which: "g1",
            expected: 2,
            got: 1
        }));
    }
}
