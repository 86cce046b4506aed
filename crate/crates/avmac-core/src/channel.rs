use crate::pmf::{check_prob_vector, renormalize_in_place};
use crate::{CoreError, Pmf};

/// Finite state-dependent multiple-access channel `W(y|x1,x2,s)`.
///
/// The tensor is stored row-major in `(x1, x2, s, y)` order; each
/// `(x1, x2, s)` row is a probability vector over `y`. Rows are validated on
/// construction and renormalized under the same policy as [`Pmf`].
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSpec {
    nx1: usize,
    nx2: usize,
    ns: usize,
    ny: usize,
    w: Vec<f64>,
    pub name: Option<String>,
}

impl ChannelSpec {
    pub fn new(
        nx1: usize,
        nx2: usize,
        ns: usize,
        ny: usize,
        w: Vec<f64>,
        name: Option<String>,
    ) -> Result<Self, CoreError> {
        if nx1 == 0 || nx2 == 0 || ns == 0 || ny == 0 {
            return Err(CoreError::EmptyAlphabet);
        }
        let expected = nx1 * nx2 * ns * ny;
        if w.len() != expected {
            return Err(CoreError::TensorLen {
                expected,
                got: w.len(),
            });
        }
        let mut spec = ChannelSpec {
            nx1,
            nx2,
            ns,
            ny,
            w,
            name,
        };
        for x1 in 0..nx1 {
            for x2 in 0..nx2 {
                for s in 0..ns {
                    let start = spec.row_start(x1, x2, s);
                    let row = &mut spec.w[start..start + ny];
                    check_prob_vector(row).map_err(|source| CoreError::BadRow {
                        x1,
                        x2,
                        s,
                        source: Box::new(source),
                    })?;
                    renormalize_in_place(row);
                }
            }
        }
        Ok(spec)
    }

    /// Builds without validating rows. Intended for diagnostics paths that
    /// want to inspect a malformed tensor via [`crate::validate`].
    pub fn from_parts_unchecked(
        nx1: usize,
        nx2: usize,
        ns: usize,
        ny: usize,
        w: Vec<f64>,
        name: Option<String>,
    ) -> Result<Self, CoreError> {
        if nx1 == 0 || nx2 == 0 || ns == 0 || ny == 0 {
            return Err(CoreError::EmptyAlphabet);
        }
        let expected = nx1 * nx2 * ns * ny;
        if w.len() != expected {
            return Err(CoreError::TensorLen {
                expected,
                got: w.len(),
            });
        }
        Ok(ChannelSpec {
            nx1,
            nx2,
            ns,
            ny,
            w,
            name,
        })
    }

    fn row_start(&self, x1: usize, x2: usize, s: usize) -> usize {
        ((x1 * self.nx2 + x2) * self.ns + s) * self.ny
    }

    pub fn w(&self, x1: usize, x2: usize, s: usize, y: usize) -> f64 {
        debug_assert!(x1 < self.nx1 && x2 < self.nx2 && s < self.ns && y < self.ny);
        self.w[self.row_start(x1, x2, s) + y]
    }

    /// Output distribution for fixed `(x1, x2, s)`.
    pub fn row(&self, x1: usize, x2: usize, s: usize) -> &[f64] {
        let start = self.row_start(x1, x2, s);
        &self.w[start..start + self.ny]
    }

    pub fn sizes(&self) -> (usize, usize, usize, usize) {
        (self.nx1, self.nx2, self.ns, self.ny)
    }

    pub fn nx1(&self) -> usize {
        self.nx1
    }

    pub fn nx2(&self) -> usize {
        self.nx2
    }

    pub fn ns(&self) -> usize {
        self.ns
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn tensor(&self) -> &[f64] {
        &self.w
    }
}

/// Per-letter costs: `g1` on the first input alphabet, `g2` on the second,
/// `l` on the state alphabet.
///
/// Fields are public and unvalidated so malformed data can be carried to
/// [`crate::validate`] for a full report. Well-formed costs are finite,
/// nonnegative, and each vector contains at least one zero.
#[derive(Debug, Clone, PartialEq)]
pub struct CostModel {
    pub g1: Vec<f64>,
    pub g2: Vec<f64>,
    pub l: Vec<f64>,
}

impl CostModel {
    pub fn new(g1: Vec<f64>, g2: Vec<f64>, l: Vec<f64>) -> Self {
        CostModel { g1, g2, l }
    }

    pub fn max_g1(&self) -> f64 {
        max_entry(&self.g1)
    }

    pub fn max_g2(&self) -> f64 {
        max_entry(&self.g2)
    }

    pub fn max_l(&self) -> f64 {
        max_entry(&self.l)
    }
}

fn max_entry(v: &[f64]) -> f64 {
    v.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
}

/// Constraint levels for the two input costs and the state cost.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstraintSpec {
    pub gamma1: f64,
    pub gamma2: f64,
    pub lambda: f64,
}

impl ConstraintSpec {
    pub fn new(gamma1: f64, gamma2: f64, lambda: f64) -> Self {
        ConstraintSpec {
            gamma1,
            gamma2,
            lambda,
        }
    }

    /// Clamps each level into `[0, max cost]` for the matching cost vector.
    /// Returns the clamped levels together with a note per adjusted field.
    pub fn clamp(&self, costs: &CostModel) -> (ConstraintSpec, Vec<String>) {
        let mut notes = Vec::new();
        let mut clamp_one = |label: &str, value: f64, max: f64| -> f64 {
            let clamped = value.clamp(0.0, max);
            if clamped != value {
                notes.push(format!(
                    "{label} adjusted from {value} to {clamped} (valid range [0, {max}])"
                ));
            }
            clamped
        };
        let out = ConstraintSpec {
            gamma1: clamp_one("gamma1", self.gamma1, costs.max_g1()),
            gamma2: clamp_one("gamma2", self.gamma2, costs.max_g2()),
            lambda: clamp_one("lambda", self.lambda, costs.max_l()),
        };
        (out, notes)
    }
}

/// Channel after averaging the state out under a fixed state distribution:
/// `V(y|x1,x2) = sum_s q(s) W(y|x1,x2,s)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AveragedChannel {
    nx1: usize,
    nx2: usize,
    ny: usize,
    v: Vec<f64>,
}

impl AveragedChannel {
    pub fn v(&self, x1: usize, x2: usize, y: usize) -> f64 {
        self.v[(x1 * self.nx2 + x2) * self.ny + y]
    }

    pub fn row(&self, x1: usize, x2: usize) -> &[f64] {
        let start = (x1 * self.nx2 + x2) * self.ny;
        &self.v[start..start + self.ny]
    }

    pub fn sizes(&self) -> (usize, usize, usize) {
        (self.nx1, self.nx2, self.ny)
    }
}

/// Averages the state out of `spec` under `q`.
pub fn averaged_channel(spec: &ChannelSpec, q: &Pmf) -> Result<AveragedChannel, CoreError> {
    if q.len() != spec.ns() {
        return Err(CoreError::Dimension {
            context: "state distribution length",
            expected: spec.ns(),
            got: q.len(),
        });
    }
    let (nx1, nx2, ns, ny) = spec.sizes();
    let mut v = vec![0.0; nx1 * nx2 * ny];
    for x1 in 0..nx1 {
        for x2 in 0..nx2 {
            let out = &mut v[(x1 * nx2 + x2) * ny..(x1 * nx2 + x2 + 1) * ny];
            for s in 0..ns {
                let qs = q.get(s);
                if qs == 0.0 {
                    continue;
                }
                for (o, &w) in out.iter_mut().zip(spec.row(x1, x2, s)) {
                    *o += qs * w;
                }
            }
        }
    }
    Ok(AveragedChannel { nx1, nx2, ny, v })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_spec() -> ChannelSpec {
        // 2x1x2 inputs/state, binary output; rows chosen distinct per state.
        ChannelSpec::new(
            2,
            1,
            2,
            2,
            vec![
                1.0, 0.0, // x1=0, s=0
                0.0, 1.0, // x1=0, s=1
                0.5, 0.5, // x1=1, s=0
                0.25, 0.75, // x1=1, s=1
            ],
            None,
        )
        .unwrap()
    }

    #[test]
    fn indexing_matches_row_major_layout() {
        let spec = tiny_spec();
        assert_eq!(spec.w(0, 0, 1, 1), 1.0);
        assert_eq!(spec.w(1, 0, 0, 0), 0.5);
        assert_eq!(spec.row(1, 0, 1), &[0.25, 0.75]);
    }

    #[test]
    fn rejects_nonstochastic_row() {
        let err = ChannelSpec::new(1, 1, 1, 2, vec![0.6, 0.6], None).unwrap_err();
        match err {
            CoreError::BadRow { x1: 0, x2: 0, s: 0, source } => {
                assert!(matches!(*source, CoreError::BadSum { .. }));
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn rejects_wrong_tensor_length() {
        let err = ChannelSpec::new(2, 2, 2, 2, vec![0.5; 4], None).unwrap_err();
        assert!(matches!(err, CoreError::TensorLen { expected: 16, got: 4 }));
    }

    #[test]
    fn averaging_is_a_convex_combination_of_state_rows() {
        let spec = tiny_spec();
        let q = Pmf::new(vec![0.25, 0.75]).unwrap();
        let avg = averaged_channel(&spec, &q).unwrap();
        assert!((avg.v(0, 0, 0) - 0.25).abs() < 1e-15);
        assert!((avg.v(0, 0, 1) - 0.75).abs() < 1e-15);
        assert!((avg.v(1, 0, 0) - (0.25 * 0.5 + 0.75 * 0.25)).abs() < 1e-15);
    }

    #[test]
    fn clamp_reports_adjustments() {
        let costs = CostModel::new(vec![0.0, 1.0], vec![0.0, 2.0], vec![0.0, 1.0]);
        let (clamped, notes) = ConstraintSpec::new(1.5, -0.25, 0.4).clamp(&costs);
        assert_eq!(clamped.gamma1, 1.0);
        assert_eq!(clamped.gamma2, 0.0);
        assert_eq!(clamped.lambda, 0.4);
        assert_eq!(notes.len(), 2);
    }
}
