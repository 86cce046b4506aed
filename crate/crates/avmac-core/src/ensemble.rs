use crate::{CoreError, Pmf};

/// Input ensemble `P_U x P_{X1|U} x P_{X2|U}`: a time-sharing variable `U`
/// and per-`u` conditional input distributions, independent across senders
/// given `U`.
#[derive(Debug, Clone, PartialEq)]
pub struct InputEnsemble {
    pu: Pmf,
    px1: Vec<Pmf>,
    px2: Vec<Pmf>,
}

impl InputEnsemble {
    pub fn new(pu: Pmf, px1: Vec<Pmf>, px2: Vec<Pmf>) -> Result<Self, CoreError> {
        let nu = pu.len();
        if px1.len() != nu {
            return Err(CoreError::Dimension {
                context: "conditional rows for first input",
                expected: nu,
                got: px1.len(),
            });
        }
        if px2.len() != nu {
            return Err(CoreError::Dimension {
                context: "conditional rows for second input",
                expected: nu,
                got: px2.len(),
            });
        }
        for rows in [&px1, &px2] {
            for row in rows.iter().skip(1) {
                if row.len() != rows[0].len() {
                    return Err(CoreError::Dimension {
                        context: "conditional row length",
                        expected: rows[0].len(),
                        got: row.len(),
                    });
                }
            }
        }
        Ok(InputEnsemble { pu, px1, px2 })
    }

    /// Ensemble with a single `u`, i.e. independent inputs `p1 x p2`.
    pub fn singleton(p1: Pmf, p2: Pmf) -> Self {
        InputEnsemble {
            pu: Pmf::point_mass(1, 0).expect("nonempty"),
            px1: vec![p1],
            px2: vec![p2],
        }
    }

    pub fn nu(&self) -> usize {
        self.pu.len()
    }

    pub fn nx1(&self) -> usize {
        self.px1[0].len()
    }

    pub fn nx2(&self) -> usize {
        self.px2[0].len()
    }

    pub fn pu(&self) -> &Pmf {
        &self.pu
    }

    pub fn px1(&self, u: usize) -> &Pmf {
        &self.px1[u]
    }

    pub fn px2(&self, u: usize) -> &Pmf {
        &self.px2[u]
    }

    /// Joint input marginal over `(x1, x2)`, flattened as `x1 * nx2 + x2`.
    pub fn joint_input_marginal(&self) -> Vec<f64> {
        let (nx1, nx2) = (self.nx1(), self.nx2());
        let mut joint = vec![0.0; nx1 * nx2];
        for u in 0..self.nu() {
            let pu = self.pu.get(u);
            if pu == 0.0 {
                continue;
            }
            for x1 in 0..nx1 {
                let p1 = pu * self.px1[u].get(x1);
                if p1 == 0.0 {
                    continue;
                }
                for x2 in 0..nx2 {
                    joint[x1 * nx2 + x2] += p1 * self.px2[u].get(x2);
                }
            }
        }
        joint
    }

    pub fn marginal_x1(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.nx1()];
        for u in 0..self.nu() {
            let pu = self.pu.get(u);
            for (x1, out) in m.iter_mut().enumerate() {
                *out += pu * self.px1[u].get(x1);
            }
        }
        m
    }

    pub fn marginal_x2(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.nx2()];
        for u in 0..self.nu() {
            let pu = self.pu.get(u);
            for (x2, out) in m.iter_mut().enumerate() {
                *out += pu * self.px2[u].get(x2);
            }
        }
        m
    }

    /// Expected per-letter input costs `(E[g1(X1)], E[g2(X2)])`.
    pub fn expected_input_costs(&self, g1: &[f64], g2: &[f64]) -> Result<(f64, f64), CoreError> {
        if g1.len() != self.nx1() {
            return Err(CoreError::Dimension {
                context: "first input cost length",
                expected: self.nx1(),
                got: g1.len(),
            });
        }
        if g2.len() != self.nx2() {
            return Err(CoreError::Dimension {
                context: "second input cost length",
                expected: self.nx2(),
                got: g2.len(),
            });
        }
        let c1 = self
            .marginal_x1()
            .iter()
            .zip(g1)
            .map(|(p, c)| p * c)
            .sum();
        let c2 = self
            .marginal_x2()
            .iter()
            .zip(g2)
            .map(|(p, c)| p * c)
            .sum();
        Ok((c1, c2))
    }
}

/// State distribution, either shared across `u` or chosen per `u`.
#[derive(Debug, Clone, PartialEq)]
pub enum StateLaw {
    /// One distribution `q(s)` used for every `u`.
    Unconditional(Pmf),
    /// A distribution `q(s|u)` per value of `u`, indexed by `u`.
    PerU(Vec<Pmf>),
}

impl StateLaw {
    /// State distribution in effect at time-sharing value `u`.
    pub fn at(&self, u: usize) -> &Pmf {
        match self {
            StateLaw::Unconditional(q) => q,
            StateLaw::PerU(rows) => &rows[u],
        }
    }

    pub fn ns(&self) -> usize {
        match self {
            StateLaw::Unconditional(q) => q.len(),
            StateLaw::PerU(rows) => rows[0].len(),
        }
    }

    /// Checks alphabet sizes against an ensemble and a state alphabet.
    pub fn check_dims(&self, nu: usize, ns: usize) -> Result<(), CoreError> {
        if self.ns() != ns {
            return Err(CoreError::Dimension {
                context: "state alphabet",
                expected: ns,
                got: self.ns(),
            });
        }
        if let StateLaw::PerU(rows) = self {
            if rows.len() != nu {
                return Err(CoreError::Dimension {
                    context: "state rows per u",
                    expected: nu,
                    got: rows.len(),
                });
            }
            for row in rows {
                if row.len() != ns {
                    return Err(CoreError::Dimension {
                        context: "state row length",
                        expected: ns,
                        got: row.len(),
                    });
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn joint_marginal_mixes_over_u() {
        let ens = InputEnsemble::new(
            Pmf::new(vec![0.5, 0.5]).unwrap(),
            vec![
                Pmf::point_mass(2, 0).unwrap(),
                Pmf::point_mass(2, 1).unwrap(),
            ],
            vec![
                Pmf::point_mass(2, 1).unwrap(),
                Pmf::point_mass(2, 0).unwrap(),
            ],
        )
        .unwrap();
        // Half the time (x1,x2)=(0,1), half the time (1,0).
        assert_eq!(ens.joint_input_marginal(), vec![0.0, 0.5, 0.5, 0.0]);
        assert_eq!(ens.marginal_x1(), vec![0.5, 0.5]);
    }

    #[test]
    fn expected_costs_use_marginals() {
        let ens = InputEnsemble::singleton(
            Pmf::new(vec![0.75, 0.25]).unwrap(),
            Pmf::new(vec![0.5, 0.5]).unwrap(),
        );
        let (c1, c2) = ens
            .expected_input_costs(&[0.0, 1.0], &[0.0, 2.0])
            .unwrap();
        assert!((c1 - 0.25).abs() < 1e-15);
        assert!((c2 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn mismatched_row_counts_rejected() {
        let err = InputEnsemble::new(
            Pmf::uniform(2).unwrap(),
            vec![Pmf::uniform(2).unwrap()],
            vec![Pmf::uniform(2).unwrap(), Pmf::uniform(2).unwrap()],
        )
        .unwrap_err();
        assert!(matches!(err, CoreError::Dimension { .. }));
    }

    #[test]
    fn state_law_dimension_checks() {
        let law = StateLaw::PerU(vec![Pmf::uniform(3).unwrap(), Pmf::uniform(3).unwrap()]);
        assert!(law.check_dims(2, 3).is_ok());
        assert!(law.check_dims(3, 3).is_err());
        assert!(law.check_dims(2, 2).is_err());
        let shared = StateLaw::Unconditional(Pmf::uniform(3).unwrap());
        assert!(shared.check_dims(7, 3).is_ok());
    }
}
