use crate::{ChannelSpec, CoreError, InputEnsemble, Pmf, StateLaw};

/// Conditional mutual informations of a channel under an input ensemble and
/// state law, in bits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InfoTriple {
    /// `I(X1; Y | X2, U)`
    pub i1: f64,
    /// `I(X2; Y | X1, U)`
    pub i2: f64,
    /// `I(X1, X2; Y | U)`
    pub isum: f64,
}

/// Computes `I(X1;Y|X2,U)`, `I(X2;Y|X1,U)`, and `I(X1,X2;Y|U)` in bits for
/// the joint law `P_U(u) P(x1|u) P(x2|u) q(s|u) W(y|x1,x2,s)`.
///
/// All three share the term `H(Y|X1,X2,U)`, so the chain identity
/// `isum = i1 + I(X2;Y|U)` holds by construction up to rounding.
pub fn mutual_informations(
    spec: &ChannelSpec,
    ensemble: &InputEnsemble,
    law: &StateLaw,
) -> Result<InfoTriple, CoreError> {
    let (nx1, nx2, ns, ny) = spec.sizes();
    if ensemble.nx1() != nx1 {
        return Err(CoreError::Dimension {
            context: "first input alphabet",
            expected: nx1,
            got: ensemble.nx1(),
        });
    }
    if ensemble.nx2() != nx2 {
        return Err(CoreError::Dimension {
            context: "second input alphabet",
            expected: nx2,
            got: ensemble.nx2(),
        });
    }
    law.check_dims(ensemble.nu(), ns)?;

    let nu = ensemble.nu();
    // Joint mass over (u, x1, x2, y) with the state summed out.
    let mut a = vec![0.0; nu * nx1 * nx2 * ny];
    for u in 0..nu {
        let pu = ensemble.pu().get(u);
        if pu == 0.0 {
            continue;
        }
        let q = law.at(u);
        for x1 in 0..nx1 {
            let p1 = pu * ensemble.px1(u).get(x1);
            if p1 == 0.0 {
                continue;
            }
            for x2 in 0..nx2 {
                let p12 = p1 * ensemble.px2(u).get(x2);
                if p12 == 0.0 {
                    continue;
                }
                let out = &mut a[((u * nx1 + x1) * nx2 + x2) * ny..];
                for s in 0..ns {
                    let mass = p12 * q.get(s);
                    if mass == 0.0 {
                        continue;
                    }
                    for (y, &w) in spec.row(x1, x2, s).iter().enumerate() {
                        out[y] += mass * w;
                    }
                }
            }
        }
    }

    // Marginals over (u, x2, y), (u, x1, y), and (u, y).
    let mut b = vec![0.0; nu * nx2 * ny];
    let mut c = vec![0.0; nu * nx1 * ny];
    let mut d = vec![0.0; nu * ny];
    for u in 0..nu {
        for x1 in 0..nx1 {
            for x2 in 0..nx2 {
                let row = &a[((u * nx1 + x1) * nx2 + x2) * ny..][..ny];
                for y in 0..ny {
                    let v = row[y];
                    b[(u * nx2 + x2) * ny + y] += v;
                    c[(u * nx1 + x1) * ny + y] += v;
                    d[u * ny + y] += v;
                }
            }
        }
    }

    let h_y_given_x1x2u = cond_entropy_bits(&a, ny);
    let h_y_given_x2u = cond_entropy_bits(&b, ny);
    let h_y_given_x1u = cond_entropy_bits(&c, ny);
    let h_y_given_u = cond_entropy_bits(&d, ny);

    Ok(InfoTriple {
        i1: (h_y_given_x2u - h_y_given_x1x2u).max(0.0),
        i2: (h_y_given_x1u - h_y_given_x1x2u).max(0.0),
        isum: (h_y_given_u - h_y_given_x1x2u).max(0.0),
    })
}

/// `H(Y|Z)` in bits from a flat joint table laid out as consecutive rows of
/// length `ny`, one per value of `z`. Zero-mass entries contribute nothing.
fn cond_entropy_bits(joint: &[f64], ny: usize) -> f64 {
    let mut h = 0.0;
    for row in joint.chunks_exact(ny) {
        let m: f64 = row.iter().sum();
        if m <= 0.0 {
            continue;
        }
        let log_m = m.log2();
        for &e in row {
            if e > 0.0 {
                h -= e * (e.log2() - log_m);
            }
        }
    }
    h.max(0.0)
}

/// Expected cost `sum_i p(i) cost(i)`.
pub fn expected_cost(p: &Pmf, cost: &[f64]) -> Result<f64, CoreError> {
    if cost.len() != p.len() {
        return Err(CoreError::Dimension {
            context: "cost vector length",
            expected: p.len(),
            got: cost.len(),
        });
    }
    Ok(p.iter().zip(cost).map(|(pi, ci)| pi * ci).sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    // Clean binary adder: Y = X1 + X2, state does nothing (ns = 1, ny = 3).
    fn adder_no_state() -> ChannelSpec {
        let mut w = vec![0.0; 2 * 2 * 1 * 3];
        for x1 in 0..2 {
            for x2 in 0..2 {
                w[(x1 * 2 + x2) * 3 + (x1 + x2)] = 1.0;
            }
        }
        ChannelSpec::new(2, 2, 1, 3, w, None).unwrap()
    }

    #[test]
    fn adder_with_uniform_inputs() {
        let spec = adder_no_state();
        let ens = InputEnsemble::singleton(Pmf::uniform(2).unwrap(), Pmf::uniform(2).unwrap());
        let law = StateLaw::Unconditional(Pmf::uniform(1).unwrap());
        let info = mutual_informations(&spec, &ens, &law).unwrap();
        // Given X2, the output reveals X1 exactly: one bit each.
        assert!((info.i1 - 1.0).abs() < 1e-12);
        assert!((info.i2 - 1.0).abs() < 1e-12);
        // H(Y) = entropy of (1/4, 1/2, 1/4) = 1.5 bits and H(Y|X1,X2) = 0.
        assert!((info.isum - 1.5).abs() < 1e-12);
    }

    #[test]
    fn chain_identity_is_structural() {
        let spec = adder_no_state();
        let ens = InputEnsemble::singleton(
            Pmf::new(vec![0.3, 0.7]).unwrap(),
            Pmf::new(vec![0.6, 0.4]).unwrap(),
        );
        let law = StateLaw::Unconditional(Pmf::uniform(1).unwrap());
        let info = mutual_informations(&spec, &ens, &law).unwrap();
        // isum - i1 = I(X2;Y|U) must be nonnegative, and likewise for i2.
        assert!(info.isum + 1e-12 >= info.i1);
        assert!(info.isum + 1e-12 >= info.i2);
    }

    #[test]
    fn independent_output_gives_zero_information() {
        // W(y|x1,x2,s) = 1/2 regardless of inputs.
        let spec = ChannelSpec::new(2, 2, 2, 2, vec![0.5; 16], None).unwrap();
        let ens = InputEnsemble::singleton(Pmf::uniform(2).unwrap(), Pmf::uniform(2).unwrap());
        let law = StateLaw::Unconditional(Pmf::new(vec![0.9, 0.1]).unwrap());
        let info = mutual_informations(&spec, &ens, &law).unwrap();
        assert!(info.i1 < 1e-12);
        assert!(info.i2 < 1e-12);
        assert!(info.isum < 1e-12);
    }

    #[test]
    fn expected_cost_checks_length() {
        let p = Pmf::new(vec![0.25, 0.75]).unwrap();
        assert!((expected_cost(&p, &[0.0, 1.0]).unwrap() - 0.75).abs() < 1e-15);
        assert!(expected_cost(&p, &[0.0, 1.0, 2.0]).is_err());
    }
}
