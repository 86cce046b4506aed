use crate::BuildError;

/// A closed-form reference value with the parameters it was evaluated at.
/// `value` is finite except where a quantity is genuinely unbounded.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub quantity: &'static str,
    pub value: f64,
    pub params: Vec<(&'static str, f64)>,
}

/// Binary entropy in bits, with `h(0) = h(1) = 0`.
pub fn binary_entropy(t: f64) -> Result<f64, BuildError> {
    if !(0.0..=1.0).contains(&t) {
        return Err(BuildError::OutOfUnitInterval { name: "t", value: t });
    }
    if t == 0.0 || t == 1.0 {
        return Ok(0.0);
    }
    Ok(-t * t.log2() - (1.0 - t) * (1.0 - t).log2())
}

/// Probability that a Bernoulli(`a`) and an independent Bernoulli(`b`)
/// disagree: `(1-a) b + a (1-b)`. The flip probability of two binary
/// symmetric links in series.
pub fn convolve_prob(a: f64, b: f64) -> Result<f64, BuildError> {
    for (name, value) in [("a", a), ("b", b)] {
        if !(0.0..=1.0).contains(&value) {
            return Err(BuildError::OutOfUnitInterval { name, value });
        }
    }
    Ok((1.0 - a) * b + a * (1.0 - b))
}

fn omega(gamma: f64) -> f64 {
    gamma.min(0.5)
}

/// Jamming-cost thresholds `(L, L1, L2)` of the two-link binary channel from
/// [`crate::bsmac_channel`], as functions of the input constraints:
/// `L = omega1 + omega2`, `Lk = omegak`, with `omegak = min(gammak, 1/2)`.
pub fn bsmac_thresholds(gamma1: f64, gamma2: f64) -> [OracleResult; 3] {
    let (o1, o2) = (omega(gamma1), omega(gamma2));
    let params = vec![("gamma1", gamma1), ("gamma2", gamma2)];
    [
        OracleResult {
            quantity: "threshold_joint",
            value: o1 + o2,
            params: params.clone(),
        },
        OracleResult {
            quantity: "threshold_sender1",
            value: o1,
            params: params.clone(),
        },
        OracleResult {
            quantity: "threshold_sender2",
            value: o2,
            params,
        },
    ]
}

/// Corner rates of the same channel's rate region:
/// `Rk = h(omegak * lam) - h(lam)` with `lam = min(lambda, 1/2)` and `*`
/// the binary convolution. Zero when the constraint saturates the link.
pub fn bsmac_corner_rates(gamma1: f64, gamma2: f64, lambda: f64) -> [OracleResult; 2] {
    let lam = lambda.min(0.5);
    let params = vec![("gamma1", gamma1), ("gamma2", gamma2), ("lambda", lambda)];
    let rate = |g: f64| {
        let mixed = convolve_prob(omega(g), lam).expect("arguments clamped to [0, 1]");
        (binary_entropy(mixed).unwrap() - binary_entropy(lam).unwrap()).max(0.0)
    };
    [
        OracleResult {
            quantity: "corner_rate1",
            value: rate(gamma1),
            params: params.clone(),
        },
        OracleResult {
            quantity: "corner_rate2",
            value: rate(gamma2),
            params,
        },
    ]
}

/// Corner rates of the power-constrained additive-noise channel:
/// `Rk = (1/2) log2(1 + gammak / (lambda + sigma2))`.
pub fn gaussian_corner_rates(
    gamma1: f64,
    gamma2: f64,
    lambda: f64,
    sigma2: f64,
) -> [OracleResult; 2] {
    let params = vec![
        ("gamma1", gamma1),
        ("gamma2", gamma2),
        ("lambda", lambda),
        ("sigma2", sigma2),
    ];
    let rate = |g: f64| 0.5 * (1.0 + g / (lambda + sigma2)).log2();
    [
        OracleResult {
            quantity: "corner_rate1",
            value: rate(gamma1),
            params: params.clone(),
        },
        OracleResult {
            quantity: "corner_rate2",
            value: rate(gamma2),
            params,
        },
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entropy_endpoints_and_peak() {
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(0.5).unwrap(), 1.0);
        // Frozen reference value, also used by the region tests.
        assert!((binary_entropy(0.1).unwrap() - 0.46899559358928117).abs() < 1e-15);
        assert!(binary_entropy(-0.01).is_err());
        assert!(binary_entropy(1.01).is_err());
    }

    #[test]
    fn convolution_is_symmetric_with_absorbing_half() {
        assert_eq!(convolve_prob(0.5, 0.1).unwrap(), 0.5);
        assert_eq!(convolve_prob(0.1, 0.5).unwrap(), 0.5);
        assert_eq!(convolve_prob(0.0, 0.3).unwrap(), 0.3);
        let ab = convolve_prob(0.2, 0.3).unwrap();
        let ba = convolve_prob(0.3, 0.2).unwrap();
        assert!((ab - ba).abs() < 1e-15);
        assert!((ab - (0.8 * 0.3 + 0.2 * 0.7)).abs() < 1e-15);
        assert!(convolve_prob(1.5, 0.0).is_err());
    }

    #[test]
    fn thresholds_cap_at_one_half_per_sender() {
        let [l, l1, l2] = bsmac_thresholds(0.3, 2.0);
        assert_eq!(l1.value, 0.3);
        assert_eq!(l2.value, 0.5);
        assert_eq!(l.value, 0.8);
    }

    #[test]
    fn corner_rates_vanish_at_saturating_state_constraint() {
        let [r1, r2] = bsmac_corner_rates(1.0, 1.0, 0.5);
        assert_eq!(r1.value, 0.0);
        assert_eq!(r2.value, 0.0);

        let [r1, _] = bsmac_corner_rates(1.0, 1.0, 0.1);
        // h(0.5 * 0.1) - h(0.1) = 1 - h(0.1).
        assert!((r1.value - 0.5310044064107188).abs() < 1e-12);
    }

    #[test]
    fn gaussian_corner_matches_log_form() {
        let [r1, r2] = gaussian_corner_rates(1.0, 1.0, 0.5, 0.5);
        assert!((r1.value - 0.5).abs() < 1e-15);
        assert!((r2.value - 0.5).abs() < 1e-15);
    }
}
