use crate::BuildError;
use avmac_core::textfmt::ChannelDocument;
use avmac_core::{ChannelSpec, ConstraintSpec, CostModel};
use statrs::distribution::{ContinuousCDF, Normal};

/// Noiseless adder `Y = X1 + X2 + S` over binary inputs with `S` ranging over
/// `{0, .., state_size-1}` and per-letter costs `g(x) = x`, `l(s) = s`.
///
/// Default constraints are the maximum costs, leaving the channel
/// unconstrained. With three states the adversary can imitate either sender
/// or their sum; with two states the sum imitation no longer fits in the
/// state alphabet.
pub fn adder_channel(state_size: usize) -> Result<ChannelDocument, BuildError> {
    if !(2..=3).contains(&state_size) {
        return Err(BuildError::UnsupportedStateSize(state_size));
    }
    let ns = state_size;
    let ny = ns + 2;
    let mut w = vec![0.0; 2 * 2 * ns * ny];
    for x1 in 0..2 {
        for x2 in 0..2 {
            for s in 0..ns {
                w[((x1 * 2 + x2) * ns + s) * ny + (x1 + x2 + s)] = 1.0;
            }
        }
    }
    let l: Vec<f64> = (0..ns).map(|s| s as f64).collect();
    let lambda = l[ns - 1];
    Ok(ChannelDocument {
        spec: ChannelSpec::new(2, 2, ns, ny, w, Some(format!("adder{state_size}")))
            .expect("valid by construction"),
        costs: CostModel::new(vec![0.0, 1.0], vec![0.0, 1.0], l),
        constraints: ConstraintSpec::new(1.0, 1.0, lambda),
    })
}

/// Binary channel whose state can swap the roles of the two senders:
/// under `s = 0` the output favors agreement of the inputs, under `s = 1`
/// disagreement, with the mixed input pairs fully noisy.
///
/// The channel is symmetrizable jointly but not through either single
/// sender. Hamming costs, default constraints at the maxima.
pub fn ahlswede_cai_channel() -> ChannelDocument {
    // Rows indexed (x1, x2, s), outputs (y=0, y=1).
    let rows: [[f64; 2]; 8] = [
        [1.0, 0.0], // (0,0,0)
        [0.5, 0.5], // (0,0,1)
        [0.5, 0.5], // (0,1,0)
        [0.0, 1.0], // (0,1,1)
        [0.5, 0.5], // (1,0,0)
        [0.0, 1.0], // (1,0,1)
        [1.0, 0.0], // (1,1,0)
        [0.5, 0.5], // (1,1,1)
    ];
    let w: Vec<f64> = rows.iter().flatten().copied().collect();
    ChannelDocument {
        spec: ChannelSpec::new(2, 2, 2, 2, w, Some("ahlswede-cai".into()))
            .expect("valid by construction"),
        costs: CostModel::new(vec![0.0, 1.0], vec![0.0, 1.0], vec![0.0, 1.0]),
        constraints: ConstraintSpec::new(1.0, 1.0, 1.0),
    }
}

/// Pair of independent binary additive-state links: `Y1 = X1 xor S1`,
/// `Y2 = X2 xor S2`, with the state pair `(s1, s2)` and output pair
/// `(y1, y2)` flattened row-major as `2*first + second`.
///
/// Costs are Hamming weights, so `l(s) = s1 + s2`. Defaults: input
/// constraints at the maximum, state constraint 0.25.
pub fn bsmac_channel() -> ChannelDocument {
    let (ns, ny) = (4, 4);
    let mut w = vec![0.0; 2 * 2 * ns * ny];
    for x1 in 0..2usize {
        for x2 in 0..2usize {
            for s in 0..ns {
                let (s1, s2) = (s >> 1, s & 1);
                let y = 2 * (x1 ^ s1) + (x2 ^ s2);
                w[((x1 * 2 + x2) * ns + s) * ny + y] = 1.0;
            }
        }
    }
    ChannelDocument {
        spec: ChannelSpec::new(2, 2, ns, ny, w, Some("bsmac".into()))
            .expect("valid by construction"),
        costs: CostModel::new(vec![0.0, 1.0], vec![0.0, 1.0], vec![0.0, 1.0, 1.0, 2.0]),
        constraints: ConstraintSpec::new(1.0, 1.0, 0.25),
    }
}

/// Adder with an erasure switch: `Y = X1 + X2` when `X1 * X2 = 0` and
/// `S = 0`, and the erasure symbol `r` otherwise. Inputs range over
/// `{0, .., r-1}`, the state is binary, outputs over `{0, .., r}`.
///
/// Input costs charge 1 for any nonzero symbol; the state cost is the
/// state itself. Defaults: input constraints 1, state constraint 0.5.
pub fn erasure_adder_channel(r: usize) -> Result<ChannelDocument, BuildError> {
    if r < 2 {
        return Err(BuildError::AlphabetTooSmall(r));
    }
    let ny = r + 1;
    let mut w = vec![0.0; r * r * 2 * ny];
    for x1 in 0..r {
        for x2 in 0..r {
            for s in 0..2 {
                let y = if x1 * x2 == 0 && s == 0 { x1 + x2 } else { r };
                w[((x1 * r + x2) * 2 + s) * ny + y] = 1.0;
            }
        }
    }
    let g: Vec<f64> = (0..r).map(|x| if x == 0 { 0.0 } else { 1.0 }).collect();
    Ok(ChannelDocument {
        spec: ChannelSpec::new(r, r, 2, ny, w, Some(format!("erasure-adder{r}")))
            .expect("valid by construction"),
        costs: CostModel::new(g.clone(), g, vec![0.0, 1.0]),
        constraints: ConstraintSpec::new(1.0, 1.0, 0.5),
    })
}

/// Grid sizes for [`gaussian_discretized`]. Input and state counts must be
/// odd so the grids contain 0 and the cost vectors have a zero entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GaussianGrids {
    pub input_points: usize,
    pub state_points: usize,
    pub output_bins: usize,
}

impl Default for GaussianGrids {
    fn default() -> Self {
        GaussianGrids {
            input_points: 9,
            state_points: 9,
            output_bins: 33,
        }
    }
}

/// Quantized additive-noise channel `Y = X1 + X2 + S + Z`,
/// `Z ~ N(0, sigma2)`, with quadratic costs.
///
/// Sender `k` uses a symmetric grid of `input_points` values on
/// `[-3 sqrt(gammaK), 3 sqrt(gammaK)]`; the state grid covers
/// `[-3 sqrt(lambda), 3 sqrt(lambda)]`. Outputs are `output_bins` equal-width
/// bins spanning every reachable mean plus four noise standard deviations,
/// with the tail mass folded into the edge bins so each row sums to 1.
pub fn gaussian_discretized(
    gamma1: f64,
    gamma2: f64,
    lambda: f64,
    sigma2: f64,
    grids: GaussianGrids,
) -> Result<ChannelDocument, BuildError> {
    for (name, value) in [
        ("gamma1", gamma1),
        ("gamma2", gamma2),
        ("lambda", lambda),
        ("sigma2", sigma2),
    ] {
        if !(value > 0.0) || !value.is_finite() {
            return Err(BuildError::NonPositiveParameter { name, value });
        }
    }
    for (which, got) in [
        ("input", grids.input_points),
        ("state", grids.state_points),
    ] {
        if got < 3 || got % 2 == 0 {
            return Err(BuildError::DegenerateGrid { which, got });
        }
    }
    if grids.output_bins < 3 {
        return Err(BuildError::DegenerateGrid {
            which: "output",
            got: grids.output_bins,
        });
    }

    let x1_grid = symmetric_grid(grids.input_points, 3.0 * gamma1.sqrt());
    let x2_grid = symmetric_grid(grids.input_points, 3.0 * gamma2.sqrt());
    let s_grid = symmetric_grid(grids.state_points, 3.0 * lambda.sqrt());
    let sigma = sigma2.sqrt();
    let c = 3.0 * gamma1.sqrt() + 3.0 * gamma2.sqrt() + 3.0 * lambda.sqrt() + 4.0 * sigma;
    let nb = grids.output_bins;
    // Interior bin edges; the first and last bins absorb the tails.
    let edges: Vec<f64> = (1..nb).map(|j| -c + 2.0 * c * j as f64 / nb as f64).collect();

    let noise = Normal::new(0.0, sigma).expect("positive sigma");
    let (n1, n2, ns) = (x1_grid.len(), x2_grid.len(), s_grid.len());
    let mut w = Vec::with_capacity(n1 * n2 * ns * nb);
    for &v1 in &x1_grid {
        for &v2 in &x2_grid {
            for &vs in &s_grid {
                let mu = v1 + v2 + vs;
                let mut prev = 0.0;
                for &e in &edges {
                    let cdf = noise.cdf(e - mu);
                    w.push(cdf - prev);
                    prev = cdf;
                }
                w.push(1.0 - prev);
            }
        }
    }

    let quad = |grid: &[f64]| grid.iter().map(|v| v * v).collect::<Vec<f64>>();
    Ok(ChannelDocument {
        spec: ChannelSpec::new(n1, n2, ns, nb, w, Some("gaussian".into()))
            .expect("rows sum to 1 by construction"),
        costs: CostModel::new(quad(&x1_grid), quad(&x2_grid), quad(&s_grid)),
        constraints: ConstraintSpec::new(gamma1, gamma2, lambda),
    })
}

/// `n` evenly spaced points on `[-half_width, half_width]`, hitting 0
/// exactly when `n` is odd.
fn symmetric_grid(n: usize, half_width: f64) -> Vec<f64> {
    (0..n)
        .map(|i| half_width * (2 * i as i64 - (n as i64 - 1)) as f64 / (n as f64 - 1.0))
        .collect()
}
