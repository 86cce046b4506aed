//! Cross-checks `mutual_informations` against a direct computation on the
//! explicit five-way joint law, built and reduced by an independent code path.

use avmac_core::{
    averaged_channel, mutual_informations, ChannelSpec, InputEnsemble, Pmf, StateLaw,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

/// Full joint over (u, x1, x2, s, y), flattened.
struct Joint {
    nu: usize,
    n1: usize,
    n2: usize,
    ns: usize,
    ny: usize,
    p: Vec<f64>,
}

fn build_joint(spec: &ChannelSpec, ens: &InputEnsemble, law: &StateLaw) -> Joint {
    let (n1, n2, ns, ny) = spec.sizes();
    let nu = ens.nu();
    let mut p = vec![0.0; nu * n1 * n2 * ns * ny];
    for u in 0..nu {
        for x1 in 0..n1 {
            for x2 in 0..n2 {
                for s in 0..ns {
                    let base = ens.pu().get(u)
                        * ens.px1(u).get(x1)
                        * ens.px2(u).get(x2)
                        * law.at(u).get(s);
                    for y in 0..ny {
                        p[(((u * n1 + x1) * n2 + x2) * ns + s) * ny + y] =
                            base * spec.w(x1, x2, s, y);
                    }
                }
            }
        }
    }
    Joint { nu, n1, n2, ns, ny, p }
}

impl Joint {
    fn get(&self, u: usize, x1: usize, x2: usize, s: usize, y: usize) -> f64 {
        self.p[(((u * self.n1 + x1) * self.n2 + x2) * self.ns + s) * self.ny + y]
    }
}

/// `I(A;B|C)` in bits from an explicit table p(c,a,b), via the KL form
/// `sum p(c,a,b) log2( p(c,a,b) p(c) / (p(c,a) p(c,b)) )`.
fn mi_from_table(p: &[f64], nc: usize, na: usize, nb: usize) -> f64 {
    let mut pc = vec![0.0; nc];
    let mut pca = vec![0.0; nc * na];
    let mut pcb = vec![0.0; nc * nb];
    for c in 0..nc {
        for a in 0..na {
            for b in 0..nb {
                let v = p[(c * na + a) * nb + b];
                pc[c] += v;
                pca[c * na + a] += v;
                pcb[c * nb + b] += v;
            }
        }
    }
    let mut total = 0.0;
    for c in 0..nc {
        for a in 0..na {
            for b in 0..nb {
                let v = p[(c * na + a) * nb + b];
                if v > 0.0 {
                    total += v * ((v * pc[c]) / (pca[c * na + a] * pcb[c * nb + b])).log2();
                }
            }
        }
    }
    total
}

struct OracleInfos {
    i1: f64,
    i2: f64,
    isum: f64,
    i2_given_u: f64,
}

fn oracle(joint: &Joint) -> OracleInfos {
    let (nu, n1, n2, ny) = (joint.nu, joint.n1, joint.n2, joint.ny);

    // I(X1;Y | X2,U): c = (u,x2), a = x1, b = y.
    let mut t1 = vec![0.0; nu * n2 * n1 * ny];
    // I(X2;Y | X1,U): c = (u,x1), a = x2, b = y.
    let mut t2 = vec![0.0; nu * n1 * n2 * ny];
    // I(X1,X2;Y | U): c = u, a = (x1,x2), b = y.
    let mut ts = vec![0.0; nu * n1 * n2 * ny];
    // I(X2;Y | U): c = u, a = x2, b = y.
    let mut tu = vec![0.0; nu * n2 * ny];

    for u in 0..nu {
        for x1 in 0..n1 {
            for x2 in 0..n2 {
                for s in 0..joint.ns {
                    for y in 0..ny {
                        let v = joint.get(u, x1, x2, s, y);
                        t1[(((u * n2 + x2) * n1) + x1) * ny + y] += v;
                        t2[(((u * n1 + x1) * n2) + x2) * ny + y] += v;
                        ts[((u * (n1 * n2)) + x1 * n2 + x2) * ny + y] += v;
                        tu[(u * n2 + x2) * ny + y] += v;
                    }
                }
            }
        }
    }

    OracleInfos {
        i1: mi_from_table(&t1, nu * n2, n1, ny),
        i2: mi_from_table(&t2, nu * n1, n2, ny),
        isum: mi_from_table(&ts, nu, n1 * n2, ny),
        i2_given_u: mi_from_table(&tu, nu, n2, ny),
    }
}

fn random_pmf(rng: &mut ChaCha12Rng, n: usize) -> Pmf {
    let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.01..1.0)).collect();
    let sum: f64 = raw.iter().sum();
    Pmf::new(raw.iter().map(|v| v / sum).collect()).unwrap()
}

fn random_spec(rng: &mut ChaCha12Rng, n1: usize, n2: usize, ns: usize, ny: usize) -> ChannelSpec {
    let mut w = Vec::with_capacity(n1 * n2 * ns * ny);
    for _ in 0..n1 * n2 * ns {
        let row = random_pmf(rng, ny);
        w.extend_from_slice(row.as_slice());
    }
    ChannelSpec::new(n1, n2, ns, ny, w, None).unwrap()
}

fn random_ensemble(rng: &mut ChaCha12Rng, nu: usize, n1: usize, n2: usize) -> InputEnsemble {
    InputEnsemble::new(
        random_pmf(rng, nu),
        (0..nu).map(|_| random_pmf(rng, n1)).collect(),
        (0..nu).map(|_| random_pmf(rng, n2)).collect(),
    )
    .unwrap()
}

#[test]
fn matches_oracle_on_random_channels() {
    let mut rng = ChaCha12Rng::seed_from_u64(7);
    for trial in 0..60 {
        let n1 = rng.gen_range(2..4);
        let n2 = rng.gen_range(2..4);
        let ns = rng.gen_range(1..4);
        let ny = rng.gen_range(2..5);
        let nu = rng.gen_range(1..4);
        let spec = random_spec(&mut rng, n1, n2, ns, ny);
        let ens = random_ensemble(&mut rng, nu, n1, n2);
        let law = if rng.gen_bool(0.5) {
            StateLaw::Unconditional(random_pmf(&mut rng, ns))
        } else {
            StateLaw::PerU((0..nu).map(|_| random_pmf(&mut rng, ns)).collect())
        };

        let got = mutual_informations(&spec, &ens, &law).unwrap();
        let want = oracle(&build_joint(&spec, &ens, &law));
        assert!(
            (got.i1 - want.i1).abs() < 1e-9,
            "trial {trial}: i1 {} vs oracle {}",
            got.i1,
            want.i1
        );
        assert!(
            (got.i2 - want.i2).abs() < 1e-9,
            "trial {trial}: i2 {} vs oracle {}",
            got.i2,
            want.i2
        );
        assert!(
            (got.isum - want.isum).abs() < 1e-9,
            "trial {trial}: isum {} vs oracle {}",
            got.isum,
            want.isum
        );
        // Chain rule: I(X1,X2;Y|U) = I(X2;Y|U) + I(X1;Y|X2,U).
        assert!(
            (got.isum - (want.i2_given_u + got.i1)).abs() < 1e-9,
            "trial {trial}: chain identity violated"
        );
    }
}

#[test]
fn deterministic_channel_saturates_output_entropy() {
    // Y = X1 XOR X2 XOR S with S fixed to 0: I1 = I2 = Isum = 1 bit at
    // uniform inputs.
    let mut w = vec![0.0; 2 * 2 * 2 * 2];
    for x1 in 0..2usize {
        for x2 in 0..2usize {
            for s in 0..2usize {
                let y = x1 ^ x2 ^ s;
                w[((x1 * 2 + x2) * 2 + s) * 2 + y] = 1.0;
            }
        }
    }
    let spec = ChannelSpec::new(2, 2, 2, 2, w, None).unwrap();
    let ens = InputEnsemble::singleton(Pmf::uniform(2).unwrap(), Pmf::uniform(2).unwrap());
    let law = StateLaw::Unconditional(Pmf::point_mass(2, 0).unwrap());
    let info = mutual_informations(&spec, &ens, &law).unwrap();
    assert!((info.i1 - 1.0).abs() < 1e-12);
    assert!((info.i2 - 1.0).abs() < 1e-12);
    assert!((info.isum - 1.0).abs() < 1e-12);

    // A uniform state turns the same channel into pure noise.
    let noisy = StateLaw::Unconditional(Pmf::uniform(2).unwrap());
    let info = mutual_informations(&spec, &ens, &noisy).unwrap();
    assert!(info.isum < 1e-12);
}

#[test]
fn averaging_commutes_with_mixing_state_laws() {
    let mut rng = ChaCha12Rng::seed_from_u64(11);
    for _ in 0..20 {
        let spec = random_spec(&mut rng, 2, 2, 3, 3);
        let qa = random_pmf(&mut rng, 3);
        let qb = random_pmf(&mut rng, 3);
        let alpha = rng.gen_range(0.0..1.0);
        let mixed = Pmf::new(
            qa.iter()
                .zip(qb.iter())
                .map(|(a, b)| alpha * a + (1.0 - alpha) * b)
                .collect(),
        )
        .unwrap();

        let va = averaged_channel(&spec, &qa).unwrap();
        let vb = averaged_channel(&spec, &qb).unwrap();
        let vm = averaged_channel(&spec, &mixed).unwrap();
        for x1 in 0..2 {
            for x2 in 0..2 {
                for y in 0..3 {
                    let lin = alpha * va.v(x1, x2, y) + (1.0 - alpha) * vb.v(x1, x2, y);
                    assert!((vm.v(x1, x2, y) - lin).abs() < 1e-12);
                }
            }
        }
    }
}

#[test]
fn small_tensor_perturbations_move_information_continuously() {
    let mut rng = ChaCha12Rng::seed_from_u64(23);
    let spec = random_spec(&mut rng, 2, 2, 2, 3);
    let ens = random_ensemble(&mut rng, 2, 2, 2);
    let law = StateLaw::Unconditional(random_pmf(&mut rng, 2));
    let base = mutual_informations(&spec, &ens, &law).unwrap();

    let (n1, n2, ns, ny) = spec.sizes();
    let mut w = spec.tensor().to_vec();
    for v in w.iter_mut() {
        *v = (*v + rng.gen_range(0.0..1e-6)).min(1.0);
    }
    // Renormalize each perturbed row exactly.
    for row in w.chunks_exact_mut(ny) {
        let sum: f64 = row.iter().sum();
        for v in row.iter_mut() {
            *v /= sum;
        }
    }
    let perturbed = ChannelSpec::new(n1, n2, ns, ny, w, None).unwrap();
    let moved = mutual_informations(&perturbed, &ens, &law).unwrap();
    assert!((base.i1 - moved.i1).abs() < 1e-4);
    assert!((base.i2 - moved.i2).abs() < 1e-4);
    assert!((base.isum - moved.isum).abs() < 1e-4);
}
