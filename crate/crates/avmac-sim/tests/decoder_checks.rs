//! Decoder checks: both rules on a noiseless channel, forced ambiguity
//! from identical codewords, validation of thresholds and caps, and the
//! sanity bar against a budget-feasible memoryless attack when every
//! symmetrization costs more than the jammer can pay.

use avmac_core::{ChannelSpec, ConstraintSpec, CostModel, InputEnsemble, Pmf};
use avmac_sim::{
    attack_error_exact, build_codebook, decode, Codebook, DecodeOutcome, DecoderSpec,
    JammerStrategy, SimError,
};
use avmac_symmetry::{min_symmetrizing_cost, SymKind};

/// Noiseless single-state channel with `Y = (X1, X2)`.
fn identity_channel() -> (ChannelSpec, CostModel, ConstraintSpec) {
    let mut w = vec![0.0; 2 * 2 * 1 * 4];
    for x1 in 0..2usize {
        for x2 in 0..2usize {
            w[(x1 * 2 + x2) * 4 + (2 * x1 + x2)] = 1.0;
        }
    }
    (
        ChannelSpec::new(2, 2, 1, 4, w, None).unwrap(),
        CostModel::new(vec![0.0, 1.0], vec![0.0, 1.0], vec![0.0]),
        ConstraintSpec::new(1.0, 1.0, 0.0),
    )
}

/// Binary channel `Y = X1 xor X2 xor S` with unit input and state costs.
fn xor_channel() -> (ChannelSpec, CostModel, ConstraintSpec) {
    let mut w = vec![0.0; 2 * 2 * 2 * 2];
    for x1 in 0..2usize {
        for x2 in 0..2usize {
            for s in 0..2usize {
                w[((x1 * 2 + x2) * 2 + s) * 2 + (x1 ^ x2 ^ s)] = 1.0;
            }
        }
    }
    (
        ChannelSpec::new(2, 2, 2, 2, w, None).unwrap(),
        CostModel::new(vec![0.0, 1.0], vec![0.0, 1.0], vec![0.0, 1.0]),
        ConstraintSpec::new(1.0, 1.0, 0.25),
    )
}

fn uniform_ens() -> InputEnsemble {
    InputEnsemble::singleton(Pmf::uniform(2).unwrap(), Pmf::uniform(2).unwrap())
}

fn distinct(words: &[Vec<usize>]) -> bool {
    words
        .iter()
        .enumerate()
        .all(|(i, w)| words[..i].iter().all(|v| v != w))
}

fn identity_output(book: &Codebook, a: usize, b: usize) -> Vec<usize> {
    (0..book.n())
        .map(|i| 2 * book.word1(a)[i] + book.word2(b)[i])
        .collect()
}

#[test]
fn noiseless_channel_decodes_every_pair() {
    let (spec, costs, cons) = identity_channel();
    let book = build_codebook(&spec, &costs, &cons, 6, 2, 2, &uniform_ens(), 1).unwrap();
    assert!(distinct(book.words1()) && distinct(book.words2()));

    let ml = DecoderSpec::MaxLikelihoodWorstQ(Pmf::point_mass(1, 0).unwrap());
    // Empirical dependence between two fixed binary words never exceeds
    // ln 2 nats, so a 2.0 threshold always accepts the true explanation,
    // while any wrong pair predicts an impossible output letter.
    let typed = DecoderSpec::type_decoder(2.0, 2.0, 2.0);
    for a in 0..2 {
        for b in 0..2 {
            let y = identity_output(&book, a, b);
            for decoder in [&ml, &typed] {
                let out = decode(decoder, &spec, &costs, &cons, &book, &y).unwrap();
                assert_eq!(out, DecodeOutcome::Decoded(a, b));
            }
        }
    }
}

#[test]
fn identical_codewords_force_ambiguity() {
    let (spec, costs, cons) = identity_channel();
    // Sender 1 is silenced onto the all-zero word, so its two messages are
    // indistinguishable by construction.
    let ens = InputEnsemble::singleton(Pmf::point_mass(2, 0).unwrap(), Pmf::uniform(2).unwrap());
    let book = build_codebook(&spec, &costs, &cons, 6, 2, 2, &ens, 2).unwrap();
    assert_eq!(book.word1(0), book.word1(1));
    assert!(distinct(book.words2()));

    let typed = DecoderSpec::type_decoder(2.0, 2.0, 2.0);
    let ml = DecoderSpec::MaxLikelihoodWorstQ(Pmf::point_mass(1, 0).unwrap());
    for b in 0..2 {
        let y = identity_output(&book, 0, b);
        assert_eq!(
            decode(&typed, &spec, &costs, &cons, &book, &y).unwrap(),
            DecodeOutcome::Ambiguous
        );
        // Likelihood ties break to the smallest first-sender index.
        assert_eq!(
            decode(&ml, &spec, &costs, &cons, &book, &y).unwrap(),
            DecodeOutcome::Decoded(0, b)
        );
    }
}

#[test]
fn feasible_iid_attack_stays_under_the_sanity_bar() {
    let (spec, costs, cons) = xor_channel();
    // Precondition of the bar: every symmetrization costs 0.5, twice the
    // state budget, so the jammer cannot force the quarter floor.
    for (kind, p) in [
        (SymKind::Joint, vec![0.25; 4]),
        (SymKind::Sender1, vec![0.5, 0.5]),
        (SymKind::Sender2, vec![0.5, 0.5]),
    ] {
        let value = min_symmetrizing_cost(&spec, &costs, kind, &p)
            .unwrap()
            .value
            .as_finite()
            .expect("the parity channel is symmetrizable at some cost");
        assert!((value - 0.5).abs() < 1e-9, "{kind:?} costs {value}");
        assert!(value > cons.lambda);
    }

    let book = build_codebook(&spec, &costs, &cons, 8, 2, 2, &uniform_ens(), 4).unwrap();
    assert!(distinct(book.words1()) && distinct(book.words2()));
    // Thresholds sized for blocklength 8: the true transmission's
    // divergence concentrates near 4/(2n) = 0.25 nats, the impostor
    // information near 0.5 nats; the defaults are far too strict here.
    let typed = DecoderSpec::type_decoder(0.9, 1.2, 1.2);
    for p_one in [0.05, 0.1, 0.15] {
        let q = Pmf::new(vec![1.0 - p_one, p_one]).unwrap();
        let strategy = JammerStrategy::IIDState(q);
        let report = attack_error_exact(&spec, &costs, &cons, &book, &typed, &strategy).unwrap();
        assert!(
            report.error < 0.3,
            "exact error {} at flip rate {p_one}",
            report.error
        );
    }
}

#[test]
fn thresholds_and_caps_are_validated() {
    let (spec, costs, cons) = xor_channel();
    let book = build_codebook(&spec, &costs, &cons, 8, 2, 2, &uniform_ens(), 4).unwrap();
    let y = vec![0; 8];

    let zero_eta = DecoderSpec::type_decoder(0.0, 1.0, 1.0);
    assert!(matches!(
        decode(&zero_eta, &spec, &costs, &cons, &book, &y),
        Err(SimError::Threshold { which: "eta", .. })
    ));
    let negative = DecoderSpec::type_decoder(1.0, 1.0, -0.5);
    assert!(matches!(
        decode(&negative, &spec, &costs, &cons, &book, &y),
        Err(SimError::Threshold { which: "eta2", .. })
    ));

    let tiny_cap = DecoderSpec::TypeDecoder {
        eta: 1.0,
        eta1: 1.0,
        eta2: 1.0,
        state_bits_cap: 5,
    };
    assert!(matches!(
        decode(&tiny_cap, &spec, &costs, &cons, &book, &y),
        Err(SimError::StateCap { cap: 5, .. })
    ));

    let wrong_q = DecoderSpec::MaxLikelihoodWorstQ(Pmf::uniform(3).unwrap());
    assert!(matches!(
        decode(&wrong_q, &spec, &costs, &cons, &book, &y),
        Err(SimError::Dimension { .. })
    ));

    let ok = DecoderSpec::MaxLikelihoodWorstQ(Pmf::uniform(2).unwrap());
    assert!(matches!(
        decode(&ok, &spec, &costs, &cons, &book, &[0; 5]),
        Err(SimError::Dimension { .. })
    ));
    assert!(matches!(
        decode(&ok, &spec, &costs, &cons, &book, &[2; 8]),
        Err(SimError::Dimension { .. })
    ));
}
