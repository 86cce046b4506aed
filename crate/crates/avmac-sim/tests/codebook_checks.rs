//! Codebook construction checks: constant composition, input-budget
//! audits, time-sharing layout, seed determinism, distinctness frequency,
//! and the unsatisfiable-constraint report.

use avmac_channels::{adder_channel, bsmac_channel};
use avmac_core::{InputEnsemble, Pmf};
use avmac_sim::{build_codebook, scatter, Codebook, PermutationCode, SimError};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

fn uniform_ens() -> InputEnsemble {
    InputEnsemble::singleton(Pmf::uniform(2).unwrap(), Pmf::uniform(2).unwrap())
}

fn weight(word: &[usize]) -> usize {
    word.iter().sum()
}

fn adder3_book(n: usize, m1: usize, m2: usize, seed: u64) -> Codebook {
    let doc = adder_channel(3).unwrap();
    build_codebook(
        &doc.spec,
        &doc.costs,
        &doc.constraints,
        n,
        m1,
        m2,
        &uniform_ens(),
        seed,
    )
    .unwrap()
}

#[test]
fn single_pair_codebook_is_valid() {
    let book = adder3_book(4, 1, 1, 7);
    assert_eq!((book.m1(), book.m2(), book.n()), (1, 1, 4));
    assert_eq!(book.word1(0).len(), 4);
    assert_eq!(book.word2(0).len(), 4);
    assert!(book.cost1()[0] <= 1.0 + 1e-9);
}

#[test]
fn uniform_type_gives_half_weight_words() {
    let doc = bsmac_channel();
    let book = build_codebook(
        &doc.spec,
        &doc.costs,
        &doc.constraints,
        8,
        4,
        4,
        &uniform_ens(),
        3,
    )
    .unwrap();
    for m in 0..4 {
        assert_eq!(weight(book.word1(m)), 4);
        assert_eq!(weight(book.word2(m)), 4);
    }
}

#[test]
fn per_codeword_costs_match_a_recount() {
    let doc = adder_channel(3).unwrap();
    let book = adder3_book(6, 4, 3, 11);
    for m in 0..4 {
        let recount: f64 = book.word1(m).iter().map(|&x| doc.costs.g1[x]).sum::<f64>() / 6.0;
        assert_eq!(book.cost1()[m], recount);
        assert!(recount <= doc.constraints.gamma1 + 1e-9);
    }
    for m in 0..3 {
        let recount: f64 = book.word2(m).iter().map(|&x| doc.costs.g2[x]).sum::<f64>() / 6.0;
        assert_eq!(book.cost2()[m], recount);
        assert!(recount <= doc.constraints.gamma2 + 1e-9);
    }
}

#[test]
fn time_sharing_runs_pin_the_conditional_composition() {
    let doc = adder_channel(3).unwrap();
    // u = 0 forces input letter 0, u = 1 forces letter 1, so the words are
    // fully determined by the time-sharing layout.
    let ens = InputEnsemble::new(
        Pmf::uniform(2).unwrap(),
        vec![Pmf::point_mass(2, 0).unwrap(), Pmf::point_mass(2, 1).unwrap()],
        vec![Pmf::uniform(2).unwrap(), Pmf::uniform(2).unwrap()],
    )
    .unwrap();
    let book = build_codebook(&doc.spec, &doc.costs, &doc.constraints, 6, 2, 2, &ens, 5).unwrap();
    assert_eq!(book.u_seq(), &[0, 0, 0, 1, 1, 1]);
    for m in 0..2 {
        assert_eq!(book.word1(m), &[0, 0, 0, 1, 1, 1]);
        // Odd run length ties the half-half class; the rounding favors the
        // smaller letter, so each run carries exactly one 1.
        let w2 = book.word2(m);
        assert_eq!(weight(&w2[..3]), 1);
        assert_eq!(weight(&w2[3..]), 1);
    }
}

#[test]
fn builds_are_deterministic_in_the_seed() {
    let a = adder3_book(8, 3, 3, 42);
    let b = adder3_book(8, 3, 3, 42);
    assert_eq!(a.u_seq(), b.u_seq());
    assert_eq!(a.words1(), b.words1());
    assert_eq!(a.words2(), b.words2());
    assert_eq!(a.cost1(), b.cost1());

    let c = adder3_book(8, 3, 3, 43);
    assert!(
        a.words1() != c.words1() || a.words2() != c.words2(),
        "seeds 42 and 43 drew identical codebooks"
    );
}

#[test]
fn distinct_codewords_dominate_across_seeds() {
    // Weight-4 words in blocklength 8 are drawn uniformly from a class of
    // 70, so a 4-word codebook is collision-free with probability
    // 69*68*67/70^3 ~ 0.917 per sender, ~ 0.84 for both at once.
    let mut all_distinct = 0;
    for seed in 0..100 {
        let book = adder3_book(8, 4, 4, seed);
        let distinct = |words: &[Vec<usize>]| {
            words
                .iter()
                .enumerate()
                .all(|(i, w)| words[..i].iter().all(|v| v != w))
        };
        if distinct(book.words1()) && distinct(book.words2()) {
            all_distinct += 1;
        }
    }
    assert!(
        all_distinct >= 75,
        "only {all_distinct}/100 seeds gave collision-free codebooks"
    );
}

#[test]
fn unsatisfiable_type_cost_is_reported() {
    let doc = adder_channel(3).unwrap();
    let mut cons = doc.constraints.clone();
    cons.gamma1 = 0.5;
    // Sender 1 always transmits letter 1, so every word in the class costs
    // 1.0 per letter and no redraw can repair the budget.
    let ens = InputEnsemble::singleton(Pmf::point_mass(2, 1).unwrap(), Pmf::uniform(2).unwrap());
    let err = build_codebook(&doc.spec, &doc.costs, &cons, 4, 2, 2, &ens, 0).unwrap_err();
    match err {
        SimError::ConstraintUnsatisfiable { sender, cost, budget } => {
            assert_eq!(sender, 1);
            assert!(cost > budget);
        }
        other => panic!("unexpected error: {other}"),
    }
}

#[test]
fn permutation_codes_validate_and_scatter() {
    let book = adder3_book(4, 2, 2, 9);
    assert!(matches!(
        PermutationCode::new(book.clone(), vec![0, 1, 2]),
        Err(SimError::Dimension { .. })
    ));
    assert!(matches!(
        PermutationCode::new(book.clone(), vec![0, 0, 1, 2]),
        Err(SimError::Dimension { .. })
    ));

    let pi = vec![2, 0, 3, 1];
    let code = PermutationCode::new(book.clone(), pi.clone()).unwrap();
    for m in 0..2 {
        assert_eq!(code.transmitted_word1(m), scatter(&pi, book.word1(m)));
        let sent = code.transmitted_word1(m);
        for i in 0..4 {
            assert_eq!(sent[pi[i]], book.word1(m)[i]);
        }
    }
}

#[test]
fn sampled_permutations_are_bijections() {
    let book = adder3_book(6, 2, 2, 1);
    let mut rng = ChaCha12Rng::seed_from_u64(4);
    let code = PermutationCode::sample(book, &mut rng);
    let mut seen = vec![false; 6];
    for &p in code.pi() {
        assert!(!seen[p]);
        seen[p] = true;
    }
}
