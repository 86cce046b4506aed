//! Property tests for the probability primitives and the text format.

use avmac_core::textfmt::{parse, serialize, ChannelDocument};
use avmac_core::{
    expected_cost, mutual_informations, ChannelSpec, ConstraintSpec, CostModel, InputEnsemble,
    Pmf, StateLaw,
};
use proptest::prelude::*;

/// Raw positive weights normalized into a distribution.
fn pmf_strategy(n: usize) -> impl Strategy<Value = Pmf> {
    prop::collection::vec(1e-3..1.0f64, n).prop_map(|raw| {
        let sum: f64 = raw.iter().sum();
        Pmf::new(raw.iter().map(|v| v / sum).collect()).unwrap()
    })
}

fn doc_strategy() -> impl Strategy<Value = ChannelDocument> {
    (2usize..4, 2usize..4, 1usize..4, 2usize..4)
        .prop_flat_map(|(n1, n2, ns, ny)| {
            let rows = prop::collection::vec(pmf_strategy(ny), n1 * n2 * ns);
            let g1 = prop::collection::vec(0.0..4.0f64, n1);
            let g2 = prop::collection::vec(0.0..4.0f64, n2);
            let l = prop::collection::vec(0.0..4.0f64, ns);
            let levels = (0.0..4.0f64, 0.0..4.0f64, 0.0..4.0f64);
            (Just((n1, n2, ns, ny)), rows, g1, g2, l, levels)
        })
        .prop_map(|((n1, n2, ns, ny), rows, mut g1, mut g2, mut l, levels)| {
            let mut w = Vec::with_capacity(n1 * n2 * ns * ny);
            for row in rows {
                w.extend_from_slice(row.as_slice());
            }
            // Costs need a zero entry to be well formed.
            g1[0] = 0.0;
            g2[0] = 0.0;
            l[0] = 0.0;
            ChannelDocument {
                spec: ChannelSpec::new(n1, n2, ns, ny, w, Some("prop".into())).unwrap(),
                costs: CostModel::new(g1, g2, l),
                constraints: ConstraintSpec::new(levels.0, levels.1, levels.2),
            }
        })
}

proptest! {
    #[test]
    fn serialize_parse_round_trip(doc in doc_strategy()) {
        let text = serialize(&doc);
        let again = parse(&text).unwrap();
        prop_assert_eq!(&doc, &again);
        // A second pass changes nothing either.
        prop_assert_eq!(text, serialize(&again));
    }

    #[test]
    fn pmf_construction_is_idempotent(p in pmf_strategy(5)) {
        let again = Pmf::new(p.as_slice().to_vec()).unwrap();
        prop_assert_eq!(p, again);
    }

    #[test]
    fn expected_cost_stays_in_cost_range(
        p in pmf_strategy(4),
        cost in prop::collection::vec(0.0..10.0f64, 4),
    ) {
        let value = expected_cost(&p, &cost).unwrap();
        let lo = cost.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = cost.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(value >= lo - 1e-12 && value <= hi + 1e-12);
    }

    #[test]
    fn informations_respect_alphabet_bounds(doc in doc_strategy(), seed_p1 in pmf_strategy(8)) {
        let (n1, n2, ns, _) = doc.spec.sizes();
        let take = |n: usize, offset: usize| {
            let raw: Vec<f64> = (0..n).map(|i| seed_p1.get((i + offset) % 8) + 1e-3).collect();
            let sum: f64 = raw.iter().sum();
            Pmf::new(raw.iter().map(|v| v / sum).collect()).unwrap()
        };
        let ens = InputEnsemble::singleton(take(n1, 0), take(n2, 3));
        let law = StateLaw::Unconditional(take(ns, 5));
        let info = mutual_informations(&doc.spec, &ens, &law).unwrap();
        let b1 = (n1 as f64).log2();
        let b2 = (n2 as f64).log2();
        prop_assert!(info.i1 >= 0.0 && info.i1 <= b1 + 1e-9);
        prop_assert!(info.i2 >= 0.0 && info.i2 <= b2 + 1e-9);
        prop_assert!(info.isum >= 0.0 && info.isum <= b1 + b2 + 1e-9);
        prop_assert!(info.isum + 1e-9 >= info.i1.max(info.i2));
    }
}
