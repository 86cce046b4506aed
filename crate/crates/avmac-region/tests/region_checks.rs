//! End-to-end region computations on the built-in channels: closed-form
//! rectangle corners, case dispatch with the budget on either side of the
//! thresholds, fragile-boundary flagging, and agreement between the
//! no-shared-randomness and divided-randomness regimes when no
//! symmetrization is possible.

use avmac_core::ConstraintSpec;
use avmac_channels::{
    ahlswede_cai_channel, binary_entropy, bsmac_channel, bsmac_corner_rates,
    erasure_adder_channel, gaussian_discretized, GaussianGrids,
};
use avmac_region::{
    deterministic_region, divided_randomness_region, random_code_region, CaseLabel, RateRegion,
    Resolution,
};

fn top_at(region: &RateRegion, r1: f64) -> f64 {
    region.max_r2_at(r1).unwrap_or(0.0)
}

#[test]
fn random_code_rectangles_match_the_closed_form() {
    let doc = bsmac_channel();
    for lambda in [0.1, 0.4] {
        let cons = ConstraintSpec::new(1.0, 1.0, lambda);
        let region =
            random_code_region(&doc.spec, &doc.costs, &cons, Resolution::default()).unwrap();
        let [c1, c2] = bsmac_corner_rates(1.0, 1.0, lambda);
        assert!(
            (region.r1_extent() - c1.value).abs() <= 5e-3,
            "lambda {lambda}: r1 extent {} vs {}",
            region.r1_extent(),
            c1.value
        );
        assert!(
            (top_at(&region, 0.0) - c2.value).abs() <= 5e-3,
            "lambda {lambda}: r2 corner {} vs {}",
            top_at(&region, 0.0),
            c2.value
        );
        // Rectangle: the top edge stays flat out to the corner.
        let mid = top_at(&region, 0.5 * region.r1_extent());
        assert!((mid - c2.value).abs() <= 5e-3);
        assert!(!region.flags.minimization_unconverged);
    }
}

#[test]
fn random_code_region_collapses_at_half_budget() {
    let doc = bsmac_channel();
    let cons = ConstraintSpec::new(1.0, 1.0, 0.5);
    let region = random_code_region(&doc.spec, &doc.costs, &cons, Resolution::default()).unwrap();
    assert!(region.r1_extent() <= 1e-3, "r1 extent {}", region.r1_extent());
    assert!(top_at(&region, 0.0) <= 1e-3, "r2 corner {}", top_at(&region, 0.0));
    assert!(region.support(0.5) <= 1e-3);
}

#[test]
fn full_budget_headroom_dispatches_case_a_matching_the_shared_regime() {
    let doc = bsmac_channel();
    let cons = ConstraintSpec::new(1.0, 1.0, 0.1);
    let det = deterministic_region(&doc.spec, &doc.costs, &cons, Resolution::default()).unwrap();
    assert_eq!(det.case_label, Some(CaseLabel::A));
    let th = det.thresholds.as_ref().expect("thresholds are computed");
    assert!(th.joint.value.as_finite().is_some());

    let shared = random_code_region(&doc.spec, &doc.costs, &cons, Resolution::default()).unwrap();
    let extent = det.r1_extent().max(shared.r1_extent());
    assert!((det.r1_extent() - shared.r1_extent()).abs() <= 5e-3);
    for k in 0..64 {
        let r1 = extent * k as f64 / 63.0;
        let (a, b) = (top_at(&det, r1), top_at(&shared, r1));
        assert!(
            (a - b).abs() <= 5e-3,
            "boundaries split at r1 = {r1}: {a} vs {b}"
        );
    }
}

#[test]
fn low_first_sender_budget_dispatches_case_b_with_the_closed_form_rate() {
    let doc = bsmac_channel();
    let cons = ConstraintSpec::new(0.05, 1.0, 0.1);
    let det = deterministic_region(&doc.spec, &doc.costs, &cons, Resolution::default()).unwrap();
    assert_eq!(det.case_label, Some(CaseLabel::B));
    assert!(det.r1_extent() <= 1e-12, "sender 1 must be silenced");
    let r2 = top_at(&det, 0.0);
    let expected = 1.0 - binary_entropy(0.1).unwrap();
    assert!((r2 - expected).abs() <= 5e-3, "r2 {r2} vs {expected}");
    assert_eq!(det.boundary.len(), 1);
}

#[test]
fn low_budgets_on_both_senders_dispatch_case_d() {
    let doc = bsmac_channel();
    let cons = ConstraintSpec::new(0.05, 0.08, 0.1);
    let det = deterministic_region(&doc.spec, &doc.costs, &cons, Resolution::default()).unwrap();
    assert_eq!(det.case_label, Some(CaseLabel::D));
    assert_eq!(det.boundary, vec![(0.0, 0.0)]);
    assert!(det.support(0.5) <= 1e-12);
    assert!(det.pentagons.is_empty());
}

#[test]
fn threshold_on_the_budget_is_flagged_undetermined() {
    let doc = erasure_adder_channel(2).unwrap();
    let cons = ConstraintSpec::new(1.0, 1.0, 1.0);
    let det = deterministic_region(&doc.spec, &doc.costs, &cons, Resolution::default()).unwrap();
    let th = det.thresholds.as_ref().expect("thresholds are computed");
    let joint = th.joint.value.as_finite().expect("joint threshold is finite");
    assert!((joint - 1.0).abs() <= 1e-3, "joint threshold {joint}");
    assert_eq!(det.case_label, Some(CaseLabel::D));
    assert!(det.flags.boundary_undetermined);
}

#[test]
fn one_sided_symmetrizability_keeps_case_a_and_nests_under_division() {
    let doc = ahlswede_cai_channel();
    let cons = ConstraintSpec::new(1.0, 1.0, 0.5);
    let det = deterministic_region(&doc.spec, &doc.costs, &cons, Resolution::default()).unwrap();
    assert_eq!(det.case_label, Some(CaseLabel::A));
    let th = det.thresholds.as_ref().expect("thresholds are computed");
    assert!(th.joint.value.as_finite().is_some());
    assert!(th.sender1.value.is_infinite());
    assert!(th.sender2.value.is_infinite());

    let div =
        divided_randomness_region(&doc.spec, &doc.costs, &cons, Resolution::default()).unwrap();
    for k in 0..=8 {
        let mu = k as f64 / 8.0;
        assert!(
            det.support(mu) <= div.support(mu) + 1e-6,
            "direction {mu}: restricted support {} above unrestricted {}",
            det.support(mu),
            div.support(mu)
        );
    }
    assert!(det.support(0.5) > 0.05, "region should not be degenerate");
}

#[test]
fn case_b_rate_is_capped_by_the_divided_regime_and_skips_sender_one() {
    let doc = bsmac_channel();
    let cons = ConstraintSpec::new(0.05, 1.0, 0.1);
    let det = deterministic_region(&doc.spec, &doc.costs, &cons, Resolution::default()).unwrap();
    let div =
        divided_randomness_region(&doc.spec, &doc.costs, &cons, Resolution::default()).unwrap();
    // At the silent-sender corner both regimes agree for this channel; the
    // divided regime keeps a positive first-sender rate that the
    // no-shared-randomness code must give up.
    assert!(top_at(&det, 0.0) <= top_at(&div, 0.0) + 5e-3);
    assert!(det.r1_extent() <= 1e-12);
    assert!(div.r1_extent() > 0.02);
}

#[test]
fn unsymmetrizable_channel_needs_no_shared_randomness() {
    let grids = GaussianGrids {
        input_points: 5,
        state_points: 5,
        output_bins: 9,
    };
    let doc = gaussian_discretized(1.0, 1.0, 0.5, 0.5, grids).unwrap();
    let det =
        deterministic_region(&doc.spec, &doc.costs, &doc.constraints, Resolution::default())
            .unwrap();
    let th = det.thresholds.as_ref().expect("thresholds are computed");
    assert!(th.joint.value.is_infinite());
    assert!(th.sender1.value.is_infinite());
    assert!(th.sender2.value.is_infinite());
    assert_eq!(det.case_label, Some(CaseLabel::A));

    let div = divided_randomness_region(
        &doc.spec,
        &doc.costs,
        &doc.constraints,
        Resolution::default(),
    )
    .unwrap();
    assert_eq!(det.boundary.len(), div.boundary.len());
    for (a, b) in det.boundary.iter().zip(&div.boundary) {
        assert!((a.0 - b.0).abs() <= 1e-12 && (a.1 - b.1).abs() <= 1e-12);
    }
    for k in 0..=8 {
        let mu = k as f64 / 8.0;
        assert!((det.support(mu) - div.support(mu)).abs() <= 1e-12);
    }
    assert!(det.support(0.5) > 0.1, "region should not be degenerate");
}
