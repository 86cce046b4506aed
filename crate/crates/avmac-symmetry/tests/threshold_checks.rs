//! Threshold maximization checked against channels where the optimum is
//! known exactly, plus structural properties of the search itself.

use avmac_channels::{adder_channel, bsmac_channel, bsmac_thresholds, erasure_adder_channel};
use avmac_core::ConstraintSpec;
use avmac_symmetry::{thresholds, thresholds_product_grid, CostValue, ThresholdEntry};

fn finite(entry: &ThresholdEntry) -> f64 {
    assert!(entry.converged, "threshold search should converge");
    entry.value.as_finite().expect("finite threshold")
}

#[test]
fn binary_switch_mac_thresholds_match_the_closed_form() {
    let doc = bsmac_channel();
    for (g1, g2) in [(0.3, 0.2), (1.0, 1.0), (0.05, 0.5), (0.5, 0.1), (0.08, 0.9)] {
        let cons = ConstraintSpec::new(g1, g2, doc.constraints.lambda);
        let got = thresholds(&doc.spec, &doc.costs, &cons).unwrap();
        let want = bsmac_thresholds(g1, g2);
        assert!(
            (finite(&got.joint) - want[0].value).abs() <= 1e-8,
            "joint at ({g1},{g2}): {} vs {}",
            finite(&got.joint),
            want[0].value
        );
        assert!((finite(&got.sender1) - want[1].value).abs() <= 1e-8);
        assert!((finite(&got.sender2) - want[2].value).abs() <= 1e-8);
    }
}

#[test]
fn ternary_adder_thresholds_are_the_clamped_budgets() {
    // The unique maps charge the expected letter values, so the best the
    // senders can spend is their own budget, capped by the letter range.
    let doc = adder_channel(3).unwrap();
    for (g1, g2) in [(0.7, 0.4), (0.2, 0.9), (1.0, 1.0), (1.5, 0.3)] {
        let cons = ConstraintSpec::new(g1, g2, doc.constraints.lambda);
        let got = thresholds(&doc.spec, &doc.costs, &cons).unwrap();
        let (w1, w2) = (g1.min(1.0), g2.min(1.0));
        assert!((finite(&got.sender1) - w1).abs() <= 1e-8);
        assert!((finite(&got.sender2) - w2).abs() <= 1e-8);
        assert!((finite(&got.joint) - (w1 + w2)).abs() <= 1e-8);
    }
}

#[test]
fn erasure_adder_thresholds_are_budget_independent() {
    let doc = erasure_adder_channel(2).unwrap();
    for (g1, g2) in [(0.05, 0.05), (0.5, 1.0), (1.0, 1.0)] {
        let cons = ConstraintSpec::new(g1, g2, 0.5);
        let got = thresholds(&doc.spec, &doc.costs, &cons).unwrap();
        for entry in [&got.joint, &got.sender1, &got.sender2] {
            assert!((finite(entry) - 1.0).abs() <= 1e-9);
        }
    }
}

#[test]
fn infeasible_kinds_report_infinite_thresholds() {
    let doc = adder_channel(2).unwrap();
    let got = thresholds(&doc.spec, &doc.costs, &doc.constraints).unwrap();
    assert!(matches!(got.joint.value, CostValue::Infinite));
    assert!(got.joint.converged);
    assert!(got.joint.maximizer.is_none());
    assert!(matches!(got.sender1.value, CostValue::Finite(_)));
    assert!(matches!(got.sender2.value, CostValue::Finite(_)));
}

#[test]
fn thresholds_ignore_the_state_budget() {
    let doc = bsmac_channel();
    let a = thresholds(
        &doc.spec,
        &doc.costs,
        &ConstraintSpec::new(0.3, 0.2, 0.01),
    )
    .unwrap();
    let b = thresholds(
        &doc.spec,
        &doc.costs,
        &ConstraintSpec::new(0.3, 0.2, 5.0),
    )
    .unwrap();
    assert_eq!(finite(&a.joint), finite(&b.joint));
    assert_eq!(finite(&a.sender1), finite(&b.sender1));
    assert_eq!(finite(&a.sender2), finite(&b.sender2));
}

#[test]
fn thresholds_grow_with_the_input_budgets() {
    let doc = bsmac_channel();
    let mut last = (0.0, 0.0, 0.0);
    for g in [0.05, 0.1, 0.3, 0.5, 1.0] {
        let cons = ConstraintSpec::new(g, g, 0.25);
        let got = thresholds(&doc.spec, &doc.costs, &cons).unwrap();
        let now = (finite(&got.joint), finite(&got.sender1), finite(&got.sender2));
        assert!(now.0 >= last.0 - 1e-12);
        assert!(now.1 >= last.1 - 1e-12);
        assert!(now.2 >= last.2 - 1e-12);
        last = now;
    }
}

#[test]
fn maximizers_are_feasible_and_reproduce_the_value() {
    let doc = bsmac_channel();
    let cons = ConstraintSpec::new(0.3, 0.2, 0.25);
    let got = thresholds(&doc.spec, &doc.costs, &cons).unwrap();

    let p = got.sender1.maximizer.as_ref().expect("finite search keeps its argmax");
    let spend: f64 = p.iter().zip(&doc.costs.g1).map(|(a, b)| a * b).sum();
    assert!(spend <= cons.gamma1 + 1e-9);
    let replay = avmac_symmetry::min_symmetrizing_cost(
        &doc.spec,
        &doc.costs,
        avmac_symmetry::SymKind::Sender1,
        p,
    )
    .unwrap();
    let v = replay.value.as_finite().unwrap();
    assert!((v - finite(&got.sender1)).abs() <= 1e-8);

    // The certified bound brackets the reported value from above.
    let ub = got.sender1.upper_bound.expect("finite search reports its bound");
    assert!(ub >= v - 1e-12);
    assert!(ub - v <= 1e-7);
}

#[test]
fn grid_blend_cross_check_agrees_on_the_binary_switch_mac() {
    // Budgets sitting on the grid make the blended optimum exact, so the
    // two independent searches must meet.
    let doc = bsmac_channel();
    let cons = ConstraintSpec::new(0.3, 0.2, 0.25);
    let fine = thresholds(&doc.spec, &doc.costs, &cons).unwrap();
    let grid = thresholds_product_grid(&doc.spec, &doc.costs, &cons, 50).unwrap();
    for (a, b) in [
        (&fine.joint, &grid.joint),
        (&fine.sender1, &grid.sender1),
        (&fine.sender2, &grid.sender2),
    ] {
        let (fa, fb) = (finite(a), finite(b));
        assert!((fa - fb).abs() <= 1e-6, "{fa} vs {fb}");
        // Grid-supported ensembles can never beat the true optimum.
        assert!(fb <= fa + 1e-7);
    }
}

#[test]
fn grid_blend_hits_off_grid_budgets_by_mixing_atoms() {
    // 0.05 is not a multiple of 1/50, yet blending two neighboring atoms
    // meets the budget exactly on the linear part of the cost curve.
    let doc = bsmac_channel();
    let cons = ConstraintSpec::new(0.05, 0.07, 0.25);
    let grid = thresholds_product_grid(&doc.spec, &doc.costs, &cons, 50).unwrap();
    assert!((finite(&grid.sender1) - 0.05).abs() <= 1e-9);
    assert!((finite(&grid.sender2) - 0.07).abs() <= 1e-9);
    assert!((finite(&grid.joint) - 0.12).abs() <= 1e-9);
}
