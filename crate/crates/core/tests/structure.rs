mod common;

use common::{arb_spec, arb_subcritical, build, cv, ModelSpec};
use gwi_core::exact::{build_truncated_chain, communication_class, ChainOptions};
use gwi_core::simulate::{simulate_trajectory, RngSeed, Sampler};
use gwi_core::structure::{affine_hull_prediction, analyze, dead_types, dependence_certificate};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn predicted_constraints_hold_on_the_class(model in arb_subcritical(3, 1, 0.6)) {
        let hull = affine_hull_prediction(&model);
        let chain = build_truncated_chain(&model, 12, &ChainOptions::default()).unwrap();
        let class = communication_class(&chain, &model);
        prop_assume!(class.is_ok());
        let class = class.unwrap();
        for x in &class.states {
            prop_assert!(hull.admits(x), "{} violates {:?}", x, hull);
        }
        if !hull.degenerate {
            prop_assert_eq!(class.affine_dimension(), model.dim());
        }
    }

    #[test]
    fn predicted_constraints_hold_along_simulated_paths(model in arb_subcritical(3, 2, 0.8), seed in 0u64..1000) {
        let hull = affine_hull_prediction(&model);
        let traj = simulate_trajectory(&Sampler::new(&model), &model.zero_state(), 60, RngSeed::new(seed, 0)).unwrap();
        for x in &traj.states[1..] {
            prop_assert!(hull.admits(x), "{} violates {:?}", x, hull);
        }
    }

    #[test]
    fn structure_depends_on_supports_only(spec in arb_spec(3, 2), reweight in prop::collection::vec(1i64..=9, 16)) {
        let mut k = 0;
        let mut next = || { k += 1; reweight[k % reweight.len()] };
        let other: ModelSpec = (
            spec.0.iter().map(|l| l.keys().map(|x| (x.clone(), next())).collect()).collect(),
            spec.1.keys().map(|x| (x.clone(), next())).collect(),
        );
        let (a, b) = (build(&spec), build(&other));
        prop_assert_eq!(dead_types(&a), dead_types(&b));
        prop_assert_eq!(dependence_certificate(&a), dependence_certificate(&b));
    }
}

#[test]
fn model_a_counterexample() {
    let model = gwi_core::fixtures::model_a();
    let report = analyze(&model);
    assert_eq!(report.die_out.dead, vec![1]);
    assert!(report.certificate.is_none());
    assert!(report.hull.degenerate);
    assert!(report.hull.admits(&cv(&[7, 0])));
    assert!(!report.hull.admits(&cv(&[0, 1])));
}

#[test]
fn model_b_certificate_and_line() {
    let model = gwi_core::fixtures::model_b();
    let cert = dependence_certificate(&model).unwrap();
    assert_eq!(cert.c_f64(), vec![1.0, -1.0]);
    assert_eq!(cert.constant, common::one());
    let chain = build_truncated_chain(&model, 20, &ChainOptions::default()).unwrap();
    let class = communication_class(&chain, &model).unwrap();
    assert!(class.states.iter().all(|x| x[0] == x[1] + 1));
    assert_eq!(class.affine_dimension(), 1);
}

#[test]
fn boundary_sink_does_not_hide_the_class() {
    // type 1 always has exactly one child, so (r, 0) can only move outwards
    let xi1 = common::law_from_weights(2, &[(vec![0, 1], 1), (vec![1, 0], 1)].into_iter().collect());
    let xi2 = common::law_from_weights(2, &[(vec![0, 0], 1)].into_iter().collect());
    let eta = common::law_from_weights(2, &[(vec![1, 0], 1)].into_iter().collect());
    let model = gwi_core::GwiModel::new(vec![xi1, xi2], eta).unwrap();
    let chain = build_truncated_chain(&model, 12, &ChainOptions::default()).unwrap();
    let class = communication_class(&chain, &model).unwrap();
    assert_eq!(class.pruned, 1);
    assert!(class.states.contains(&cv(&[1, 1])));
    assert_eq!(class.affine_dimension(), 2);
}
