mod common;

use common::{arb_subcritical, brute_force_two_steps, cv};
use gwi_core::exact::{
    build_truncated_chain, communication_class, drift_check, fr_distance, nstep_distribution,
    nstep_distribution_exact, rate_fit, stationary_exact, total_variation, ChainOptions, DistributionVector,
    ExactError, FitStatus, RateOptions,
};
use gwi_core::fixtures::{model_a, model_b, model_c};
use gwi_core::model::{dominating_pair, mean_matrix};
use gwi_core::{CountVector, GwiModel};
use num_traits::Zero;
use proptest::prelude::*;
use std::collections::BTreeMap;

fn fixtures() -> Vec<(&'static str, GwiModel)> {
    vec![("A", model_a()), ("B", model_b()), ("C", model_c())]
}

fn check_two_step_oracle(model: &GwiModel) {
    let eta = model.innovation().max_norm();
    let xi = model.offspring_laws().iter().map(|l| l.max_norm()).max().unwrap();
    let chain = build_truncated_chain(model, eta * xi + eta, &ChainOptions::default()).unwrap();
    let exact = nstep_distribution_exact(&chain, &model.zero_state(), 2).unwrap();
    assert!(exact.deficiency.is_zero());
    let oracle = brute_force_two_steps(model);
    assert_eq!(exact.probs, oracle);
}

#[test]
fn two_step_law_matches_enumeration_on_fixtures() {
    for (_, model) in fixtures() {
        check_two_step_oracle(&model);
    }
}

#[test]
fn rows_are_exactly_stochastic_on_fixtures() {
    for (name, model) in fixtures() {
        let chain = build_truncated_chain(&model, 15, &ChainOptions::default()).unwrap();
        for i in 0..chain.len() {
            assert!(chain.row_is_stochastic(i), "model {name}, state {}", chain.state(i));
        }
    }
}

#[test]
fn fixture_stationary_laws() {
    for (name, model) in fixtures() {
        let chain = build_truncated_chain(&model, 30, &ChainOptions::default()).unwrap();
        let class = communication_class(&chain, &model).unwrap();
        assert!(class.aperiodic, "model {name}");
        assert_eq!(class.pruned, 0, "model {name}");
        let pi = stationary_exact(&chain, &class).unwrap();
        assert!(pi.residual <= 1e-12, "model {name}: residual {}", pi.residual);
        assert!((pi.distribution.total_mass() - 1.0).abs() < 1e-12);
        for &i in &class.indices {
            assert!(chain.successors(i).all(|j| class.contains(j)), "model {name}: class not closed");
        }
    }
}

#[test]
fn model_c_stationary_mean() {
    let model = model_c();
    let chain = build_truncated_chain(&model, 40, &ChainOptions::default()).unwrap();
    let class = communication_class(&chain, &model).unwrap();
    let pi = stationary_exact(&chain, &class).unwrap();
    assert!((pi.distribution.moment(1.0) - 1.0).abs() < 1e-9);
}

#[test]
fn fixtures_converge_monotonically() {
    for (name, model) in [("B", model_b()), ("C", model_c())] {
        for r in [1, 2] {
            let fit = rate_fit(&model, &model.zero_state(), r, 60, 30, &RateOptions::default()).unwrap();
            assert_eq!(fit.status, FitStatus::Fitted, "model {name}");
            assert!(fit.rho_hat.unwrap() < 1.0);
            assert!(fit.monotone_from < 60, "model {name}, r {r}");
            let d = &fit.distances;
            assert!(d[fit.monotone_from..].windows(2).all(|w| w[1] <= w[0]));
        }
    }
}

#[test]
fn starting_outside_the_class_is_flagged() {
    let model = model_a();
    let fit = rate_fit(&model, &cv(&[0, 2]), 1, 40, 25, &RateOptions::default()).unwrap();
    assert!(!fit.x0_in_class);
    assert!(fit.rho_hat.unwrap() < 1.0);
    assert!(matches!(
        rate_fit(&model, &cv(&[40, 0]), 1, 10, 25, &RateOptions::default()),
        Err(ExactError::OutsideTruncation(_))
    ));
}

fn arb_distribution() -> impl Strategy<Value = DistributionVector> {
    prop::collection::btree_map(prop::collection::vec(0u64..6, 2), 0.0f64..1.0, 1..8).prop_map(|m| {
        let probs: BTreeMap<CountVector, f64> = m.into_iter().map(|(x, w)| (CountVector::new(x), w)).collect();
        DistributionVector { probs, deficiency: 0.0 }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn f0_is_twice_total_variation(mu in arb_distribution(), nu in arb_distribution()) {
        let f0 = fr_distance(&mu, &nu, 0);
        prop_assert!((f0 - 2.0 * total_variation(&mu, &nu)).abs() <= 1e-15 * f0.max(1.0));
    }

    #[test]
    fn random_models_match_the_oracle(model in arb_subcritical(2, 2, 0.95)) {
        check_two_step_oracle(&model);
    }

    #[test]
    fn random_kernels_are_exact_and_stationary(model in arb_subcritical(2, 1, 0.5)) {
        let chain = build_truncated_chain(&model, 20, &ChainOptions::default()).unwrap();
        for i in 0..chain.len() {
            prop_assert!(chain.row_is_stochastic(i));
        }
        let class = communication_class(&chain, &model);
        prop_assume!(class.is_ok());
        let class = class.unwrap();
        // moves out of the class only reach discarded boundary states, which leak
        for &i in &class.indices {
            for j in chain.successors(i).filter(|&j| !class.contains(j)) {
                prop_assert!(class.pruned > 0 && chain.escape(j) > 0.0, "{} -> {}", chain.state(i), chain.state(j));
            }
        }
        let pi = stationary_exact(&chain, &class);
        prop_assume!(pi.is_ok());
        prop_assert!(pi.unwrap().residual <= 1e-12);
        // the float pushforward agrees with exact rational propagation
        let float = nstep_distribution(&chain, &model.zero_state(), 3).unwrap();
        let exact = nstep_distribution_exact(&chain, &model.zero_state(), 3).unwrap();
        for (x, q) in &exact.probs {
            let q: f64 = num_traits::ToPrimitive::to_f64(q).unwrap();
            prop_assert!((float.probability(x) - q).abs() < 1e-14);
        }
    }

    #[test]
    fn passing_drift_implies_convergence(model in arb_subcritical(2, 1, 0.6)) {
        let pair = dominating_pair(&mean_matrix(&model)).unwrap();
        let drift = drift_check(&model, &pair, 1, 20);
        prop_assume!(drift.is_ok());
        let fit = rate_fit(&model, &model.zero_state(), 1, 40, 20, &RateOptions::default());
        prop_assume!(!matches!(fit, Err(ExactError::RadiusTooSmall(_)) | Err(ExactError::NoClosedClass { .. })));
        let fit = fit.unwrap();
        match fit.status {
            FitStatus::Fitted => prop_assert!(fit.rho_hat.unwrap() < 1.0),
            FitStatus::ExactConvergence => prop_assert!(fit.distances.last().unwrap() < &1e-14),
        }
    }
}

#[test]
fn deterministic_model_converges_exactly() {
    // (0,0) -> (1,0) -> (1,1) -> (1,1): distances 4, 5, 0, ...
    let xi1 = common::law_from_weights(2, &[(vec![0, 1], 1)].into_iter().collect());
    let xi2 = common::law_from_weights(2, &[(vec![0, 0], 1)].into_iter().collect());
    let eta = common::law_from_weights(2, &[(vec![1, 0], 1)].into_iter().collect());
    let model = GwiModel::new(vec![xi1, xi2], eta).unwrap();
    let fit = rate_fit(&model, &model.zero_state(), 1, 40, 20, &RateOptions::default()).unwrap();
    assert_eq!(fit.status, FitStatus::ExactConvergence);
    assert_eq!(&fit.distances[..3], &[4.0, 5.0, 0.0]);
    assert_eq!(fit.monotone_from, 1);
}
