#![allow(dead_code)]

use std::collections::BTreeMap;

use gwi_core::model::{classify, mean_matrix};
use gwi_core::{BigRational, CountVector, FiniteLaw, GwiModel};
use num_bigint::BigInt;
use num_traits::{One, Zero};
use proptest::prelude::*;

pub fn cv(v: &[u64]) -> CountVector {
    CountVector::new(v.to_vec())
}

pub fn law_from_weights(p: usize, atoms: &BTreeMap<Vec<u64>, i64>) -> FiniteLaw {
    let total: i64 = atoms.values().sum();
    let triples: Vec<(&[u64], i64, i64)> = atoms.iter().map(|(x, &w)| (x.as_slice(), w, total)).collect();
    FiniteLaw::from_triples(p, &triples)
}

/// Up to `max_atoms` support points with entries in `0..=max_entry` and
/// integer weights in `1..=6`.
pub fn arb_law(p: usize, max_entry: u64, max_atoms: usize) -> impl Strategy<Value = BTreeMap<Vec<u64>, i64>> {
    prop::collection::btree_map(prop::collection::vec(0..=max_entry, p), 1i64..=6, 1..=max_atoms)
}

/// Supports and weights of `(offspring laws, innovation law)`.
pub type ModelSpec = (Vec<BTreeMap<Vec<u64>, i64>>, BTreeMap<Vec<u64>, i64>);

pub fn arb_spec(max_p: usize, max_entry: u64) -> impl Strategy<Value = ModelSpec> {
    (1..=max_p).prop_flat_map(move |p| {
        (prop::collection::vec(arb_law(p, max_entry, 3), p), arb_law(p, max_entry, 3))
    })
}

pub fn build(spec: &ModelSpec) -> GwiModel {
    let p = spec.1.keys().next().unwrap().len();
    let offspring = spec.0.iter().map(|l| law_from_weights(p, l)).collect();
    GwiModel::new(offspring, law_from_weights(p, &spec.1)).unwrap()
}

pub fn rho(model: &GwiModel) -> f64 {
    classify(&mean_matrix(model), 1e-9).unwrap().rho
}

/// Models with spectral radius at most `bound`.
pub fn arb_subcritical(max_p: usize, max_entry: u64, bound: f64) -> impl Strategy<Value = GwiModel> {
    arb_spec(max_p, max_entry).prop_map(|s| build(&s)).prop_filter("spectral radius too large", move |m| rho(m) <= bound)
}

/// Law of `X_2` from `X_0 = 0` by listing every combination of individual
/// outcomes: `X_1 = η`, then each of the `X_{1,i}` type-`i` individuals picks
/// an offspring atom, then a second immigration atom is added.
pub fn brute_force_two_steps(model: &GwiModel) -> BTreeMap<CountVector, BigRational> {
    let p = model.dim();
    let mut out: BTreeMap<CountVector, BigRational> = BTreeMap::new();
    for (first, w1) in model.innovation().atoms() {
        let mut individuals = Vec::new();
        for i in 0..p {
            for _ in 0..first[i] {
                individuals.push(i);
            }
        }
        let mut choice = vec![0usize; individuals.len()];
        loop {
            let mut total = vec![0u64; p];
            let mut w = w1.clone();
            for (&i, &c) in individuals.iter().zip(&choice) {
                let (x, q) = &model.offspring(i).atoms()[c];
                for (t, v) in total.iter_mut().zip(x.entries()) {
                    *t += v;
                }
                w *= q;
            }
            for (second, w2) in model.innovation().atoms() {
                let state: Vec<u64> = total.iter().zip(second.entries()).map(|(a, b)| a + b).collect();
                *out.entry(CountVector::new(state)).or_insert_with(BigRational::zero) += &w * w2;
            }
            // odometer over the offspring choices
            let mut k = 0;
            loop {
                if k == choice.len() {
                    break;
                }
                choice[k] += 1;
                if choice[k] < model.offspring(individuals[k]).atoms().len() {
                    break;
                }
                choice[k] = 0;
                k += 1;
            }
            if k == choice.len() {
                break;
            }
        }
    }
    out
}

pub fn rational(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn one() -> BigRational {
    BigRational::one()
}
