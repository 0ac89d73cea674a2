//! Reference models used in documentation, tests and the CLI examples.

use alloc::vec::Vec;

use crate::law::FiniteLaw;
use crate::model::GwiModel;
use crate::vector::CountVector;

/// Two types where type 2 dies out but no degeneracy certificate exists:
/// `ξ_1 = {(0,0),(1,0)}` uniformly, `ξ_2` the product of two independent
/// Bernoulli(1/2) components, `η = {(0,0),(1,0)}` uniformly.
pub fn model_a() -> GwiModel {
    let xi1 = FiniteLaw::from_triples(2, &[(&[0, 0], 1, 2), (&[1, 0], 1, 2)]);
    let xi2 = FiniteLaw::from_triples(2, &[(&[0, 0], 1, 4), (&[1, 0], 1, 4), (&[0, 1], 1, 4), (&[1, 1], 1, 4)]);
    let eta = FiniteLaw::from_triples(2, &[(&[0, 0], 1, 2), (&[1, 0], 1, 2)]);
    GwiModel::new(alloc::vec![xi1, xi2], eta).expect("model A")
}

/// Two types with certificate `c = (1,−1)`: both offspring laws are
/// `{(0,0): 4/5, (1,1): 1/5}` and `η ≡ (1,0)`, so the class lies on `x_1 − x_2 = 1`.
pub fn model_b() -> GwiModel {
    let xi = FiniteLaw::from_triples(2, &[(&[0, 0], 4, 5), (&[1, 1], 1, 5)]);
    let eta = FiniteLaw::from_triples(2, &[(&[1, 0], 1, 1)]);
    GwiModel::new(alloc::vec![xi.clone(), xi], eta).expect("model B")
}

/// One type with Bernoulli(1/2) offspring and Bernoulli(1/2) immigration.
pub fn model_c() -> GwiModel {
    let xi = FiniteLaw::from_triples(1, &[(&[0], 1, 2), (&[1], 1, 2)]);
    GwiModel::new(alloc::vec![xi.clone()], xi).expect("model C")
}

/// No offspring at all and a deterministic immigration vector.
pub fn immigration_only(eta: &[u64]) -> GwiModel {
    let p = eta.len();
    let offspring: Vec<FiniteLaw> = (0..p).map(|_| FiniteLaw::point(CountVector::zeros(p))).collect();
    GwiModel::new(offspring, FiniteLaw::point(CountVector::new(eta.to_vec()))).expect("immigration-only model")
}
