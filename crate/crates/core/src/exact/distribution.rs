use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::{ExactError, TruncatedChain};
use crate::vector::CountVector;

/// Longest horizon accepted by [`nstep_distribution_exact`].
pub const EXACT_MODE_MAX_STEPS: usize = 10;

/// A (sub-)probability vector on the truncation plus the mass lost to it.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DistributionVector {
    pub probs: BTreeMap<CountVector, f64>,
    pub deficiency: f64,
}

impl DistributionVector {
    pub fn point(x: CountVector) -> Self {
        Self { probs: BTreeMap::from([(x, 1.0)]), deficiency: 0.0 }
    }

    pub(crate) fn from_dense(chain: &TruncatedChain, mass: &[f64], deficiency: f64) -> Self {
        let probs = mass
            .iter()
            .enumerate()
            .filter(|(_, &m)| m != 0.0)
            .map(|(i, &m)| (chain.state(i).clone(), m))
            .collect();
        Self { probs, deficiency }
    }

    pub(crate) fn to_dense(&self, chain: &TruncatedChain) -> Result<Vec<f64>, ExactError> {
        let mut out = alloc::vec![0.0; chain.len()];
        for (x, &m) in &self.probs {
            out[chain.require_index(x)?] = m;
        }
        Ok(out)
    }

    pub fn probability(&self, x: &CountVector) -> f64 {
        self.probs.get(x).copied().unwrap_or(0.0)
    }

    pub fn total_mass(&self) -> f64 {
        self.probs.values().sum()
    }

    /// `Σ_x ‖x‖^α μ(x)` with `0^0 = 1`.
    pub fn moment(&self, alpha: f64) -> f64 {
        self.probs.iter().map(|(x, &m)| libm::pow(x.norm() as f64, alpha) * m).sum()
    }
}

/// Exact rational counterpart of [`DistributionVector`].
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ExactDistribution {
    pub probs: BTreeMap<CountVector, BigRational>,
    pub deficiency: BigRational,
}

/// `π_x^{(n)}` on the truncation by repeated vector–kernel products.
pub fn nstep_distribution(chain: &TruncatedChain, x0: &CountVector, n: usize) -> Result<DistributionVector, ExactError> {
    let start = chain.require_index(x0)?;
    let mut mu = alloc::vec![0.0; chain.len()];
    mu[start] = 1.0;
    let mut next = alloc::vec![0.0; chain.len()];
    let mut deficiency = 0.0;
    for _ in 0..n {
        deficiency += chain.push_forward(&mu, &mut next);
        core::mem::swap(&mut mu, &mut next);
    }
    Ok(DistributionVector::from_dense(chain, &mu, deficiency))
}

/// Rational-arithmetic version of [`nstep_distribution`] for `n ≤ 10`.
pub fn nstep_distribution_exact(
    chain: &TruncatedChain,
    x0: &CountVector,
    n: usize,
) -> Result<ExactDistribution, ExactError> {
    if n > EXACT_MODE_MAX_STEPS {
        return Err(ExactError::ExactModeHorizon { n, max: EXACT_MODE_MAX_STEPS });
    }
    let start = chain.require_index(x0)?;
    let mut mu: BTreeMap<usize, BigRational> = BTreeMap::from([(start, BigRational::one())]);
    let mut deficiency = BigRational::zero();
    for _ in 0..n {
        let mut next: BTreeMap<usize, BigRational> = BTreeMap::new();
        for (&i, m) in &mu {
            for (j, q) in chain.row_exact(i) {
                *next.entry(j).or_insert_with(BigRational::zero) += m * q;
            }
            deficiency += m * chain.escape_exact(i);
        }
        mu = next;
    }
    let probs = mu.into_iter().map(|(i, m)| (chain.state(i).clone(), m)).collect();
    Ok(ExactDistribution { probs, deficiency })
}

/// `‖μ − ν‖_{F_r} = Σ_x (‖x‖^r + 1)|μ(x) − ν(x)|`; the supremum over
/// `|f| ≤ ‖x‖^r + 1` is attained by `f = (‖x‖^r + 1)·sign(μ − ν)`.
pub fn fr_distance(mu: &DistributionVector, nu: &DistributionVector, r: u32) -> f64 {
    let weight = |x: &CountVector| libm::pow(x.norm() as f64, r as f64) + 1.0;
    let mut total = 0.0;
    for (x, &m) in &mu.probs {
        total += weight(x) * libm::fabs(m - nu.probability(x));
    }
    for (x, &m) in &nu.probs {
        if !mu.probs.contains_key(x) {
            total += weight(x) * libm::fabs(m);
        }
    }
    total
}

/// Worst-case contribution of truncation deficiencies to [`fr_distance`],
/// placing all lost mass at norm `radius`.
pub fn fr_truncation_bound(mu: &DistributionVector, nu: &DistributionVector, r: u32, radius: u64) -> f64 {
    (libm::pow(radius as f64, r as f64) + 1.0) * (mu.deficiency + nu.deficiency)
}

/// Total variation norm of the signed measure `μ − ν`, i.e. `Σ_x |μ(x) − ν(x)|`,
/// so that `‖μ − ν‖_{F_0} = 2·total_variation(μ, ν)`.
pub fn total_variation(mu: &DistributionVector, nu: &DistributionVector) -> f64 {
    fr_distance(mu, nu, 0) / 2.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{build_truncated_chain, ChainOptions};
    use crate::fixtures;

    fn cv(v: &[u64]) -> CountVector {
        CountVector::new(v.to_vec())
    }

    #[test]
    fn zero_steps_is_a_point_mass() {
        let chain = build_truncated_chain(&fixtures::model_c(), 8, &ChainOptions::default()).unwrap();
        let d = nstep_distribution(&chain, &cv(&[3]), 0).unwrap();
        assert_eq!(d, DistributionVector::point(cv(&[3])));
    }

    #[test]
    fn one_step_matches_kernel_row() {
        let chain = build_truncated_chain(&fixtures::model_c(), 8, &ChainOptions::default()).unwrap();
        let d = nstep_distribution(&chain, &cv(&[2]), 1).unwrap();
        let expected = [0.125, 0.375, 0.375, 0.125];
        for (k, &p) in expected.iter().enumerate() {
            assert_eq!(d.probability(&cv(&[k as u64])), p);
        }
        let e = nstep_distribution_exact(&chain, &cv(&[2]), 1).unwrap();
        assert_eq!(e.probs[&cv(&[1])], BigRational::new(3.into(), 8.into()));
        assert!(e.deficiency.is_zero());
    }

    #[test]
    fn exact_mode_is_capped() {
        let chain = build_truncated_chain(&fixtures::model_c(), 4, &ChainOptions::default()).unwrap();
        assert!(matches!(
            nstep_distribution_exact(&chain, &cv(&[0]), 11),
            Err(ExactError::ExactModeHorizon { n: 11, max: 10 })
        ));
    }

    #[test]
    fn fr_distance_examples() {
        let a = DistributionVector::point(cv(&[1, 0]));
        let b = DistributionVector::point(cv(&[0, 0]));
        assert_eq!(fr_distance(&a, &a, 3), 0.0);
        assert_eq!(fr_distance(&a, &b, 1), 3.0);
        assert_eq!(total_variation(&a, &b), 2.0);
        assert_eq!(fr_distance(&a, &b, 0), 2.0 * total_variation(&a, &b));
    }
}
