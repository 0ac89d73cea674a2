//! Seeded Monte Carlo realizations of the branching recursion.
//!
//! Draw order inside one step is fixed: for each type `i` ascending, the
//! `x_i` offspring vectors of that type in order, then one innovation draw.
//! Randomness comes from ChaCha8 keyed by `(seed, stream)`, so any replica can
//! be regenerated independently of how replicas are scheduled.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::weighted::WeightedAliasIndex;
use rand_distr::Distribution;
use thiserror::Error;

use crate::law::FiniteLaw;
use crate::model::GwiModel;
use crate::vector::CountVector;

/// Components above this bound abort a simulation.
pub const POPULATION_LIMIT: u64 = 1 << 32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("population exceeded 2^32 at step {step} (state {state}); input is probably not subcritical")]
    PopulationOverflow { step: usize, state: CountVector },
    #[error("initial state has dimension {found}, model has {expected}")]
    DimensionMismatch { expected: usize, found: usize },
}

/// Key of one random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RngSeed {
    pub seed: u64,
    pub stream: u64,
}

impl RngSeed {
    pub fn new(seed: u64, stream: u64) -> Self {
        Self { seed, stream }
    }

    pub fn with_stream(self, stream: u64) -> Self {
        Self { stream, ..self }
    }

    pub fn generator(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }

    /// Disjoint block of this stream, `2^66` words apart.
    fn substream(&self, k: u128) -> ChaCha8Rng {
        let mut rng = self.generator();
        rng.set_word_pos(k << 66);
        rng
    }
}

struct LawSampler {
    alias: WeightedAliasIndex<f64>,
    support: Vec<CountVector>,
}

impl LawSampler {
    fn new(law: &FiniteLaw) -> Self {
        let alias = WeightedAliasIndex::new(law.float_weights()).expect("validated law has positive weights");
        Self { alias, support: law.support().cloned().collect() }
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> &CountVector {
        &self.support[self.alias.sample(rng)]
    }
}

/// Alias tables for every law of a model, built once.
pub struct Sampler {
    p: usize,
    offspring: Vec<LawSampler>,
    innovation: LawSampler,
}

impl Sampler {
    pub fn new(model: &GwiModel) -> Self {
        Self {
            p: model.dim(),
            offspring: model.offspring_laws().iter().map(LawSampler::new).collect(),
            innovation: LawSampler::new(model.innovation()),
        }
    }

    pub fn dim(&self) -> usize {
        self.p
    }

    /// `S(x)`: summed offspring of the population `x`, no immigration.
    pub fn offspring_sum<R: Rng + ?Sized>(&self, x: &CountVector, rng: &mut R) -> CountVector {
        let mut out = alloc::vec![0u64; self.p];
        for (i, &count) in x.entries().iter().enumerate() {
            for _ in 0..count {
                let child = self.offspring[i].draw(rng);
                for (acc, &c) in out.iter_mut().zip(child.entries()) {
                    *acc = acc.saturating_add(c);
                }
            }
        }
        CountVector::new(out)
    }

    pub fn innovation<R: Rng + ?Sized>(&self, rng: &mut R) -> &CountVector {
        self.innovation.draw(rng)
    }

    /// One step of the recursion: `S(x) + η`.
    pub fn step<R: Rng + ?Sized>(&self, x: &CountVector, rng: &mut R) -> CountVector {
        let mut next = self.offspring_sum(x, rng);
        next += self.innovation(rng);
        next
    }

    fn check_dim(&self, x: &CountVector) -> Result<(), SimError> {
        if x.dim() != self.p {
            return Err(SimError::DimensionMismatch { expected: self.p, found: x.dim() });
        }
        Ok(())
    }
}

fn guard(step: usize, x: &CountVector) -> Result<(), SimError> {
    if x.max_entry() > POPULATION_LIMIT {
        return Err(SimError::PopulationOverflow { step, state: x.clone() });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trajectory {
    pub seed: RngSeed,
    /// `X_0, …, X_N`; `states[0]` is the initial state.
    pub states: Vec<CountVector>,
}

impl Trajectory {
    pub fn initial(&self) -> &CountVector {
        &self.states[0]
    }
}

pub fn simulate_trajectory(
    sampler: &Sampler,
    x0: &CountVector,
    steps: usize,
    seed: RngSeed,
) -> Result<Trajectory, SimError> {
    sampler.check_dim(x0)?;
    let mut rng = seed.generator();
    let mut states = Vec::with_capacity(steps + 1);
    states.push(x0.clone());
    for n in 1..=steps {
        let next = sampler.step(&states[n - 1], &mut rng);
        guard(n, &next)?;
        states.push(next);
    }
    Ok(Trajectory { seed, states })
}

/// `X_n = Y_n + V_n`: the initial population's lineage and the lineages of
/// all immigrant cohorts, simulated on disjoint sub-streams.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecomposedTrajectory {
    pub seed: RngSeed,
    pub y: Vec<CountVector>,
    pub v: Vec<CountVector>,
    pub total: Vec<CountVector>,
}

pub fn simulate_decomposed(
    sampler: &Sampler,
    x0: &CountVector,
    steps: usize,
    seed: RngSeed,
) -> Result<DecomposedTrajectory, SimError> {
    sampler.check_dim(x0)?;
    let mut y_rng = seed.substream(0);
    let mut v_rng = seed.substream(1);
    let zero = CountVector::zeros(sampler.dim());
    let mut y = alloc::vec![x0.clone()];
    let mut v = alloc::vec![zero];
    let mut total = alloc::vec![x0.clone()];
    for n in 1..=steps {
        let y_next = sampler.offspring_sum(&y[n - 1], &mut y_rng);
        let v_next = sampler.step(&v[n - 1], &mut v_rng);
        let x = &y_next + &v_next;
        guard(n, &x)?;
        y.push(y_next);
        v.push(v_next);
        total.push(x);
    }
    Ok(DecomposedTrajectory { seed, y, v, total })
}

/// First `n` with `Y_n = 0` for the immigration-free process from `x0`, or
/// `None` if it survives `cap` generations.
pub fn extinction_time(sampler: &Sampler, x0: &CountVector, seed: RngSeed, cap: usize) -> Option<usize> {
    let mut rng = seed.generator();
    let mut y = x0.clone();
    for n in 0..=cap {
        if y.is_zero() {
            return Some(n);
        }
        if n == cap || y.max_entry() > POPULATION_LIMIT {
            break;
        }
        y = sampler.offspring_sum(&y, &mut rng);
    }
    None
}

/// Pooled visit counts of independent chains started at 0.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct EmpiricalDistribution {
    pub counts: BTreeMap<CountVector, u64>,
    pub total: u64,
    pub burnin: usize,
    pub steps: usize,
    pub replicas: usize,
}

impl EmpiricalDistribution {
    pub fn empty(burnin: usize, steps: usize, replicas: usize) -> Self {
        Self { burnin, steps, replicas, ..Default::default() }
    }

    /// Adds another set of counts; the result does not depend on merge order.
    pub fn merge_counts(&mut self, counts: BTreeMap<CountVector, u64>) {
        for (state, c) in counts {
            *self.counts.entry(state).or_insert(0) += c;
            self.total += c;
        }
    }

    pub fn probability(&self, x: &CountVector) -> f64 {
        self.counts.get(x).map_or(0.0, |&c| c as f64 / self.total as f64)
    }

    pub fn probabilities(&self) -> BTreeMap<CountVector, f64> {
        self.counts.iter().map(|(s, &c)| (s.clone(), c as f64 / self.total as f64)).collect()
    }
}

/// Visit counts of replica `r` (stream index `r`) after discarding `burnin` steps.
pub fn replica_counts(
    sampler: &Sampler,
    burnin: usize,
    steps: usize,
    seed: u64,
    replica: u64,
) -> Result<BTreeMap<CountVector, u64>, SimError> {
    let mut rng = RngSeed::new(seed, replica).generator();
    let mut x = CountVector::zeros(sampler.dim());
    let mut counts = BTreeMap::new();
    for n in 1..=burnin + steps {
        x = sampler.step(&x, &mut rng);
        guard(n, &x)?;
        if n > burnin {
            *counts.entry(x.clone()).or_insert(0) += 1;
        }
    }
    Ok(counts)
}

/// Sequential version; `gwi` runs the replicas on a thread pool and merges
/// them with [`EmpiricalDistribution::merge_counts`].
pub fn empirical_stationary(
    sampler: &Sampler,
    burnin: usize,
    steps: usize,
    replicas: usize,
    seed: u64,
) -> Result<EmpiricalDistribution, SimError> {
    let mut dist = EmpiricalDistribution::empty(burnin, steps, replicas);
    for r in 0..replicas as u64 {
        dist.merge_counts(replica_counts(sampler, burnin, steps, seed, r)?);
    }
    Ok(dist)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn cv(v: &[u64]) -> CountVector {
        CountVector::new(v.to_vec())
    }

    #[test]
    fn step_from_zero_is_innovation() {
        let sampler = Sampler::new(&fixtures::model_b());
        let mut rng = RngSeed::new(3, 0).generator();
        for _ in 0..20 {
            assert_eq!(sampler.step(&cv(&[0, 0]), &mut rng), cv(&[1, 0]));
        }
    }

    #[test]
    fn degenerate_laws_step_deterministically() {
        let xi1 = FiniteLaw::point(cv(&[1, 0]));
        let xi2 = FiniteLaw::point(cv(&[0, 0]));
        let model = GwiModel::new(alloc::vec![xi1, xi2], FiniteLaw::point(cv(&[0, 1]))).unwrap();
        let sampler = Sampler::new(&model);
        let mut rng = RngSeed::default().generator();
        assert_eq!(sampler.step(&cv(&[2, 0]), &mut rng), cv(&[2, 1]));
    }

    #[test]
    fn model_c_one_step_mean() {
        // X_1 | X_0 = 3 is Binomial(3,1/2) + Bernoulli(1/2): mean 2, variance 1.
        let sampler = Sampler::new(&fixtures::model_c());
        let mut rng = RngSeed::new(11, 0).generator();
        let n = 100_000;
        let sum: u64 = (0..n).map(|_| sampler.step(&cv(&[3]), &mut rng)[0]).sum();
        let mean = sum as f64 / n as f64;
        let se = 1.0 / (n as f64).sqrt();
        assert!((mean - 2.0).abs() < 3.0 * se, "mean {mean}");
    }

    #[test]
    fn zero_steps_and_determinism() {
        let sampler = Sampler::new(&fixtures::model_a());
        let t = simulate_trajectory(&sampler, &cv(&[1, 1]), 0, RngSeed::default()).unwrap();
        assert_eq!(t.states, alloc::vec![cv(&[1, 1])]);
        let a = simulate_trajectory(&sampler, &cv(&[4, 2]), 200, RngSeed::new(9, 2)).unwrap();
        let b = simulate_trajectory(&sampler, &cv(&[4, 2]), 200, RngSeed::new(9, 2)).unwrap();
        assert_eq!(a, b);
        let c = simulate_trajectory(&sampler, &cv(&[4, 2]), 200, RngSeed::new(9, 3)).unwrap();
        assert_ne!(a.states, c.states);
    }

    #[test]
    fn model_a_never_creates_type_two_from_zero() {
        let sampler = Sampler::new(&fixtures::model_a());
        let t = simulate_trajectory(&sampler, &cv(&[0, 0]), 1000, RngSeed::new(1, 0)).unwrap();
        assert!(t.states.iter().all(|s| s[1] == 0));
    }

    #[test]
    fn supercritical_input_trips_the_guard() {
        let xi = FiniteLaw::point(cv(&[1 << 16]));
        let model = GwiModel::new(alloc::vec![xi], FiniteLaw::point(cv(&[1]))).unwrap();
        let sampler = Sampler::new(&model);
        let err = simulate_trajectory(&sampler, &cv(&[1]), 10, RngSeed::default()).unwrap_err();
        assert!(matches!(err, SimError::PopulationOverflow { step: 2, .. }));
    }

    #[test]
    fn decomposition_basics() {
        let sampler = Sampler::new(&fixtures::model_c());
        let d = simulate_decomposed(&sampler, &cv(&[0]), 30, RngSeed::new(5, 0)).unwrap();
        assert!(d.y.iter().all(CountVector::is_zero));
        assert_eq!(d.total, d.v);

        let zero = Sampler::new(&fixtures::immigration_only(&[2, 1]));
        let d = simulate_decomposed(&zero, &cv(&[7, 7]), 5, RngSeed::default()).unwrap();
        assert!(d.y[1..].iter().all(CountVector::is_zero));
        assert!(d.v[1..].iter().all(|v| *v == cv(&[2, 1])));
    }

    #[test]
    fn extinction_time_edge_cases() {
        let zero = Sampler::new(&fixtures::immigration_only(&[1, 0]));
        assert_eq!(extinction_time(&zero, &cv(&[0, 0]), RngSeed::default(), 10), Some(0));
        assert_eq!(extinction_time(&zero, &cv(&[3, 1]), RngSeed::default(), 10), Some(1));
        let immortal = GwiModel::new(alloc::vec![FiniteLaw::point(cv(&[1]))], FiniteLaw::point(cv(&[0]))).unwrap();
        assert_eq!(extinction_time(&Sampler::new(&immortal), &cv(&[1]), RngSeed::default(), 50), None);
    }

    #[test]
    fn empirical_counts_add_up() {
        let sampler = Sampler::new(&fixtures::immigration_only(&[1, 0]));
        let d = empirical_stationary(&sampler, 10, 25, 4, 0).unwrap();
        assert_eq!(d.total, 100);
        assert_eq!(d.counts.len(), 1);
        assert_eq!(d.counts[&cv(&[1, 0])], 100);
    }
}
