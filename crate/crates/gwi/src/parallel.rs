use gwi_core::simulate::{replica_counts, EmpiricalDistribution, Sampler, SimError};
use rayon::prelude::*;
use thiserror::Error;

pub const THREADS_VAR: &str = "GWI_THREADS";

#[derive(Debug, Error)]
pub enum PoolError {
    #[error("{THREADS_VAR} must be a positive integer, got \"{0}\"")]
    BadThreads(String),
    #[error("cannot start worker threads: {0}")]
    Build(#[from] rayon::ThreadPoolBuildError),
}

/// Worker count from `GWI_THREADS`; `None` means all available cores.
pub fn threads_from_env() -> Result<Option<usize>, PoolError> {
    match std::env::var(THREADS_VAR) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(PoolError::BadThreads(v)),
        },
    }
}

pub fn pool(threads: Option<usize>) -> Result<rayon::ThreadPool, PoolError> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        b = b.num_threads(n);
    }
    Ok(b.build()?)
}

/// Replicas run on the pool; counts are merged in replica order, so the
/// result matches the sequential version for any thread count.
pub fn empirical_stationary(
    pool: &rayon::ThreadPool,
    sampler: &Sampler,
    burnin: usize,
    steps: usize,
    replicas: usize,
    seed: u64,
) -> Result<EmpiricalDistribution, SimError> {
    let counts = pool.install(|| {
        (0..replicas as u64)
            .into_par_iter()
            .map(|r| replica_counts(sampler, burnin, steps, seed, r))
            .collect::<Result<Vec<_>, _>>()
    })?;
    let mut dist = EmpiricalDistribution::empty(burnin, steps, replicas);
    for c in counts {
        dist.merge_counts(c);
    }
    Ok(dist)
}
