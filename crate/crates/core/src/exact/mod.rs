//! Exact analysis on a truncated state space `{x : ‖x‖ ≤ radius}`.
//!
//! Transition probabilities are exact rationals; mass that would leave the
//! truncation is recorded per state as escape rather than reflected or
//! absorbed, so truncation error stays measurable. Linear solves and distance
//! computations run in floating point on top of the exact kernel.

mod chain;
mod class;
mod conv;
mod distribution;
mod drift;
mod rates;
mod stationary;

use alloc::string::String;
use thiserror::Error;

use crate::model::SpectralError;
use crate::vector::CountVector;

pub use chain::{build_truncated_chain, ChainOptions, KernelRow, TruncatedChain};
pub use class::{communication_class, ClassReport};
pub use distribution::{
    fr_distance, fr_truncation_bound, nstep_distribution, nstep_distribution_exact, total_variation, DistributionVector,
    ExactDistribution, EXACT_MODE_MAX_STEPS,
};
pub use drift::{drift_check, drift_scan, DriftReport};
pub use rates::{rate_fit, rate_fit_on, FitStatus, RateFit, RateOptions};
pub use stationary::{stationary_exact, Stationary, LEAK_TOLERANCE};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExactError {
    #[error("truncation would hold {states} states, above the cap of {cap}")]
    StateSpaceTooLarge { states: u64, cap: usize },
    #[error("one-step law from {state} has {size} atoms, above the cap of {cap}")]
    SupportBlowup { state: CountVector, size: usize, cap: usize },
    #[error("radius {radius} is below the largest innovation norm {needed}")]
    RadiusBelowInnovation { radius: u64, needed: u64 },
    #[error("radius too small: {0}")]
    RadiusTooSmall(String),
    #[error("no unique closed class reachable from 0 ({terminal} terminal components in the truncation)")]
    NoClosedClass { terminal: usize },
    #[error("stationary solve failed: singular system on a closed class")]
    SingularSolve,
    #[error("state {0} lies outside the truncation")]
    OutsideTruncation(CountVector),
    #[error("exact rational mode supports at most {max} steps, got {n}")]
    ExactModeHorizon { n: usize, max: usize },
    #[error("distances show no decay over the fit window [{from}, {to}]")]
    DistancesNotDecreasing { from: usize, to: usize },
    #[error("drift inequality fails at {count} outer-shell states, first at {first}")]
    OuterShellViolation { count: usize, first: CountVector },
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}
