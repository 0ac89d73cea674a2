//! Process specification, mean matrix and spectral classification.

mod spectral;

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use nalgebra::DMatrix;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::law::{FiniteLaw, RawLaw};
use crate::vector::CountVector;

pub use spectral::{classify, dominating_pair, Criticality, CriticalityTag, DominatingPair, SpectralError};
pub use spectral::{EPSILON_SCHEDULE, POWER_ITERATION_CAP, POWER_ITERATION_TOL};

/// Default tolerance around 1 within which a spectral radius is called critical.
pub const DEFAULT_CRITICALITY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("{law}: weights sum to {sum}, not 1")]
    WeightSumNotOne { law: String, sum: BigRational },
    #[error("{law}: negative support entry {entry}")]
    NegativeSupport { law: String, entry: i64 },
    #[error("{law}: support point has dimension {found}, expected {expected}")]
    DimensionMismatch { law: String, expected: usize, found: usize },
    #[error("{law}: law has no atoms")]
    EmptyLaw { law: String },
    #[error("{law}: weight {weight} outside (0, 1]")]
    WeightOutOfRange { law: String, weight: BigRational },
    #[error("{law}: repeated support point")]
    DuplicateSupport { law: String },
    #[error("model declares p = {p} but lists {found} offspring laws")]
    OffspringCount { p: usize, found: usize },
    #[error("dimension p must be positive")]
    ZeroDimension,
}

/// Unvalidated model description.
#[derive(Debug, Clone, Default)]
pub struct RawModel {
    pub p: usize,
    pub offspring: Vec<RawLaw>,
    pub innovation: RawLaw,
}

/// A validated multitype Galton–Watson process with immigration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GwiModel {
    offspring: Vec<FiniteLaw>,
    innovation: FiniteLaw,
}

/// Validates every law exactly and checks dimensions.
pub fn validate_model(raw: &RawModel) -> Result<GwiModel, ModelError> {
    if raw.p == 0 {
        return Err(ModelError::ZeroDimension);
    }
    if raw.offspring.len() != raw.p {
        return Err(ModelError::OffspringCount { p: raw.p, found: raw.offspring.len() });
    }
    let offspring = raw
        .offspring
        .iter()
        .enumerate()
        .map(|(i, law)| FiniteLaw::from_raw(raw.p, law, &format!("offspring[{}]", i + 1)))
        .collect::<Result<Vec<_>, _>>()?;
    let innovation = FiniteLaw::from_raw(raw.p, &raw.innovation, "innovation")?;
    Ok(GwiModel { offspring, innovation })
}

impl GwiModel {
    /// Assembles a model from already validated laws.
    pub fn new(offspring: Vec<FiniteLaw>, innovation: FiniteLaw) -> Result<Self, ModelError> {
        let p = innovation.dim();
        if p == 0 {
            return Err(ModelError::ZeroDimension);
        }
        if offspring.len() != p {
            return Err(ModelError::OffspringCount { p, found: offspring.len() });
        }
        if let Some(bad) = offspring.iter().find(|l| l.dim() != p) {
            return Err(ModelError::DimensionMismatch { law: "offspring".into(), expected: p, found: bad.dim() });
        }
        Ok(Self { offspring, innovation })
    }

    pub fn dim(&self) -> usize {
        self.innovation.dim()
    }

    /// Law of `ξ_i(1,1)` (zero-based type index).
    pub fn offspring(&self, i: usize) -> &FiniteLaw {
        &self.offspring[i]
    }

    pub fn offspring_laws(&self) -> &[FiniteLaw] {
        &self.offspring
    }

    pub fn innovation(&self) -> &FiniteLaw {
        &self.innovation
    }

    pub fn innovation_mean(&self) -> Vec<BigRational> {
        self.innovation.mean()
    }

    pub fn zero_state(&self) -> CountVector {
        CountVector::zeros(self.dim())
    }

    /// `M^T x + Eη`, the exact conditional mean of `X_1` given `X_0 = x`.
    pub fn conditional_mean(&self, x: &CountVector) -> Vec<BigRational> {
        let m = mean_matrix(self);
        let mut out = self.innovation_mean();
        for (i, &xi) in x.entries().iter().enumerate() {
            if xi == 0 {
                continue;
            }
            let k = BigRational::from_integer(xi.into());
            for (j, acc) in out.iter_mut().enumerate() {
                *acc += &k * m.entry(i, j);
            }
        }
        out
    }
}

/// Exact mean matrix; row `i` is `E ξ_i(1,1)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeanMatrix {
    rows: Vec<Vec<BigRational>>,
}

pub fn mean_matrix(model: &GwiModel) -> MeanMatrix {
    MeanMatrix { rows: model.offspring.iter().map(FiniteLaw::mean).collect() }
}

impl MeanMatrix {
    pub fn from_rows(rows: Vec<Vec<BigRational>>) -> Self {
        debug_assert!(rows.iter().all(|r| r.len() == rows.len()));
        debug_assert!(rows.iter().flatten().all(|x| !x.is_negative()));
        Self { rows }
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn entry(&self, i: usize, j: usize) -> &BigRational {
        &self.rows[i][j]
    }

    pub fn rows(&self) -> &[Vec<BigRational>] {
        &self.rows
    }

    pub fn is_positive(&self, i: usize, j: usize) -> bool {
        !self.rows[i][j].is_zero()
    }

    pub fn to_f64(&self) -> DMatrix<f64> {
        let p = self.dim();
        DMatrix::from_fn(p, p, |i, j| crate::rational::to_f64(&self.rows[i][j]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn model_b_mean_matrix() {
        let m = mean_matrix(&fixtures::model_b());
        assert_eq!(m.rows(), &[alloc::vec![q(1, 5), q(1, 5)], alloc::vec![q(1, 5), q(1, 5)]]);
    }

    #[test]
    fn model_a_mean_matrix() {
        // ξ_2 is the product of two independent Bernoulli(1/2) components:
        // atoms (0,0),(1,0),(0,1),(1,1) each 1/4, so E ξ_2 = (1/2, 1/2).
        let m = mean_matrix(&fixtures::model_a());
        assert_eq!(m.rows(), &[alloc::vec![q(1, 2), q(0, 1)], alloc::vec![q(1, 2), q(1, 2)]]);
    }

    #[test]
    fn zero_offspring_gives_zero_matrix() {
        let m = mean_matrix(&fixtures::immigration_only(&[1, 0]));
        assert!(m.rows().iter().flatten().all(Zero::is_zero));
    }

    #[test]
    fn validate_model_c() {
        let raw = RawModel {
            p: 1,
            offspring: alloc::vec![RawLaw::new(alloc::vec![(alloc::vec![0], q(1, 2)), (alloc::vec![1], q(1, 2))])],
            innovation: RawLaw::new(alloc::vec![(alloc::vec![0], q(1, 2)), (alloc::vec![1], q(1, 2))]),
        };
        assert_eq!(validate_model(&raw).unwrap(), fixtures::model_c());
    }

    #[test]
    fn offspring_count_checked() {
        let raw = RawModel { p: 2, offspring: alloc::vec![], innovation: RawLaw::default() };
        assert_eq!(validate_model(&raw), Err(ModelError::OffspringCount { p: 2, found: 0 }));
    }
}
