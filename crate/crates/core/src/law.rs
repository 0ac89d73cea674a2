use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::model::ModelError;
use crate::vector::CountVector;

/// A finitely supported probability law on `Z_+^p` with exact weights.
///
/// Atoms are kept sorted by support point; weights lie in `(0, 1]` and sum to
/// exactly one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteLaw {
    dim: usize,
    atoms: Vec<(CountVector, BigRational)>,
}

/// Unvalidated law as read from an input file.
#[derive(Debug, Clone, Default)]
pub struct RawLaw {
    pub atoms: Vec<(Vec<i64>, BigRational)>,
}

impl RawLaw {
    pub fn new(atoms: Vec<(Vec<i64>, BigRational)>) -> Self {
        Self { atoms }
    }
}

impl FiniteLaw {
    /// Validates a raw law of dimension `dim`. `what` names the law in errors.
    pub fn from_raw(dim: usize, raw: &RawLaw, what: &str) -> Result<Self, ModelError> {
        if raw.atoms.is_empty() {
            return Err(ModelError::EmptyLaw { law: what.into() });
        }
        let mut merged: BTreeMap<CountVector, BigRational> = BTreeMap::new();
        for (support, weight) in &raw.atoms {
            if support.len() != dim {
                return Err(ModelError::DimensionMismatch {
                    law: what.into(),
                    expected: dim,
                    found: support.len(),
                });
            }
            if let Some(&bad) = support.iter().find(|&&c| c < 0) {
                return Err(ModelError::NegativeSupport { law: what.into(), entry: bad });
            }
            if !weight.is_positive() || *weight > BigRational::one() {
                return Err(ModelError::WeightOutOfRange { law: what.into(), weight: weight.clone() });
            }
            let point = CountVector::new(support.iter().map(|&c| c as u64).collect());
            if merged.insert(point, weight.clone()).is_some() {
                return Err(ModelError::DuplicateSupport { law: what.into() });
            }
        }
        let total: BigRational = merged.values().sum();
        if !total.is_one() {
            return Err(ModelError::WeightSumNotOne { law: what.into(), sum: total });
        }
        Ok(Self { dim, atoms: merged.into_iter().collect() })
    }

    /// Builds a law from `(support, num, den)` triples; panics on invalid input.
    /// Intended for fixtures and tests.
    pub fn from_triples(dim: usize, atoms: &[(&[u64], i64, i64)]) -> Self {
        let raw = RawLaw::new(
            atoms
                .iter()
                .map(|(s, n, d)| (s.iter().map(|&c| c as i64).collect(), BigRational::new((*n).into(), (*d).into())))
                .collect(),
        );
        Self::from_raw(dim, &raw, "fixture").expect("invalid fixture law")
    }

    /// Point mass at `support`.
    pub fn point(support: CountVector) -> Self {
        Self { dim: support.dim(), atoms: alloc::vec![(support, BigRational::one())] }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn atoms(&self) -> &[(CountVector, BigRational)] {
        &self.atoms
    }

    pub fn support(&self) -> impl Iterator<Item = &CountVector> {
        self.atoms.iter().map(|(s, _)| s)
    }

    pub fn is_degenerate(&self) -> bool {
        self.atoms.len() == 1
    }

    /// Exact mean vector.
    pub fn mean(&self) -> Vec<BigRational> {
        let mut m = alloc::vec![BigRational::zero(); self.dim];
        for (s, w) in &self.atoms {
            for (acc, &c) in m.iter_mut().zip(s.entries()) {
                *acc += w * BigRational::from_integer(BigInt::from(c));
            }
        }
        m
    }

    pub fn max_norm(&self) -> u64 {
        self.support().map(CountVector::norm).max().unwrap_or(0)
    }

    /// Least common denominator of the weights together with the integer
    /// numerators over it.
    pub(crate) fn integer_weights(&self) -> (BigUint, Vec<BigUint>) {
        let mut den = BigInt::one();
        for (_, w) in &self.atoms {
            den = den.lcm(w.denom());
        }
        let nums = self
            .atoms
            .iter()
            .map(|(_, w)| {
                let scaled = w * BigRational::from_integer(den.clone());
                scaled.to_integer().magnitude().clone()
            })
            .collect();
        (den.magnitude().clone(), nums)
    }

    pub(crate) fn float_weights(&self) -> Vec<f64> {
        self.atoms.iter().map(|(_, w)| crate::rational::to_f64(w)).collect()
    }
}
