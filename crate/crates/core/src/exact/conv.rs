//! Exact convolution of finite laws over a common integer denominator.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use num_bigint::BigUint;
use num_traits::{One, Zero};

use super::ExactError;
use crate::law::FiniteLaw;
use crate::model::GwiModel;
use crate::vector::CountVector;

/// Law with weights `atoms[x] / den`. Mass that landed beyond the truncation
/// radius is kept in `overflow`, so atoms plus overflow always sum to `den`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct IntLaw {
    pub den: BigUint,
    pub atoms: BTreeMap<CountVector, BigUint>,
    pub overflow: BigUint,
}

impl IntLaw {
    pub fn from_law(law: &FiniteLaw) -> Self {
        let (den, nums) = law.integer_weights();
        let atoms = law.support().cloned().zip(nums).collect();
        Self { den, atoms, overflow: BigUint::zero() }
    }

    pub fn point(x: CountVector) -> Self {
        let mut atoms = BTreeMap::new();
        atoms.insert(x, BigUint::one());
        Self { den: BigUint::one(), atoms, overflow: BigUint::zero() }
    }

    /// Law of `A + B` for independent `A ~ self`, `B ~ other`. Atoms with norm
    /// above `radius` are folded into the overflow mass.
    pub fn convolve(&self, other: &IntLaw, radius: Option<u64>) -> IntLaw {
        let den = &self.den * &other.den;
        let mut overflow = &self.overflow * &other.den + &self.den * &other.overflow - &self.overflow * &other.overflow;
        let mut atoms: BTreeMap<CountVector, BigUint> = BTreeMap::new();
        for (a, wa) in &self.atoms {
            for (b, wb) in &other.atoms {
                let s = a + b;
                let w = wa * wb;
                if radius.is_some_and(|r| s.norm() > r) {
                    overflow += w;
                } else {
                    *atoms.entry(s).or_insert_with(BigUint::zero) += w;
                }
            }
        }
        IntLaw { den, atoms, overflow }
    }
}

/// Calls `emit(x, law of S(x) + η)` for every `x` with `‖x‖ ≤ radius`, in
/// lexicographic order of `x`.
///
/// `S(x)` is built incrementally: the law for `(x_1, …, x_d, 0, …)` is the
/// law for `(x_1, …, x_d − 1, 0, …)` convolved once more with `ξ_d`, so each
/// prefix is convolved exactly once. With `truncate`, atoms beyond `radius`
/// are folded into overflow at every stage.
pub(crate) fn for_each_one_step_law<F>(
    model: &GwiModel,
    radius: u64,
    truncate: bool,
    max_support: usize,
    mut emit: F,
) -> Result<(), ExactError>
where
    F: FnMut(&CountVector, IntLaw) -> Result<(), ExactError>,
{
    let p = model.dim();
    let offspring: Vec<IntLaw> = model.offspring_laws().iter().map(IntLaw::from_law).collect();
    let innovation = IntLaw::from_law(model.innovation());
    let cut = truncate.then_some(radius);
    let mut x = alloc::vec![0u64; p];

    #[allow(clippy::too_many_arguments)]
    fn walk<F>(
        depth: usize,
        prefix: IntLaw,
        remaining: u64,
        x: &mut Vec<u64>,
        offspring: &[IntLaw],
        innovation: &IntLaw,
        cut: Option<u64>,
        max_support: usize,
        emit: &mut F,
    ) -> Result<(), ExactError>
    where
        F: FnMut(&CountVector, IntLaw) -> Result<(), ExactError>,
    {
        if depth == offspring.len() {
            let state = CountVector::new(x.clone());
            let row = prefix.convolve(innovation, cut);
            if row.atoms.len() > max_support {
                return Err(ExactError::SupportBlowup { state, size: row.atoms.len(), cap: max_support });
            }
            return emit(&state, row);
        }
        let mut law = prefix;
        for k in 0..=remaining {
            if k > 0 {
                law = law.convolve(&offspring[depth], cut);
                if law.atoms.len() > max_support {
                    x[depth] = k;
                    return Err(ExactError::SupportBlowup {
                        state: CountVector::new(x.clone()),
                        size: law.atoms.len(),
                        cap: max_support,
                    });
                }
            }
            x[depth] = k;
            walk(depth + 1, law.clone(), remaining - k, x, offspring, innovation, cut, max_support, emit)?;
        }
        x[depth] = 0;
        Ok(())
    }

    walk(0, IntLaw::point(CountVector::zeros(p)), radius, &mut x, &offspring, &innovation, cut, max_support, &mut emit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn model_c_row_from_two() {
        // Binomial(2,1/2) + Bernoulli(1/2) = (1,3,3,1)/8 on 0..3.
        let mut rows = BTreeMap::new();
        for_each_one_step_law(&fixtures::model_c(), 2, false, 1000, |x, law| {
            rows.insert(x.clone(), law);
            Ok(())
        })
        .unwrap();
        let law = &rows[&CountVector::new(alloc::vec![2])];
        assert_eq!(law.den, BigUint::from(8u32));
        let nums: Vec<u32> = law.atoms.values().map(|n| n.try_into().unwrap()).collect();
        assert_eq!(nums, alloc::vec![1, 3, 3, 1]);
    }

    #[test]
    fn truncation_moves_mass_to_overflow() {
        let xi = IntLaw::from_law(fixtures::model_c().offspring(0));
        let two = xi.convolve(&xi, Some(1));
        assert_eq!(two.den, BigUint::from(4u32));
        assert_eq!(two.overflow, BigUint::from(1u32));
        let three = two.convolve(&xi, Some(1));
        let kept: BigUint = three.atoms.values().sum();
        assert_eq!(kept + &three.overflow, three.den);
    }
}
