use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::Zero;

use super::conv::for_each_one_step_law;
use super::ExactError;
use crate::model::GwiModel;
use crate::rational::ratio_to_f64;
use crate::vector::{count_states_within, CountVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChainOptions {
    pub max_states: usize,
    /// Largest number of atoms allowed in any intermediate one-step law.
    pub max_row_support: usize,
}

impl Default for ChainOptions {
    fn default() -> Self {
        Self { max_states: 200_000, max_row_support: 1_000_000 }
    }
}

/// Exact transition probabilities out of one state: `entries[k].1 / den`
/// into state `entries[k].0`, plus `escape / den` beyond the radius.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KernelRow {
    pub den: BigUint,
    pub entries: Vec<(usize, BigUint)>,
    pub escape: BigUint,
}

/// One-step kernel of the process restricted to `‖x‖ ≤ radius`.
#[derive(Debug, Clone)]
pub struct TruncatedChain {
    p: usize,
    radius: u64,
    states: Vec<CountVector>,
    index: BTreeMap<CountVector, usize>,
    rows: Vec<KernelRow>,
    float_rows: Vec<Vec<(usize, f64)>>,
    escape: Vec<f64>,
}

pub fn build_truncated_chain(
    model: &GwiModel,
    radius: u64,
    options: &ChainOptions,
) -> Result<TruncatedChain, ExactError> {
    let p = model.dim();
    let needed = model.innovation().max_norm();
    if radius < needed {
        return Err(ExactError::RadiusBelowInnovation { radius, needed });
    }
    let n = count_states_within(p, radius);
    if n > options.max_states as u64 {
        return Err(ExactError::StateSpaceTooLarge { states: n, cap: options.max_states });
    }
    let states = crate::vector::states_within(p, radius);
    let index: BTreeMap<CountVector, usize> = states.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect();
    let mut rows = Vec::with_capacity(states.len());
    for_each_one_step_law(model, radius, true, options.max_row_support, |x, law| {
        debug_assert_eq!(&states[rows.len()], x);
        let entries = law.atoms.into_iter().map(|(y, w)| (index[&y], w)).collect();
        rows.push(KernelRow { den: law.den, entries, escape: law.overflow });
        Ok(())
    })?;
    let float_rows = rows
        .iter()
        .map(|r| r.entries.iter().map(|(j, w)| (*j, ratio_to_f64(w, &r.den))).collect())
        .collect();
    let escape = rows.iter().map(|r| ratio_to_f64(&r.escape, &r.den)).collect();
    Ok(TruncatedChain { p, radius, states, index, rows, float_rows, escape })
}

fn rational(num: &BigUint, den: &BigUint) -> BigRational {
    BigRational::new(BigInt::from(num.clone()), BigInt::from(den.clone()))
}

impl TruncatedChain {
    pub fn dim(&self) -> usize {
        self.p
    }

    pub fn radius(&self) -> u64 {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[CountVector] {
        &self.states
    }

    pub fn state(&self, i: usize) -> &CountVector {
        &self.states[i]
    }

    pub fn index_of(&self, x: &CountVector) -> Option<usize> {
        self.index.get(x).copied()
    }

    pub(crate) fn require_index(&self, x: &CountVector) -> Result<usize, ExactError> {
        if x.dim() != self.p {
            return Err(ExactError::OutsideTruncation(x.clone()));
        }
        self.index_of(x).ok_or_else(|| ExactError::OutsideTruncation(x.clone()))
    }

    pub fn row(&self, i: usize) -> &KernelRow {
        &self.rows[i]
    }

    pub fn float_row(&self, i: usize) -> &[(usize, f64)] {
        &self.float_rows[i]
    }

    pub fn escape(&self, i: usize) -> f64 {
        self.escape[i]
    }

    pub fn escape_exact(&self, i: usize) -> BigRational {
        rational(&self.rows[i].escape, &self.rows[i].den)
    }

    /// Reduced exact probabilities of row `i`.
    pub fn row_exact(&self, i: usize) -> Vec<(usize, BigRational)> {
        let r = &self.rows[i];
        r.entries.iter().map(|(j, w)| (*j, rational(w, &r.den))).collect()
    }

    /// `P(x_i → x_j)` as an exact rational.
    pub fn probability(&self, i: usize, j: usize) -> BigRational {
        let r = &self.rows[i];
        r.entries
            .iter()
            .find(|(k, _)| *k == j)
            .map_or_else(BigRational::zero, |(_, w)| rational(w, &r.den))
    }

    /// Row sum plus escape equals one, checked on the integer numerators.
    pub fn row_is_stochastic(&self, i: usize) -> bool {
        let r = &self.rows[i];
        let total: BigUint = r.entries.iter().map(|(_, w)| w).sum::<BigUint>() + &r.escape;
        total == r.den
    }

    pub fn successors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.rows[i].entries.iter().map(|(j, _)| *j)
    }

    /// Sparse triplets `x y num/den`, one per positive transition, rows in
    /// state order.
    pub fn triplets(&self) -> Vec<(CountVector, CountVector, BigRational)> {
        let mut out = Vec::new();
        for (i, x) in self.states.iter().enumerate() {
            for (j, q) in self.row_exact(i) {
                out.push((x.clone(), self.states[j].clone(), q));
            }
        }
        out
    }

    /// `μ ↦ μP` on dense float vectors; returns the mass that escaped.
    pub(crate) fn push_forward(&self, mu: &[f64], out: &mut [f64]) -> f64 {
        out.iter_mut().for_each(|x| *x = 0.0);
        let mut escaped = 0.0;
        for (i, &m) in mu.iter().enumerate() {
            if m == 0.0 {
                continue;
            }
            for &(j, w) in &self.float_rows[i] {
                out[j] += m * w;
            }
            escaped += m * self.escape[i];
        }
        escaped
    }

    pub(crate) fn describe(&self) -> alloc::string::String {
        format!("p = {}, radius = {}, {} states", self.p, self.radius, self.states.len())
    }
}
