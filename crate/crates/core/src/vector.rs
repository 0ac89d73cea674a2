use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, AddAssign, Index};

/// Population counts per type, a point of `Z_+^p`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct CountVector(Vec<u64>);

impl CountVector {
    pub fn new(entries: Vec<u64>) -> Self {
        Self(entries)
    }

    pub fn zeros(p: usize) -> Self {
        Self(alloc::vec![0; p])
    }

    /// Unit vector `e_i`.
    pub fn unit(p: usize, i: usize) -> Self {
        let mut v = Self::zeros(p);
        v.0[i] = 1;
        v
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// `‖x‖ = x_1 + … + x_p`.
    pub fn norm(&self) -> u64 {
        self.0.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    pub fn entries(&self) -> &[u64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<u64> {
        self.0
    }

    pub fn max_entry(&self) -> u64 {
        self.0.iter().copied().max().unwrap_or(0)
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.0.iter().map(|&c| c as f64).collect()
    }

    /// `v^T x` for a real weight vector.
    pub fn dot(&self, weights: &[f64]) -> f64 {
        self.0.iter().zip(weights).map(|(&c, &w)| c as f64 * w).sum()
    }
}

impl From<Vec<u64>> for CountVector {
    fn from(v: Vec<u64>) -> Self {
        Self(v)
    }
}

impl Index<usize> for CountVector {
    type Output = u64;

    fn index(&self, i: usize) -> &u64 {
        &self.0[i]
    }
}

impl AddAssign<&CountVector> for CountVector {
    fn add_assign(&mut self, rhs: &CountVector) {
        debug_assert_eq!(self.dim(), rhs.dim());
        for (a, b) in self.0.iter_mut().zip(&rhs.0) {
            *a += *b;
        }
    }
}

impl Add<&CountVector> for &CountVector {
    type Output = CountVector;

    fn add(self, rhs: &CountVector) -> CountVector {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

/// Formats as `a,b,...`, the state-string form used in reports.
impl fmt::Display for CountVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

/// All states with `‖x‖ ≤ radius` in lexicographic order.
pub fn states_within(p: usize, radius: u64) -> Vec<CountVector> {
    fn walk(p: usize, depth: usize, remaining: u64, cur: &mut Vec<u64>, out: &mut Vec<CountVector>) {
        if depth == p {
            out.push(CountVector(cur.clone()));
            return;
        }
        for k in 0..=remaining {
            cur[depth] = k;
            walk(p, depth + 1, remaining - k, cur, out);
        }
        cur[depth] = 0;
    }
    let mut out = Vec::new();
    let mut cur = alloc::vec![0; p];
    walk(p, 0, radius, &mut cur, &mut out);
    out
}

/// Number of states with `‖x‖ ≤ radius` in dimension `p`, i.e. `C(radius + p, p)`,
/// saturating on overflow.
pub fn count_states_within(p: usize, radius: u64) -> u64 {
    let mut acc: u128 = 1;
    for k in 1..=p as u128 {
        acc = acc * (radius as u128 + k) / k;
        if acc > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    acc as u64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumeration_matches_binomial_count() {
        for p in 1..4 {
            for r in 0..7 {
                let states = states_within(p, r);
                assert_eq!(states.len() as u64, count_states_within(p, r));
                assert!(states.windows(2).all(|w| w[0] < w[1]));
                assert!(states.iter().all(|s| s.norm() <= r));
            }
        }
    }

    #[test]
    fn display_is_comma_separated() {
        assert_eq!(CountVector::new(alloc::vec![3, 0, 12]).to_string(), "3,0,12");
    }
}
