use alloc::format;
use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};

use super::class::class_outflow;
use super::{ClassReport, DistributionVector, ExactError, TruncatedChain};

/// Largest stationary mass allowed to leave the truncation per step.
pub const LEAK_TOLERANCE: f64 = 1e-12;

const DENSE_LIMIT: usize = 2000;
const POWER_TOL: f64 = 1e-13;
const POWER_CAP: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct Stationary {
    pub distribution: DistributionVector,
    /// `‖πP − π‖_1` against the truncated kernel, escape included.
    pub residual: f64,
    /// `Σ_x π(x)·(probability of leaving the class from x)`.
    pub leak: f64,
    pub dense: bool,
}

/// Solves `πP = π` on the class. Escape mass of class states is folded into
/// their self-loops for the solve, then the residual is measured against the
/// true truncated kernel.
pub fn stationary_exact(chain: &TruncatedChain, class: &ClassReport) -> Result<Stationary, ExactError> {
    let k = class.len();
    let pos = |i: usize| class.indices.binary_search(&i).ok();
    let pi_local = if k < DENSE_LIMIT { dense_solve(chain, class, &pos)? } else { power_solve(chain, class, &pos)? };

    let mut pi = alloc::vec![0.0; chain.len()];
    for (a, &i) in class.indices.iter().enumerate() {
        pi[i] = pi_local[a];
    }
    let mut next = alloc::vec![0.0; chain.len()];
    chain.push_forward(&pi, &mut next);
    let leak: f64 = class.indices.iter().map(|&i| pi[i] * class_outflow(chain, i, |j| pos(j).is_some())).sum();
    let residual: f64 = pi.iter().zip(&next).map(|(a, b)| libm::fabs(a - b)).sum();
    if leak > LEAK_TOLERANCE {
        return Err(ExactError::RadiusTooSmall(format!(
            "stationary mass {leak:e} per step escapes {} (tolerance {LEAK_TOLERANCE:e})",
            chain.describe()
        )));
    }
    Ok(Stationary { distribution: DistributionVector::from_dense(chain, &pi, 0.0), residual, leak, dense: k < DENSE_LIMIT })
}

fn dense_solve(
    chain: &TruncatedChain,
    class: &ClassReport,
    pos: &dyn Fn(usize) -> Option<usize>,
) -> Result<Vec<f64>, ExactError> {
    let k = class.len();
    // A = Q^T − I with the last equation replaced by Σπ = 1.
    let mut a = DMatrix::<f64>::zeros(k, k);
    for (col, &i) in class.indices.iter().enumerate() {
        for &(j, w) in chain.float_row(i) {
            if let Some(row) = pos(j) {
                a[(row, col)] += w;
            }
        }
        a[(col, col)] += class_outflow(chain, i, |j| pos(j).is_some()) - 1.0;
    }
    for col in 0..k {
        a[(k - 1, col)] = 1.0;
    }
    let mut b = DVector::<f64>::zeros(k);
    b[k - 1] = 1.0;
    let lu = a.clone().lu();
    let mut x = lu.solve(&b).ok_or(ExactError::SingularSolve)?;
    for _ in 0..2 {
        let r = &b - &a * &x;
        match lu.solve(&r) {
            Some(dx) => x += dx,
            None => break,
        }
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(ExactError::SingularSolve);
    }
    let mut pi: Vec<f64> = x.iter().map(|&v| v.max(0.0)).collect();
    let total: f64 = pi.iter().sum();
    if total <= 0.0 {
        return Err(ExactError::SingularSolve);
    }
    pi.iter_mut().for_each(|v| *v /= total);
    Ok(pi)
}

fn power_solve(
    chain: &TruncatedChain,
    class: &ClassReport,
    pos: &dyn Fn(usize) -> Option<usize>,
) -> Result<Vec<f64>, ExactError> {
    let k = class.len();
    let mut pi = alloc::vec![1.0 / k as f64; k];
    let mut next = alloc::vec![0.0; k];
    for _ in 0..POWER_CAP {
        next.iter_mut().for_each(|v| *v = 0.0);
        for (a, &i) in class.indices.iter().enumerate() {
            for &(j, w) in chain.float_row(i) {
                if let Some(b) = pos(j) {
                    next[b] += pi[a] * w;
                }
            }
            next[a] += pi[a] * class_outflow(chain, i, |j| pos(j).is_some());
        }
        let total: f64 = next.iter().sum();
        next.iter_mut().for_each(|v| *v /= total);
        let change: f64 = pi.iter().zip(&next).map(|(a, b)| libm::fabs(a - b)).sum();
        core::mem::swap(&mut pi, &mut next);
        if change < POWER_TOL {
            return Ok(pi);
        }
    }
    Err(ExactError::SingularSolve)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{build_truncated_chain, communication_class, ChainOptions};
    use crate::fixtures;
    use crate::vector::CountVector;

    #[test]
    fn fixed_point_class_gives_point_mass() {
        let model = fixtures::immigration_only(&[1, 0]);
        let chain = build_truncated_chain(&model, 3, &ChainOptions::default()).unwrap();
        let class = communication_class(&chain, &model).unwrap();
        let st = stationary_exact(&chain, &class).unwrap();
        assert_eq!(st.distribution.probs.len(), 1);
        assert_eq!(st.distribution.probability(&CountVector::new(alloc::vec![1, 0])), 1.0);
        assert_eq!(st.residual, 0.0);
    }

    #[test]
    fn model_c_stationary_mean_is_one() {
        // Stationary mean solves m = m/2 + 1/2.
        let model = fixtures::model_c();
        let chain = build_truncated_chain(&model, 40, &ChainOptions::default()).unwrap();
        let class = communication_class(&chain, &model).unwrap();
        let st = stationary_exact(&chain, &class).unwrap();
        assert!((st.distribution.moment(1.0) - 1.0).abs() < 1e-9);
        assert!(st.residual <= 1e-12, "residual {}", st.residual);
    }

    #[test]
    fn small_radius_leaks_too_much() {
        let model = fixtures::model_c();
        let chain = build_truncated_chain(&model, 3, &ChainOptions::default()).unwrap();
        let class = communication_class(&chain, &model).unwrap();
        assert!(matches!(stationary_exact(&chain, &class), Err(ExactError::RadiusTooSmall(_))));
    }
}
