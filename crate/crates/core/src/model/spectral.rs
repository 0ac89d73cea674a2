use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use super::MeanMatrix;
use crate::graph::tarjan_scc;

pub const POWER_ITERATION_CAP: usize = 100_000;
pub const POWER_ITERATION_TOL: f64 = 1e-13;

/// `ε` values tried, in order, when perturbing `M` into a positive matrix.
pub const EPSILON_SCHEDULE: [f64; 12] = [1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8, 1e-9, 1e-10, 1e-11, 1e-12];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectralError {
    #[error("power iteration did not converge after {iterations} iterations (last growth estimate {last})")]
    NonConvergence { iterations: usize, last: f64 },
    #[error("no epsilon down to 1e-12 gives Perron root < 1 (smallest root {smallest_root}); mean matrix is not subcritical")]
    SubcriticalityViolated { smallest_root: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CriticalityTag {
    Subcritical,
    Critical,
    Supercritical,
}

impl CriticalityTag {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Subcritical => "subcritical",
            Self::Critical => "critical",
            Self::Supercritical => "supercritical",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Criticality {
    pub tag: CriticalityTag,
    pub rho: f64,
    pub tolerance: f64,
}

/// `(λ, v)` with `v ≥ 1` componentwise, `λ < 1` and `Mv ≤ λv`.
#[derive(Debug, Clone, PartialEq)]
pub struct DominatingPair {
    pub lambda: f64,
    pub v: Vec<f64>,
    /// The accepted perturbation `ε` with `ρ(M + εJ) < 1`.
    pub epsilon: f64,
}

impl DominatingPair {
    /// `max_i ((Mv)_i − λ v_i)`; non-positive for a valid pair.
    pub fn max_violation(&self, m: &DMatrix<f64>) -> f64 {
        let v = DVector::from_column_slice(&self.v);
        let mv = m * &v;
        (0..self.v.len()).map(|i| mv[i] - self.lambda * self.v[i]).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Perron root and vector of a non-negative primitive matrix by power
/// iteration from the all-ones vector. The vector is returned with unit sum.
pub(crate) fn perron(a: &DMatrix<f64>) -> Result<(f64, DVector<f64>), SpectralError> {
    let n = a.nrows();
    let mut x = DVector::from_element(n, 1.0 / n as f64);
    let mut prev = f64::NAN;
    for _ in 0..POWER_ITERATION_CAP {
        let y = a * &x;
        let growth = y.sum();
        if growth == 0.0 {
            return Ok((0.0, x));
        }
        x = y / growth;
        if libm::fabs(growth - prev) < POWER_ITERATION_TOL {
            return Ok((growth, x));
        }
        prev = growth;
    }
    Err(SpectralError::NonConvergence { iterations: POWER_ITERATION_CAP, last: prev })
}

/// Spectral radius of a non-negative matrix.
///
/// The matrix is split into irreducible diagonal blocks (strongly connected
/// components of its positive pattern); each block `B` is power-iterated as
/// `B + I` and the radius is the largest block radius.
pub(crate) fn spectral_radius(m: &DMatrix<f64>) -> Result<f64, SpectralError> {
    let p = m.nrows();
    let (ncomp, comp) = tarjan_scc(p, |i| (0..p).filter(move |&j| m[(i, j)] > 0.0).collect::<Vec<_>>());
    let mut rho: f64 = 0.0;
    for c in 0..ncomp {
        let idx: Vec<usize> = (0..p).filter(|&i| comp[i] == c).collect();
        let block_rho = if idx.len() == 1 {
            m[(idx[0], idx[0])]
        } else {
            let k = idx.len();
            let shifted = DMatrix::from_fn(k, k, |a, b| m[(idx[a], idx[b])] + if a == b { 1.0 } else { 0.0 });
            perron(&shifted)?.0 - 1.0
        };
        rho = rho.max(block_rho);
    }
    Ok(rho)
}

pub fn classify(m: &MeanMatrix, tolerance: f64) -> Result<Criticality, SpectralError> {
    let rho = spectral_radius(&m.to_f64())?;
    let tag = if rho < 1.0 - tolerance {
        CriticalityTag::Subcritical
    } else if rho > 1.0 + tolerance {
        CriticalityTag::Supercritical
    } else {
        CriticalityTag::Critical
    };
    Ok(Criticality { tag, rho, tolerance })
}

/// Dominating pair from the Perron pair of the positive matrix `M + εJ`, for
/// the first `ε` in [`EPSILON_SCHEDULE`] whose Perron root is below one.
pub fn dominating_pair(m: &MeanMatrix) -> Result<DominatingPair, SpectralError> {
    let mf = m.to_f64();
    let p = mf.nrows();
    let mut smallest_root = f64::INFINITY;
    for &eps in EPSILON_SCHEDULE.iter() {
        let a = mf.add_scalar(eps);
        let (root, vec) = perron(&a)?;
        smallest_root = smallest_root.min(root);
        if root >= 1.0 {
            continue;
        }
        let min = vec.iter().copied().fold(f64::INFINITY, f64::min);
        let v: DVector<f64> = vec / min;
        // Collatz–Wielandt upper bound: (M + εJ)v ≤ λv holds exactly for this λ.
        let av = &a * &v;
        let lambda = (0..p).map(|i| av[i] / v[i]).fold(0.0, f64::max);
        if lambda < 1.0 {
            let v: Vec<f64> = v.iter().map(|&c| c.max(1.0)).collect();
            return Ok(DominatingPair { lambda, v, epsilon: eps });
        }
    }
    Err(SpectralError::SubcriticalityViolated { smallest_root })
}
