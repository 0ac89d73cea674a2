use alloc::format;
use alloc::vec::Vec;
use num_bigint::BigUint;

use super::conv::for_each_one_step_law;
use super::ExactError;
use crate::model::{DominatingPair, GwiModel};
use crate::rational::{ratio_to_f64, to_f64};
use crate::vector::{states_within, CountVector};

/// Largest one-step law evaluated during a drift scan.
const MAX_SUPPORT: usize = 5_000_000;

/// Foster–Lyapunov scan of `V(x) = (v^T x)^r + 1` over `‖x‖ ≤ radius`.
#[derive(Debug, Clone, PartialEq)]
pub struct DriftReport {
    pub lambda: f64,
    pub v: Vec<f64>,
    pub r: u32,
    pub radius: u64,
    pub beta: f64,
    /// `max (E_x V(X_1) − (1 − β)V(x))` over the small set, 0 if it is empty.
    pub gamma: f64,
    /// Failing states with `‖x‖ ≤ radius/2`.
    pub small_set: Vec<CountVector>,
    /// Failing states with `‖x‖ > radius/2`.
    pub violations: Vec<CountVector>,
    pub scanned: usize,
}

impl DriftReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

fn lyapunov(v: &[f64], x: &CountVector, r: u32) -> f64 {
    libm::pow(x.dot(v), r as f64) + 1.0
}

/// Evaluates `E_x V(X_1) − V(x) ≤ −βV(x)` at every scanned state, with
/// `β = (1 − λ^r)/2`.
///
/// For `r = 1` the expectation is `v^T(M^T x + Eη) + 1`, computed from the
/// exact means. For `r ≥ 2` it is summed over the exact one-step law of
/// `S(x) + η`, untruncated.
pub fn drift_scan(model: &GwiModel, pair: &DominatingPair, r: u32, radius: u64) -> Result<DriftReport, ExactError> {
    if r == 0 {
        return Err(ExactError::RadiusTooSmall(format!("drift order r must be positive, got {r}")));
    }
    let v = &pair.v;
    let beta = (1.0 - libm::pow(pair.lambda, r as f64)) / 2.0;
    let mut expected: Vec<(CountVector, f64)> = Vec::new();
    if r == 1 {
        for x in states_within(model.dim(), radius) {
            let mean: Vec<f64> = model.conditional_mean(&x).iter().map(to_f64).collect();
            let e = mean.iter().zip(v).map(|(m, w)| m * w).sum::<f64>() + 1.0;
            expected.push((x, e));
        }
    } else {
        for_each_one_step_law(model, radius, false, MAX_SUPPORT, |x, law| {
            let e: f64 = law.atoms.iter().map(|(y, w)| ratio_to_f64(w, &law.den) * libm::pow(y.dot(v), r as f64)).sum();
            debug_assert_eq!(law.overflow, BigUint::from(0u32));
            expected.push((x.clone(), e + 1.0));
            Ok(())
        })?;
    }

    let mut small_set = Vec::new();
    let mut violations = Vec::new();
    let mut gamma: f64 = 0.0;
    let scanned = expected.len();
    for (x, e) in expected {
        let vx = lyapunov(v, &x, r);
        let excess = e - vx + beta * vx;
        if excess > 1e-12 * vx {
            if 2 * x.norm() <= radius {
                gamma = gamma.max(excess);
                small_set.push(x);
            } else {
                violations.push(x);
            }
        }
    }
    Ok(DriftReport { lambda: pair.lambda, v: v.clone(), r, radius, beta, gamma, small_set, violations, scanned })
}

/// [`drift_scan`] that fails when the inequality breaks in the outer shell.
pub fn drift_check(model: &GwiModel, pair: &DominatingPair, r: u32, radius: u64) -> Result<DriftReport, ExactError> {
    let report = drift_scan(model, pair, r, radius)?;
    if let Some(first) = report.violations.first() {
        return Err(ExactError::OuterShellViolation { count: report.violations.len(), first: first.clone() });
    }
    Ok(report)
}
