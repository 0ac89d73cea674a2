use alloc::vec::Vec;

use super::{
    build_truncated_chain, communication_class, stationary_exact, ChainOptions, ClassReport, ExactError, Stationary,
    TruncatedChain,
};
use crate::model::GwiModel;
use crate::vector::CountVector;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateOptions {
    /// Fit window starts at `horizon · window_start`.
    pub window_start: f64,
    /// `a_1 = ρ̂^{−rate_fraction}`: the share of the exponential room
    /// `(1, 1/ρ̂)` claimed on the log scale.
    pub rate_fraction: f64,
    /// Distances below this are left out of the fit.
    pub floor: f64,
}

impl Default for RateOptions {
    fn default() -> Self {
        Self { window_start: 0.5, rate_fraction: 0.25, floor: 1e-14 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitStatus {
    Fitted,
    /// Distances fall below the floor before two points of monotone decay
    /// are available to fit.
    ExactConvergence,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateFit {
    pub r: u32,
    pub x0: CountVector,
    pub x0_in_class: bool,
    pub horizon: usize,
    /// `d_n = ‖π_x^{(n)} − π‖_{F_r}` for `n = 0..=horizon`.
    pub distances: Vec<f64>,
    /// `|E_x ‖X_n‖^α − E‖X̃‖^α|` for `α = 0..=r`, indexed `[α][n]`.
    pub moment_gaps: Vec<Vec<f64>>,
    pub status: FitStatus,
    pub window: (usize, usize),
    pub points_used: usize,
    pub rho_hat: Option<f64>,
    /// Smallest `A` with `d_n ≤ A ρ̂^n` on the fitted points.
    pub envelope: Option<f64>,
    pub a1: Option<f64>,
    /// `Σ_{k≤n} a_1^k d_k` (plain sums of `d_k` when no rate was fitted).
    pub partial_sums: Vec<f64>,
    /// Geometric bound on `Σ_{n>horizon} a_1^n d_n` from the envelope.
    pub tail_bound: f64,
    /// `(Σ_{n≤horizon} a_1^n d_n + tail_bound) / (‖x‖^r + 1)`.
    pub a2: Option<f64>,
    /// Smallest `n_0` with `d_n` non-increasing on `[n_0, horizon]`.
    pub monotone_from: usize,
    /// Mass of `π_x^{(horizon)}` lost to the truncation.
    pub deficiency: f64,
}

/// Builds the truncated chain, class and stationary law, then measures the
/// convergence rate from `x0`.
pub fn rate_fit(
    model: &GwiModel,
    x0: &CountVector,
    r: u32,
    horizon: usize,
    radius: u64,
    options: &RateOptions,
) -> Result<RateFit, ExactError> {
    let chain = build_truncated_chain(model, radius, &ChainOptions::default())?;
    let class = communication_class(&chain, model)?;
    let stationary = stationary_exact(&chain, &class)?;
    rate_fit_on(&chain, &class, &stationary, x0, r, horizon, options)
}

fn norm_pow(x: &CountVector, r: u32) -> f64 {
    libm::pow(x.norm() as f64, r as f64)
}

/// Rate measurement on precomputed pieces.
///
/// `d_n` is evaluated as `‖(δ_x − π)P^n‖_{F_r}`, propagating the signed
/// difference instead of subtracting two nearly equal distributions, so it
/// keeps relative accuracy far below the `1e-16` cancellation floor. The
/// difference has zero mass; the rounding-level mass it picks up is projected
/// out along `π` after every step.
pub fn rate_fit_on(
    chain: &TruncatedChain,
    class: &ClassReport,
    stationary: &Stationary,
    x0: &CountVector,
    r: u32,
    horizon: usize,
    options: &RateOptions,
) -> Result<RateFit, ExactError> {
    let start = chain.require_index(x0)?;
    let pi = stationary.distribution.to_dense(chain)?;
    let weights: Vec<f64> = chain.states().iter().map(|x| norm_pow(x, r) + 1.0).collect();
    let powers: Vec<Vec<f64>> = (0..=r).map(|a| chain.states().iter().map(|x| norm_pow(x, a)).collect()).collect();

    let mut delta: Vec<f64> = pi.iter().map(|p| -p).collect();
    delta[start] += 1.0;
    let mut mu = alloc::vec![0.0; chain.len()];
    mu[start] = 1.0;
    let mut scratch = alloc::vec![0.0; chain.len()];
    let mut deficiency = 0.0;

    let mut distances = Vec::with_capacity(horizon + 1);
    let mut moment_gaps: Vec<Vec<f64>> = alloc::vec![Vec::with_capacity(horizon + 1); r as usize + 1];
    for n in 0..=horizon {
        distances.push(delta.iter().zip(&weights).map(|(d, w)| w * libm::fabs(*d)).sum());
        for (gaps, pw) in moment_gaps.iter_mut().zip(&powers) {
            gaps.push(libm::fabs(delta.iter().zip(pw).map(|(d, w)| w * d).sum()));
        }
        if n == horizon {
            break;
        }
        chain.push_forward(&delta, &mut scratch);
        core::mem::swap(&mut delta, &mut scratch);
        let mass: f64 = delta.iter().sum();
        for (d, p) in delta.iter_mut().zip(&pi) {
            *d -= mass * p;
        }
        deficiency += chain.push_forward(&mu, &mut scratch);
        core::mem::swap(&mut mu, &mut scratch);
    }

    let monotone_from = (1..=horizon).rev().find(|&n| distances[n] > distances[n - 1]).unwrap_or(0);
    let window_from = libm::ceil(horizon as f64 * options.window_start) as usize;
    let mut window = (window_from.min(horizon), horizon);
    let mut points: Vec<(usize, f64)> = select(&distances, window, options.floor);
    if points.len() < 2 {
        window = (monotone_from, horizon);
        points = select(&distances, window, options.floor);
    }

    let mut fit = RateFit {
        r,
        x0: x0.clone(),
        x0_in_class: class.contains(start),
        horizon,
        moment_gaps,
        status: FitStatus::ExactConvergence,
        window,
        points_used: points.len(),
        rho_hat: None,
        envelope: None,
        a1: None,
        partial_sums: Vec::new(),
        tail_bound: 0.0,
        a2: None,
        monotone_from,
        deficiency,
        distances,
    };

    if points.len() < 2 {
        let mut acc = 0.0;
        fit.partial_sums = fit.distances.iter().map(|d| {
            acc += d;
            acc
        })
        .collect();
        return Ok(fit);
    }

    let slope = log_linear_slope(&points);
    let rho_hat = libm::exp(slope);
    if rho_hat.is_nan() || rho_hat >= 1.0 {
        return Err(ExactError::DistancesNotDecreasing { from: window.0, to: window.1 });
    }
    let envelope = points.iter().map(|&(n, d)| d / libm::pow(rho_hat, n as f64)).fold(0.0, f64::max);
    let a1 = libm::pow(rho_hat, -options.rate_fraction);
    let q = a1 * rho_hat;
    let mut acc = 0.0;
    let partial_sums: Vec<f64> = fit
        .distances
        .iter()
        .enumerate()
        .map(|(n, d)| {
            acc += libm::pow(a1, n as f64) * d;
            acc
        })
        .collect();
    let tail_bound = envelope * libm::pow(q, (horizon + 1) as f64) / (1.0 - q);
    let total = partial_sums[horizon] + tail_bound;

    fit.status = FitStatus::Fitted;
    fit.rho_hat = Some(rho_hat);
    fit.envelope = Some(envelope);
    fit.a1 = Some(a1);
    fit.partial_sums = partial_sums;
    fit.tail_bound = tail_bound;
    fit.a2 = Some(total / (norm_pow(x0, r) + 1.0));
    Ok(fit)
}

fn select(distances: &[f64], window: (usize, usize), floor: f64) -> Vec<(usize, f64)> {
    (window.0..=window.1).filter(|&n| distances[n] >= floor).map(|n| (n, distances[n])).collect()
}

/// Least-squares slope of `ln d_n` against `n`.
fn log_linear_slope(points: &[(usize, f64)]) -> f64 {
    let k = points.len() as f64;
    let mx = points.iter().map(|&(n, _)| n as f64).sum::<f64>() / k;
    let my = points.iter().map(|&(_, d)| libm::log(d)).sum::<f64>() / k;
    let sxy: f64 = points.iter().map(|&(n, d)| (n as f64 - mx) * (libm::log(d) - my)).sum();
    let sxx: f64 = points.iter().map(|&(n, _)| (n as f64 - mx) * (n as f64 - mx)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn fixed_point_converges_exactly() {
        let model = fixtures::immigration_only(&[1, 0]);
        let x0 = CountVector::new(alloc::vec![1, 0]);
        let fit = rate_fit(&model, &x0, 1, 20, 4, &RateOptions::default()).unwrap();
        assert_eq!(fit.status, FitStatus::ExactConvergence);
        assert!(fit.distances.iter().all(|&d| d == 0.0));
        assert!(fit.x0_in_class);
    }

    #[test]
    fn slope_of_exact_geometric_sequence() {
        let pts: Vec<(usize, f64)> = (3..9).map(|n| (n, 5.0 * libm::pow(0.3, n as f64))).collect();
        assert!((libm::exp(log_linear_slope(&pts)) - 0.3).abs() < 1e-12);
    }

    #[test]
    fn model_c_rate_is_one_half() {
        let model = fixtures::model_c();
        let fit = rate_fit(&model, &CountVector::new(alloc::vec![0]), 1, 60, 40, &RateOptions::default()).unwrap();
        let rho = fit.rho_hat.unwrap();
        assert!((rho - 0.5).abs() < 1e-3, "rho_hat {rho}");
        assert!(fit.a1.unwrap() > 1.0);
        assert!(fit.tail_bound < 1e-8);
    }
}
