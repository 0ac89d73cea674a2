//! Conditional least squares (CLS) estimation of the mean matrix and the
//! innovation mean from one observed trajectory.

use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::simulate::Trajectory;
use crate::vector::CountVector;

/// Relative tolerance of the rank decision in [`design_rank_check`].
pub const RANK_TOLERANCE: f64 = 1e-9;
/// Batch count of the batch-means standard error.
pub const BATCHES: usize = 20;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EstimateError {
    #[error("trajectory needs at least two states")]
    EmptyTrajectory,
    #[error("state {index} has dimension {found}, expected {expected}")]
    DimensionMismatch { index: usize, expected: usize, found: usize },
    #[error("need at least {needed} observations, got {got}")]
    InsufficientData { needed: usize, got: usize },
    #[error("singular design: regressors (X, 1) have rank {rank} < {columns}")]
    SingularDesign { rank: usize, columns: usize },
    #[error("burn-in {burnin} leaves no observations in a trajectory of length {len}")]
    BurninTooLong { burnin: usize, len: usize },
}

/// Observed states `X_0..X_N`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryData {
    states: Vec<CountVector>,
}

impl TrajectoryData {
    pub fn new(states: Vec<CountVector>) -> Result<Self, EstimateError> {
        if states.len() < 2 {
            return Err(EstimateError::EmptyTrajectory);
        }
        let expected = states[0].dim();
        if let Some((index, x)) = states.iter().enumerate().find(|(_, x)| x.dim() != expected) {
            return Err(EstimateError::DimensionMismatch { index, expected, found: x.dim() });
        }
        Ok(Self { states })
    }

    pub fn dim(&self) -> usize {
        self.states[0].dim()
    }

    /// Number of transitions `N`.
    pub fn transitions(&self) -> usize {
        self.states.len() - 1
    }

    pub fn states(&self) -> &[CountVector] {
        &self.states
    }

    fn pairs(&self) -> impl Iterator<Item = (&CountVector, &CountVector)> {
        self.states.iter().zip(&self.states[1..])
    }
}

impl TryFrom<Trajectory> for TrajectoryData {
    type Error = EstimateError;

    fn try_from(t: Trajectory) -> Result<Self, Self::Error> {
        Self::new(t.states)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Weighting {
    Uniform,
    /// `w = 1 / (1 + ‖X_{n−1}‖)`.
    Wcls,
    /// Caller-supplied weights via [`cls_estimate_weighted`].
    Custom,
}

impl Weighting {
    pub fn as_str(&self) -> &'static str {
        match self {
            Weighting::Uniform => "uniform",
            Weighting::Wcls => "wcls",
            Weighting::Custom => "custom",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClsEstimate {
    /// `m_hat[i][j]` estimates `E ξ_{i,j}`.
    pub m_hat: Vec<Vec<f64>>,
    pub eta_mean_hat: Vec<f64>,
    pub weighting: Weighting,
    pub residual_sum: f64,
    pub design_rank: usize,
    pub transitions: usize,
}

/// Minimizes `Σ w_n ‖X_n − M^T X_{n−1} − m‖²` over `(M, m)`.
pub fn cls_estimate(data: &TrajectoryData, weighting: Weighting) -> Result<ClsEstimate, EstimateError> {
    let mut est = match weighting {
        Weighting::Wcls => cls_estimate_weighted(data, |x| 1.0 / (1.0 + x.norm() as f64))?,
        _ => cls_estimate_weighted(data, |_| 1.0)?,
    };
    est.weighting = if weighting == Weighting::Wcls { Weighting::Wcls } else { Weighting::Uniform };
    Ok(est)
}

/// CLS with weights `w(X_{n−1}) > 0`.
pub fn cls_estimate_weighted<W>(data: &TrajectoryData, weight: W) -> Result<ClsEstimate, EstimateError>
where
    W: Fn(&CountVector) -> f64,
{
    let p = data.dim();
    let k = p + 1;
    if data.transitions() < k {
        return Err(EstimateError::InsufficientData { needed: k, got: data.transitions() });
    }
    let rank = design_rank_check(data);
    if rank.rank < k {
        return Err(EstimateError::SingularDesign { rank: rank.rank, columns: k });
    }

    let regressor = |x: &CountVector| {
        let mut z = DVector::from_element(k, 1.0);
        for i in 0..p {
            z[i] = x[i] as f64;
        }
        z
    };
    let mut gram = DMatrix::<f64>::zeros(k, k);
    let mut cross = DMatrix::<f64>::zeros(k, p);
    for (prev, next) in data.pairs() {
        let w = weight(prev);
        let z = regressor(prev);
        gram.ger(w, &z, &z, 1.0);
        let y = DVector::from_iterator(p, next.entries().iter().map(|&v| v as f64));
        cross.ger(w, &z, &y, 1.0);
    }
    // Equilibrated Cholesky, then refinement against residuals taken from the
    // data rather than from the Gram matrix.
    let scale = DVector::from_iterator(k, (0..k).map(|i| 1.0 / libm::sqrt(gram[(i, i)])));
    let scaled = DMatrix::from_fn(k, k, |i, j| gram[(i, j)] * scale[i] * scale[j]);
    let chol = scaled.cholesky().ok_or(EstimateError::SingularDesign { rank: rank.rank, columns: k })?;
    let solve = |rhs: &DMatrix<f64>| {
        let mut b = rhs.clone();
        for i in 0..k {
            b.row_mut(i).scale_mut(scale[i]);
        }
        let mut x = chol.solve(&b);
        for i in 0..k {
            x.row_mut(i).scale_mut(scale[i]);
        }
        x
    };
    let mut beta = solve(&cross);
    for _ in 0..2 {
        let mut resid_cross = DMatrix::<f64>::zeros(k, p);
        for (prev, next) in data.pairs() {
            let z = regressor(prev);
            let fitted = beta.transpose() * &z;
            let r = DVector::from_iterator(p, (0..p).map(|j| next[j] as f64 - fitted[j]));
            resid_cross.ger(weight(prev), &z, &r, 1.0);
        }
        beta += solve(&resid_cross);
    }

    let mut residual_sum = 0.0;
    for (prev, next) in data.pairs() {
        let fitted = beta.transpose() * regressor(prev);
        let r: f64 = (0..p).map(|j| { let e = next[j] as f64 - fitted[j]; e * e }).sum();
        residual_sum += weight(prev) * r;
    }
    Ok(ClsEstimate {
        m_hat: (0..p).map(|i| (0..p).map(|j| beta[(i, j)]).collect()).collect(),
        eta_mean_hat: (0..p).map(|j| beta[(p, j)]).collect(),
        weighting: Weighting::Custom,
        residual_sum,
        design_rank: rank.rank,
        transitions: data.transitions(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankReport {
    pub rank: usize,
    /// `p + 1`: one column per type plus the intercept.
    pub columns: usize,
    pub tolerance: f64,
    /// Basis of the affine relations `c^T x + c_0 = 0` satisfied by every
    /// regressor, as `(c, c_0)` with the first non-zero entry equal to 1.
    pub null_vectors: Vec<Vec<f64>>,
}

impl RankReport {
    pub fn full_rank(&self) -> bool {
        self.rank == self.columns
    }
}

/// Numerical rank of the design matrix with rows `(X_{n−1}, 1)`, by
/// Gram–Schmidt with column pivoting on residual norms.
pub fn design_rank_check(data: &TrajectoryData) -> RankReport {
    let p = data.dim();
    let k = p + 1;
    let n = data.transitions();
    let mut cols: Vec<Vec<f64>> = (0..p)
        .map(|i| data.states[..n].iter().map(|x| x[i] as f64).collect())
        .collect();
    cols.push(alloc::vec![1.0; n]);

    let norm = |c: &[f64]| libm::sqrt(c.iter().map(|v| v * v).sum());
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let tolerance = RANK_TOLERANCE * cols.iter().map(|c| norm(c)).fold(0.0, f64::max);

    let mut perm: Vec<usize> = (0..k).collect();
    let mut r = alloc::vec![alloc::vec![0.0; k]; k];
    let mut rank = 0;
    while rank < k {
        let (pivot, best) = (rank..k).map(|j| (j, norm(&cols[j]))).fold((rank, -1.0), |a, b| if b.1 > a.1 { b } else { a });
        if best <= tolerance {
            break;
        }
        cols.swap(rank, pivot);
        perm.swap(rank, pivot);
        for row in r.iter_mut() {
            row.swap(rank, pivot);
        }
        let q: Vec<f64> = cols[rank].iter().map(|v| v / best).collect();
        r[rank][rank] = best;
        for j in rank + 1..k {
            // two passes keep q orthogonal to the remaining columns
            for _ in 0..2 {
                let c = dot(&q, &cols[j]);
                for (v, qi) in cols[j].iter_mut().zip(&q) {
                    *v -= c * qi;
                }
                r[rank][j] += c;
            }
        }
        cols[rank] = q;
        rank += 1;
    }

    let mut null_vectors: Vec<(usize, Vec<f64>)> = (rank..k)
        .map(|j| {
            // R_11 y = R_1j, then the relation is col_j − Σ y_i col_i = 0
            let mut y = alloc::vec![0.0; rank];
            for i in (0..rank).rev() {
                let s: f64 = (i + 1..rank).map(|l| r[i][l] * y[l]).sum();
                y[i] = (r[i][j] - s) / r[i][i];
            }
            let mut v = alloc::vec![0.0; k];
            v[perm[j]] = 1.0;
            for i in 0..rank {
                v[perm[i]] = -y[i];
            }
            let scale = v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
            let lead = v.iter().copied().find(|x| x.abs() > 1e-12 * scale).unwrap_or(1.0);
            for x in v.iter_mut() {
                *x /= lead;
            }
            (perm[j], v)
        })
        .collect();
    null_vectors.sort_by_key(|(j, _)| *j);
    RankReport { rank, columns: k, tolerance, null_vectors: null_vectors.into_iter().map(|(_, v)| v).collect() }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentEstimate {
    pub alpha: f64,
    pub estimate: f64,
    /// Non-overlapping batch-means standard error.
    pub std_error: f64,
    pub samples: usize,
}

/// Time average of `‖X_n‖^α` over `n > burnin`.
pub fn moment_estimate(data: &TrajectoryData, alpha: f64, burnin: usize) -> Result<MomentEstimate, EstimateError> {
    if burnin >= data.transitions() {
        return Err(EstimateError::BurninTooLong { burnin, len: data.transitions() });
    }
    let values: Vec<f64> = data.states[burnin + 1..].iter().map(|x| libm::pow(x.norm() as f64, alpha)).collect();
    if values.len() < 2 * BATCHES {
        return Err(EstimateError::InsufficientData { needed: 2 * BATCHES, got: values.len() });
    }
    let estimate = values.iter().sum::<f64>() / values.len() as f64;
    let size = values.len() / BATCHES;
    let means: Vec<f64> = values.chunks_exact(size).take(BATCHES).map(|b| b.iter().sum::<f64>() / size as f64).collect();
    let grand = means.iter().sum::<f64>() / BATCHES as f64;
    let var = means.iter().map(|m| (m - grand) * (m - grand)).sum::<f64>() / (BATCHES - 1) as f64;
    Ok(MomentEstimate { alpha, estimate, std_error: libm::sqrt(var / BATCHES as f64), samples: values.len() })
}
