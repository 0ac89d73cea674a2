//! Serializable views of analysis results; field order is the output order.

use gwi_core::estimate::{ClsEstimate, MomentEstimate, RankReport};
use gwi_core::exact::{ClassReport, DriftReport, FitStatus, RateFit, Stationary, TruncatedChain};
use gwi_core::model::{Criticality, DominatingPair, MeanMatrix};
use gwi_core::simulate::EmpiricalDistribution;
use gwi_core::structure::StructureReport;
use gwi_core::{BigRational, CountVector, GwiModel};
use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::Serialize;

use crate::json::{rational, state, StateMap};
use crate::model_file::Approximation;

/// Every report: what ran, on which input, with which flags.
#[derive(Debug, Serialize)]
pub struct Envelope<'a, F: Serialize, R: Serialize> {
    pub command: &'a str,
    pub version: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model_hash: Option<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub data_hash: Option<&'a str>,
    pub flags: &'a F,
    pub result: R,
}

/// Integers that fit in `i64` print as JSON numbers, others as strings.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Integer {
    Small(i64),
    Big(String),
}

impl From<&BigInt> for Integer {
    fn from(n: &BigInt) -> Self {
        n.to_i64().map_or_else(|| Integer::Big(n.to_string()), Integer::Small)
    }
}

fn rationals(v: &[BigRational]) -> Vec<String> {
    v.iter().map(rational).collect()
}

fn matrix(m: &MeanMatrix) -> Vec<Vec<String>> {
    m.rows().iter().map(|r| rationals(r)).collect()
}

fn states(v: &[CountVector]) -> Vec<String> {
    v.iter().map(state).collect()
}

#[derive(Debug, Serialize)]
pub struct ApproximationView {
    pub law: String,
    pub atom: usize,
    pub given: f64,
    pub rational: String,
}

#[derive(Debug, Serialize)]
pub struct ValidationView {
    pub p: usize,
    pub offspring_atoms: Vec<usize>,
    pub innovation_atoms: usize,
    pub mean_matrix: Vec<Vec<String>>,
    pub innovation_mean: Vec<String>,
    pub criticality: &'static str,
    pub approximated_weights: Vec<ApproximationView>,
    pub warnings: Vec<String>,
}

impl ValidationView {
    pub fn new(model: &GwiModel, m: &MeanMatrix, crit: &Criticality, approx: &[Approximation]) -> Self {
        let mut warnings = Vec::new();
        if !approx.is_empty() {
            warnings.push(format!(
                "{} float weight(s) replaced by the nearest rational with denominator <= 10^9",
                approx.len()
            ));
        }
        if crit.tag != gwi_core::model::CriticalityTag::Subcritical {
            warnings.push(format!("mean matrix is {} (spectral radius {:.6}); analyses assume rho < 1", crit.tag.as_str(), crit.rho));
        }
        Self {
            p: model.dim(),
            offspring_atoms: model.offspring_laws().iter().map(|l| l.atoms().len()).collect(),
            innovation_atoms: model.innovation().atoms().len(),
            mean_matrix: matrix(m),
            innovation_mean: rationals(&model.innovation_mean()),
            criticality: crit.tag.as_str(),
            approximated_weights: approx
                .iter()
                .map(|a| ApproximationView { law: a.law.clone(), atom: a.atom, given: a.given, rational: rational(&a.rational) })
                .collect(),
            warnings,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct PairView {
    pub lambda: f64,
    pub v: Vec<f64>,
    pub epsilon: f64,
}

impl From<&DominatingPair> for PairView {
    fn from(p: &DominatingPair) -> Self {
        Self { lambda: p.lambda, v: p.v.clone(), epsilon: p.epsilon }
    }
}

#[derive(Debug, Serialize)]
pub struct ClassifyView {
    pub tag: &'static str,
    pub rho: f64,
    pub tolerance: f64,
    pub mean_matrix: Vec<Vec<String>>,
    pub dominating_pair: Option<PairView>,
}

impl ClassifyView {
    pub fn new(crit: &Criticality, m: &MeanMatrix, pair: Option<&DominatingPair>) -> Self {
        Self { tag: crit.tag.as_str(), rho: crit.rho, tolerance: crit.tolerance, mean_matrix: matrix(m), dominating_pair: pair.map(PairView::from) }
    }
}

#[derive(Debug, Serialize)]
pub struct CertificateView {
    pub c: Vec<Integer>,
    pub constant: String,
}

#[derive(Debug, Serialize)]
pub struct ConstraintView {
    pub normal: Vec<Integer>,
    pub offset: String,
}

#[derive(Debug, Serialize)]
pub struct StructureView {
    /// One-based type labels.
    pub dead_types: Vec<usize>,
    pub certificate: Option<CertificateView>,
    pub degenerate: bool,
    pub constraints: Vec<ConstraintView>,
    pub warnings: Vec<String>,
}

impl From<&StructureReport> for StructureView {
    fn from(r: &StructureReport) -> Self {
        let mut warnings = Vec::new();
        if r.die_out.no_immigration {
            warnings.push("innovation is identically zero: every type dies out and the process is absorbed at 0".into());
        }
        Self {
            dead_types: r.die_out.dead.iter().map(|j| j + 1).collect(),
            certificate: r
                .certificate
                .as_ref()
                .map(|c| CertificateView { c: c.c.iter().map(Integer::from).collect(), constant: rational(&c.constant) }),
            degenerate: r.hull.degenerate,
            constraints: r
                .hull
                .constraints
                .iter()
                .map(|c| ConstraintView { normal: c.normal.iter().map(Integer::from).collect(), offset: rational(&c.offset) })
                .collect(),
            warnings,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct TrajectoryView {
    pub seed: u64,
    pub stream: u64,
    pub states: Vec<Vec<u64>>,
}

#[derive(Debug, Serialize)]
pub struct DecomposedView {
    pub seed: u64,
    pub stream: u64,
    pub y: Vec<Vec<u64>>,
    pub v: Vec<Vec<u64>>,
    pub total: Vec<Vec<u64>>,
}

pub fn rows(v: &[CountVector]) -> Vec<Vec<u64>> {
    v.iter().map(|x| x.entries().to_vec()).collect()
}

#[derive(Debug, Serialize)]
pub struct StationaryExactView {
    pub radius: u64,
    pub truncated_states: usize,
    pub class_size: usize,
    pub period: u64,
    pub aperiodic: bool,
    pub n_star: usize,
    pub entry_path: Vec<String>,
    pub pruned_boundary_states: usize,
    pub max_class_outflow: f64,
    pub residual: f64,
    pub leak: f64,
    pub solver: &'static str,
    pub mean: Vec<f64>,
    pub distribution: StateMap<f64>,
}

impl StationaryExactView {
    pub fn new(chain: &TruncatedChain, class: &ClassReport, st: &Stationary) -> Self {
        let p = chain.dim();
        let mut mean = vec![0.0; p];
        for (x, &w) in &st.distribution.probs {
            for (m, &v) in mean.iter_mut().zip(x.entries()) {
                *m += w * v as f64;
            }
        }
        Self {
            radius: chain.radius(),
            truncated_states: chain.len(),
            class_size: class.len(),
            period: class.period,
            aperiodic: class.aperiodic,
            n_star: class.n_star,
            entry_path: states(&class.entry_path),
            pruned_boundary_states: class.pruned,
            max_class_outflow: class.max_escape,
            residual: st.residual,
            leak: st.leak,
            solver: if st.dense { "dense-lu" } else { "power-iteration" },
            mean,
            distribution: StateMap(st.distribution.probs.iter().map(|(x, &w)| (x.clone(), w)).collect()),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct EmpiricalView {
    pub burnin: usize,
    pub steps: usize,
    pub replicas: usize,
    pub total: u64,
    pub distinct_states: usize,
    pub counts: StateMap<u64>,
}

impl From<&EmpiricalDistribution> for EmpiricalView {
    fn from(d: &EmpiricalDistribution) -> Self {
        Self {
            burnin: d.burnin,
            steps: d.steps,
            replicas: d.replicas,
            total: d.total,
            distinct_states: d.counts.len(),
            counts: StateMap(d.counts.iter().map(|(x, &c)| (x.clone(), c)).collect()),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct RateRow {
    pub n: usize,
    pub distance: f64,
    pub partial_sum: f64,
    /// `|E_x ‖X_n‖^α − E‖X̃‖^α|` for `α = 0..=r`.
    pub moment_gaps: Vec<f64>,
}

#[derive(Debug, Serialize)]
pub struct RatesView {
    pub r: u32,
    pub from: String,
    pub x0_in_class: bool,
    pub horizon: usize,
    pub status: &'static str,
    pub rho_hat: Option<f64>,
    pub envelope: Option<f64>,
    pub a1: Option<f64>,
    pub a2: Option<f64>,
    pub tail_bound: f64,
    pub fit_window: [usize; 2],
    pub points_used: usize,
    pub monotone_from: usize,
    pub deficiency: f64,
    pub table: Vec<RateRow>,
}

impl From<&RateFit> for RatesView {
    fn from(f: &RateFit) -> Self {
        let table = (0..=f.horizon)
            .map(|n| RateRow {
                n,
                distance: f.distances[n],
                partial_sum: f.partial_sums[n],
                moment_gaps: f.moment_gaps.iter().map(|g| g[n]).collect(),
            })
            .collect();
        Self {
            r: f.r,
            from: state(&f.x0),
            x0_in_class: f.x0_in_class,
            horizon: f.horizon,
            status: match f.status {
                FitStatus::Fitted => "fitted",
                FitStatus::ExactConvergence => "exact-convergence",
            },
            rho_hat: f.rho_hat,
            envelope: f.envelope,
            a1: f.a1,
            a2: f.a2,
            tail_bound: f.tail_bound,
            fit_window: [f.window.0, f.window.1],
            points_used: f.points_used,
            monotone_from: f.monotone_from,
            deficiency: f.deficiency,
            table,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct DriftView {
    pub lambda: f64,
    pub v: Vec<f64>,
    pub r: u32,
    pub radius: u64,
    pub beta: f64,
    pub gamma: f64,
    pub scanned: usize,
    pub small_set: Vec<String>,
    pub violations: Vec<String>,
    pub passed: bool,
}

impl From<&DriftReport> for DriftView {
    fn from(d: &DriftReport) -> Self {
        Self {
            lambda: d.lambda,
            v: d.v.clone(),
            r: d.r,
            radius: d.radius,
            beta: d.beta,
            gamma: d.gamma,
            scanned: d.scanned,
            small_set: states(&d.small_set),
            violations: states(&d.violations),
            passed: d.passed(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct RankView {
    pub rank: usize,
    pub columns: usize,
    pub tolerance: f64,
    /// Relations `c·x + c0 = 0` as `[c_1, …, c_p, c0]`.
    pub null_vectors: Vec<Vec<f64>>,
}

impl From<&RankReport> for RankView {
    fn from(r: &RankReport) -> Self {
        Self { rank: r.rank, columns: r.columns, tolerance: r.tolerance, null_vectors: r.null_vectors.clone() }
    }
}

#[derive(Debug, Serialize)]
pub struct ClsView {
    pub weighting: &'static str,
    pub m_hat: Vec<Vec<f64>>,
    pub eta_mean_hat: Vec<f64>,
    pub residual_sum: f64,
}

impl From<&ClsEstimate> for ClsView {
    fn from(e: &ClsEstimate) -> Self {
        Self { weighting: e.weighting.as_str(), m_hat: e.m_hat.clone(), eta_mean_hat: e.eta_mean_hat.clone(), residual_sum: e.residual_sum }
    }
}

#[derive(Debug, Serialize)]
pub struct EstimateView {
    pub transitions: usize,
    pub design: RankView,
    pub estimate: Option<ClsView>,
}

#[derive(Debug, Serialize)]
pub struct MomentsView {
    pub alpha: f64,
    pub burnin: usize,
    pub samples: usize,
    pub estimate: f64,
    pub std_error: f64,
}

impl MomentsView {
    pub fn new(m: &MomentEstimate, burnin: usize) -> Self {
        Self { alpha: m.alpha, burnin, samples: m.samples, estimate: m.estimate, std_error: m.std_error }
    }
}
