use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use gwi_core::estimate::{cls_estimate, design_rank_check, moment_estimate, EstimateError, TrajectoryData, Weighting};
use gwi_core::exact::{
    build_truncated_chain, communication_class, drift_scan, rate_fit_on, stationary_exact, ChainOptions, ExactError,
    RateOptions,
};
use gwi_core::model::{classify, dominating_pair, mean_matrix, CriticalityTag, SpectralError};
use gwi_core::simulate::{simulate_decomposed, simulate_trajectory, RngSeed, Sampler, SimError};
use gwi_core::structure::analyze;
use gwi_core::{CountVector, GwiModel};
use serde::Serialize;
use thiserror::Error;

use crate::json::{self, rational};
use crate::model_file::{self, LoadedModel, ModelFileError};
use crate::parallel::{self, PoolError};
use crate::reports::*;
use crate::trajectory::{self, TrajectoryError};

#[derive(Debug, Parser)]
#[command(name = "gwi", version, about = "Analyse multitype Galton-Watson processes with immigration")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse and validate a model file
    Validate(ModelArgs),
    /// Spectral radius, criticality tag and dominating pair of the mean matrix
    Classify(ClassifyArgs),
    /// Dead types, degeneracy certificate and the predicted affine hull
    Structure(ModelArgs),
    /// Simulate one trajectory
    Simulate(SimulateArgs),
    /// Simulate X_n = Y_n + V_n (initial lineage plus immigrant lineages)
    Decompose(SimulateArgs),
    /// Stationary distribution, exact on a truncation or by Monte Carlo
    Stationary(StationaryArgs),
    /// Convergence distances d_n in the F_r norm and a geometric rate fit
    Rates(RatesArgs),
    /// Foster-Lyapunov drift scan with V(x) = (v.x)^r + 1
    Drift(DriftArgs),
    /// Conditional least squares estimate of M and E[eta] from a trajectory CSV
    Estimate(EstimateArgs),
    /// Long-run average of ||X_n||^alpha from a trajectory CSV
    Moments(MomentsArgs),
    /// Export the truncated kernel as "x y num/den" triplets
    Chain(ChainArgs),
}

#[derive(Debug, Args, Serialize)]
struct ModelArgs {
    /// Model JSON file
    #[arg(long)]
    model: PathBuf,
    /// Write output here instead of standard output
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct ClassifyArgs {
    #[command(flatten)]
    #[serde(flatten)]
    io: ModelArgs,
    /// Half-width of the band around 1 tagged critical
    #[arg(long, default_value_t = gwi_core::model::DEFAULT_CRITICALITY_TOLERANCE)]
    tolerance: f64,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args, Serialize)]
struct SimulateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    io: ModelArgs,
    #[arg(long, default_value_t = 100)]
    steps: usize,
    /// Initial state "a,b,..." (default: 0)
    #[arg(long)]
    from: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Random stream index
    #[arg(long, default_value_t = 0)]
    stream: u64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Method {
    Exact,
    Mc,
}

#[derive(Debug, Args, Serialize)]
struct StationaryArgs {
    #[command(flatten)]
    #[serde(flatten)]
    io: ModelArgs,
    #[arg(long, value_enum, default_value_t = Method::Exact)]
    method: Method,
    /// Truncation radius (exact)
    #[arg(long, default_value_t = 30)]
    radius: u64,
    /// Largest truncation accepted (exact)
    #[arg(long, default_value_t = 200_000)]
    max_states: usize,
    /// Steps discarded per replica (mc)
    #[arg(long, default_value_t = 1000)]
    burnin: usize,
    /// Steps recorded per replica (mc)
    #[arg(long, default_value_t = 1000)]
    steps: usize,
    /// Independent chains from 0 (mc)
    #[arg(long, default_value_t = 1)]
    replicas: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args, Serialize)]
struct RatesArgs {
    #[command(flatten)]
    #[serde(flatten)]
    io: ModelArgs,
    #[arg(long, default_value_t = 1)]
    r: u32,
    /// Initial state "a,b,..." (default: 0)
    #[arg(long)]
    from: Option<String>,
    #[arg(long, default_value_t = 50)]
    horizon: usize,
    #[arg(long, default_value_t = 30)]
    radius: u64,
}

#[derive(Debug, Args, Serialize)]
struct DriftArgs {
    #[command(flatten)]
    #[serde(flatten)]
    io: ModelArgs,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    r: u32,
    #[arg(long, default_value_t = 30)]
    radius: u64,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum WeightingArg {
    Uniform,
    Wcls,
}

#[derive(Debug, Args, Serialize)]
struct DataArgs {
    /// Trajectory CSV with header n,x1,...,xp
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct EstimateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    io: DataArgs,
    #[arg(long, value_enum, default_value_t = WeightingArg::Uniform)]
    weighting: WeightingArg,
}

#[derive(Debug, Args, Serialize)]
struct MomentsArgs {
    #[command(flatten)]
    #[serde(flatten)]
    io: DataArgs,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long, default_value_t = 1000)]
    burnin: usize,
}

#[derive(Debug, Args, Serialize)]
struct ChainArgs {
    #[command(flatten)]
    #[serde(flatten)]
    io: ModelArgs,
    #[arg(long, default_value_t = 30)]
    radius: u64,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    ModelFile(#[from] ModelFileError),
    #[error(transparent)]
    Trajectory(#[from] TrajectoryError),
    #[error(transparent)]
    Pool(#[from] PoolError),
    #[error("cannot read {}: {source}", path.display())]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot write {}: {source}", path.display())]
    Write { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Exact(#[from] ExactError),
    #[error(transparent)]
    Simulation(#[from] SimError),
    #[error(transparent)]
    Estimate(#[from] EstimateError),
    /// The report was written; the analysis itself failed.
    #[error("{0}")]
    Reported(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Spectral(_) | CliError::Exact(_) | CliError::Simulation(_) | CliError::Reported(_) => 2,
            CliError::Estimate(EstimateError::SingularDesign { .. } | EstimateError::InsufficientData { .. }) => 2,
            _ => 1,
        }
    }
}

/// Runs `gwi` with the given arguments (program name first) and returns the
/// process exit code: 0 success, 1 invalid input, 2 analysis failure.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("gwi: {e}");
            e.exit_code()
        }
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|source| CliError::Write { path: path.to_owned(), source }),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|source| CliError::Write { path: "<stdout>".into(), source })
        }
    }
}

fn report<F: Serialize, R: Serialize>(command: &str, model: &LoadedModel, flags: &F, out: Option<&Path>, result: R) -> Result<(), CliError> {
    let env = Envelope { command, version: env!("CARGO_PKG_VERSION"), model_hash: Some(&model.hash), data_hash: None, flags, result };
    emit(out, &json::to_string(&env))
}

fn parse_state(text: Option<&str>, model: &GwiModel) -> Result<CountVector, CliError> {
    let Some(text) = text else {
        return Ok(model.zero_state());
    };
    let entries = text
        .split(',')
        .map(|t| t.trim().parse::<u64>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| CliError::Usage(format!("--from \"{text}\": expected comma-separated non-negative integers")))?;
    if entries.len() != model.dim() {
        return Err(CliError::Usage(format!("--from \"{text}\" has {} entries but the model has p = {}", entries.len(), model.dim())));
    }
    Ok(CountVector::new(entries))
}

fn require_subcritical(model: &GwiModel) -> Result<(), CliError> {
    let crit = classify(&mean_matrix(model), gwi_core::model::DEFAULT_CRITICALITY_TOLERANCE)?;
    if crit.tag != CriticalityTag::Subcritical {
        eprintln!("gwi: warning: mean matrix is {} (rho = {:.6}); results may not settle", crit.tag.as_str(), crit.rho);
    }
    Ok(())
}

fn load_data(path: &Path) -> Result<(TrajectoryData, String), CliError> {
    let bytes = std::fs::read(path).map_err(|source| CliError::Read { path: path.to_owned(), source })?;
    let states = trajectory::read_states(bytes.as_slice())?;
    Ok((TrajectoryData::new(states)?, model_file::sha256_hex(&bytes)))
}

fn execute(command: Command) -> Result<(), CliError> {
    match command {
        Command::Validate(a) => {
            let m = model_file::load(&a.model)?;
            let mm = mean_matrix(&m.model);
            let crit = classify(&mm, gwi_core::model::DEFAULT_CRITICALITY_TOLERANCE)?;
            report("validate", &m, &a, a.out.as_deref(), ValidationView::new(&m.model, &mm, &crit, &m.approximations))
        }
        Command::Classify(a) => {
            let m = model_file::load(&a.io.model)?;
            let mm = mean_matrix(&m.model);
            let crit = classify(&mm, a.tolerance)?;
            let pair = match crit.tag {
                CriticalityTag::Subcritical => dominating_pair(&mm).ok(),
                _ => None,
            };
            report("classify", &m, &a, a.io.out.as_deref(), ClassifyView::new(&crit, &mm, pair.as_ref()))
        }
        Command::Structure(a) => {
            let m = model_file::load(&a.model)?;
            report("structure", &m, &a, a.out.as_deref(), StructureView::from(&analyze(&m.model)))
        }
        Command::Simulate(a) => {
            let m = model_file::load(&a.io.model)?;
            let x0 = parse_state(a.from.as_deref(), &m.model)?;
            require_subcritical(&m.model)?;
            let t = simulate_trajectory(&Sampler::new(&m.model), &x0, a.steps, RngSeed::new(a.seed, a.stream))?;
            match a.format {
                Format::Json => report(
                    "simulate",
                    &m,
                    &a,
                    a.io.out.as_deref(),
                    TrajectoryView { seed: a.seed, stream: a.stream, states: rows(&t.states) },
                ),
                Format::Csv => {
                    let mut buf = Vec::new();
                    trajectory::write_states(&mut buf, &t.states)?;
                    emit(a.io.out.as_deref(), &String::from_utf8_lossy(&buf))
                }
            }
        }
        Command::Decompose(a) => {
            let m = model_file::load(&a.io.model)?;
            let x0 = parse_state(a.from.as_deref(), &m.model)?;
            require_subcritical(&m.model)?;
            let d = simulate_decomposed(&Sampler::new(&m.model), &x0, a.steps, RngSeed::new(a.seed, a.stream))?;
            match a.format {
                Format::Json => report(
                    "decompose",
                    &m,
                    &a,
                    a.io.out.as_deref(),
                    DecomposedView { seed: a.seed, stream: a.stream, y: rows(&d.y), v: rows(&d.v), total: rows(&d.total) },
                ),
                Format::Csv => {
                    let mut buf = Vec::new();
                    trajectory::write_columns(&mut buf, &["y", "v", "x"], &[&d.y, &d.v, &d.total])?;
                    emit(a.io.out.as_deref(), &String::from_utf8_lossy(&buf))
                }
            }
        }
        Command::Stationary(a) => {
            let m = model_file::load(&a.io.model)?;
            match a.method {
                Method::Exact => {
                    let opts = ChainOptions { max_states: a.max_states, ..ChainOptions::default() };
                    let chain = build_truncated_chain(&m.model, a.radius, &opts)?;
                    let class = communication_class(&chain, &m.model)?;
                    let st = stationary_exact(&chain, &class)?;
                    report("stationary", &m, &a, a.io.out.as_deref(), StationaryExactView::new(&chain, &class, &st))
                }
                Method::Mc => {
                    require_subcritical(&m.model)?;
                    let pool = parallel::pool(parallel::threads_from_env()?)?;
                    let dist =
                        parallel::empirical_stationary(&pool, &Sampler::new(&m.model), a.burnin, a.steps, a.replicas, a.seed)?;
                    report("stationary", &m, &a, a.io.out.as_deref(), EmpiricalView::from(&dist))
                }
            }
        }
        Command::Rates(a) => {
            let m = model_file::load(&a.io.model)?;
            let x0 = parse_state(a.from.as_deref(), &m.model)?;
            let chain = build_truncated_chain(&m.model, a.radius, &ChainOptions::default())?;
            let class = communication_class(&chain, &m.model)?;
            let st = stationary_exact(&chain, &class)?;
            let fit = rate_fit_on(&chain, &class, &st, &x0, a.r, a.horizon, &RateOptions::default())?;
            report("rates", &m, &a, a.io.out.as_deref(), RatesView::from(&fit))
        }
        Command::Drift(a) => {
            let m = model_file::load(&a.io.model)?;
            let pair = dominating_pair(&mean_matrix(&m.model))?;
            let d = drift_scan(&m.model, &pair, a.r, a.radius)?;
            report("drift", &m, &a, a.io.out.as_deref(), DriftView::from(&d))?;
            if let Some(first) = d.violations.first() {
                return Err(CliError::Reported(format!(
                    "drift inequality fails at {} outer-shell state(s), first at {first}",
                    d.violations.len()
                )));
            }
            Ok(())
        }
        Command::Estimate(a) => {
            let (data, hash) = load_data(&a.io.data)?;
            let rank = design_rank_check(&data);
            let weighting = match a.weighting {
                WeightingArg::Uniform => Weighting::Uniform,
                WeightingArg::Wcls => Weighting::Wcls,
            };
            let (estimate, failure) = match cls_estimate(&data, weighting) {
                Ok(e) => (Some(ClsView::from(&e)), None),
                Err(e @ EstimateError::SingularDesign { .. }) => (None, Some(e)),
                Err(e) => return Err(e.into()),
            };
            let view = EstimateView { transitions: data.transitions(), design: RankView::from(&rank), estimate };
            let env = Envelope {
                command: "estimate",
                version: env!("CARGO_PKG_VERSION"),
                model_hash: None,
                data_hash: Some(&hash),
                flags: &a,
                result: view,
            };
            emit(a.io.out.as_deref(), &json::to_string(&env))?;
            match failure {
                Some(e) => Err(CliError::Reported(e.to_string())),
                None => Ok(()),
            }
        }
        Command::Moments(a) => {
            let (data, hash) = load_data(&a.io.data)?;
            let est = moment_estimate(&data, a.alpha, a.burnin)?;
            let env = Envelope {
                command: "moments",
                version: env!("CARGO_PKG_VERSION"),
                model_hash: None,
                data_hash: Some(&hash),
                flags: &a,
                result: MomentsView::new(&est, a.burnin),
            };
            emit(a.io.out.as_deref(), &json::to_string(&env))
        }
        Command::Chain(a) => {
            let m = model_file::load(&a.io.model)?;
            let chain = build_truncated_chain(&m.model, a.radius, &ChainOptions::default())?;
            let mut text = String::new();
            for (x, y, q) in chain.triplets() {
                text.push_str(&format!("{x} {y} {}\n", rational(&q)));
            }
            emit(a.io.out.as_deref(), &text)
        }
    }
}
