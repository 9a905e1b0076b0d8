//! Command-line front end.
//!
//! Every report starts with a `config` object echoing the arguments and the
//! seed it was produced with. Exit codes: `0` success, `1` infeasible
//! estimate or failed certification (the report is still written), `2` usage
//! or input error.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use crate::blocks::SampleMatrix;
use crate::bounds::{self, BoundInputs, CovarianceModel, CovarianceSource};
use crate::error::{Error, Result};
use crate::harness::{self, ExperimentConfig};
use crate::io;
use crate::json::to_stable_string;
use crate::norms::{self, NormSpec};
use crate::slab::{SlabEstimator, SolverOptions};
use crate::uniform_mom;

#[derive(Debug, Parser)]
#[command(name = "normest", version, about = "Mean estimation with respect to general norms")]
struct Cli {
    /// Worker threads (0 = one per core). Results do not depend on it.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Slab median-of-means estimate of the mean of a CSV sample.
    Estimate(EstimateArgs),
    /// Monte Carlo bound ingredients for a covariance matrix.
    Bounds(BoundsArgs),
    /// Uniform median-of-means certification against a known mean.
    Certify(CertifyArgs),
    /// Run a Monte Carlo experiment described by a JSON config.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
struct EstimateArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "linf")]
    norm: String,
    #[arg(long, default_value_t = 0.05)]
    delta: f64,
    #[arg(long, conflicts_with = "adaptive", required_unless_present = "adaptive")]
    epsilon: Option<f64>,
    #[arg(long)]
    adaptive: bool,
    /// Relative bracket width at which the adaptive search stops.
    #[arg(long, default_value_t = 1e-3)]
    eps_tol: f64,
    #[arg(long, default_value_t = norms::DEFAULT_BUDGET)]
    budget: usize,
    #[arg(long, env = "NORMEST_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1.0)]
    kappa: f64,
    /// Shuffle rows (with the seed) before blocking.
    #[arg(long)]
    shuffle: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BoundsArgs {
    #[arg(long, default_value = "linf")]
    norm: String,
    /// Covariance matrix as CSV.
    #[arg(long)]
    cov: PathBuf,
    #[arg(long)]
    n_samples: usize,
    #[arg(long, default_value_t = 0.05)]
    delta: f64,
    #[arg(long, default_value_t = 10_000)]
    trials: usize,
    #[arg(long, env = "NORMEST_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = norms::DEFAULT_BUDGET)]
    budget: usize,
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    /// Sample for `E‖Y_N‖`; without it `E‖G‖` stands in.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CertifyArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "l2")]
    norm: String,
    #[arg(long, default_value_t = norms::DEFAULT_BUDGET)]
    budget: usize,
    /// True mean as a one-row or one-column CSV.
    #[arg(long)]
    mu: PathBuf,
    #[arg(long)]
    r: f64,
    #[arg(long)]
    blocks: usize,
    #[arg(long, env = "NORMEST_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    csv: Option<PathBuf>,
}

fn path_str(p: &Path) -> String {
    p.display().to_string()
}

fn emit(value: &Value, out_path: Option<&Path>, stdout: &mut (dyn Write + Send)) -> Result<()> {
    let text = to_stable_string(value)?;
    match out_path {
        Some(p) => std::fs::write(p, text)?,
        None => stdout.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn run_estimate(a: &EstimateArgs, stdout: &mut (dyn Write + Send)) -> Result<i32> {
    let norm = NormSpec::parse(&a.norm)?;
    let sample = io::read_matrix(&a.input)?;
    let mut est = SlabEstimator::new(&norm, sample.dim(), a.delta, a.budget, a.seed)?;
    est.kappa = a.kappa;
    est.shuffle = a.shuffle.then_some(a.seed);
    est.solver = SolverOptions::default();
    let r = match a.epsilon {
        Some(eps) => est.estimate(&sample, eps)?,
        None => est.adaptive(&sample, a.eps_tol)?,
    };
    let config = json!({
        "command": "estimate",
        "input": path_str(&a.input),
        "norm": norm,
        "delta": a.delta,
        "epsilon": a.epsilon,
        "adaptive": a.adaptive,
        "eps_tol": a.eps_tol,
        "budget": a.budget,
        "seed": a.seed,
        "kappa": a.kappa,
        "shuffle": a.shuffle,
        "n_samples": sample.n_rows(),
        "d": sample.dim(),
    });
    let report = json!({
        "config": config,
        "version": env!("CARGO_PKG_VERSION"),
        "point": r.point,
        "epsilon_used": r.epsilon_used,
        "feasible": r.feasible,
        "iterations": r.iterations,
        "n": r.n_blocks,
        "m": r.block_size,
        "dropped": r.dropped,
        "functional_count": r.functional_count,
        "exact": r.exact,
        "empty_witness": r.empty_witness,
        "certificate": {
            "member": r.certificate.member,
            "epsilon": r.certificate.epsilon,
            "threshold": r.certificate.threshold,
            "worst_functional": r.certificate.worst_functional,
            "worst_violation": r.certificate.worst_violation,
            "min_coverage": r.certificate.per_functional_coverage.iter().min(),
        },
    });
    emit(&report, a.out.as_deref(), stdout)?;
    Ok(if r.feasible { 0 } else { 1 })
}

fn run_bounds(a: &BoundsArgs, stdout: &mut (dyn Write + Send)) -> Result<i32> {
    let norm = NormSpec::parse(&a.norm)?;
    let m = io::read_matrix(&a.cov)?;
    if m.n_rows() != m.dim() {
        return Err(Error::Format(format!(
            "{}: covariance must be square, got {} x {}",
            path_str(&a.cov),
            m.n_rows(),
            m.dim()
        )));
    }
    let cov = CovarianceModel::from_rows(&m, CovarianceSource::True)?;
    let d = cov.dim();
    let fs = norms::dual_functionals(&norm, d, a.budget, a.seed)?;
    let e_g = bounds::gaussian_norm_expectation(&cov, &fs, a.trials, a.seed)?;
    let r_weak = bounds::weak_variance_r(&cov, &fs)?;
    let (e_yn, e_yn_se) = match &a.input {
        Some(path) => {
            let sample = io::read_matrix(path)?;
            let est = bounds::rademacher_norm_expectation(
                &sample,
                &bounds::Centering::SampleMean,
                &fs,
                a.trials,
                a.seed,
            )?;
            (est.estimate.mean, Some(est.estimate.std_error))
        }
        None => (e_g.mean, None),
    };
    let epsilon = bounds::oracle_epsilon(&BoundInputs {
        e_yn,
        e_g: e_g.mean,
        r_weak,
        n_samples: a.n_samples,
        delta: a.delta,
        c: a.c,
    })?;
    let euclidean_epsilon = match norm {
        NormSpec::L2 => Some(bounds::euclidean_bound(&cov, a.n_samples, a.delta, a.c)?),
        _ => None,
    };
    let mut report = json!({
        "config": {
            "command": "bounds",
            "norm": norm,
            "cov": path_str(&a.cov),
            "n_samples": a.n_samples,
            "delta": a.delta,
            "trials": a.trials,
            "seed": a.seed,
            "budget": a.budget,
            "c": a.c,
            "input": a.input.as_deref().map(path_str),
            },
        "version": env!("CARGO_PKG_VERSION"),
        "e_g": e_g.mean,
        "e_g_se": e_g.std_error,
        "e_yn": e_yn,
        "e_yn_se": e_yn_se,
        "r_weak": r_weak,
        "epsilon": epsilon,
        "functional_count": fs.signed_len(),
        "exact": fs.exact(),
    });
    if let Some(e) = euclidean_epsilon {
        report["euclidean_epsilon"] = json!(e);
    }
    emit(&report, a.out.as_deref(), stdout)?;
    Ok(0)
}

fn run_certify(a: &CertifyArgs, stdout: &mut (dyn Write + Send)) -> Result<i32> {
    let norm = NormSpec::parse(&a.norm)?;
    let sample: SampleMatrix = io::read_matrix(&a.input)?;
    let mu = io::read_vector(&a.mu)?;
    let fs = norms::dual_functionals(&norm, sample.dim(), a.budget, a.seed)?;
    let rep = uniform_mom::certify_uniform(&sample, &fs, &mu, a.r, a.blocks)?;
    let report = json!({
        "config": {
            "command": "certify",
            "input": path_str(&a.input),
            "norm": norm,
            "budget": a.budget,
            "mu": path_str(&a.mu),
            "r": a.r,
            "blocks": a.blocks,
            "seed": a.seed,
            },
        "version": env!("CARGO_PKG_VERSION"),
        "r": rep.r,
        "n_blocks": rep.n_blocks,
        "per_function_coverage": rep.per_function_coverage,
        "min_coverage": rep.min_coverage,
        "required": rep.required,
        "pass": rep.pass,
        "functional_count": fs.signed_len(),
        "exact": fs.exact(),
    });
    emit(&report, a.out.as_deref(), stdout)?;
    Ok(if rep.pass { 0 } else { 1 })
}

fn run_bench(a: &BenchArgs, stdout: &mut (dyn Write + Send)) -> Result<i32> {
    let text = std::fs::read_to_string(&a.config)?;
    let config: ExperimentConfig = serde_json::from_str(&text).map_err(|e| {
        Error::Format(format!(
            "{}: line {}, column {}: {e}",
            path_str(&a.config),
            e.line(),
            e.column()
        ))
    })?;
    let report = harness::run_experiment(&config)?;
    emit(&serde_json::to_value(&report)?, a.out.as_deref(), stdout)?;
    if let Some(path) = &a.csv {
        std::fs::write(path, harness::report_csv(&report)?)?;
    }
    Ok(0)
}

/// Parses `args` (including the program name), runs the command and returns the exit code.
pub fn dispatch<I, T>(args: I, stdout: &mut (dyn Write + Send), stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let rendered = e.render().to_string();
            if code == 0 {
                let _ = stdout.write_all(rendered.as_bytes());
            } else {
                let _ = stderr.write_all(rendered.as_bytes());
            }
            return if code == 0 { 0 } else { 2 };
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build() {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(stderr, "error: thread pool: {e}");
            return 2;
        }
    };
    let result = pool.install(|| match &cli.command {
        Command::Estimate(a) => run_estimate(a, stdout),
        Command::Bounds(a) => run_bounds(a, stdout),
        Command::Certify(a) => run_certify(a, stdout),
        Command::Bench(a) => run_bench(a, stdout),
    });
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            2
        }
    }
}
