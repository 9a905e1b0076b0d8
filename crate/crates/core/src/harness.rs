//! Seeded Monte Carlo experiments on heavy-tailed data.
//!
//! Each trial draws a fresh sample, runs the selected estimators and records
//! the error of each one in the configured norm. Trial `i` seeds its own
//! generator from `(master_seed, i)`, and all aggregation happens after the
//! trials are collected in index order, so a report depends only on its
//! configuration and not on the number of worker threads.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, Pareto, StandardNormal, StudentT};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines;
use crate::blocks::{self, SampleMatrix};
use crate::bounds::{self, BoundInputs, Centering, CovarianceModel, CovarianceSource};
use crate::error::{invalid, Error, Result};
use crate::norms::{self, FunctionalSet, NormSpec};
use crate::rng::{self, tag};
use crate::slab::{SlabEstimator, SolverOptions};

/// Generating law of one observation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DistributionKind {
    /// `N(μ, Σ)`; `cov = None` is the identity.
    Gaussian {
        #[serde(default)]
        cov: Option<Vec<Vec<f64>>>,
    },
    /// Independent Student-t coordinates, coordinate `i` scaled by `scale[i]`.
    StudentT {
        dof: f64,
        #[serde(default)]
        scale: Option<Vec<f64>>,
    },
    /// Independent coordinates `S · (P − x_m)` with a random sign `S` and
    /// `P ~ Pareto(x_m = scale, α)`. The magnitude is a Lomax variable, so the
    /// variance is `2 x_m² / ((α − 1)(α − 2))`.
    ParetoSym { alpha: f64, scale: f64 },
    /// Independent centred log-normal coordinates `exp(σ Z) − exp(σ²/2)`.
    LogNormal { sigma_log: f64 },
    /// Independent coordinates equal to `0` with probability `1 − p` and to
    /// `±σ/√p` otherwise, where `p = min(1, 2δ/N)`. With `N` draws the
    /// empirical mean lands about `σ/√(2δN)` away from the truth with
    /// probability close to `2δ`, which makes the Chebyshev bound tight at
    /// level `δ` up to a constant.
    ChebyshevSharp { delta: f64, sigma: f64 },
}

/// A distribution together with its mean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionSpec {
    #[serde(flatten)]
    pub kind: DistributionKind,
    /// Mean vector; `None` is the origin.
    #[serde(default)]
    pub mu: Option<Vec<f64>>,
}

impl DistributionSpec {
    pub fn new(kind: DistributionKind) -> Self {
        DistributionSpec { kind, mu: None }
    }

    pub fn with_mean(kind: DistributionKind, mu: Vec<f64>) -> Self {
        DistributionSpec { kind, mu: Some(mu) }
    }

    pub fn mean(&self, d: usize) -> Result<Vec<f64>> {
        match &self.mu {
            None => Ok(vec![0.0; d]),
            Some(mu) if mu.len() == d => Ok(mu.clone()),
            Some(mu) => Err(Error::DimensionMismatch {
                expected: d,
                found: mu.len(),
            }),
        }
    }

    fn check(&self, d: usize) -> Result<()> {
        if d == 0 {
            return Err(invalid("d", "must be at least 1"));
        }
        self.mean(d)?;
        match &self.kind {
            DistributionKind::Gaussian { cov: Some(c) } => {
                if c.len() != d {
                    return Err(Error::DimensionMismatch {
                        expected: d,
                        found: c.len(),
                    });
                }
            }
            DistributionKind::Gaussian { cov: None } => {}
            DistributionKind::StudentT { dof, scale } => {
                if !(*dof > 2.0) {
                    return Err(invalid("dof", format!("need dof > 2 for a finite covariance, got {dof}")));
                }
                if let Some(s) = scale {
                    if s.len() != d {
                        return Err(Error::DimensionMismatch {
                            expected: d,
                            found: s.len(),
                        });
                    }
                    if s.iter().any(|x| !(*x >= 0.0 && x.is_finite())) {
                        return Err(invalid("scale", "entries must be finite and nonnegative"));
                    }
                }
            }
            DistributionKind::ParetoSym { alpha, scale } => {
                if !(*alpha > 2.0) {
                    return Err(invalid("alpha", format!("need alpha > 2 for a finite covariance, got {alpha}")));
                }
                if !(*scale > 0.0 && scale.is_finite()) {
                    return Err(invalid("scale", "must be positive"));
                }
            }
            DistributionKind::LogNormal { sigma_log } => {
                if !(*sigma_log >= 0.0 && sigma_log.is_finite()) {
                    return Err(invalid("sigma_log", "must be finite and nonnegative"));
                }
            }
            DistributionKind::ChebyshevSharp { delta, sigma } => {
                if !(*delta > 0.0 && *delta < 1.0) {
                    return Err(invalid("delta", "must lie in (0, 1)"));
                }
                if !(*sigma >= 0.0 && sigma.is_finite()) {
                    return Err(invalid("sigma", "must be finite and nonnegative"));
                }
            }
        }
        Ok(())
    }

    /// Covariance of one observation in dimension `d`.
    pub fn covariance(&self, d: usize) -> Result<CovarianceModel> {
        self.check(d)?;
        let diag = |v: f64| CovarianceModel::diagonal(&vec![v; d]);
        match &self.kind {
            DistributionKind::Gaussian { cov: None } => Ok(CovarianceModel::identity(d)),
            DistributionKind::Gaussian { cov: Some(rows) } => {
                let mut flat = Vec::with_capacity(d * d);
                for r in rows {
                    if r.len() != d {
                        return Err(Error::DimensionMismatch {
                            expected: d,
                            found: r.len(),
                        });
                    }
                    flat.extend_from_slice(r);
                }
                CovarianceModel::new(DMatrix::from_row_slice(d, d, &flat), CovarianceSource::True)
            }
            DistributionKind::StudentT { dof, scale } => {
                let var = dof / (dof - 2.0);
                match scale {
                    Some(s) => CovarianceModel::diagonal(&s.iter().map(|x| x * x * var).collect::<Vec<_>>()),
                    None => diag(var),
                }
            }
            DistributionKind::ParetoSym { alpha, scale } => {
                diag(2.0 * scale * scale / ((alpha - 1.0) * (alpha - 2.0)))
            }
            DistributionKind::LogNormal { sigma_log } => {
                let s2 = sigma_log * sigma_log;
                diag(s2.exp_m1() * s2.exp())
            }
            DistributionKind::ChebyshevSharp { sigma, .. } => diag(sigma * sigma),
        }
    }
}

/// Draws `N` observations in `R^d`. Identical arguments give identical matrices.
pub fn sample_distribution(spec: &DistributionSpec, n_samples: usize, d: usize, seed: u64) -> Result<SampleMatrix> {
    spec.check(d)?;
    if n_samples == 0 {
        return Err(invalid("n_samples", "must be at least 1"));
    }
    let mu = spec.mean(d)?;
    let mut rng = rng::stream(seed, 0);
    let mut data = Vec::with_capacity(n_samples * d);
    match &spec.kind {
        DistributionKind::Gaussian { .. } => {
            let l = spec.covariance(d)?.cholesky_factor();
            let mut z = vec![0.0; d];
            for _ in 0..n_samples {
                for zi in z.iter_mut() {
                    *zi = rng.sample(StandardNormal);
                }
                for a in 0..d {
                    data.push(mu[a] + (0..=a).map(|b| l[(a, b)] * z[b]).sum::<f64>());
                }
            }
        }
        DistributionKind::StudentT { dof, scale } => {
            let t = StudentT::new(*dof).map_err(|e| invalid("dof", e.to_string()))?;
            for _ in 0..n_samples {
                for a in 0..d {
                    let s = scale.as_ref().map_or(1.0, |s| s[a]);
                    data.push(mu[a] + s * t.sample(&mut rng));
                }
            }
        }
        DistributionKind::ParetoSym { alpha, scale } => {
            let p = Pareto::new(*scale, *alpha).map_err(|e| invalid("alpha", e.to_string()))?;
            for _ in 0..n_samples {
                for m in &mu {
                    let magnitude = p.sample(&mut rng) - scale;
                    let signed = if rng.random::<bool>() { magnitude } else { -magnitude };
                    data.push(m + signed);
                }
            }
        }
        DistributionKind::LogNormal { sigma_log } => {
            let centre = (0.5 * sigma_log * sigma_log).exp();
            for _ in 0..n_samples {
                for m in &mu {
                    let z: f64 = rng.sample(StandardNormal);
                    data.push(m + (sigma_log * z).exp() - centre);
                }
            }
        }
        DistributionKind::ChebyshevSharp { delta, sigma } => {
            let p = (2.0 * delta / n_samples as f64).min(1.0);
            let jump = sigma / p.sqrt();
            for _ in 0..n_samples {
                for m in &mu {
                    let u: f64 = rng.random();
                    let x = if u < 0.5 * p {
                        jump
                    } else if u < p {
                        -jump
                    } else {
                        0.0
                    };
                    data.push(m + x);
                }
            }
        }
    }
    SampleMatrix::new(data, n_samples, d)
}

/// Estimators the harness can run, keyed as they appear in reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorKind {
    Empirical,
    CwMom,
    GeoMom,
    Slab,
}

impl EstimatorKind {
    pub fn key(self) -> &'static str {
        match self {
            EstimatorKind::Empirical => "empirical",
            EstimatorKind::CwMom => "cw_mom",
            EstimatorKind::GeoMom => "geo_mom",
            EstimatorKind::Slab => "slab",
        }
    }

    pub fn all() -> Vec<EstimatorKind> {
        vec![
            EstimatorKind::Empirical,
            EstimatorKind::CwMom,
            EstimatorKind::GeoMom,
            EstimatorKind::Slab,
        ]
    }
}

/// How the slab estimator picks `ε`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum SlabEpsilon {
    /// The target accuracy computed from the true covariance with constant `c`.
    #[default]
    Oracle,
    /// Bisection down to the smallest feasible `ε`.
    Adaptive { eps_tol: f64 },
    Fixed { epsilon: f64 },
}

fn default_kappa() -> f64 {
    1.0
}

fn default_bound_trials() -> usize {
    2000
}

fn default_budget() -> usize {
    norms::DEFAULT_BUDGET
}

fn default_c() -> f64 {
    1.0
}

/// Everything needed to regenerate an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub distribution: DistributionSpec,
    pub d: usize,
    pub n_samples: usize,
    pub trials: usize,
    pub delta: f64,
    pub norm: NormSpec,
    #[serde(default = "default_budget")]
    pub budget: usize,
    /// Constant in the target accuracy.
    #[serde(default = "default_c")]
    pub c: f64,
    pub estimators: Vec<EstimatorKind>,
    pub master_seed: u64,
    /// Multiplier on `ln(2/δ)` when choosing the block count.
    #[serde(default = "default_kappa")]
    pub kappa: f64,
    #[serde(default)]
    pub slab_epsilon: SlabEpsilon,
    /// Monte Carlo trials for `E‖G‖` and `E‖Y_N‖`.
    #[serde(default = "default_bound_trials")]
    pub bound_trials: usize,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(invalid("trials", "must be at least 1"));
        }
        if self.n_samples == 0 {
            return Err(invalid("n_samples", "must be at least 1"));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(invalid("delta", "must lie in (0, 1)"));
        }
        if self.estimators.is_empty() {
            return Err(invalid("estimators", "select at least one estimator"));
        }
        if self.bound_trials < 2 {
            return Err(invalid("bound_trials", "must be at least 2"));
        }
        self.norm.validate()?;
        self.distribution.check(self.d)
    }
}

/// An error quantile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quantile {
    pub level: f64,
    /// `None` when the order statistic is an infinite (failed) trial.
    pub error: Option<f64>,
}

/// Summary statistics of the `ε` values the slab estimator used.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpsilonStats {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

/// Per-estimator aggregate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorSummary {
    pub quantiles: Vec<Quantile>,
    /// Mean error over trials that produced an estimate.
    pub mean_error: Option<f64>,
    /// Trials with no estimate (error or infeasible); their error counts as `+∞`.
    pub failures: usize,
    /// Slab only: fraction of trials with a certified point.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub feasibility_rate: Option<f64>,
    /// Slab only: fraction of trials that were feasible with error `≤ ε`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub within_epsilon_rate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon_used: Option<EpsilonStats>,
}

impl EstimatorSummary {
    pub fn quantile(&self, level: f64) -> Option<f64> {
        self.quantiles
            .iter()
            .find(|q| (q.level - level).abs() < 1e-12)
            .and_then(|q| q.error)
    }
}

/// Bound ingredients computed from the true law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundSummary {
    pub e_g: f64,
    pub e_g_se: f64,
    pub e_yn: f64,
    pub e_yn_se: f64,
    pub r_weak: f64,
    /// Target accuracy with the configured `c`.
    pub epsilon: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub euclidean_epsilon: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub version: String,
    pub n_blocks: usize,
    pub block_size: usize,
    pub functional_count: usize,
    pub exact: bool,
    pub bounds: BoundSummary,
    pub estimators: BTreeMap<String, EstimatorSummary>,
}

/// Order statistic at rank `⌈level · T⌉` (1-based), no interpolation.
pub fn order_statistic(sorted: &[f64], level: f64) -> f64 {
    let t = sorted.len();
    let rank = ((level * t as f64) * (1.0 - 1e-12)).ceil().clamp(1.0, t as f64) as usize;
    sorted[rank - 1]
}

/// Bound ingredients for `config`'s law, norm and sample size.
pub fn compute_bounds(config: &ExperimentConfig, fs: &FunctionalSet) -> Result<BoundSummary> {
    let cov = config.distribution.covariance(config.d)?;
    let mu = config.distribution.mean(config.d)?;
    let seed = rng::derive_seed(config.master_seed, tag::BOUND_SAMPLE);
    let e_g = bounds::gaussian_norm_expectation(&cov, fs, config.bound_trials, seed)?;
    let sample = sample_distribution(&config.distribution, config.n_samples, config.d, seed)?;
    let e_yn = bounds::rademacher_norm_expectation(&sample, &Centering::Known(mu), fs, config.bound_trials, seed)?;
    let r_weak = bounds::weak_variance_r(&cov, fs)?;
    let epsilon = bounds::oracle_epsilon(&BoundInputs {
        e_yn: e_yn.estimate.mean,
        e_g: e_g.mean,
        r_weak,
        n_samples: config.n_samples,
        delta: config.delta,
        c: config.c,
    })?;
    let euclidean_epsilon = match config.norm {
        NormSpec::L2 => Some(bounds::euclidean_bound(&cov, config.n_samples, config.delta, config.c)?),
        _ => None,
    };
    Ok(BoundSummary {
        e_g: e_g.mean,
        e_g_se: e_g.std_error,
        e_yn: e_yn.estimate.mean,
        e_yn_se: e_yn.estimate.std_error,
        r_weak,
        epsilon,
        euclidean_epsilon,
    })
}

#[derive(Debug, Clone, Copy)]
struct TrialOutcome {
    error: f64,
    feasible: bool,
    epsilon: Option<f64>,
}

/// Per-trial errors, in trial order, for every selected estimator.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialErrors {
    pub errors: BTreeMap<EstimatorKind, Vec<f64>>,
}

fn error_norm(v: &[f64], norm: &NormSpec, fs: &FunctionalSet) -> f64 {
    norms::direct_norm(v, norm).unwrap_or_else(|_| fs.sup_abs(v))
}

/// Runs `config` on a pool of `threads` workers (`0` = rayon default).
pub fn run_experiment_with_threads(config: &ExperimentConfig, threads: usize) -> Result<ExperimentReport> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Format(format!("thread pool: {e}")))?;
    pool.install(|| run_experiment(config))
}

/// Runs every trial and aggregates error quantiles per estimator.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let d = config.d;
    let fs = norms::dual_functionals(&config.norm, d, config.budget, config.master_seed)?;
    let bounds = compute_bounds(config, &fs)?;
    let mu = config.distribution.mean(d)?;
    let choice = blocks::blocks_for_confidence(config.delta, config.n_samples, config.kappa)?;
    let n_blocks = choice.n_blocks;
    let mut slab = SlabEstimator::with_functionals(fs.clone(), config.delta);
    slab.kappa = config.kappa;
    slab.solver = SolverOptions::default();

    let mut estimators = config.estimators.clone();
    estimators.sort();
    estimators.dedup();

    let trial_master = rng::derive_seed(config.master_seed, tag::TRIAL);
    let outcomes: Vec<Vec<TrialOutcome>> = (0..config.trials)
        .into_par_iter()
        .map(|i| {
            let seed = rng::derive_seed(trial_master, i as u64);
            let sample = sample_distribution(&config.distribution, config.n_samples, d, seed)?;
            let err_of = |point: &[f64]| {
                let diff: Vec<f64> = point.iter().zip(&mu).map(|(a, b)| a - b).collect();
                error_norm(&diff, &config.norm, &fs)
            };
            let ok = |point: &[f64]| TrialOutcome {
                error: err_of(point),
                feasible: true,
                epsilon: None,
            };
            let failed = TrialOutcome {
                error: f64::INFINITY,
                feasible: false,
                epsilon: None,
            };
            Ok(estimators
                .iter()
                .map(|kind| match kind {
                    EstimatorKind::Empirical => ok(&baselines::empirical_mean(&sample)),
                    EstimatorKind::CwMom => baselines::coordinatewise_mom(&sample, n_blocks)
                        .map_or(failed, |p| ok(&p)),
                    EstimatorKind::GeoMom => baselines::geometric_mom(&sample, n_blocks, 1e-10, 1000)
                        .map_or(failed, |g| ok(&g.point)),
                    EstimatorKind::Slab => {
                        let result = match config.slab_epsilon {
                            SlabEpsilon::Oracle => slab.estimate(&sample, bounds.epsilon),
                            SlabEpsilon::Fixed { epsilon } => slab.estimate(&sample, epsilon),
                            SlabEpsilon::Adaptive { eps_tol } => slab.adaptive(&sample, eps_tol),
                        };
                        match result {
                            Ok(r) if r.feasible => TrialOutcome {
                                error: err_of(&r.point),
                                feasible: true,
                                epsilon: Some(r.epsilon_used),
                            },
                            Ok(r) => TrialOutcome {
                                epsilon: Some(r.epsilon_used),
                                ..failed
                            },
                            Err(_) => failed,
                        }
                    }
                })
                .collect())
        })
        .collect::<Result<_>>()?;

    let mut summaries = BTreeMap::new();
    let mut levels = vec![0.5, 0.9, 0.99, 1.0 - config.delta];
    levels.sort_by(f64::total_cmp);
    levels.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    for (e, kind) in estimators.iter().enumerate() {
        let column: Vec<TrialOutcome> = outcomes.iter().map(|o| o[e]).collect();
        let mut errors: Vec<f64> = column.iter().map(|o| o.error).collect();
        errors.sort_by(f64::total_cmp);
        let finite: Vec<f64> = errors.iter().copied().filter(|x| x.is_finite()).collect();
        let failures = errors.len() - finite.len();
        let quantiles = levels
            .iter()
            .map(|&level| {
                let q = order_statistic(&errors, level);
                Quantile {
                    level,
                    error: q.is_finite().then_some(q),
                }
            })
            .collect();
        let mean_error = (!finite.is_empty()).then(|| finite.iter().sum::<f64>() / finite.len() as f64);
        let is_slab = *kind == EstimatorKind::Slab;
        let t = config.trials as f64;
        let feasibility_rate = is_slab.then(|| column.iter().filter(|o| o.feasible).count() as f64 / t);
        let within_epsilon_rate = is_slab.then(|| {
            column
                .iter()
                .filter(|o| o.feasible && o.epsilon.is_some_and(|eps| o.error <= eps))
                .count() as f64
                / t
        });
        let eps: Vec<f64> = column.iter().filter_map(|o| o.epsilon).collect();
        let epsilon_used = (is_slab && !eps.is_empty()).then(|| EpsilonStats {
            mean: eps.iter().sum::<f64>() / eps.len() as f64,
            min: eps.iter().copied().fold(f64::INFINITY, f64::min),
            max: eps.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        });
        summaries.insert(
            kind.key().to_string(),
            EstimatorSummary {
                quantiles,
                mean_error,
                failures,
                feasibility_rate,
                within_epsilon_rate,
                epsilon_used,
            },
        );
    }

    Ok(ExperimentReport {
        config: config.clone(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        n_blocks,
        block_size: config.n_samples / n_blocks,
        functional_count: fs.signed_len(),
        exact: fs.exact(),
        bounds,
        estimators: summaries,
    })
}

/// Writes one CSV row per (estimator, quantile).
pub fn report_csv(report: &ExperimentReport) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let row_err = |e: csv::Error| Error::Format(e.to_string());
    w.write_record(["estimator", "level", "error", "mean_error", "failures", "feasibility_rate"])
        .map_err(row_err)?;
    let fmt = |x: Option<f64>| x.map_or_else(String::new, crate::json::format_float);
    for (name, s) in &report.estimators {
        for q in &s.quantiles {
            w.write_record([
                name.clone(),
                crate::json::format_float(q.level),
                q.error.map_or_else(|| "inf".to_string(), crate::json::format_float),
                fmt(s.mean_error),
                s.failures.to_string(),
                fmt(s.feasibility_rate),
            ])
            .map_err(row_err)?;
        }
    }
    let bytes = w.into_inner().map_err(|e| Error::Format(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Format(e.to_string()))
}
