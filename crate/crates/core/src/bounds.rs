//! Target accuracy of the slab estimator and its ingredients.
//!
//! The accuracy the estimator is tuned for is
//!
//! ```text
//! ε = (c / √N) · max{ E‖Y_N‖, E‖G‖ + R √ln(2/δ) }
//! ```
//!
//! where `Y_N = N^{-1/2} Σ ε_i (X_i − μ)` is the Rademacher-symmetrized sum,
//! `G` is a centred Gaussian with the covariance `Σ` of `X`, and `R` is the
//! largest standard deviation of a dual functional, `R = sup_t √(tᵀ Σ t)`.
//! `E‖G‖` and `E‖Y_N‖` are estimated by Monte Carlo; `R` is computed from
//! `Σ` directly.
//!
//! The absolute constants are not known. Every one of them defaults to 1 and
//! is exposed as a parameter.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::blocks::SampleMatrix;
use crate::error::{invalid, Error, Result};
use crate::norms::{dot, FunctionalSet, NormKind};
use crate::rng::{self, tag};

/// Where a covariance matrix came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CovarianceSource {
    /// The covariance of the generating distribution.
    True,
    /// Estimated from the sample; guarantees do not transfer.
    PlugIn,
}

/// A symmetric positive-semidefinite covariance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceModel {
    sigma: DMatrix<f64>,
    source: CovarianceSource,
}

impl CovarianceModel {
    /// Validates symmetry (to `1e-10`, relative to the largest entry) and
    /// positive semidefiniteness (eigenvalues `≥ −1e-10 · trace`).
    pub fn new(sigma: DMatrix<f64>, source: CovarianceSource) -> Result<Self> {
        if sigma.nrows() != sigma.ncols() {
            return Err(Error::DimensionMismatch {
                expected: sigma.nrows(),
                found: sigma.ncols(),
            });
        }
        if sigma.nrows() == 0 {
            return Err(Error::Empty("covariance matrix"));
        }
        if sigma.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("covariance matrix".into()));
        }
        let scale = sigma.amax().max(f64::MIN_POSITIVE);
        let asym = (&sigma - sigma.transpose()).amax();
        if asym > 1e-10 * scale {
            return Err(Error::NotSymmetric(asym));
        }
        let sym = (&sigma + sigma.transpose()) * 0.5;
        let trace = sym.trace();
        let min_eig = SymmetricEigen::new(sym.clone()).eigenvalues.min();
        if min_eig < -1e-10 * trace.abs().max(f64::MIN_POSITIVE) || trace < 0.0 {
            return Err(Error::NotPositiveSemidefinite {
                min_eigenvalue: min_eig,
            });
        }
        Ok(CovarianceModel { sigma: sym, source })
    }

    pub fn from_rows(rows: &SampleMatrix, source: CovarianceSource) -> Result<Self> {
        CovarianceModel::new(
            DMatrix::from_row_slice(rows.n_rows(), rows.dim(), rows.as_slice()),
            source,
        )
    }

    pub fn identity(d: usize) -> Self {
        CovarianceModel {
            sigma: DMatrix::identity(d, d),
            source: CovarianceSource::True,
        }
    }

    pub fn diagonal(diag: &[f64]) -> Result<Self> {
        CovarianceModel::new(
            DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(diag)),
            CovarianceSource::True,
        )
    }

    /// Unbiased sample covariance (`1/(N−1)`); requires `N ≥ 2`.
    pub fn plug_in(sample: &SampleMatrix) -> Result<Self> {
        let n = sample.n_rows();
        if n < 2 {
            return Err(invalid("sample", "plug-in covariance needs at least two rows"));
        }
        let d = sample.dim();
        let mean = crate::baselines::empirical_mean(sample);
        let mut sigma = DMatrix::zeros(d, d);
        for row in sample.rows() {
            for a in 0..d {
                let da = row[a] - mean[a];
                for b in a..d {
                    sigma[(a, b)] += da * (row[b] - mean[b]);
                }
            }
        }
        for a in 0..d {
            for b in a..d {
                let v = sigma[(a, b)] / (n - 1) as f64;
                sigma[(a, b)] = v;
                sigma[(b, a)] = v;
            }
        }
        CovarianceModel::new(sigma, CovarianceSource::PlugIn)
    }

    pub fn dim(&self) -> usize {
        self.sigma.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.sigma
    }

    pub fn source(&self) -> CovarianceSource {
        self.source
    }

    pub fn trace(&self) -> f64 {
        self.sigma.trace()
    }

    pub fn max_eigenvalue(&self) -> f64 {
        SymmetricEigen::new(self.sigma.clone())
            .eigenvalues
            .max()
            .max(0.0)
    }

    /// Multiplies every entry by `factor ≥ 0`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        CovarianceModel::new(&self.sigma * factor, self.source)
    }

    /// `tᵀ Σ t`.
    pub fn quadratic_form(&self, t: &[f64]) -> f64 {
        let d = self.dim();
        let mut acc = 0.0;
        for a in 0..d {
            let row: f64 = (0..d).map(|b| self.sigma[(a, b)] * t[b]).sum();
            acc += t[a] * row;
        }
        acc
    }

    /// Lower-triangular `L` with `L Lᵀ = Σ`.
    ///
    /// Semidefinite matrices get a diagonal jitter of `1e-12 · trace`; the
    /// zero matrix factors as zero.
    pub fn cholesky_factor(&self) -> DMatrix<f64> {
        let d = self.dim();
        let trace = self.trace();
        if trace == 0.0 {
            return DMatrix::zeros(d, d);
        }
        if let Some(c) = self.sigma.clone().cholesky() {
            return c.l();
        }
        let jittered = &self.sigma + DMatrix::identity(d, d) * (1e-12 * trace);
        match jittered.cholesky() {
            Some(c) => c.l(),
            None => {
                // Rank-deficient beyond what jitter repairs: fall back to the
                // symmetric square root, which is exact for any PSD matrix.
                let eig = SymmetricEigen::new(self.sigma.clone());
                let roots = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
                &eig.eigenvectors * DMatrix::from_diagonal(&roots)
            }
        }
    }
}

/// `sup_t √(tᵀ Σ t)` over the functional set.
///
/// Exact `ℓ∞` sets read the diagonal and `ℓ2` uses the top eigenvalue; other
/// sets take the maximum over their representatives, which is a lower bound
/// unless the set is exact.
pub fn weak_variance_r(cov: &CovarianceModel, fs: &FunctionalSet) -> Result<f64> {
    fs.check_dim(cov.dim())?;
    match fs.kind() {
        NormKind::Linf if fs.exact() && fs.is_coordinate_basis() => Ok((0..cov.dim())
            .map(|i| cov.sigma[(i, i)].max(0.0).sqrt())
            .fold(0.0, f64::max)),
        NormKind::L2 => Ok(cov.max_eigenvalue().sqrt()),
        _ => {
            if fs.is_empty() {
                return Err(Error::Empty("functional set"));
            }
            Ok(fs
                .iter()
                .map(|t| cov.quadratic_form(t).max(0.0).sqrt())
                .fold(0.0, f64::max))
        }
    }
}

/// A Monte Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub trials: usize,
}

impl MonteCarloEstimate {
    fn from_draws(draws: &[f64]) -> Self {
        let n = draws.len() as f64;
        let mean = draws.iter().sum::<f64>() / n;
        let var = draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        MonteCarloEstimate {
            mean,
            std_error: (var / n).sqrt(),
            trials: draws.len(),
        }
    }

    /// `std_error / mean`, or 0 when the mean vanishes.
    pub fn relative_error(&self) -> f64 {
        if self.mean == 0.0 {
            0.0
        } else {
            self.std_error / self.mean.abs()
        }
    }
}

/// Monte Carlo estimate of `E sup_t |⟨t, G⟩|` with `G ~ N(0, Σ)`.
///
/// Trial `k` draws from its own stream derived from `(seed, k)`, so the
/// result does not depend on the rayon pool size.
pub fn gaussian_norm_expectation(
    cov: &CovarianceModel,
    fs: &FunctionalSet,
    trials: usize,
    seed: u64,
) -> Result<MonteCarloEstimate> {
    if trials < 2 {
        return Err(invalid("trials", "need at least 2 Monte Carlo trials"));
    }
    if fs.is_empty() {
        return Err(Error::Empty("functional set"));
    }
    fs.check_dim(cov.dim())?;
    let d = cov.dim();
    let l = cov.cholesky_factor();
    let master = rng::derive_seed(seed, tag::GAUSSIAN_MC);
    let draws: Vec<f64> = (0..trials)
        .into_par_iter()
        .map_init(
            || (vec![0.0; d], vec![0.0; d]),
            |(z, g), k| {
                let mut rng = rng::stream(master, k as u64);
                for zi in z.iter_mut() {
                    *zi = rng.sample(StandardNormal);
                }
                for a in 0..d {
                    g[a] = (0..=a).map(|b| l[(a, b)] * z[b]).sum();
                }
                fs.sup_abs(g)
            },
        )
        .collect();
    Ok(MonteCarloEstimate::from_draws(&draws))
}

/// Centre used to form `X_i − μ`.
#[derive(Debug, Clone, PartialEq)]
pub enum Centering {
    /// The true mean (benchmark mode).
    Known(Vec<f64>),
    /// The sample mean (plug-in mode).
    SampleMean,
}

/// Rademacher average with a flag recording plug-in centring.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RademacherEstimate {
    #[serde(flatten)]
    pub estimate: MonteCarloEstimate,
    pub plug_in: bool,
}

/// Monte Carlo estimate of `E_ε ‖N^{-1/2} Σ ε_i (X_i − μ)‖` over random signs,
/// conditional on the sample.
pub fn rademacher_norm_expectation(
    sample: &SampleMatrix,
    centering: &Centering,
    fs: &FunctionalSet,
    trials: usize,
    seed: u64,
) -> Result<RademacherEstimate> {
    if trials < 2 {
        return Err(invalid("trials", "need at least 2 Monte Carlo trials"));
    }
    if fs.is_empty() {
        return Err(Error::Empty("functional set"));
    }
    fs.check_dim(sample.dim())?;
    let (mu, plug_in) = match centering {
        Centering::Known(mu) => {
            fs.check_dim(mu.len())?;
            (mu.clone(), false)
        }
        Centering::SampleMean => (crate::baselines::empirical_mean(sample), true),
    };
    let d = sample.dim();
    let n = sample.n_rows();
    let centred: Vec<f64> = sample
        .rows()
        .flat_map(|r| r.iter().zip(&mu).map(|(x, m)| x - m))
        .collect();
    // Projections of the centred rows on each functional: the sup over t of
    // |Σ ε_i ⟨t, x_i⟩| then costs K·N per trial instead of N·d + K·d.
    let use_projections = fs.len() <= d;
    let proj: Vec<f64> = if use_projections {
        fs.iter()
            .flat_map(|t| centred.chunks_exact(d).map(move |x| dot(t, x)))
            .collect()
    } else {
        Vec::new()
    };
    let scale = (n as f64).sqrt().recip();
    let master = rng::derive_seed(seed, tag::RADEMACHER_MC);
    let draws: Vec<f64> = (0..trials)
        .into_par_iter()
        .map_init(
            || (vec![false; n], vec![0.0; d]),
            |(signs, acc), k| {
                let mut rng = rng::stream(master, k as u64);
                for s in signs.iter_mut() {
                    *s = rng.random();
                }
                if use_projections {
                    (0..fs.len())
                        .map(|t| {
                            let row = &proj[t * n..(t + 1) * n];
                            let sum: f64 = row
                                .iter()
                                .zip(signs.iter())
                                .map(|(p, &s)| if s { *p } else { -*p })
                                .sum();
                            (sum * scale).abs()
                        })
                        .fold(0.0, f64::max)
                } else {
                    acc.iter_mut().for_each(|a| *a = 0.0);
                    for (x, &s) in centred.chunks_exact(d).zip(signs.iter()) {
                        for (a, xi) in acc.iter_mut().zip(x) {
                            if s {
                                *a += xi;
                            } else {
                                *a -= xi;
                            }
                        }
                    }
                    acc.iter_mut().for_each(|a| *a *= scale);
                    fs.sup_abs(acc)
                }
            },
        )
        .collect();
    Ok(RademacherEstimate {
        estimate: MonteCarloEstimate::from_draws(&draws),
        plug_in,
    })
}

/// Ingredients of the target accuracy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundInputs {
    /// `E‖Y_N‖`.
    pub e_yn: f64,
    /// `E‖G‖`.
    pub e_g: f64,
    /// `R`.
    pub r_weak: f64,
    pub n_samples: usize,
    pub delta: f64,
    /// Multiplicative constant `c`.
    pub c: f64,
}

/// `(c/√N) · max(E‖Y_N‖, E‖G‖ + R √ln(2/δ))`.
pub fn oracle_epsilon(b: &BoundInputs) -> Result<f64> {
    if !(b.delta > 0.0 && b.delta < 1.0) {
        return Err(invalid("delta", format!("must lie in (0, 1), got {}", b.delta)));
    }
    if b.n_samples == 0 {
        return Err(invalid("n_samples", "must be at least 1"));
    }
    for (name, v) in [("e_yn", b.e_yn), ("e_g", b.e_g), ("r_weak", b.r_weak), ("c", b.c)] {
        if !(v >= 0.0 && v.is_finite()) {
            return Err(invalid(name, format!("must be finite and nonnegative, got {v}")));
        }
    }
    let log_term = (2.0 / b.delta).ln();
    let inner = b.e_yn.max(b.e_g + b.r_weak * log_term.sqrt());
    Ok(b.c / (b.n_samples as f64).sqrt() * inner)
}

/// Euclidean specialization: `(c/√N)(√tr Σ + √(λ_max ln(2/δ)))`.
pub fn euclidean_bound(cov: &CovarianceModel, n_samples: usize, delta: f64, c: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(invalid("delta", format!("must lie in (0, 1), got {delta}")));
    }
    if n_samples == 0 {
        return Err(invalid("n_samples", "must be at least 1"));
    }
    let trace = cov.trace().max(0.0);
    let lambda = cov.max_eigenvalue();
    Ok(c / (n_samples as f64).sqrt() * (trace.sqrt() + (lambda * (2.0 / delta).ln()).sqrt()))
}

/// Calibration constants for the three uniform median-of-means scales.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EtaConstants {
    pub c0: f64,
    pub c1: f64,
    pub c4: f64,
}

impl Default for EtaConstants {
    fn default() -> Self {
        EtaConstants {
            c0: 1.0,
            c1: 1.0,
            c4: 1.0,
        }
    }
}

impl EtaConstants {
    pub fn uniform(c: f64) -> Self {
        EtaConstants { c0: c, c1: c, c4: c }
    }
}

/// The scales `(η₀, η₁, η₂)` plus the ingredients they were built from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EtaRecipe {
    /// Individual accuracy: `c₀ R √(n/N)`.
    pub eta0: f64,
    /// Net scale from Sudakov: `c₁ E‖G‖ / √n`.
    pub eta1: f64,
    /// Oscillation scale: `(c₄/√N) max(E‖Y_N‖, E‖G‖)`.
    pub eta2: f64,
    pub r_weak: f64,
    pub e_g: MonteCarloEstimate,
    pub e_yn: f64,
}

impl EtaRecipe {
    /// Radius `r = η₀ + η₂` of the uniform certification.
    pub fn radius(&self) -> f64 {
        self.eta0 + self.eta2
    }
}

/// Computes `(η₀, η₁, η₂)` for the class of dual functionals.
///
/// `η₀` uses the block count `n` in place of `ln(2/δ)`. `E‖Y_N‖` is taken
/// from `e_yn` when given; otherwise `E‖G‖` stands in for it, which is its
/// large-`N` limit.
#[allow(clippy::too_many_arguments)]
pub fn uniform_eta_recipe(
    cov: &CovarianceModel,
    fs: &FunctionalSet,
    n_samples: usize,
    n_blocks: usize,
    trials: usize,
    seed: u64,
    constants: EtaConstants,
    e_yn: Option<f64>,
) -> Result<EtaRecipe> {
    if n_blocks == 0 {
        return Err(invalid("n_blocks", "must be at least 1"));
    }
    if n_samples == 0 {
        return Err(invalid("n_samples", "must be at least 1"));
    }
    let r_weak = weak_variance_r(cov, fs)?;
    let e_g = gaussian_norm_expectation(cov, fs, trials, seed)?;
    let e_yn = e_yn.unwrap_or(e_g.mean);
    let n = n_samples as f64;
    Ok(EtaRecipe {
        eta0: constants.c0 * r_weak * (n_blocks as f64 / n).sqrt(),
        eta1: constants.c1 * e_g.mean / (n_blocks as f64).sqrt(),
        eta2: constants.c4 / n.sqrt() * e_yn.max(e_g.mean),
        r_weak,
        e_g,
        e_yn,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::norms::{dual_functionals, NormSpec};

    fn abs_norm() -> FunctionalSet {
        dual_functionals(&NormSpec::Linf, 1, 1, 0).unwrap()
    }

    #[test]
    fn covariance_validation() {
        assert!(CovarianceModel::new(DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.4, 1.0]), CovarianceSource::True).is_err());
        assert!(CovarianceModel::new(DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]), CovarianceSource::True).is_err());
        assert!(CovarianceModel::new(DMatrix::from_row_slice(2, 3, &[0.0; 6]), CovarianceSource::True).is_err());
        assert!(CovarianceModel::new(DMatrix::zeros(2, 2), CovarianceSource::True).is_ok());
        // rank one is fine
        assert!(CovarianceModel::new(DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]), CovarianceSource::True).is_ok());
    }

    #[test]
    fn plug_in_covariance() {
        let s = SampleMatrix::from_rows(&[[1.0, 0.0], [3.0, 2.0], [5.0, 1.0]]).unwrap();
        let c = CovarianceModel::plug_in(&s).unwrap();
        assert_eq!(c.source(), CovarianceSource::PlugIn);
        assert!((c.matrix()[(0, 0)] - 4.0).abs() < 1e-12);
        assert!((c.matrix()[(1, 1)] - 1.0).abs() < 1e-12);
        assert!((c.matrix()[(0, 1)] - 1.0).abs() < 1e-12);
        assert!(CovarianceModel::plug_in(&SampleMatrix::from_rows(&[[1.0]]).unwrap()).is_err());
    }

    #[test]
    fn weak_variance_examples() {
        let diag = CovarianceModel::diagonal(&[1.0, 4.0]).unwrap();
        let linf = dual_functionals(&NormSpec::Linf, 2, 1, 0).unwrap();
        assert_eq!(weak_variance_r(&diag, &linf).unwrap(), 2.0);
        // tᵀΣt at the signed basis reads the diagonal
        assert_eq!(diag.quadratic_form(&[0.0, 1.0]).sqrt(), 2.0);

        let l2 = dual_functionals(&NormSpec::L2, 3, 20, 0).unwrap();
        assert!((weak_variance_r(&CovarianceModel::identity(3), &l2).unwrap() - 1.0).abs() < 1e-12);

        let zero = CovarianceModel::new(DMatrix::zeros(2, 2), CovarianceSource::True).unwrap();
        assert_eq!(weak_variance_r(&zero, &linf).unwrap(), 0.0);
        let l1 = dual_functionals(&NormSpec::L1, 2, 16, 0).unwrap();
        assert_eq!(weak_variance_r(&zero, &l1).unwrap(), 0.0);
        // sign vectors (1, ±1) against diag(1, 4): √5
        assert!((weak_variance_r(&diag, &l1).unwrap() - 5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn weak_variance_linf_matches_diagonal_on_random_matrices() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        for d in 1..8 {
            let mut m = DMatrix::zeros(d, d);
            for a in 0..d {
                for b in 0..a {
                    let x: f64 = rng.random_range(-0.3..0.3);
                    m[(a, b)] = x;
                    m[(b, a)] = x;
                }
                m[(a, a)] = rng.random_range(d as f64..2.0 * d as f64);
            }
            let cov = CovarianceModel::new(m.clone(), CovarianceSource::True).unwrap();
            let fs = dual_functionals(&NormSpec::Linf, d, 1, 0).unwrap();
            let want = (0..d).map(|i| m[(i, i)].sqrt()).fold(0.0, f64::max);
            assert!((weak_variance_r(&cov, &fs).unwrap() - want).abs() <= 1e-12 * want);
        }
    }

    #[test]
    fn gaussian_expectation_degenerate_and_errors() {
        let zero = CovarianceModel::new(DMatrix::zeros(3, 3), CovarianceSource::True).unwrap();
        let fs = dual_functionals(&NormSpec::Linf, 3, 1, 0).unwrap();
        let e = gaussian_norm_expectation(&zero, &fs, 10, 1).unwrap();
        assert_eq!((e.mean, e.std_error), (0.0, 0.0));
        assert!(gaussian_norm_expectation(&zero, &fs, 1, 1).is_err());
    }

    #[test]
    fn gaussian_expectation_half_normal() {
        let e = gaussian_norm_expectation(&CovarianceModel::identity(1), &abs_norm(), 20_000, 3).unwrap();
        let want = (2.0 / std::f64::consts::PI).sqrt();
        assert!((e.mean - want).abs() <= 3.0 * e.std_error, "{e:?}");
    }

    #[test]
    fn gaussian_expectation_singular_covariance() {
        // Σ = v vᵀ with v = (1, 1): G = g (1, 1), so ‖G‖∞ = |g|.
        let cov = CovarianceModel::new(DMatrix::from_element(2, 2, 1.0), CovarianceSource::True).unwrap();
        let fs = dual_functionals(&NormSpec::Linf, 2, 1, 0).unwrap();
        let e = gaussian_norm_expectation(&cov, &fs, 20_000, 5).unwrap();
        let want = (2.0 / std::f64::consts::PI).sqrt();
        assert!((e.mean - want).abs() <= 3.0 * e.std_error + 1e-5, "{e:?}");
    }

    #[test]
    fn monte_carlo_is_bitwise_reproducible() {
        let cov = CovarianceModel::identity(4);
        let fs = dual_functionals(&NormSpec::L2, 4, 30, 2).unwrap();
        let a = gaussian_norm_expectation(&cov, &fs, 500, 9).unwrap();
        let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = single.install(|| gaussian_norm_expectation(&cov, &fs, 500, 9).unwrap());
        assert_eq!(a.mean.to_bits(), b.mean.to_bits());
        assert_eq!(a.std_error.to_bits(), b.std_error.to_bits());

        let s = SampleMatrix::from_rows(&[[1.0, 0.0, 2.0, -1.0], [0.5, 0.5, 0.5, 0.5], [3.0, 1.0, 0.0, 2.0]]).unwrap();
        let r1 = rademacher_norm_expectation(&s, &Centering::SampleMean, &fs, 300, 4).unwrap();
        let r2 = single.install(|| rademacher_norm_expectation(&s, &Centering::SampleMean, &fs, 300, 4).unwrap());
        assert_eq!(r1, r2);
        assert!(r1.plug_in);
    }

    #[test]
    fn rademacher_examples() {
        let fs = abs_norm();
        let s = SampleMatrix::from_column(&[2.0; 5]).unwrap();
        let r = rademacher_norm_expectation(&s, &Centering::Known(vec![2.0]), &fs, 50, 1).unwrap();
        assert_eq!(r.estimate.mean, 0.0);
        assert!(!r.plug_in);

        let linf = dual_functionals(&NormSpec::Linf, 2, 1, 0).unwrap();
        let s = SampleMatrix::from_rows(&[[3.0, -1.0]]).unwrap();
        let r = rademacher_norm_expectation(&s, &Centering::Known(vec![1.0, 1.0]), &linf, 40, 1).unwrap();
        assert_eq!(r.estimate.mean, 2.0);
        assert_eq!(r.estimate.std_error, 0.0);

        // {+1, −1}: |ε₁ − ε₂|/√2 ∈ {0, √2}, each with probability 1/2
        let s = SampleMatrix::from_column(&[1.0, -1.0]).unwrap();
        let brute: f64 = [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)]
            .iter()
            .map(|(a, b): &(f64, f64)| (a * 1.0 + b * -1.0).abs() / 2f64.sqrt())
            .sum::<f64>()
            / 4.0;
        assert!((brute - 2f64.sqrt() / 2.0).abs() < 1e-15);
        let r = rademacher_norm_expectation(&s, &Centering::Known(vec![0.0]), &fs, 4000, 2).unwrap();
        assert!((r.estimate.mean - brute).abs() <= 3.0 * r.estimate.std_error, "{r:?}");

        assert!(rademacher_norm_expectation(&s, &Centering::SampleMean, &fs, 1, 2).is_err());
    }

    #[test]
    fn rademacher_paths_agree() {
        // K ≤ d uses projections, K > d accumulates vectors; both must agree.
        let s = SampleMatrix::from_rows(&[[1.0, 2.0], [-0.5, 0.25], [2.0, -1.0], [0.0, 3.0]]).unwrap();
        let few = FunctionalSet::from_vectors(2, vec![vec![1.0, 0.0], vec![0.0, 1.0]], true, NormKind::Linf).unwrap();
        let many = FunctionalSet::from_vectors(
            2,
            vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![0.0, 1.0]],
            true,
            NormKind::Linf,
        )
        .unwrap();
        let a = rademacher_norm_expectation(&s, &Centering::SampleMean, &few, 200, 6).unwrap();
        let b = rademacher_norm_expectation(&s, &Centering::SampleMean, &many, 200, 6).unwrap();
        assert!((a.estimate.mean - b.estimate.mean).abs() < 1e-12);
    }

    #[test]
    fn oracle_epsilon_examples() {
        let b = BoundInputs {
            e_yn: 3.0,
            e_g: 2.5,
            r_weak: 1.0,
            n_samples: 100,
            delta: 2.0 * (-4.0f64).exp(),
            c: 1.0,
        };
        assert!((oracle_epsilon(&b).unwrap() - 0.45).abs() < 1e-12);
        let zero = BoundInputs { e_yn: 0.0, e_g: 0.0, r_weak: 0.0, ..b };
        assert_eq!(oracle_epsilon(&zero).unwrap(), 0.0);
        let doubled = BoundInputs { c: 2.0, ..b };
        assert!((oracle_epsilon(&doubled).unwrap() - 0.9).abs() < 1e-12);
        assert!(oracle_epsilon(&BoundInputs { delta: 1.0, ..b }).is_err());
        assert!(oracle_epsilon(&BoundInputs { e_g: -1.0, ..b }).is_err());
    }

    #[test]
    fn oracle_epsilon_monotone_and_root_n() {
        let b = BoundInputs { e_yn: 1.0, e_g: 1.2, r_weak: 0.7, n_samples: 400, delta: 0.1, c: 1.0 };
        let base = oracle_epsilon(&b).unwrap();
        assert!(oracle_epsilon(&BoundInputs { e_yn: 10.0, ..b }).unwrap() >= base);
        assert!(oracle_epsilon(&BoundInputs { e_g: 1.3, ..b }).unwrap() >= base);
        assert!(oracle_epsilon(&BoundInputs { r_weak: 0.8, ..b }).unwrap() >= base);
        assert!(oracle_epsilon(&BoundInputs { delta: 0.01, ..b }).unwrap() >= base);
        let quad = oracle_epsilon(&BoundInputs { n_samples: 1600, ..b }).unwrap();
        assert!((quad - base / 2.0).abs() < 1e-15);
    }

    #[test]
    fn euclidean_bound_examples() {
        let delta = 2.0 * (-4.0f64).exp();
        let cov = CovarianceModel::identity(4);
        assert!((euclidean_bound(&cov, 100, delta, 1.0).unwrap() - 0.4).abs() < 1e-12);
        let zero = CovarianceModel::new(DMatrix::zeros(4, 4), CovarianceSource::True).unwrap();
        assert_eq!(euclidean_bound(&zero, 100, delta, 1.0).unwrap(), 0.0);
        let four = cov.scaled(4.0).unwrap();
        assert!((euclidean_bound(&four, 100, delta, 1.0).unwrap() - 0.8).abs() < 1e-12);
    }

    #[test]
    fn eta_recipe_examples() {
        let zero = CovarianceModel::new(DMatrix::zeros(1, 1), CovarianceSource::True).unwrap();
        let r = uniform_eta_recipe(&zero, &abs_norm(), 100, 4, 10, 0, EtaConstants::default(), None).unwrap();
        assert_eq!((r.eta0, r.eta1, r.eta2), (0.0, 0.0, 0.0));

        let one = CovarianceModel::identity(1);
        let r = uniform_eta_recipe(&one, &abs_norm(), 100, 4, 1000, 0, EtaConstants::default(), None).unwrap();
        assert!((r.eta0 - 0.2).abs() < 1e-15);
        assert!((r.eta1 - r.e_g.mean / 2.0).abs() < 1e-15);

        // doubling E‖G‖ (Σ → 4Σ) doubles η₁ at fixed n and seed
        let four = one.scaled(4.0).unwrap();
        let r4 = uniform_eta_recipe(&four, &abs_norm(), 100, 4, 1000, 0, EtaConstants::default(), None).unwrap();
        assert!((r4.eta1 - 2.0 * r.eta1).abs() < 1e-12);
        assert!(uniform_eta_recipe(&one, &abs_norm(), 100, 0, 10, 0, EtaConstants::default(), None).is_err());
    }
}
