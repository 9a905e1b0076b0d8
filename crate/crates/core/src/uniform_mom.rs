//! Uniform median-of-means certification over a finite class of linear functionals.
//!
//! The uniform event asks that, simultaneously for every functional `f` in
//! the class, at least `0.6 n` of the `n` block means of `f(X)` lie within
//! `r` of `E f`. [`certify_uniform`] counts those blocks against a known mean.
//!
//! For the norm-estimation class the radius comes from
//! [`crate::bounds::uniform_eta_recipe`] as `r = η₀ + η₂`. The net condition
//! on the class is served by the Sudakov scale `η₁` there, or for an
//! arbitrary finite class by its cardinality through
//! [`finite_class_accuracy`]. The intermediate quantities of the proof (the
//! `W̄` oscillation class and its `0.9n / 0.7n / 0.2n` thresholds) are not
//! represented.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::blocks::{block_means, partition, SampleMatrix};
use crate::error::{invalid, Result};
use crate::norms::{dot, FunctionalSet};

/// Blocks within `r` of the true mean, per functional.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificationReport {
    pub r: f64,
    pub n_blocks: usize,
    pub per_function_coverage: Vec<usize>,
    pub min_coverage: usize,
    /// `⌈0.6 n⌉`.
    pub required: usize,
    pub pass: bool,
}

/// `⌈0.6 n⌉`, computed in integers.
pub fn required_coverage(n_blocks: usize) -> usize {
    (3 * n_blocks).div_ceil(5)
}

/// Counts, for every functional `t`, the blocks whose mean of `⟨t, X⟩` lies
/// within `r` of `⟨t, μ⟩`. Sign closure does not change the counts.
pub fn certify_uniform(
    sample: &SampleMatrix,
    fs: &FunctionalSet,
    true_mu: &[f64],
    r: f64,
    n_blocks: usize,
) -> Result<CertificationReport> {
    if !(r >= 0.0) {
        return Err(invalid("r", format!("must be nonnegative, got {r}")));
    }
    fs.check_dim(sample.dim())?;
    fs.check_dim(true_mu.len())?;
    let blocks = block_means(sample, &partition(sample.n_rows(), n_blocks)?)?;
    let per_function_coverage: Vec<usize> = (0..fs.len())
        .into_par_iter()
        .map(|k| {
            let t = fs.get(k);
            let target = dot(t, true_mu);
            blocks
                .means()
                .filter(|z| (dot(t, z) - target).abs() <= r)
                .count()
        })
        .collect();
    let min_coverage = per_function_coverage.iter().copied().min().unwrap_or(n_blocks);
    let required = required_coverage(n_blocks);
    Ok(CertificationReport {
        r,
        n_blocks,
        pass: min_coverage >= required,
        per_function_coverage,
        min_coverage,
        required,
    })
}

/// Accuracy certificate for a finite class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiniteClassAccuracy {
    pub eta0: f64,
    /// Grid point `k` with `η₀ = σ √(k/m)`.
    pub k: f64,
    /// Chebyshev bound `p_m(η₀) ≤ 1/k`.
    pub p_m_bound: f64,
    /// `c₂ n ln(e k) − ln|F|`, nonnegative when accepted.
    pub slack: f64,
}

/// Largest grid point tried by [`finite_class_accuracy`].
pub const FINITE_CLASS_MAX_K: f64 = 1e6;

/// Smallest `η₀ = σ √(k/m)` on the grid `k = 20·2^i ≤ 10⁶` for which the
/// Chebyshev bound `p_m(η₀) ≤ 1/k` satisfies `ln|F| ≤ c₂ n ln(e k)`.
///
/// Returns `None` when no grid point qualifies.
pub fn finite_class_accuracy(
    class_size: usize,
    max_std: f64,
    n_blocks: usize,
    block_size: usize,
    c2: f64,
) -> Result<Option<FiniteClassAccuracy>> {
    if class_size == 0 {
        return Err(invalid("class_size", "must be at least 1"));
    }
    if block_size == 0 {
        return Err(invalid("block_size", "must be at least 1"));
    }
    if !(max_std >= 0.0 && max_std.is_finite()) {
        return Err(invalid("max_std", format!("must be finite and nonnegative, got {max_std}")));
    }
    let log_size = (class_size as f64).ln();
    let mut k = 20.0;
    while k <= FINITE_CLASS_MAX_K {
        let capacity = c2 * n_blocks as f64 * (std::f64::consts::E * k).ln();
        if log_size <= capacity {
            return Ok(Some(FiniteClassAccuracy {
                eta0: max_std * (k / block_size as f64).sqrt(),
                k,
                p_m_bound: 1.0 / k,
                slack: capacity - log_size,
            }));
        }
        k *= 2.0;
    }
    Ok(None)
}
