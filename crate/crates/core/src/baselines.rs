//! Reference estimators: empirical mean, coordinate-wise and geometric median-of-means.

use serde::{Deserialize, Serialize};

use crate::blocks::{block_means, median_in_place, partition, scalar_mom, SampleMatrix};
use crate::error::{invalid, Result};

/// Arithmetic mean of the rows, accumulated with Neumaier compensation.
pub fn empirical_mean(sample: &SampleMatrix) -> Vec<f64> {
    let d = sample.dim();
    let mut sum = vec![0.0; d];
    let mut comp = vec![0.0; d];
    for row in sample.rows() {
        for i in 0..d {
            let x = row[i];
            let t = sum[i] + x;
            if sum[i].abs() >= x.abs() {
                comp[i] += (sum[i] - t) + x;
            } else {
                comp[i] += (x - t) + sum[i];
            }
            sum[i] = t;
        }
    }
    let n = sample.n_rows() as f64;
    sum.iter().zip(&comp).map(|(s, c)| (s + c) / n).collect()
}

/// Scalar median-of-means applied to each column.
pub fn coordinatewise_mom(sample: &SampleMatrix, n_blocks: usize) -> Result<Vec<f64>> {
    (0..sample.dim())
        .map(|j| scalar_mom(&sample.column(j), n_blocks))
        .collect()
}

/// Weiszfeld output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometricMedian {
    pub point: Vec<f64>,
    pub iterations: usize,
    /// False when `max_iter` ran out; `point` is then the best iterate seen.
    pub converged: bool,
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

fn objective(z: &[f64], points: &[&[f64]]) -> f64 {
    points.iter().map(|p| dist(z, p)).sum()
}

/// Euclidean geometric median of `points` by Weiszfeld iteration.
///
/// Distances are floored at `1e-12` times the mean pairwise distance so an
/// iterate landing on a data point stays finite. Stops once a step is shorter
/// than `tol` times that mean pairwise distance.
pub fn geometric_median(points: &[&[f64]], tol: f64, max_iter: usize) -> Result<GeometricMedian> {
    let n = points.len();
    if n == 0 {
        return Err(invalid("points", "need at least one point"));
    }
    if !(tol > 0.0) {
        return Err(invalid("weiszfeld_tol", "must be positive"));
    }
    let d = points[0].len();
    let mut pair_sum = 0.0;
    for a in 0..n {
        for b in a + 1..n {
            pair_sum += dist(points[a], points[b]);
        }
    }
    let pairs = (n * (n - 1) / 2).max(1) as f64;
    let spread = pair_sum / pairs;
    let mut z: Vec<f64> = (0..d)
        .map(|i| points.iter().map(|p| p[i]).sum::<f64>() / n as f64)
        .collect();
    if spread == 0.0 {
        return Ok(GeometricMedian {
            point: points[0].to_vec(),
            iterations: 0,
            converged: true,
        });
    }
    let floor = 1e-12 * spread;
    let mut best = z.clone();
    let mut best_obj = objective(&z, points);
    let mut next = vec![0.0; d];
    for it in 1..=max_iter {
        next.iter_mut().for_each(|x| *x = 0.0);
        let mut weight = 0.0;
        for p in points {
            let w = 1.0 / dist(&z, p).max(floor);
            weight += w;
            for (acc, pi) in next.iter_mut().zip(p.iter()) {
                *acc += w * pi;
            }
        }
        next.iter_mut().for_each(|x| *x /= weight);
        let step = dist(&next, &z);
        std::mem::swap(&mut z, &mut next);
        let obj = objective(&z, points);
        if obj < best_obj {
            best_obj = obj;
            best.clone_from(&z);
        }
        if step < tol * spread {
            return Ok(GeometricMedian {
                point: best,
                iterations: it,
                converged: true,
            });
        }
    }
    Ok(GeometricMedian {
        point: best,
        iterations: max_iter,
        converged: false,
    })
}

/// Geometric median of the `n` contiguous block means.
pub fn geometric_mom(
    sample: &SampleMatrix,
    n_blocks: usize,
    weiszfeld_tol: f64,
    max_iter: usize,
) -> Result<GeometricMedian> {
    let blocks = block_means(sample, &partition(sample.n_rows(), n_blocks)?)?;
    let points: Vec<&[f64]> = blocks.means().collect();
    geometric_median(&points, weiszfeld_tol, max_iter)
}

/// Median of a scalar slice (midpoint for even lengths).
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        None
    } else {
        Some(median_in_place(&mut values.to_vec()))
    }
}
