//! Sample partitioning, block means and scalar median-of-means.

use rand::seq::SliceRandom;

use crate::error::{invalid, Error, Result};
use crate::rng::{self, tag};

/// `N` observations in `R^d`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleMatrix {
    data: Vec<f64>,
    n_rows: usize,
    dim: usize,
}

impl SampleMatrix {
    /// Wraps row-major data. Requires `N ≥ 1`, `d ≥ 1` and finite entries.
    pub fn new(data: Vec<f64>, n_rows: usize, dim: usize) -> Result<Self> {
        if n_rows == 0 || dim == 0 {
            return Err(Error::Empty("sample matrix"));
        }
        if data.len() != n_rows * dim {
            return Err(Error::DimensionMismatch {
                expected: n_rows * dim,
                found: data.len(),
            });
        }
        if let Some(pos) = data.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite(format!(
                "row {}, column {}",
                pos / dim,
                pos % dim
            )));
        }
        Ok(SampleMatrix { data, n_rows, dim })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let dim = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * dim);
        for r in rows {
            let r = r.as_ref();
            if r.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        SampleMatrix::new(data, rows.len(), dim)
    }

    /// A one-column sample.
    pub fn from_column(values: &[f64]) -> Result<Self> {
        SampleMatrix::new(values.to_vec(), values.len(), 1)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.dim)
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows().map(|r| r[j]).collect()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Adds `b` to every row.
    pub fn translated(&self, b: &[f64]) -> Result<Self> {
        if b.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: b.len(),
            });
        }
        let data = self
            .data
            .chunks_exact(self.dim)
            .flat_map(|r| r.iter().zip(b).map(|(x, y)| x + y))
            .collect();
        SampleMatrix::new(data, self.n_rows, self.dim)
    }
}

/// The index sets `I_1, …, I_n` of a partition into equal blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    n_samples: usize,
    n_blocks: usize,
    block_size: usize,
    /// Sample order; `None` is the identity.
    order: Option<Vec<usize>>,
}

impl Partition {
    pub fn n_blocks(&self) -> usize {
        self.n_blocks
    }

    /// Per-block size `m = ⌊N/n⌋`.
    pub fn block_size(&self) -> usize {
        self.block_size
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    /// Trailing samples that fall outside every block.
    pub fn dropped(&self) -> usize {
        self.n_samples - self.n_blocks * self.block_size
    }

    /// Sample indices of block `j`.
    pub fn block(&self, j: usize) -> Vec<usize> {
        let range = j * self.block_size..(j + 1) * self.block_size;
        match &self.order {
            Some(order) => order[range].to_vec(),
            None => range.collect(),
        }
    }

    pub fn is_shuffled(&self) -> bool {
        self.order.is_some()
    }
}

/// Splits `0..N` into `n` contiguous blocks of size `⌊N/n⌋`, dropping the remainder.
pub fn partition(n_samples: usize, n_blocks: usize) -> Result<Partition> {
    if n_blocks == 0 || n_blocks > n_samples {
        return Err(Error::BlockCount {
            samples: n_samples,
            blocks: n_blocks,
        });
    }
    Ok(Partition {
        n_samples,
        n_blocks,
        block_size: n_samples / n_blocks,
        order: None,
    })
}

/// Like [`partition`], but blocks are cut from a seeded permutation of `0..N`.
pub fn partition_shuffled(n_samples: usize, n_blocks: usize, seed: u64) -> Result<Partition> {
    let mut p = partition(n_samples, n_blocks)?;
    let mut order: Vec<usize> = (0..n_samples).collect();
    order.shuffle(&mut rng::stream(seed, tag::SHUFFLE));
    p.order = Some(order);
    Ok(p)
}

/// A partition together with its block means `Z_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockSummary {
    partition: Partition,
    dim: usize,
    means: Vec<f64>,
}

impl BlockSummary {
    /// Builds a summary from precomputed block means (`n` rows of length `d`).
    ///
    /// Useful when the block means are the object of study; the partition
    /// records `m = 1` per block.
    pub fn from_means(means: &SampleMatrix) -> Self {
        BlockSummary {
            partition: Partition {
                n_samples: means.n_rows(),
                n_blocks: means.n_rows(),
                block_size: 1,
                order: None,
            },
            dim: means.dim(),
            means: means.as_slice().to_vec(),
        }
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn n_blocks(&self) -> usize {
        self.partition.n_blocks
    }

    pub fn block_size(&self) -> usize {
        self.partition.block_size
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn mean(&self, j: usize) -> &[f64] {
        &self.means[j * self.dim..(j + 1) * self.dim]
    }

    pub fn means(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.means.chunks_exact(self.dim)
    }

    /// Coordinate-wise median of the block means.
    pub fn coordinatewise_median(&self) -> Vec<f64> {
        let mut col = Vec::with_capacity(self.n_blocks());
        (0..self.dim)
            .map(|i| {
                col.clear();
                col.extend(self.means().map(|z| z[i]));
                median_in_place(&mut col)
            })
            .collect()
    }
}

/// Fills in the block means for `partition`.
pub fn block_means(sample: &SampleMatrix, partition: &Partition) -> Result<BlockSummary> {
    if partition.n_samples != sample.n_rows() {
        return Err(Error::DimensionMismatch {
            expected: partition.n_samples,
            found: sample.n_rows(),
        });
    }
    let d = sample.dim();
    let m = partition.block_size as f64;
    let mut means = Vec::with_capacity(partition.n_blocks * d);
    for j in 0..partition.n_blocks {
        let mut acc = vec![0.0; d];
        for i in partition.block(j) {
            for (a, x) in acc.iter_mut().zip(sample.row(i)) {
                *a += x;
            }
        }
        means.extend(acc.into_iter().map(|a| a / m));
    }
    Ok(BlockSummary {
        partition: partition.clone(),
        dim: d,
        means,
    })
}

/// Median with the midpoint convention for even lengths. Reorders `values`.
pub(crate) fn median_in_place(values: &mut [f64]) -> f64 {
    let n = values.len();
    assert!(n > 0, "median of empty slice");
    values.sort_unstable_by(f64::total_cmp);
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Classical median-of-means of a scalar sample with `n` contiguous blocks.
pub fn scalar_mom(values: &[f64], n_blocks: usize) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::Empty("values"));
    }
    let p = partition(values.len(), n_blocks)?;
    let m = p.block_size;
    let mut means: Vec<f64> = values[..n_blocks * m]
        .chunks_exact(m)
        .map(|c| c.iter().sum::<f64>() / m as f64)
        .collect();
    Ok(median_in_place(&mut means))
}

/// Block count chosen for confidence `δ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockChoice {
    pub n_blocks: usize,
    /// True when `⌈κ ln(2/δ)⌉` exceeded `N` and was clamped to `N`.
    pub clamped: bool,
}

/// `n = min(N, max(1, ⌈κ ln(2/δ)⌉))`.
///
/// The ceiling ignores a relative excess of `1e-12` so that `ln(2/δ)` landing
/// a rounding error above an integer does not add a block.
pub fn blocks_for_confidence(delta: f64, n_samples: usize, kappa: f64) -> Result<BlockChoice> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(invalid("delta", format!("must lie in (0, 1), got {delta}")));
    }
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(invalid("kappa", format!("must be positive, got {kappa}")));
    }
    let x = kappa * (2.0 / delta).ln();
    let wanted = (x * (1.0 - 1e-12)).ceil().max(1.0);
    let wanted = if wanted >= usize::MAX as f64 {
        usize::MAX
    } else {
        wanted as usize
    };
    Ok(BlockChoice {
        n_blocks: wanted.min(n_samples.max(1)),
        clamped: wanted > n_samples,
    })
}
