//! Mean estimation with respect to general norms.
//!
//! Given `N` i.i.d. observations in `R^d` and a norm, the slab estimator
//! splits the sample into `n ≈ ln(2/δ)` blocks, averages each block, and
//! returns a point `y` such that for every extreme point `t` of the dual unit
//! ball a strict majority of the block means satisfy `|⟨t, Z_j − y⟩| ≤ ε`.
//! Any such point is within `2ε` of every other one, and with probability
//! `1 − δ` the true mean is one of them when `ε` is of the order
//!
//! ```text
//! (1/√N) · max(E‖Y_N‖, E‖G‖ + R √ln(2/δ))
//! ```
//!
//! where `G` is Gaussian with the covariance of `X`, `Y_N` is the
//! Rademacher-symmetrized normalized sum and `R` is the weak variance.
//!
//! ```
//! use normest::blocks::SampleMatrix;
//! use normest::norms::NormSpec;
//! use normest::slab::adaptive_estimate;
//!
//! let rows: Vec<[f64; 2]> = (0..40).map(|i| [(i % 5) as f64, -((i % 3) as f64)]).collect();
//! let sample = SampleMatrix::from_rows(&rows).unwrap();
//! let est = adaptive_estimate(&sample, &NormSpec::Linf, 0.05, 64, 7, 1e-6).unwrap();
//! assert!(est.feasible);
//! assert_eq!(est.n_blocks, 4);
//! ```
//!
//! Modules:
//!
//! - [`norms`]: norm specifications and dual functional sets.
//! - [`blocks`]: sample storage, block partitions, scalar median-of-means.
//! - [`slab`]: majority depth sets, membership and the feasibility solver.
//! - [`bounds`]: Monte Carlo for `E‖G‖` and `E‖Y_N‖`, weak variance, accuracy targets.
//! - [`uniform_mom`]: uniform median-of-means certification for a finite class.
//! - [`baselines`]: empirical mean, coordinate-wise and geometric median-of-means.
//! - [`harness`]: seeded heavy-tailed experiments.
//! - [`cli`]: the `normest` command.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod blocks;
pub mod bounds;
pub mod cli;
pub mod error;
pub mod harness;
pub mod io;
pub mod json;
pub mod norms;
pub mod rng;
pub mod slab;
pub mod uniform_mom;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/norms.md")]
    mod norms {}
    #[doc = include_str!("../../../book/src/median-of-means.md")]
    mod median_of_means {}
    #[doc = include_str!("../../../book/src/slab-estimator.md")]
    mod slab_estimator {}
    #[doc = include_str!("../../../book/src/bounds.md")]
    mod bounds {}
    #[doc = include_str!("../../../book/src/uniform-certification.md")]
    mod uniform_certification {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
