//! The slab-intersection estimator.
//!
//! For every dual functional `t` and every block mean `Z_j`, the slab
//! `{y : |⟨t, Z_j⟩ − ⟨t, y⟩| ≤ ε}` is closed. A point `y` belongs to the
//! majority set of `t` when strictly more than half of the `n` slabs of `t`
//! contain it, and the estimator returns any point lying in the majority set
//! of every functional. Along the direction `t` the majority set is a finite
//! union of closed intervals, the [`DepthSet`], which [`majority_depth_set`]
//! computes with a sweep over the `2n` slab endpoints.
//!
//! Finding a point in the intersection is a nonconvex feasibility problem.
//! [`solve_feasible`] runs a greedy most-violated projection: at each step it
//! moves `y` along `t` onto the nearest interval of the worst functional.
//! Whatever the iteration does, a returned `feasible = true` has been
//! confirmed by [`membership`], so a failure to converge shows up as an
//! infeasible result and never as a wrong point.
//!
//! Slab membership compares against the rounded endpoints `v − ε` and
//! `v + ε` rather than `|v − s| ≤ ε`, so the sweep, the coverage counts and
//! the membership check agree bit for bit.

use rayon::prelude::*;

use crate::blocks::{self, BlockChoice, BlockSummary, SampleMatrix};
use crate::error::{invalid, Error, Result};
use crate::norms::{self, dot, FunctionalSet, NormSpec};

/// One maximal interval of a [`DepthSet`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DepthInterval {
    pub lo: f64,
    pub hi: f64,
    /// Largest number of slabs covering any point of the interval.
    pub peak_depth: usize,
}

/// Points covered by at least `threshold = ⌊n/2⌋ + 1` of the `n` closed
/// intervals `[v_j − ε, v_j + ε]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthSet {
    intervals: Vec<DepthInterval>,
    n_blocks: usize,
    threshold: usize,
}

/// `⌊n/2⌋ + 1`: the smallest count that is more than half of `n`.
pub fn majority_threshold(n: usize) -> usize {
    n / 2 + 1
}

impl DepthSet {
    /// Sorted, disjoint, closed intervals.
    pub fn intervals(&self) -> &[DepthInterval] {
        &self.intervals
    }

    pub fn n_blocks(&self) -> usize {
        self.n_blocks
    }

    pub fn threshold(&self) -> usize {
        self.threshold
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    /// Index of the first interval whose upper end is `≥ s`.
    fn locate(&self, s: f64) -> usize {
        self.intervals.partition_point(|iv| iv.hi < s)
    }

    pub fn contains(&self, s: f64) -> bool {
        self.intervals
            .get(self.locate(s))
            .is_some_and(|iv| iv.lo <= s)
    }

    /// Distance from `s` to the set; `+∞` when the set is empty.
    pub fn distance(&self, s: f64) -> f64 {
        match self.nearest(s) {
            Some(p) => (p - s).abs(),
            None => f64::INFINITY,
        }
    }

    /// Nearest point of the set to `s`.
    ///
    /// Equidistant intervals on either side are resolved toward the higher
    /// peak depth, then toward the left.
    pub fn nearest(&self, s: f64) -> Option<f64> {
        let k = self.locate(s);
        let right = self.intervals.get(k);
        if let Some(iv) = right {
            if iv.lo <= s {
                return Some(s);
            }
        }
        let left = k.checked_sub(1).map(|i| &self.intervals[i]);
        match (left, right) {
            (None, None) => None,
            (Some(l), None) => Some(l.hi),
            (None, Some(r)) => Some(r.lo),
            (Some(l), Some(r)) => {
                let dl = s - l.hi;
                let dr = r.lo - s;
                if dl < dr || (dl == dr && l.peak_depth >= r.peak_depth) {
                    Some(l.hi)
                } else {
                    Some(r.lo)
                }
            }
        }
    }
}

/// Number of closed slabs `[v_j − ε, v_j + ε]` containing `s`.
pub fn coverage(values: &[f64], epsilon: f64, s: f64) -> usize {
    values
        .iter()
        .filter(|&&v| v - epsilon <= s && s <= v + epsilon)
        .count()
}

/// Sweep-line computation of the majority depth set of `values` at half-width `epsilon`.
pub fn majority_depth_set(values: &[f64], epsilon: f64) -> Result<DepthSet> {
    if values.is_empty() {
        return Err(Error::Empty("projected block means"));
    }
    if !(epsilon >= 0.0) || !epsilon.is_finite() {
        return Err(invalid("epsilon", format!("must be finite and ≥ 0, got {epsilon}")));
    }
    if let Some(j) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(format!("projected block mean {j}")));
    }
    let n = values.len();
    let threshold = majority_threshold(n);
    // (coordinate, 0 = open, 1 = close): opens sort first, so slabs that
    // merely touch are counted together at the shared point.
    let mut events: Vec<(f64, u8)> = Vec::with_capacity(2 * n);
    for &v in values {
        events.push((v - epsilon, 0));
        events.push((v + epsilon, 1));
    }
    events.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let mut intervals = Vec::new();
    let mut depth = 0usize;
    let mut start = 0.0;
    let mut peak = 0;
    for (x, kind) in events {
        if kind == 0 {
            depth += 1;
            if depth == threshold {
                start = x;
                peak = depth;
            } else if depth > threshold {
                peak = peak.max(depth);
            }
        } else {
            if depth == threshold {
                intervals.push(DepthInterval {
                    lo: start,
                    hi: x,
                    peak_depth: peak,
                });
            }
            depth -= 1;
        }
    }
    Ok(DepthSet {
        intervals,
        n_blocks: n,
        threshold,
    })
}

/// Result of checking a point against every majority set.
#[derive(Debug, Clone, PartialEq)]
pub struct MembershipReport {
    pub member: bool,
    /// Functional with the largest violation; `None` for members.
    pub worst_functional: Option<usize>,
    /// Distance from `⟨t, y⟩` to the depth set of the worst functional.
    pub worst_violation: f64,
    /// Number of slabs containing `y`, per functional representative.
    pub per_functional_coverage: Vec<usize>,
    pub threshold: usize,
    /// Half-width the check was run at.
    pub epsilon: f64,
}

/// Block means projected on every functional, `proj[k * n + j] = ⟨t_k, Z_j⟩`.
struct Projections<'a> {
    fs: &'a FunctionalSet,
    n: usize,
    proj: Vec<f64>,
}

impl<'a> Projections<'a> {
    fn new(blocks: &BlockSummary, fs: &'a FunctionalSet) -> Result<Self> {
        if fs.is_empty() {
            return Err(Error::Empty("functional set"));
        }
        fs.check_dim(blocks.dim())?;
        let n = blocks.n_blocks();
        let proj = fs
            .iter()
            .flat_map(|t| blocks.means().map(move |z| dot(t, z)))
            .collect();
        Ok(Projections { fs, n, proj })
    }

    fn values(&self, k: usize) -> &[f64] {
        &self.proj[k * self.n..(k + 1) * self.n]
    }

    fn depth_sets(&self, epsilon: f64) -> Result<Vec<DepthSet>> {
        (0..self.fs.len())
            .into_par_iter()
            .map(|k| majority_depth_set(self.values(k), epsilon))
            .collect()
    }

    fn report(&self, y: &[f64], sets: &[DepthSet], epsilon: f64) -> MembershipReport {
        let per: Vec<(usize, f64)> = (0..self.fs.len())
            .into_par_iter()
            .map(|k| {
                let s = dot(self.fs.get(k), y);
                (coverage(self.values(k), epsilon, s), sets[k].distance(s))
            })
            .collect();
        let mut worst = None;
        let mut worst_violation = 0.0;
        for (k, &(_, dist)) in per.iter().enumerate() {
            if dist > worst_violation {
                worst_violation = dist;
                worst = Some(k);
            }
        }
        MembershipReport {
            member: worst.is_none(),
            worst_functional: worst,
            worst_violation,
            per_functional_coverage: per.into_iter().map(|(c, _)| c).collect(),
            threshold: majority_threshold(self.n),
            epsilon,
        }
    }
}

/// Checks whether `y` lies in the majority set of every functional at half-width `epsilon`.
pub fn membership(
    y: &[f64],
    blocks: &BlockSummary,
    fs: &FunctionalSet,
    epsilon: f64,
) -> Result<MembershipReport> {
    let p = Projections::new(blocks, fs)?;
    fs.check_dim(y.len())?;
    let sets = p.depth_sets(epsilon)?;
    Ok(p.report(y, &sets, epsilon))
}

/// Iteration controls for [`solve_feasible`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Projection budget; `None` means `50 × (number of representatives)`.
    pub max_iter: Option<usize>,
    /// Convergence tolerance relative to `ε`.
    pub tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            max_iter: None,
            tol: 1e-6,
        }
    }
}

/// Output of the slab estimator.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateResult {
    pub point: Vec<f64>,
    /// The `ε` the estimate was computed for.
    pub epsilon_used: f64,
    pub feasible: bool,
    /// Projection steps taken by the final solve.
    pub iterations: usize,
    /// Membership of `point`, checked at `epsilon_used · (1 + tol)`.
    pub certificate: MembershipReport,
    /// A functional whose depth set is empty, when that is why the solve failed.
    pub empty_witness: Option<usize>,
    pub n_blocks: usize,
    pub block_size: usize,
    pub dropped: usize,
    /// Size of the sign-closed functional set.
    pub functional_count: usize,
    pub exact: bool,
}

/// Searches for a point of the slab intersection at half-width `epsilon`.
///
/// Starts from `init`, or the coordinate-wise median of the block means.
pub fn solve_feasible(
    blocks: &BlockSummary,
    fs: &FunctionalSet,
    epsilon: f64,
    init: Option<&[f64]>,
    options: SolverOptions,
) -> Result<EstimateResult> {
    if !(options.tol > 0.0) {
        return Err(invalid("tol", "must be positive"));
    }
    if options.max_iter == Some(0) {
        return Err(invalid("max_iter", "must be at least 1"));
    }
    let p = Projections::new(blocks, fs)?;
    let mut y = match init {
        Some(y0) => {
            fs.check_dim(y0.len())?;
            y0.to_vec()
        }
        None => blocks.coordinatewise_median(),
    };
    let sets = p.depth_sets(epsilon)?;
    let max_iter = options.max_iter.unwrap_or(50 * fs.len());
    let accept = options.tol * epsilon;
    let certify_eps = epsilon * (1.0 + options.tol);

    let finish = |y: Vec<f64>, iterations: usize, empty_witness: Option<usize>, converged: bool| -> Result<EstimateResult> {
        let cert_sets = p.depth_sets(certify_eps)?;
        let certificate = p.report(&y, &cert_sets, certify_eps);
        let partition = blocks.partition();
        Ok(EstimateResult {
            feasible: converged && certificate.member,
            point: y,
            epsilon_used: epsilon,
            iterations,
            certificate,
            empty_witness,
            n_blocks: partition.n_blocks(),
            block_size: partition.block_size(),
            dropped: partition.dropped(),
            functional_count: fs.signed_len(),
            exact: fs.exact(),
        })
    };

    if let Some(k) = sets.iter().position(DepthSet::is_empty) {
        return finish(y, 0, Some(k), false);
    }

    let norms_sq: Vec<f64> = fs.iter().map(|t| dot(t, t)).collect();
    let mut iterations = 0;
    loop {
        let mut worst = None;
        let mut worst_violation = accept;
        for (k, set) in sets.iter().enumerate() {
            let dist = set.distance(dot(fs.get(k), &y));
            if dist > worst_violation {
                worst_violation = dist;
                worst = Some(k);
            }
        }
        let Some(k) = worst else {
            return finish(y, iterations, None, true);
        };
        if iterations == max_iter {
            return finish(y, iterations, None, false);
        }
        let t = fs.get(k);
        let s = dot(t, &y);
        let target = sets[k].nearest(s).expect("nonempty depth set");
        let step = (target - s) / norms_sq[k];
        for (yi, ti) in y.iter_mut().zip(t) {
            *yi += step * ti;
        }
        iterations += 1;
    }
}

/// Slab estimator bound to a functional set and confidence level.
#[derive(Debug, Clone)]
pub struct SlabEstimator {
    pub functionals: FunctionalSet,
    pub delta: f64,
    /// Multiplier on `ln(2/δ)` when choosing the block count.
    pub kappa: f64,
    /// Seed for shuffling the sample before blocking; `None` keeps file order.
    pub shuffle: Option<u64>,
    pub solver: SolverOptions,
}

impl SlabEstimator {
    pub fn new(spec: &NormSpec, d: usize, delta: f64, budget: usize, seed: u64) -> Result<Self> {
        Ok(SlabEstimator::with_functionals(
            norms::dual_functionals(spec, d, budget, seed)?,
            delta,
        ))
    }

    pub fn with_functionals(functionals: FunctionalSet, delta: f64) -> Self {
        SlabEstimator {
            functionals,
            delta,
            kappa: 1.0,
            shuffle: None,
            solver: SolverOptions::default(),
        }
    }

    /// Block count, partition and block means for `sample`.
    pub fn summarize(&self, sample: &SampleMatrix) -> Result<(BlockChoice, BlockSummary)> {
        self.functionals.check_dim(sample.dim())?;
        let choice = blocks::blocks_for_confidence(self.delta, sample.n_rows(), self.kappa)?;
        let partition = match self.shuffle {
            Some(seed) => blocks::partition_shuffled(sample.n_rows(), choice.n_blocks, seed)?,
            None => blocks::partition(sample.n_rows(), choice.n_blocks)?,
        };
        Ok((choice, blocks::block_means(sample, &partition)?))
    }

    /// The estimator at a fixed `ε`.
    pub fn estimate(&self, sample: &SampleMatrix, epsilon: f64) -> Result<EstimateResult> {
        if !(epsilon >= 0.0 && epsilon.is_finite()) {
            return Err(invalid("epsilon", format!("must be finite and ≥ 0, got {epsilon}")));
        }
        let (_, summary) = self.summarize(sample)?;
        solve_feasible(&summary, &self.functionals, epsilon, None, self.solver)
    }

    /// The estimator at the smallest `ε` (up to `eps_tol`) with a nonempty intersection.
    pub fn adaptive(&self, sample: &SampleMatrix, eps_tol: f64) -> Result<EstimateResult> {
        let (_, summary) = self.summarize(sample)?;
        adaptive_on_blocks(&summary, &self.functionals, eps_tol, self.solver)
    }
}

/// Bisection cap for [`adaptive_on_blocks`]; 200 halvings exhaust f64 resolution.
const MAX_BISECTIONS: usize = 200;

/// Bisection on `ε` over precomputed block means.
///
/// The bracket starts at `[0, 2 max_j ‖Z_j − med‖]`: at the upper end the
/// coordinate-wise median `med` lies in every slab, so the bracket is feasible.
pub fn adaptive_on_blocks(
    blocks: &BlockSummary,
    fs: &FunctionalSet,
    eps_tol: f64,
    solver: SolverOptions,
) -> Result<EstimateResult> {
    if !(eps_tol > 0.0) {
        return Err(invalid("eps_tol", "must be positive"));
    }
    if fs.is_empty() {
        return Err(Error::Empty("functional set"));
    }
    fs.check_dim(blocks.dim())?;
    let med = blocks.coordinatewise_median();
    let spread = blocks
        .means()
        .map(|z| {
            let diff: Vec<f64> = z.iter().zip(&med).map(|(a, b)| a - b).collect();
            fs.sup_abs(&diff)
        })
        .fold(0.0, f64::max);

    let at_zero = solve_feasible(blocks, fs, 0.0, None, solver)?;
    if at_zero.feasible || spread == 0.0 {
        return Ok(at_zero);
    }
    let mut upper = 2.0 * spread;
    let mut lower = 0.0;
    let mut best = solve_feasible(blocks, fs, upper, None, solver)?;
    if !best.feasible {
        return Ok(best);
    }
    for _ in 0..MAX_BISECTIONS {
        if upper - lower <= eps_tol * upper {
            break;
        }
        let mid = 0.5 * (lower + upper);
        let r = solve_feasible(blocks, fs, mid, None, solver)?;
        if r.feasible {
            upper = mid;
            best = r;
        } else {
            lower = mid;
        }
    }
    Ok(best)
}

/// Composes block selection, block means, dual functionals and the feasibility solve.
pub fn estimate_mean(
    sample: &SampleMatrix,
    spec: &NormSpec,
    delta: f64,
    epsilon: f64,
    budget: usize,
    seed: u64,
) -> Result<EstimateResult> {
    SlabEstimator::new(spec, sample.dim(), delta, budget, seed)?.estimate(sample, epsilon)
}

/// Adaptive estimator: bisects `ε` down to the smallest feasible half-width.
pub fn adaptive_estimate(
    sample: &SampleMatrix,
    spec: &NormSpec,
    delta: f64,
    budget: usize,
    seed: u64,
    eps_tol: f64,
) -> Result<EstimateResult> {
    SlabEstimator::new(spec, sample.dim(), delta, budget, seed)?.adaptive(sample, eps_tol)
}
