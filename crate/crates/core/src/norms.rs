//! Norms described through their dual unit ball.
//!
//! A norm on `R^d` is evaluated as `‖v‖ = sup ⟨t, v⟩` over the extreme points
//! `t` of the dual unit ball. For polytope duals (`ℓ∞`, `ℓ1`, user supplied
//! polytopes) the extreme points are finite and [`dual_functionals`] returns
//! them exactly. For `ℓ2` and `ℓp` every point of the dual sphere is extreme,
//! so a seeded random net of the dual sphere stands in for the full set. A
//! sampled set only sees part of the dual ball: [`norm_eval`] then returns a
//! lower bound on the true norm, and the slab estimator built on it certifies
//! fewer directions than the exact construction would. [`FunctionalSet::exact`]
//! records which case applies.
//!
//! Functionals are stored as one representative per `±t` pair. Every
//! supremum in the crate is taken over `|⟨t, v⟩|`, which accounts for the
//! implied negation.

use std::collections::HashSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::seq::index;
use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{invalid, Error, Result};
use crate::rng::{self, tag};

/// Default net size / enumeration cutoff for sampled and `ℓ1` functional sets.
pub const DEFAULT_BUDGET: usize = 4096;

/// A norm on `R^d`, identified by its dual unit ball.
#[derive(Debug, Clone, PartialEq)]
pub enum NormSpec {
    Linf,
    L1,
    L2,
    /// `ℓp` with `p > 1` and finite.
    Lp(f64),
    /// The norm whose dual ball is the symmetric hull of the given vectors.
    CustomPolytope(Vec<Vec<f64>>),
}

/// The family a [`NormSpec`] or a [`FunctionalSet`] belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormKind {
    Linf,
    L1,
    L2,
    Lp { p: f64 },
    CustomPolytope,
}

impl NormSpec {
    pub fn kind(&self) -> NormKind {
        match self {
            NormSpec::Linf => NormKind::Linf,
            NormSpec::L1 => NormKind::L1,
            NormSpec::L2 => NormKind::L2,
            NormSpec::Lp(p) => NormKind::Lp { p: *p },
            NormSpec::CustomPolytope(_) => NormKind::CustomPolytope,
        }
    }

    /// Checks the parameter invariants (`p > 1`, nonempty nonzero polytope vectors).
    pub fn validate(&self) -> Result<()> {
        match self {
            NormSpec::Lp(p) if !(p.is_finite() && *p > 1.0) => {
                Err(invalid("p", format!("lp requires finite p > 1, got {p}")))
            }
            NormSpec::CustomPolytope(rows) => {
                let first = rows.first().ok_or(Error::Empty("custom polytope functionals"))?;
                if first.is_empty() {
                    return Err(Error::Empty("custom polytope functional"));
                }
                for (i, row) in rows.iter().enumerate() {
                    if row.len() != first.len() {
                        return Err(Error::DimensionMismatch {
                            expected: first.len(),
                            found: row.len(),
                        });
                    }
                    if row.iter().any(|x| !x.is_finite()) {
                        return Err(Error::NonFinite(format!("polytope functional {i}")));
                    }
                    if row.iter().all(|&x| x == 0.0) {
                        return Err(invalid(
                            "functionals",
                            format!("polytope functional {i} is the zero vector"),
                        ));
                    }
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Parses `linf`, `l1`, `l2`, `lp:<p>` or `poly:<path.csv>`.
    ///
    /// `poly:` reads one functional per CSV row.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        let spec = match s.to_ascii_lowercase().as_str() {
            "linf" | "l_inf" | "inf" => NormSpec::Linf,
            "l1" => NormSpec::L1,
            "l2" => NormSpec::L2,
            lower => {
                if let Some(p) = lower.strip_prefix("lp:") {
                    let p: f64 = p
                        .trim()
                        .parse()
                        .map_err(|_| invalid("norm", format!("cannot parse exponent in `{s}`")))?;
                    NormSpec::Lp(p)
                } else if lower.starts_with("poly:") {
                    let path = &s["poly:".len()..];
                    let m = crate::io::read_matrix(Path::new(path.trim()))?;
                    NormSpec::CustomPolytope(m.rows().map(<[f64]>::to_vec).collect())
                } else {
                    return Err(invalid(
                        "norm",
                        format!("unknown norm `{s}` (expected linf, l1, l2, lp:<p>, poly:<path>)"),
                    ));
                }
            }
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl FromStr for NormSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        NormSpec::parse(s)
    }
}

impl fmt::Display for NormSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NormSpec::Linf => f.write_str("linf"),
            NormSpec::L1 => f.write_str("l1"),
            NormSpec::L2 => f.write_str("l2"),
            NormSpec::Lp(p) => write!(f, "lp:{p}"),
            NormSpec::CustomPolytope(rows) => write!(f, "poly[{}]", rows.len()),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum NormRepr {
    Name(String),
    Poly { poly: Vec<Vec<f64>> },
}

// Named norms serialize as their CLI string; polytopes inline their rows.
impl Serialize for NormSpec {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            NormSpec::CustomPolytope(rows) => NormRepr::Poly { poly: rows.clone() },
            other => NormRepr::Name(other.to_string()),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for NormSpec {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let spec = match NormRepr::deserialize(deserializer)? {
            NormRepr::Name(s) => NormSpec::parse(&s).map_err(serde::de::Error::custom)?,
            NormRepr::Poly { poly } => NormSpec::CustomPolytope(poly),
        };
        spec.validate().map_err(serde::de::Error::custom)?;
        Ok(spec)
    }
}

/// Representatives of the extreme points of a dual unit ball.
///
/// Closed under negation by convention: `t` stands for both `t` and `-t`.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionalSet {
    dim: usize,
    data: Vec<f64>,
    exact: bool,
    seed: Option<u64>,
    kind: NormKind,
}

impl FunctionalSet {
    /// Builds a set from explicit representatives.
    pub fn from_vectors(
        dim: usize,
        vectors: Vec<Vec<f64>>,
        exact: bool,
        kind: NormKind,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(dim * vectors.len());
        for v in &vectors {
            if v.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: v.len(),
                });
            }
            data.extend_from_slice(v);
        }
        Ok(FunctionalSet {
            dim,
            data,
            exact,
            seed: None,
            kind,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of stored representatives (half the sign-closed count).
    pub fn len(&self) -> usize {
        self.data.len().checked_div(self.dim).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Size of the sign-closed set `{±t}`.
    pub fn signed_len(&self) -> usize {
        2 * self.len()
    }

    /// True iff the representatives are exactly the extreme points of the dual ball.
    pub fn exact(&self) -> bool {
        self.exact
    }

    /// Seed used to sample the set, if it was sampled.
    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn kind(&self) -> NormKind {
        self.kind
    }

    pub fn get(&self, k: usize) -> &[f64] {
        &self.data[k * self.dim..(k + 1) * self.dim]
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.dim.max(1))
    }

    /// Whether every representative is a signed standard basis vector,
    /// each coordinate appearing once.
    pub(crate) fn is_coordinate_basis(&self) -> bool {
        if self.len() != self.dim {
            return false;
        }
        let mut seen = vec![false; self.dim];
        for t in self.iter() {
            let mut nonzero = t.iter().enumerate().filter(|(_, &x)| x != 0.0);
            match (nonzero.next(), nonzero.next()) {
                (Some((i, &x)), None) if x.abs() == 1.0 && !seen[i] => seen[i] = true,
                _ => return false,
            }
        }
        true
    }

    /// `max_t |⟨t, v⟩|` without argument checks.
    pub(crate) fn sup_abs(&self, v: &[f64]) -> f64 {
        self.iter().map(|t| dot(t, v).abs()).fold(0.0, f64::max)
    }

    pub(crate) fn check_dim(&self, found: usize) -> Result<()> {
        if found != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found,
            });
        }
        Ok(())
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Enumerates or samples the extreme points of the dual unit ball of `spec` in `R^d`.
///
/// `budget` caps the size of sampled sets and is the enumeration cutoff for
/// `ℓ1` (`2^d ≤ budget` enumerates all sign vectors). It is ignored for `ℓ∞`
/// and custom polytopes.
pub fn dual_functionals(spec: &NormSpec, d: usize, budget: usize, seed: u64) -> Result<FunctionalSet> {
    if d == 0 {
        return Err(invalid("d", "dimension must be at least 1"));
    }
    if budget == 0 {
        return Err(invalid("budget", "must be at least 1"));
    }
    spec.validate()?;
    let kind = spec.kind();
    let mut rng = rng::stream(seed, tag::FUNCTIONALS);
    let (data, exact, sampled) = match spec {
        NormSpec::Linf => {
            let mut data = vec![0.0; d * d];
            for i in 0..d {
                data[i * d + i] = 1.0;
            }
            (data, true, false)
        }
        NormSpec::L1 => {
            let exact = d < usize::BITS as usize && (1usize << d) <= budget;
            let patterns: Vec<Vec<bool>> = if exact {
                // First coordinate fixed to +1: one representative per ± pair.
                (0..1usize << (d - 1))
                    .map(|bits| (0..d - 1).map(|i| bits >> i & 1 == 1).collect())
                    .collect()
            } else {
                sample_sign_patterns(d - 1, budget, &mut rng)
            };
            let mut data = Vec::with_capacity(patterns.len() * d);
            for pat in patterns {
                data.push(1.0);
                data.extend(pat.into_iter().map(|neg| if neg { -1.0 } else { 1.0 }));
            }
            (data, exact, !exact)
        }
        NormSpec::L2 => {
            let mut data = Vec::with_capacity(budget * d);
            for _ in 0..budget {
                data.extend(sample_sphere(d, 2.0, &mut rng));
            }
            (data, false, true)
        }
        NormSpec::Lp(p) => {
            let q = p / (p - 1.0);
            let mut data = Vec::with_capacity(budget * d);
            for _ in 0..budget {
                data.extend(sample_sphere(d, q, &mut rng));
            }
            (data, false, true)
        }
        NormSpec::CustomPolytope(rows) => {
            let mut data = Vec::with_capacity(rows.len() * d);
            for row in rows {
                if row.len() != d {
                    return Err(Error::DimensionMismatch {
                        expected: d,
                        found: row.len(),
                    });
                }
                data.extend_from_slice(row);
            }
            (data, true, false)
        }
    };
    Ok(FunctionalSet {
        dim: d,
        data,
        exact,
        seed: sampled.then_some(seed),
        kind,
    })
}

/// `budget` distinct sign patterns of length `len`, uniformly without replacement.
fn sample_sign_patterns<R: Rng>(len: usize, budget: usize, rng: &mut R) -> Vec<Vec<bool>> {
    if len < usize::BITS as usize - 1 {
        let total = 1usize << len;
        let count = budget.min(total);
        return index::sample(rng, total, count)
            .into_iter()
            .map(|bits| (0..len).map(|i| bits >> i & 1 == 1).collect())
            .collect();
    }
    // The pattern space dwarfs any feasible budget: rejection on duplicates.
    let mut seen = HashSet::with_capacity(budget);
    let mut out = Vec::with_capacity(budget);
    while out.len() < budget {
        let pat: Vec<bool> = (0..len).map(|_| rng.random()).collect();
        if seen.insert(pat.clone()) {
            out.push(pat);
        }
    }
    out
}

/// Uniform-in-direction point on the unit `ℓq` sphere.
///
/// Coordinates are drawn from the density `∝ exp(-|x|^q)` and rescaled,
/// which gives the cone measure on the sphere. For `q = 2` this is the
/// usual normalized Gaussian.
fn sample_sphere<R: Rng>(d: usize, q: f64, rng: &mut R) -> Vec<f64> {
    loop {
        let v: Vec<f64> = if q == 2.0 {
            (0..d).map(|_| rng.sample(StandardNormal)).collect()
        } else {
            let gamma = Gamma::new(1.0 / q, 1.0).expect("shape 1/q is positive");
            (0..d)
                .map(|_| {
                    let magnitude = gamma.sample(rng).powf(1.0 / q);
                    if rng.random::<bool>() {
                        magnitude
                    } else {
                        -magnitude
                    }
                })
                .collect()
        };
        let norm = lp_norm(&v, q);
        if norm > 0.0 && norm.is_finite() {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

fn lp_norm(v: &[f64], p: f64) -> f64 {
    if p == 2.0 {
        return v.iter().map(|x| x * x).sum::<f64>().sqrt();
    }
    let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if scale == 0.0 || !scale.is_finite() {
        return scale;
    }
    scale * v.iter().map(|x| (x.abs() / scale).powf(p)).sum::<f64>().powf(1.0 / p)
}

/// `sup` of `⟨t, v⟩` over the sign-closed functional set.
///
/// Equals the norm when `fs.exact()`, and is a lower bound otherwise.
pub fn norm_eval(v: &[f64], fs: &FunctionalSet) -> Result<f64> {
    if fs.is_empty() {
        return Err(Error::Empty("functional set"));
    }
    fs.check_dim(v.len())?;
    Ok(fs.sup_abs(v))
}

/// Closed-form `ℓ∞`, `ℓ1`, `ℓ2` or `ℓp` norm.
pub fn direct_norm(v: &[f64], spec: &NormSpec) -> Result<f64> {
    Ok(match spec {
        NormSpec::Linf => v.iter().fold(0.0, |m: f64, x| m.max(x.abs())),
        NormSpec::L1 => v.iter().map(|x| x.abs()).sum(),
        NormSpec::L2 => lp_norm(v, 2.0),
        NormSpec::Lp(p) => {
            spec.validate()?;
            lp_norm(v, *p)
        }
        NormSpec::CustomPolytope(_) => return Err(Error::NoClosedForm("custom polytope")),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_vector(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
        (0..d).map(|_| rng.random_range(-10.0..10.0)).collect()
    }

    #[test]
    fn linf_functionals_are_signed_basis() {
        let fs = dual_functionals(&NormSpec::Linf, 2, 1, 0).unwrap();
        assert!(fs.exact());
        assert_eq!(fs.len(), 2);
        assert_eq!(fs.signed_len(), 4);
        assert_eq!(fs.get(0), &[1.0, 0.0]);
        assert_eq!(fs.get(1), &[0.0, 1.0]);
        assert!(fs.is_coordinate_basis());
        // budget is ignored
        assert_eq!(dual_functionals(&NormSpec::Linf, 2, 9999, 5).unwrap(), fs);
    }

    #[test]
    fn l1_enumerates_all_sign_vectors() {
        let fs = dual_functionals(&NormSpec::L1, 3, 100, 0).unwrap();
        assert!(fs.exact());
        assert_eq!(fs.signed_len(), 8);
        let mut signed: Vec<Vec<i32>> = fs
            .iter()
            .flat_map(|t| {
                let p: Vec<i32> = t.iter().map(|&x| x as i32).collect();
                let n: Vec<i32> = p.iter().map(|x| -x).collect();
                [p, n]
            })
            .collect();
        signed.sort();
        signed.dedup();
        assert_eq!(signed.len(), 8);
        assert!(signed.iter().all(|s| s.iter().all(|x| x.abs() == 1)));
    }

    #[test]
    fn l1_samples_without_replacement_past_cutoff() {
        let fs = dual_functionals(&NormSpec::L1, 12, 100, 3).unwrap();
        assert!(!fs.exact());
        assert_eq!(fs.len(), 100);
        let mut rows: Vec<Vec<i64>> = fs.iter().map(|t| t.iter().map(|&x| x as i64).collect()).collect();
        rows.sort();
        rows.dedup();
        assert_eq!(rows.len(), 100);
        // 2^12 = 4096 is exactly at the default cutoff
        assert!(dual_functionals(&NormSpec::L1, 12, DEFAULT_BUDGET, 3).unwrap().exact());
    }

    #[test]
    fn l2_sampling_is_seeded_and_unit_length() {
        let a = dual_functionals(&NormSpec::L2, 5, 64, 7).unwrap();
        let b = dual_functionals(&NormSpec::L2, 5, 64, 7).unwrap();
        let c = dual_functionals(&NormSpec::L2, 5, 64, 8).unwrap();
        assert_eq!(a.len(), 64);
        assert!(!a.exact());
        assert_eq!(a.seed(), Some(7));
        let bits = |fs: &FunctionalSet| fs.iter().flatten().map(|x| x.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
        assert_ne!(bits(&a), bits(&c));
        for t in a.iter() {
            assert!((lp_norm(t, 2.0) - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn lp_samples_lie_on_dual_sphere() {
        let p = 3.0;
        let q = p / (p - 1.0);
        let fs = dual_functionals(&NormSpec::Lp(p), 4, 50, 1).unwrap();
        for t in fs.iter() {
            assert!((lp_norm(t, q) - 1.0).abs() < 1e-12);
        }
        // Hölder: ⟨t, v⟩ ≤ ‖t‖_q ‖v‖_p
        let v = [1.0, -2.0, 0.5, 3.0];
        let direct = direct_norm(&v, &NormSpec::Lp(p)).unwrap();
        assert!(norm_eval(&v, &fs).unwrap() <= direct * (1.0 + 1e-12));
    }

    #[test]
    fn custom_polytope_checks() {
        let spec = NormSpec::CustomPolytope(vec![vec![1.0, 0.0], vec![1.0, 1.0]]);
        let fs = dual_functionals(&spec, 2, 1, 0).unwrap();
        assert!(fs.exact());
        assert_eq!(norm_eval(&[1.0, -3.0], &fs).unwrap(), 2.0);
        assert!(matches!(
            dual_functionals(&spec, 3, 1, 0),
            Err(Error::DimensionMismatch { .. })
        ));
        let zero = NormSpec::CustomPolytope(vec![vec![0.0, 0.0]]);
        assert!(dual_functionals(&zero, 2, 1, 0).is_err());
        assert!(NormSpec::CustomPolytope(vec![]).validate().is_err());
    }

    #[test]
    fn zero_budget_is_rejected() {
        assert!(dual_functionals(&NormSpec::L2, 3, 0, 0).is_err());
        assert!(dual_functionals(&NormSpec::Linf, 0, 1, 0).is_err());
    }

    #[test]
    fn norm_eval_examples() {
        let v = [3.0, -4.0];
        let linf = dual_functionals(&NormSpec::Linf, 2, 1, 0).unwrap();
        let l1 = dual_functionals(&NormSpec::L1, 2, 16, 0).unwrap();
        assert_eq!(norm_eval(&v, &linf).unwrap(), 4.0);
        // brute force over s ∈ {±1}²
        let brute = [[1.0, 1.0], [1.0, -1.0], [-1.0, 1.0], [-1.0, -1.0]]
            .iter()
            .map(|s| s[0] * v[0] + s[1] * v[1])
            .fold(f64::MIN, f64::max);
        assert_eq!(brute, 7.0);
        assert_eq!(norm_eval(&v, &l1).unwrap(), brute);
        let l2 = dual_functionals(&NormSpec::L2, 2, 10, 0).unwrap();
        for fs in [&linf, &l1, &l2] {
            assert_eq!(norm_eval(&[0.0, 0.0], fs).unwrap(), 0.0);
        }
    }

    #[test]
    fn norm_eval_errors() {
        let empty = FunctionalSet::from_vectors(2, vec![], true, NormKind::CustomPolytope).unwrap();
        assert!(matches!(norm_eval(&[1.0, 2.0], &empty), Err(Error::Empty(_))));
        let linf = dual_functionals(&NormSpec::Linf, 2, 1, 0).unwrap();
        assert!(matches!(
            norm_eval(&[1.0], &linf),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn direct_norm_examples() {
        assert_eq!(direct_norm(&[3.0, -4.0], &NormSpec::L2).unwrap(), 5.0);
        assert_eq!(direct_norm(&[1.0, 1.0, 1.0], &NormSpec::L1).unwrap(), 3.0);
        let v = direct_norm(&[1.0, 1.0], &NormSpec::Lp(4.0)).unwrap();
        assert!((v - 2f64.powf(0.25)).abs() < 1e-15);
        assert!(matches!(
            direct_norm(&[1.0], &NormSpec::CustomPolytope(vec![vec![1.0]])),
            Err(Error::NoClosedForm(_))
        ));
    }

    #[test]
    fn exact_sets_match_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for d in 1..=10 {
            let linf = dual_functionals(&NormSpec::Linf, d, 1, 0).unwrap();
            let l1 = dual_functionals(&NormSpec::L1, d, 1 << 10, 0).unwrap();
            assert!(l1.exact());
            for _ in 0..100 {
                let v = random_vector(&mut rng, d);
                for (spec, fs) in [(NormSpec::Linf, &linf), (NormSpec::L1, &l1)] {
                    let want = direct_norm(&v, &spec).unwrap();
                    let got = norm_eval(&v, fs).unwrap();
                    assert!((got - want).abs() <= 1e-12 * want, "{spec} d={d}: {got} vs {want}");
                }
            }
        }
    }

    #[test]
    fn sampled_l2_is_a_tight_lower_bound() {
        // A net of 2^d lines is too coarse for the 0.9 ratio beyond d ≈ 4, so
        // the net is 64 times denser than the minimum.
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for d in 1..=8 {
            let fs = dual_functionals(&NormSpec::L2, d, 1 << (d + 6), d as u64).unwrap();
            for _ in 0..100 {
                let v = random_vector(&mut rng, d);
                let exact = direct_norm(&v, &NormSpec::L2).unwrap();
                let est = norm_eval(&v, &fs).unwrap();
                assert!(est <= exact * (1.0 + 1e-12));
                assert!(est >= 0.9 * exact, "d={d}: {est} < 0.9 * {exact}");
            }
        }
    }

    #[test]
    fn parse_round_trip() {
        for s in ["linf", "l1", "l2", "lp:3"] {
            let spec: NormSpec = s.parse().unwrap();
            assert_eq!(spec.to_string(), s);
        }
        assert!("lp:1".parse::<NormSpec>().is_err());
        assert!("lp:x".parse::<NormSpec>().is_err());
        assert!("l7".parse::<NormSpec>().is_err());
        let json = serde_json::to_string(&NormSpec::Lp(1.5)).unwrap();
        assert_eq!(json, "\"lp:1.5\"");
        let poly: NormSpec = serde_json::from_str(r#"{"poly": [[1.0, 2.0]]}"#).unwrap();
        assert_eq!(poly, NormSpec::CustomPolytope(vec![vec![1.0, 2.0]]));
    }

    proptest! {
        #[test]
        fn symmetric_and_homogeneous(
            v in prop::collection::vec(-1e3f64..1e3, 4),
            alpha in -50f64..50.0,
        ) {
            let fs = dual_functionals(&NormSpec::L2, 4, 32, 1).unwrap();
            let l1 = dual_functionals(&NormSpec::L1, 4, 64, 1).unwrap();
            for fs in [&fs, &l1] {
                let base = norm_eval(&v, fs).unwrap();
                let neg: Vec<f64> = v.iter().map(|x| -x).collect();
                prop_assert_eq!(norm_eval(&neg, fs).unwrap(), base);
                let scaled: Vec<f64> = v.iter().map(|x| alpha * x).collect();
                let got = norm_eval(&scaled, fs).unwrap();
                prop_assert!((got - alpha.abs() * base).abs() <= 1e-12 * (alpha.abs() * base).max(1e-300));
            }
        }
    }
}
