//! Query profiles and the information-theoretic quantities defined on them.
//!
//! A [`Profile`] is a probability mass function over a finite, labelled set of
//! query categories. Population, user, forged and apparent profiles all share
//! this representation. Every public quantity is reported in bits.
//!
//! Category labels are canonicalized (sorted lexicographically) at
//! construction time, so two profiles built from files that list the same
//! categories in different orders compare and combine correctly.

use std::collections::HashSet;
use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance on the sum of a probability vector.
pub const SUM_TOLERANCE: f64 = 1e-9;

/// A probability mass function over labelled query categories.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawProfile")]
pub struct Profile {
    categories: Vec<String>,
    pmf: Vec<f64>,
}

#[derive(Deserialize)]
struct RawProfile {
    categories: Vec<String>,
    pmf: Vec<f64>,
}

impl TryFrom<RawProfile> for Profile {
    type Error = Error;

    fn try_from(raw: RawProfile) -> Result<Self> {
        Profile::new(raw.categories, raw.pmf)
    }
}

impl Profile {
    /// Builds a profile, sorting categories and renormalizing a sum that is
    /// within [`SUM_TOLERANCE`] of one. Larger deviations are rejected.
    pub fn new(categories: Vec<String>, pmf: Vec<f64>) -> Result<Self> {
        if categories.is_empty() {
            return Err(Error::InvalidProfile("no categories".into()));
        }
        if categories.len() != pmf.len() {
            return Err(Error::InvalidProfile(format!(
                "{} categories but {} probabilities",
                categories.len(),
                pmf.len()
            )));
        }
        check_labels(&categories)?;
        if let Some(bad) = pmf.iter().find(|x| !x.is_finite() || **x < 0.0) {
            return Err(Error::InvalidProfile(format!("invalid probability {bad}")));
        }
        let sum: f64 = pmf.iter().sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::InvalidProfile(format!("probabilities sum to {sum}")));
        }
        let pmf = pmf.into_iter().map(|x| x / sum).collect();
        Ok(Self::canonical(categories, pmf))
    }

    /// The uniform profile over `categories`.
    pub fn uniform(categories: Vec<String>) -> Result<Self> {
        let n = categories.len();
        Self::new(categories, vec![1.0 / n as f64; n])
    }

    /// Uniform profile over `n` generated labels `c0 .. c{n-1}` (zero padded so
    /// that lexicographic order matches index order).
    pub fn uniform_indexed(n: usize) -> Result<Self> {
        Self::uniform(indexed_labels(n))
    }

    /// Builds a profile over already-canonical categories from nonnegative
    /// weights, normalizing by their sum. Used for vectors produced by
    /// internal arithmetic, whose sums drift by rounding only.
    pub(crate) fn from_weights(categories: &[String], weights: Vec<f64>) -> Self {
        let sum: f64 = weights.iter().sum();
        debug_assert!(sum > 0.0);
        Self {
            categories: categories.to_vec(),
            pmf: weights.into_iter().map(|w| w.max(0.0) / sum).collect(),
        }
    }

    /// Wraps a vector that is a valid PMF up to rounding, without rescaling.
    pub(crate) fn from_parts_unchecked(categories: &[String], pmf: Vec<f64>) -> Self {
        debug_assert_eq!(categories.len(), pmf.len());
        Self {
            categories: categories.to_vec(),
            pmf,
        }
    }

    fn canonical(categories: Vec<String>, pmf: Vec<f64>) -> Self {
        let mut pairs: Vec<(String, f64)> = categories.into_iter().zip(pmf).collect();
        pairs.sort_by(|a, b| a.0.cmp(&b.0));
        let (categories, pmf) = pairs.into_iter().unzip();
        Self { categories, pmf }
    }

    pub fn categories(&self) -> &[String] {
        &self.categories
    }

    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    /// Number of categories.
    pub fn len(&self) -> usize {
        self.pmf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pmf.is_empty()
    }

    /// Probability of a category by label.
    pub fn get(&self, category: &str) -> Option<f64> {
        self.categories
            .binary_search_by(|c| c.as_str().cmp(category))
            .ok()
            .map(|i| self.pmf[i])
    }

    pub fn is_aligned_with(&self, other: &Profile) -> bool {
        self.categories == other.categories
    }

    pub(crate) fn ensure_aligned(&self, other: &Profile) -> Result<()> {
        if self.is_aligned_with(other) {
            Ok(())
        } else {
            Err(Error::CategoryMismatch)
        }
    }

    /// Largest absolute componentwise difference.
    pub fn max_abs_diff(&self, other: &Profile) -> Result<f64> {
        self.ensure_aligned(other)?;
        Ok(self
            .pmf
            .iter()
            .zip(&other.pmf)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    /// L1 distance between two aligned profiles.
    pub fn l1_distance(&self, other: &Profile) -> Result<f64> {
        self.ensure_aligned(other)?;
        Ok(self.pmf.iter().zip(&other.pmf).map(|(a, b)| (a - b).abs()).sum())
    }
}

fn check_labels(categories: &[String]) -> Result<()> {
    let mut seen = HashSet::with_capacity(categories.len());
    for c in categories {
        if c.is_empty() {
            return Err(Error::InvalidProfile("empty category label".into()));
        }
        if !seen.insert(c.as_str()) {
            return Err(Error::InvalidProfile(format!("duplicate category `{c}`")));
        }
    }
    Ok(())
}

pub(crate) fn indexed_labels(n: usize) -> Vec<String> {
    let width = n.saturating_sub(1).to_string().len();
    (0..n).map(|i| format!("c{i:0width$}")).collect()
}

/// Fraction of forged queries among all queries, in `[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Redundancy(f64);

impl Redundancy {
    pub const ZERO: Redundancy = Redundancy(0.0);

    pub fn new(rho: f64) -> Result<Self> {
        if (0.0..1.0).contains(&rho) {
            Ok(Self(rho))
        } else {
            Err(Error::InvalidRedundancy(rho))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for Redundancy {
    type Error = Error;

    fn try_from(rho: f64) -> Result<Self> {
        Self::new(rho)
    }
}

impl From<Redundancy> for f64 {
    fn from(rho: Redundancy) -> f64 {
        rho.0
    }
}

/// Occurrence counts per category, e.g. a categorized query log.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawCounts")]
pub struct CategoryCounts {
    categories: Vec<String>,
    counts: Vec<u64>,
}

#[derive(Deserialize)]
struct RawCounts {
    categories: Vec<String>,
    counts: Vec<u64>,
}

impl TryFrom<RawCounts> for CategoryCounts {
    type Error = Error;

    fn try_from(raw: RawCounts) -> Result<Self> {
        CategoryCounts::new(raw.categories, raw.counts)
    }
}

impl CategoryCounts {
    pub fn new(categories: Vec<String>, counts: Vec<u64>) -> Result<Self> {
        if categories.is_empty() || categories.len() != counts.len() {
            return Err(Error::InvalidProfile(format!(
                "{} categories but {} counts",
                categories.len(),
                counts.len()
            )));
        }
        check_labels(&categories)?;
        let mut pairs: Vec<(String, u64)> = categories.into_iter().zip(counts).collect();
        pairs.sort_by(|a, b| a.0.cmp(&b.0));
        let (categories, counts) = pairs.into_iter().unzip();
        Ok(Self { categories, counts })
    }

    pub(crate) fn from_parts_unchecked(categories: &[String], counts: Vec<u64>) -> Self {
        Self {
            categories: categories.to_vec(),
            counts,
        }
    }

    pub fn categories(&self) -> &[String] {
        &self.categories
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// `-sum p ln p` in nats over a raw probability slice, with `0 ln 0 = 0`.
pub(crate) fn entropy_nats(pmf: &[f64]) -> f64 {
    -pmf.iter()
        .filter(|&&x| x > 0.0)
        .map(|&x| x * x.ln())
        .sum::<f64>()
}

/// KL divergence in nats between raw slices. `+inf` when `p` has mass
/// outside the support of `reference`.
pub(crate) fn kl_nats(p: &[f64], reference: &[f64]) -> f64 {
    let mut total = 0.0;
    for (&pi, &ri) in p.iter().zip(reference) {
        if pi == 0.0 {
            total += ri;
            continue;
        }
        if ri == 0.0 {
            return f64::INFINITY;
        }
        // p ln(p/r) - p + r is nonnegative termwise; the added terms cancel in
        // the sum because both vectors sum to one.
        let term = pi * (pi / ri).ln() - pi + ri;
        total += term.max(0.0);
    }
    total
}

/// Shannon entropy in bits.
pub fn entropy(p: &Profile) -> f64 {
    entropy_nats(&p.pmf) / LN_2
}

/// Kullback-Leibler divergence `D(p || reference)` in bits.
///
/// Returns `f64::INFINITY` exactly when `p` puts mass on a category where
/// `reference` has none.
pub fn kl_divergence(p: &Profile, reference: &Profile) -> Result<f64> {
    p.ensure_aligned(reference)?;
    Ok(kl_nats(&p.pmf, &reference.pmf) / LN_2)
}

/// `log2 n - H(p)`, the divergence from the uniform profile.
pub fn divergence_from_uniform(p: &Profile) -> f64 {
    (p.len() as f64).log2() - entropy(p)
}

/// Apparent profile `(1 - rho) q + rho r`.
pub fn mix(q: &Profile, r: &Profile, rho: Redundancy) -> Result<Profile> {
    q.ensure_aligned(r)?;
    let rho = rho.value();
    let pmf = q
        .pmf
        .iter()
        .zip(&r.pmf)
        .map(|(qi, ri)| (1.0 - rho) * qi + rho * ri)
        .collect();
    Ok(Profile::from_parts_unchecked(&q.categories, pmf))
}

/// Privacy risk of forging from `r` at redundancy `rho`: the divergence of
/// the apparent profile from the population profile `p`.
pub fn privacy_risk(q: &Profile, r: &Profile, rho: Redundancy, p: &Profile) -> Result<f64> {
    let s = mix(q, r, rho)?;
    kl_divergence(&s, p)
}

/// Relative-frequency estimate of a profile from counts.
pub fn estimate_profile(counts: &CategoryCounts) -> Result<Profile> {
    let total = counts.total();
    if total == 0 {
        return Err(Error::EmptyLog);
    }
    let k = total as f64;
    let pmf = counts.counts.iter().map(|&c| c as f64 / k).collect();
    Ok(Profile::from_parts_unchecked(&counts.categories, pmf))
}
