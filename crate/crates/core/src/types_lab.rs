//! Method-of-types computations on small alphabets.
//!
//! A [`TypeVector`] holds the occurrence counts `(k_1, .., k_n)` of a sample of
//! size `k = sum k_i`; its type is the empirical distribution `t = k_i / k`.
//! The routines here compute type-class sizes and type probabilities exactly
//! (in log space) and check them against the entropy and divergence
//! exponents through the standard polynomial sandwich
//!
//! ```text
//! (k + 1)^-n 2^{k H(t)} <= k! / (k_1! .. k_n!) <= 2^{k H(t)}
//! ```

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profile::{entropy_nats, kl_nats, Profile};

/// Largest alphabet size for exhaustive enumeration.
pub const MAX_ENUM_ALPHABET: usize = 6;
/// Largest sample size for exhaustive enumeration.
pub const MAX_ENUM_SAMPLES: u64 = 30;
/// Cap on the number of enumerated types.
pub const MAX_ENUM_TYPES: u64 = 1_000_000;

/// Largest `k` for which factorials are evaluated in exact integer arithmetic
/// (`20! < 2^64`).
const EXACT_FACTORIAL_LIMIT: u64 = 20;

/// Occurrence counts of a sample.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<u64>", into = "Vec<u64>")]
pub struct TypeVector {
    counts: Vec<u64>,
    total: u64,
}

impl TypeVector {
    pub fn new(counts: Vec<u64>) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::InvalidTypeVector("empty alphabet".into()));
        }
        let total = counts
            .iter()
            .try_fold(0u64, |acc, &c| acc.checked_add(c))
            .ok_or_else(|| Error::InvalidTypeVector("count overflow".into()))?;
        if total == 0 {
            return Err(Error::InvalidTypeVector("zero total count".into()));
        }
        Ok(Self { counts, total })
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Sample size `k`.
    pub fn total(&self) -> u64 {
        self.total
    }

    /// Alphabet size `n`.
    pub fn alphabet_len(&self) -> usize {
        self.counts.len()
    }

    /// The empirical distribution `k_i / k`.
    pub fn type_pmf(&self) -> Vec<f64> {
        let k = self.total as f64;
        self.counts.iter().map(|&c| c as f64 / k).collect()
    }

    /// The same type at `factor` times the sample size.
    pub fn scaled(&self, factor: u64) -> Result<Self> {
        let counts = self
            .counts
            .iter()
            .map(|&c| c.checked_mul(factor))
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| Error::InvalidTypeVector("count overflow".into()))?;
        Self::new(counts)
    }

    /// `k H(t)` in bits, computed as `sum k_i log2(k / k_i)`.
    pub fn entropy_exponent(&self) -> f64 {
        let k = self.total as f64;
        self.counts
            .iter()
            .filter(|&&c| c > 0)
            .map(|&c| c as f64 * (k / c as f64).log2())
            .sum()
    }
}

impl TryFrom<Vec<u64>> for TypeVector {
    type Error = Error;

    fn try_from(counts: Vec<u64>) -> Result<Self> {
        Self::new(counts)
    }
}

impl From<TypeVector> for Vec<u64> {
    fn from(tv: TypeVector) -> Vec<u64> {
        tv.counts
    }
}

fn factorial_u64(n: u64) -> u64 {
    debug_assert!(n <= EXACT_FACTORIAL_LIMIT);
    (2..=n).product()
}

/// `log2(k! / (k_1! .. k_n!))`, the log-size of the type class.
///
/// Exact integer arithmetic for `k <= 20`, log-gamma summation beyond.
pub fn log2_multinomial(tv: &TypeVector) -> f64 {
    if tv.total <= EXACT_FACTORIAL_LIMIT {
        // Dividing one factorial at a time keeps every quotient integral.
        let coefficient = tv
            .counts
            .iter()
            .fold(factorial_u64(tv.total), |acc, &c| acc / factorial_u64(c));
        return (coefficient as f64).log2();
    }
    let ln_factorial = |n: u64| libm::lgamma(n as f64 + 1.0);
    let ln = ln_factorial(tv.total)
        - tv.counts
            .iter()
            .filter(|&&c| c > 1)
            .map(|&c| ln_factorial(c))
            .sum::<f64>();
    ln / LN_2
}

/// Type-class size against its entropy approximation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassSizeCheck {
    pub log2_class_size: f64,
    /// `k H(t)`: the upper bound and the leading-order approximation.
    pub entropy_exponent: f64,
    /// `k H(t) - n log2(k + 1)`.
    pub lower_bound: f64,
    pub holds: bool,
}

/// Checks `k H(t) - n log2(k + 1) <= log2 |class| <= k H(t)`.
pub fn class_size_check(tv: &TypeVector) -> ClassSizeCheck {
    let log2_class_size = log2_multinomial(tv);
    let entropy_exponent = tv.entropy_exponent();
    let lower_bound =
        entropy_exponent - tv.alphabet_len() as f64 * ((tv.total + 1) as f64).log2();
    ClassSizeCheck {
        log2_class_size,
        entropy_exponent,
        lower_bound,
        holds: lower_bound <= log2_class_size && log2_class_size <= entropy_exponent,
    }
}

fn check_dimension(tv: &TypeVector, tbar: &Profile) -> Result<()> {
    if tv.alphabet_len() == tbar.len() {
        Ok(())
    } else {
        Err(Error::CategoryMismatch)
    }
}

/// `log2 P{T = t}` for i.i.d. draws from `tbar`; `-inf` for impossible types.
pub fn log2_type_probability(tv: &TypeVector, tbar: &Profile) -> Result<f64> {
    check_dimension(tv, tbar)?;
    let mut log2_prob = log2_multinomial(tv);
    for (&c, &w) in tv.counts.iter().zip(tbar.pmf()) {
        if c == 0 {
            continue;
        }
        if w == 0.0 {
            return Ok(f64::NEG_INFINITY);
        }
        log2_prob += c as f64 * w.log2();
    }
    Ok(log2_prob)
}

/// Probability that `k` i.i.d. draws from `tbar` have type `tv`.
pub fn type_probability(tv: &TypeVector, tbar: &Profile) -> Result<f64> {
    Ok(log2_type_probability(tv, tbar)?.exp2())
}

/// `|-(1/k) log2 P{T = t} - D(t || tbar)|`, bounded by `n log2(k + 1) / k`.
pub fn divergence_exponent_gap(tv: &TypeVector, tbar: &Profile) -> Result<f64> {
    let log2_prob = log2_type_probability(tv, tbar)?;
    if log2_prob == f64::NEG_INFINITY {
        return Err(Error::ZeroProbability);
    }
    let k = tv.total as f64;
    let divergence = kl_nats(&tv.type_pmf(), tbar.pmf()) / LN_2;
    Ok((-log2_prob / k - divergence).abs())
}

/// Number of compositions of `k` into `n` nonnegative parts, saturating.
pub fn type_count(n: usize, k: u64) -> u64 {
    // C(k + n - 1, n - 1), built incrementally so each step stays integral.
    let mut count: u128 = 1;
    for j in 1..n as u128 {
        count = count * (k as u128 + j) / j;
        if count > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    count as u64
}

fn check_regime(n: usize, k: u64) -> Result<()> {
    let in_bounds = (1..=MAX_ENUM_ALPHABET).contains(&n) && (1..=MAX_ENUM_SAMPLES).contains(&k);
    if in_bounds && type_count(n, k) <= MAX_ENUM_TYPES {
        Ok(())
    } else {
        Err(Error::RegimeExceeded { n, k })
    }
}

/// All types of `k` draws over `n` symbols, in lexicographic order of counts.
pub fn enumerate_types(n: usize, k: u64) -> Result<Vec<TypeVector>> {
    check_regime(n, k)?;
    let mut out = Vec::with_capacity(type_count(n, k) as usize);
    let mut counts = vec![0u64; n];
    compositions(&mut counts, 0, k, &mut out);
    Ok(out)
}

fn compositions(counts: &mut [u64], pos: usize, remaining: u64, out: &mut Vec<TypeVector>) {
    if pos + 1 == counts.len() {
        counts[pos] = remaining;
        out.push(TypeVector {
            counts: counts.to_vec(),
            total: counts.iter().sum(),
        });
        return;
    }
    for c in 0..=remaining {
        counts[pos] = c;
        compositions(counts, pos + 1, remaining - c, out);
    }
}

/// `E[T]` over all types of `k` draws from `tbar`, by exhaustive summation.
pub fn mean_type(tbar: &Profile, k: u64) -> Result<Profile> {
    let types = enumerate_types(tbar.len(), k)?;
    let mut mean = vec![0.0; tbar.len()];
    for tv in &types {
        let prob = type_probability(tv, tbar)?;
        if prob == 0.0 {
            continue;
        }
        for (m, t) in mean.iter_mut().zip(tv.type_pmf()) {
            *m += prob * t;
        }
    }
    Ok(Profile::from_parts_unchecked(tbar.categories(), mean))
}

/// Per-type summary of the class-size and probability exponents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypeReport {
    pub counts: TypeVector,
    /// The empirical distribution over the reference categories.
    pub t: Profile,
    pub exact_log2_class_size: f64,
    /// `k H(t)`.
    pub entropy_approx: f64,
    /// `log2 P{T = t}`; `-inf` for impossible types.
    pub exact_log2_prob: f64,
    pub probability: f64,
    /// `k D(t || tbar)`.
    pub divergence_exponent: f64,
    /// `(k H(t) - log2 |class|) / k`. For possible types this equals
    /// `|-(1/k) log2 P{T = t} - D(t || tbar)|`.
    pub gap_per_symbol: f64,
    pub sandwich_holds: bool,
}

pub fn type_report(tv: &TypeVector, tbar: &Profile) -> Result<TypeReport> {
    let exact_log2_prob = log2_type_probability(tv, tbar)?;
    let check = class_size_check(tv);
    let k = tv.total as f64;
    let pmf = tv.type_pmf();
    let divergence_exponent = k * kl_nats(&pmf, tbar.pmf()) / LN_2;
    debug_assert!((entropy_nats(&pmf) * k / LN_2 - check.entropy_exponent).abs() < 1e-9 * k);
    Ok(TypeReport {
        counts: tv.clone(),
        t: Profile::from_parts_unchecked(tbar.categories(), pmf),
        exact_log2_class_size: check.log2_class_size,
        entropy_approx: check.entropy_exponent,
        exact_log2_prob,
        probability: exact_log2_prob.exp2(),
        divergence_exponent,
        gap_per_symbol: (check.entropy_exponent - check.log2_class_size) / k,
        sandwich_holds: check.holds,
    })
}

/// Reports for every type of `k` draws from `tbar`.
pub fn type_reports(tbar: &Profile, k: u64) -> Result<Vec<TypeReport>> {
    enumerate_types(tbar.len(), k)?
        .iter()
        .map(|tv| type_report(tv, tbar))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::indexed_labels;

    fn tv(counts: &[u64]) -> TypeVector {
        TypeVector::new(counts.to_vec()).unwrap()
    }

    fn prof(pmf: &[f64]) -> Profile {
        Profile::new(indexed_labels(pmf.len()), pmf.to_vec()).unwrap()
    }

    #[test]
    fn multinomial_examples() {
        assert_eq!(log2_multinomial(&tv(&[4, 0])), 0.0);
        assert!((log2_multinomial(&tv(&[2, 2])) - 6f64.log2()).abs() < 1e-15);
        assert!((log2_multinomial(&tv(&[1, 1, 1])) - 6f64.log2()).abs() < 1e-15);
        assert_eq!(log2_multinomial(&tv(&[40, 0])), 0.0);
    }

    #[test]
    fn exact_and_log_gamma_paths_agree() {
        // Force the log-gamma path on small vectors and compare.
        for tv in enumerate_types(3, 20).unwrap() {
            let exact = log2_multinomial(&tv);
            let ln = libm::lgamma(21.0)
                - tv.counts().iter().map(|&c| libm::lgamma(c as f64 + 1.0)).sum::<f64>();
            let via_gamma = ln / LN_2;
            assert!((exact - via_gamma).abs() <= 1e-10 * exact.max(1.0), "{tv:?}");
        }
    }

    #[test]
    fn class_size_examples() {
        let c = class_size_check(&tv(&[2, 2]));
        assert_eq!(c.entropy_exponent, 4.0);
        assert!((c.lower_bound - (4.0 - 2.0 * 5f64.log2())).abs() < 1e-15);
        assert!(c.holds);
        let c = class_size_check(&tv(&[7, 0]));
        assert_eq!((c.log2_class_size, c.entropy_exponent), (0.0, 0.0));
        assert!(c.holds);

        let t = tv(&[50, 50]);
        let c = class_size_check(&t);
        let per_symbol = c.log2_class_size / 100.0;
        // log2 C(100, 50) = 96.34871716...
        assert!((per_symbol - 0.963_487_171_6).abs() < 1e-10, "{per_symbol}");
        assert!(1.0 - per_symbol < 2.0 * 101f64.log2() / 100.0);
    }

    #[test]
    fn type_probability_examples() {
        let half = prof(&[0.5, 0.5]);
        assert!((type_probability(&tv(&[2, 2]), &half).unwrap() - 0.375).abs() < 1e-15);
        assert_eq!(type_probability(&tv(&[5, 0]), &prof(&[1.0, 0.0])).unwrap(), 1.0);
        assert_eq!(type_probability(&tv(&[1, 1]), &prof(&[1.0, 0.0])).unwrap(), 0.0);
        assert_eq!(
            type_probability(&tv(&[1, 1, 1]), &half),
            Err(Error::CategoryMismatch)
        );
    }

    #[test]
    fn divergence_gap_examples() {
        let half = prof(&[0.5, 0.5]);
        let gap = divergence_exponent_gap(&tv(&[2, 2]), &half).unwrap();
        assert!((gap - (-0.25 * 0.375f64.log2())).abs() < 1e-15);
        assert!((gap - 0.353_8).abs() < 1e-4);
        assert!(gap <= 2.0 * 5f64.log2() / 4.0);

        let gap = divergence_exponent_gap(&tv(&[50, 50]), &half).unwrap();
        assert!(gap < 0.07, "{gap}");

        assert_eq!(
            divergence_exponent_gap(&tv(&[1, 1]), &prof(&[1.0, 0.0])),
            Err(Error::ZeroProbability)
        );
    }

    #[test]
    fn enumeration_examples() {
        let types = enumerate_types(2, 2).unwrap();
        let counts: Vec<&[u64]> = types.iter().map(|t| t.counts()).collect();
        assert_eq!(counts, vec![&[0, 2][..], &[1, 1], &[2, 0]]);
        assert_eq!(enumerate_types(3, 2).unwrap().len(), 6);

        let half = prof(&[0.5, 0.5]);
        let probs: Vec<f64> = enumerate_types(2, 4)
            .unwrap()
            .iter()
            .map(|t| type_probability(t, &half).unwrap())
            .collect();
        assert_eq!(probs, vec![1.0 / 16.0, 0.25, 0.375, 0.25, 1.0 / 16.0]);
    }

    #[test]
    fn regime_limits() {
        assert!(enumerate_types(6, 30).is_ok());
        assert_eq!(type_count(6, 30), 324_632);
        assert_eq!(enumerate_types(7, 2), Err(Error::RegimeExceeded { n: 7, k: 2 }));
        assert!(enumerate_types(2, 31).is_err());
        assert!(enumerate_types(0, 3).is_err());
        assert!(enumerate_types(2, 0).is_err());
    }

    #[test]
    fn mean_type_examples() {
        let half = prof(&[0.5, 0.5]);
        assert!(mean_type(&half, 4).unwrap().max_abs_diff(&half).unwrap() < 1e-12);
        let skew = prof(&[0.75, 0.25]);
        assert!(mean_type(&skew, 6).unwrap().max_abs_diff(&skew).unwrap() < 1e-12);
        let point = prof(&[1.0, 0.0]);
        assert_eq!(mean_type(&point, 9).unwrap(), point);
    }

    #[test]
    fn report_fields_are_consistent() {
        let tbar = prof(&[0.2, 0.3, 0.5]);
        let reports = type_reports(&tbar, 5).unwrap();
        assert_eq!(reports.len(), 21);
        for r in &reports {
            assert!(r.sandwich_holds);
            let gap = divergence_exponent_gap(&r.counts, &tbar).unwrap();
            assert!((gap - r.gap_per_symbol).abs() < 1e-12);
        }
    }

    #[test]
    fn type_vector_validation() {
        assert!(TypeVector::new(vec![]).is_err());
        assert!(TypeVector::new(vec![0, 0]).is_err());
        assert!(TypeVector::new(vec![u64::MAX, 1]).is_err());
        assert_eq!(tv(&[1, 3]).scaled(4).unwrap().counts(), &[4, 12]);
    }
}
