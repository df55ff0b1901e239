//! Simulated query streams mixing genuine and forged queries.
//!
//! Each event is drawn independently: first the forged flag (a uniform
//! variate below `rho`), then the category (inverse CDF of one uniform
//! variate over `r` for forged events and `q` otherwise). The draw order and
//! the generator in [`crate::rng`] fix the stream bit-for-bit for a given seed.
//!
//! In [`ForgeryMode::ExactCount`] the forged positions are deterministic:
//! event `i` is forged when `floor((i + 1) rho) > floor(i rho)`, giving exactly
//! `floor(N rho)` forged events. Only the category draw is random then.
//!
//! The attacker observes categories only, never the forged flag.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optimizer::solve;
use crate::profile::{estimate_profile, kl_divergence, mix, CategoryCounts, Profile, Redundancy};
use crate::rng::SeededRng;

/// One simulated query.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct QueryEvent {
    pub seq: u64,
    pub category_index: usize,
    pub forged: bool,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ForgeryMode {
    /// Each event is forged independently with probability `rho`.
    #[default]
    Bernoulli,
    /// Exactly `floor(N rho)` forged events, evenly interleaved.
    ExactCount,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationConfig {
    pub q: Profile,
    pub r: Profile,
    pub rho: Redundancy,
    pub total_queries: u64,
    pub seed: u64,
    pub mode: ForgeryMode,
}

impl SimulationConfig {
    pub fn new(q: Profile, r: Profile, rho: Redundancy, total_queries: u64, seed: u64) -> Result<Self> {
        if !q.is_aligned_with(&r) {
            return Err(Error::CategoryMismatch);
        }
        if total_queries == 0 {
            return Err(Error::InvalidConfig("total_queries must be at least 1".into()));
        }
        Ok(Self {
            q,
            r,
            rho,
            total_queries,
            seed,
            mode: ForgeryMode::Bernoulli,
        })
    }

    pub fn with_mode(mut self, mode: ForgeryMode) -> Self {
        self.mode = mode;
        self
    }

    /// The apparent profile the stream is drawn from.
    pub fn apparent(&self) -> Profile {
        mix(&self.q, &self.r, self.rho).expect("aligned by construction")
    }
}

/// On-disk simulation config. When `r` is absent the optimal forged profile
/// for `(q, p, rho)` is used, which requires `p`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationFile {
    pub q: Profile,
    #[serde(default)]
    pub r: Option<Profile>,
    #[serde(default)]
    pub p: Option<Profile>,
    pub rho: Redundancy,
    pub total_queries: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub mode: ForgeryMode,
}

impl SimulationFile {
    /// Resolves the config, returning the population profile alongside.
    pub fn resolve(self) -> Result<(SimulationConfig, Option<Profile>)> {
        let r = match (self.r, &self.p) {
            (Some(r), _) => r,
            (None, Some(p)) => solve(&self.q, p, self.rho)?.r_opt,
            (None, None) => {
                return Err(Error::InvalidConfig(
                    "either `r` or the population profile `p` is required".into(),
                ))
            }
        };
        let cfg = SimulationConfig::new(self.q, r, self.rho, self.total_queries, self.seed)?
            .with_mode(self.mode);
        if let Some(p) = &self.p {
            p.ensure_aligned(&cfg.q)?;
        }
        Ok((cfg, self.p))
    }
}

/// Draws the full stream for `cfg`.
pub fn generate_stream(cfg: &SimulationConfig) -> Vec<QueryEvent> {
    let mut rng = SeededRng::new(cfg.seed);
    let rho = cfg.rho.value();
    let (q, r) = (cfg.q.pmf(), cfg.r.pmf());
    (0..cfg.total_queries)
        .map(|seq| {
            let forged = match cfg.mode {
                ForgeryMode::Bernoulli => rng.uniform() < rho,
                ForgeryMode::ExactCount => {
                    ((seq + 1) as f64 * rho).floor() > (seq as f64 * rho).floor()
                }
            };
            let category_index = rng.categorical(if forged { r } else { q });
            QueryEvent {
                seq,
                category_index,
                forged,
            }
        })
        .collect()
}

/// Per-category counts as seen by an attacker who cannot tell forged
/// queries from genuine ones.
pub fn attacker_view(events: &[QueryEvent], categories: &[String]) -> Result<CategoryCounts> {
    if events.is_empty() {
        return Err(Error::EmptyLog);
    }
    let mut counts = vec![0u64; categories.len()];
    for e in events {
        let slot = counts
            .get_mut(e.category_index)
            .ok_or_else(|| Error::InvalidConfig(format!("category index {} out of range", e.category_index)))?;
        *slot += 1;
    }
    Ok(CategoryCounts::from_parts_unchecked(categories, counts))
}

/// How closely the attacker's empirical profile tracks the designed
/// apparent profile, and the risk it reveals.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub n_observed: u64,
    pub n_forged: u64,
    pub empirical: Profile,
    /// `D(empirical || s)` in bits.
    pub div_to_apparent: f64,
    /// `D(empirical || p)` in bits; may be infinite.
    #[serde(serialize_with = "serialize_bits")]
    pub measured_risk: f64,
}

/// Infinite divergences are written as JSON `null`.
fn serialize_bits<S: serde::Serializer>(x: &f64, ser: S) -> std::result::Result<S::Ok, S::Error> {
    if x.is_finite() {
        ser.serialize_f64(*x)
    } else {
        ser.serialize_none()
    }
}

pub fn convergence_report(
    events: &[QueryEvent],
    q: &Profile,
    r: &Profile,
    rho: Redundancy,
    p: &Profile,
) -> Result<ConvergenceReport> {
    let apparent = mix(q, r, rho)?;
    p.ensure_aligned(q)?;
    let counts = attacker_view(events, q.categories())?;
    let empirical = estimate_profile(&counts)?;
    Ok(ConvergenceReport {
        n_observed: counts.total(),
        n_forged: events.iter().filter(|e| e.forged).count() as u64,
        div_to_apparent: kl_divergence(&empirical, &apparent)?,
        measured_risk: kl_divergence(&empirical, p)?,
        empirical,
    })
}

#[derive(Serialize)]
struct EventRecord<'a> {
    seq: u64,
    category: &'a str,
    forged: bool,
}

/// Writes one JSON object per line: `{"seq":0,"category":"health","forged":false}`.
pub fn write_jsonl<W: Write>(events: &[QueryEvent], categories: &[String], mut out: W) -> std::io::Result<()> {
    for e in events {
        let record = EventRecord {
            seq: e.seq,
            category: &categories[e.category_index],
            forged: e.forged,
        };
        serde_json::to_writer(&mut out, &record)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::indexed_labels;

    fn prof(pmf: &[f64]) -> Profile {
        Profile::new(indexed_labels(pmf.len()), pmf.to_vec()).unwrap()
    }

    fn config(q: &[f64], r: &[f64], rho: f64, n: u64, seed: u64) -> SimulationConfig {
        SimulationConfig::new(prof(q), prof(r), Redundancy::new(rho).unwrap(), n, seed).unwrap()
    }

    #[test]
    fn zero_redundancy_never_forges() {
        let events = generate_stream(&config(&[0.3, 0.7], &[0.9, 0.1], 0.0, 5_000, 1));
        assert!(events.iter().all(|e| !e.forged));
    }

    #[test]
    fn forged_fraction_within_binomial_band() {
        let events = generate_stream(&config(&[0.9, 0.1], &[0.1, 0.9], 0.5, 100_000, 7));
        let frac = events.iter().filter(|e| e.forged).count() as f64 / 1e5;
        // 3.8 sigma of Binomial(1e5, 0.5) / 1e5 is 0.006.
        assert!((frac - 0.5).abs() < 0.006, "{frac}");
    }

    #[test]
    fn exact_count_mode() {
        let cfg = config(&[0.9, 0.1], &[0.1, 0.9], 0.3, 1_000, 5).with_mode(ForgeryMode::ExactCount);
        let events = generate_stream(&cfg);
        assert_eq!(events.iter().filter(|e| e.forged).count(), 300);
    }

    #[test]
    fn sequence_numbers_increase() {
        let events = generate_stream(&config(&[0.5, 0.5], &[0.5, 0.5], 0.2, 100, 3));
        assert!(events.windows(2).all(|w| w[0].seq < w[1].seq));
        assert_eq!(events[0].seq, 0);
    }

    #[test]
    fn attacker_view_counts() {
        let cats = indexed_labels(3);
        let one = [QueryEvent {
            seq: 0,
            category_index: 2,
            forged: true,
        }];
        assert_eq!(attacker_view(&one, &cats).unwrap().counts(), &[0, 0, 1]);
        assert_eq!(attacker_view(&[], &cats), Err(Error::EmptyLog));

        let events = generate_stream(&config(&[0.2, 0.3, 0.5], &[0.6, 0.2, 0.2], 0.4, 2_000, 9));
        assert_eq!(attacker_view(&events, &cats).unwrap().total(), 2_000);
    }

    #[test]
    fn genuine_stream_estimates_user_profile() {
        let q = [0.1, 0.2, 0.3, 0.4];
        let n = 100_000;
        let events = generate_stream(&config(&q, &[0.25; 4], 0.0, n, 11));
        let est = estimate_profile(&attacker_view(&events, &indexed_labels(4)).unwrap()).unwrap();
        for (e, qi) in est.pmf().iter().zip(q) {
            let sigma = (qi * (1.0 - qi) / n as f64).sqrt();
            assert!((e - qi).abs() < 4.0 * sigma);
        }
    }

    #[test]
    fn empirical_equal_to_apparent_has_zero_divergence() {
        let cats = indexed_labels(2);
        let events: Vec<QueryEvent> = (0..4)
            .map(|i| QueryEvent {
                seq: i,
                category_index: (i % 2) as usize,
                forged: i == 0,
            })
            .collect();
        let q = prof(&[0.9, 0.1]);
        let r = prof(&[0.1, 0.9]);
        let p = prof(&[0.5, 0.5]);
        let report = convergence_report(&events, &q, &r, Redundancy::new(0.5).unwrap(), &p).unwrap();
        assert_eq!(report.div_to_apparent, 0.0);
        assert_eq!(report.measured_risk, 0.0);
        assert_eq!(report.n_forged, 1);
        assert_eq!(report.empirical.categories(), &cats[..]);
    }

    #[test]
    fn infinite_risk_serializes_as_null() {
        let q = prof(&[0.5, 0.5]);
        let p = prof(&[1.0, 0.0]);
        let events = generate_stream(&config(&[0.5, 0.5], &[0.5, 0.5], 0.0, 100, 2));
        let report = convergence_report(&events, &q, &q, Redundancy::ZERO, &p).unwrap();
        assert_eq!(report.measured_risk, f64::INFINITY);
        let json = serde_json::to_string(&report).unwrap();
        assert!(json.contains(r#""measured_risk":null"#));
    }

    #[test]
    fn jsonl_format() {
        let cats = vec!["health".to_string(), "news".to_string()];
        let events = [
            QueryEvent {
                seq: 0,
                category_index: 0,
                forged: false,
            },
            QueryEvent {
                seq: 1,
                category_index: 1,
                forged: true,
            },
        ];
        let mut buf = Vec::new();
        write_jsonl(&events, &cats, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "{\"seq\":0,\"category\":\"health\",\"forged\":false}\n\
             {\"seq\":1,\"category\":\"news\",\"forged\":true}\n"
        );
    }

    #[test]
    fn config_file_without_r_uses_optimal_forgery() {
        let json = r#"{
            "q": {"categories": ["a", "b"], "pmf": [0.9, 0.1]},
            "p": {"categories": ["a", "b"], "pmf": [0.5, 0.5]},
            "rho": 0.5, "total_queries": 10, "seed": 3
        }"#;
        let file: SimulationFile = serde_json::from_str(json).unwrap();
        let (cfg, p) = file.resolve().unwrap();
        assert!(cfg.apparent().max_abs_diff(&p.unwrap()).unwrap() < 1e-12);

        let json = r#"{"q": {"categories": ["a"], "pmf": [1.0]}, "rho": 0.5, "total_queries": 10}"#;
        let file: SimulationFile = serde_json::from_str(json).unwrap();
        assert!(file.resolve().is_err());
    }
}
