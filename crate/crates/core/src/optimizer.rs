//! Optimal forged-query profiles and the privacy-redundancy curve.
//!
//! For a user profile `q`, population profile `p` and redundancy `rho`, the
//! minimum risk over forged profiles `r` is
//!
//! ```text
//! R(rho) = min_r D((1 - rho) q + rho r || p)
//! ```
//!
//! Substituting the apparent profile `s = (1 - rho) q + rho r` turns this into
//! minimizing `D(s || p)` over `sum s = 1`, `s >= (1 - rho) q`. The KKT
//! conditions give the water-filling form
//!
//! ```text
//! s_i = max{(1 - rho) q_i, lambda p_i},   sum_i s_i = 1,   lambda in [0, 1]
//! ```
//!
//! where the level `lambda` is found by bisection. The objective is convex on
//! an affine slice of the simplex, so this point is the global minimizer.

use std::f64::consts::LN_2;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracle::oracle_solve;
use crate::profile::{kl_nats, Profile, Redundancy};

const BISECTION_TOLERANCE: f64 = 1e-12;
const MAX_BISECTION_ITERS: u32 = 200;

/// Slack below which a coordinate counts as sitting on its floor
/// `(1 - rho) q_i` when checking optimality conditions.
pub const ACTIVE_SLACK: f64 = 1e-9;

/// Residual threshold for a certified solve.
pub const CERTIFY_TOLERANCE: f64 = 1e-6;

/// One point of the privacy-redundancy curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TradeoffPoint {
    pub rho: Redundancy,
    /// Minimum privacy risk in bits.
    pub risk: f64,
    /// Optimal forged profile. At `rho = 0` every `r` is optimal and `p` is
    /// returned by convention.
    pub r_opt: Profile,
    /// Apparent profile `(1 - rho) q + rho r_opt`.
    pub s_opt: Profile,
    /// Water level of the optimal apparent profile.
    pub lambda: f64,
    pub solver_iters: u32,
}

/// Optimality diagnostics for a [`TradeoffPoint`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    /// Largest `|log2(s_i / p_i) - log2 lambda|` over coordinates above their floor.
    pub kkt_stationarity_residual: f64,
    /// `max(|sum s - 1|, max_i ((1 - rho) q_i - s_i)_+)`.
    pub primal_feasibility_residual: f64,
    /// Largest `min(s_i - (1 - rho) q_i, (log2 lambda - log2(s_i / p_i))_+)`.
    pub complementary_slackness_residual: f64,
    /// Largest `(log2 lambda - log2(s_i / p_i))_+` over coordinates on their
    /// floor, i.e. floors that sit below the water level.
    pub dual_feasibility_residual: f64,
    /// `|risk - oracle risk|` in bits, when an oracle run was requested.
    pub oracle_gap_bits: Option<f64>,
}

impl SolveReport {
    /// True when every KKT residual is below `tolerance`.
    pub fn is_certified(&self, tolerance: f64) -> bool {
        self.max_residual() < tolerance
    }

    pub fn max_residual(&self) -> f64 {
        self.kkt_stationarity_residual
            .max(self.primal_feasibility_residual)
            .max(self.complementary_slackness_residual)
            .max(self.dual_feasibility_residual)
    }
}

/// Rejects user mass on categories the population never queries.
pub(crate) fn check_support(q: &Profile, p: &Profile) -> Result<()> {
    q.ensure_aligned(p)?;
    for ((label, &qi), &pi) in q.categories().iter().zip(q.pmf()).zip(p.pmf()) {
        if qi > 0.0 && pi == 0.0 {
            return Err(Error::UnsupportedCategory(label.clone()));
        }
    }
    Ok(())
}

/// Minimum-risk forged profile for redundancy `rho`.
pub fn solve(q: &Profile, p: &Profile, rho: Redundancy) -> Result<TradeoffPoint> {
    check_support(q, p)?;
    let categories = q.categories();
    let (qs, ps) = (q.pmf(), p.pmf());

    if rho.value() == 0.0 {
        return Ok(zero_redundancy_point(q, p));
    }

    let keep = 1.0 - rho.value();
    let floor: Vec<f64> = qs.iter().map(|qi| keep * qi).collect();
    let level = water_level(&floor, ps);
    let s: Vec<f64> = floor
        .iter()
        .zip(ps)
        .map(|(fi, pi)| fi.max(level.lambda * pi))
        .collect();

    let residual: Vec<f64> = s
        .iter()
        .zip(&floor)
        .map(|(si, fi)| (si - fi).max(0.0) / rho.value())
        .collect();

    let risk = kl_nats(&s, ps) / LN_2;
    Ok(TradeoffPoint {
        rho,
        risk,
        r_opt: Profile::from_weights(categories, residual),
        s_opt: Profile::from_parts_unchecked(categories, s),
        lambda: level.lambda,
        solver_iters: level.iters,
    })
}

/// At `rho = 0` the forged profile has no effect: `s = q`, `r = p` by
/// convention, and the level is the largest `lambda` with `lambda p <= q`.
pub(crate) fn zero_redundancy_point(q: &Profile, p: &Profile) -> TradeoffPoint {
    let (qs, ps) = (q.pmf(), p.pmf());
    let lambda = qs
        .iter()
        .zip(ps)
        .filter(|(_, &pi)| pi > 0.0)
        .map(|(qi, pi)| qi / pi)
        .fold(1.0, f64::min);
    TradeoffPoint {
        rho: Redundancy::ZERO,
        risk: kl_nats(qs, ps) / LN_2,
        r_opt: p.clone(),
        s_opt: q.clone(),
        lambda,
        solver_iters: 0,
    }
}

struct WaterLevel {
    lambda: f64,
    iters: u32,
}

/// Finds `lambda` in `[0, 1]` with `sum_i max(floor_i, lambda p_i) = 1`,
/// given `sum floor < 1`.
fn water_level(floor: &[f64], p: &[f64]) -> WaterLevel {
    // Saturated: the floors fit under p, so s = p and the risk vanishes.
    if floor.iter().zip(p).all(|(f, pi)| f <= pi) {
        return WaterLevel {
            lambda: 1.0,
            iters: 0,
        };
    }
    let filled = |lambda: f64| -> f64 {
        floor
            .iter()
            .zip(p)
            .map(|(f, pi)| f.max(lambda * pi))
            .sum()
    };

    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    let mut lambda = 0.5;
    let mut iters = 0;
    while iters < MAX_BISECTION_ITERS {
        iters += 1;
        lambda = 0.5 * (lo + hi);
        let total = filled(lambda);
        if (total - 1.0).abs() < BISECTION_TOLERANCE {
            break;
        }
        if total < 1.0 {
            lo = lambda;
        } else {
            hi = lambda;
        }
    }

    // With the active set identified the level has a closed form; keep it
    // when it balances the sum at least as well as the bisection iterate.
    let (mut floor_mass, mut active_mass) = (0.0, 0.0);
    for (f, pi) in floor.iter().zip(p) {
        if lambda * pi > *f {
            active_mass += pi;
        } else {
            floor_mass += f;
        }
    }
    if active_mass > 0.0 {
        let exact = (1.0 - floor_mass) / active_mass;
        if (0.0..=1.0).contains(&exact)
            && (filled(exact) - 1.0).abs() <= (filled(lambda) - 1.0).abs()
        {
            lambda = exact;
        }
    }
    WaterLevel { lambda, iters }
}

/// Smallest redundancy at which the apparent profile can equal `p` exactly:
/// `max(0, 1 - min_{q_i > 0} p_i / q_i)`. Returns 1 when `q` has mass outside
/// the support of `p`, since no `rho < 1` reaches zero risk then.
pub fn critical_redundancy(q: &Profile, p: &Profile) -> Result<f64> {
    q.ensure_aligned(p)?;
    let min_ratio = q
        .pmf()
        .iter()
        .zip(p.pmf())
        .filter(|(&qi, _)| qi > 0.0)
        .map(|(qi, pi)| pi / qi)
        .fold(f64::INFINITY, f64::min);
    Ok((1.0 - min_ratio).max(0.0))
}

/// Largest redundancy accepted on a curve grid.
pub const MAX_GRID_RHO: f64 = 1.0 - 1e-9;

/// Evenly spaced grid of `steps` points from `start` to `stop` inclusive.
pub fn linear_grid(start: f64, stop: f64, steps: usize) -> Result<Vec<Redundancy>> {
    if !(start.is_finite() && stop.is_finite()) || start < 0.0 || stop > MAX_GRID_RHO {
        return Err(Error::InvalidGrid(format!(
            "bounds must satisfy 0 <= start < stop <= {MAX_GRID_RHO}"
        )));
    }
    if start >= stop {
        return Err(Error::InvalidGrid(format!("start {start} >= stop {stop}")));
    }
    match steps {
        0 => Err(Error::InvalidGrid("zero steps".into())),
        1 => Ok(vec![Redundancy::new(start)?]),
        _ => {
            let width = (stop - start) / (steps - 1) as f64;
            (0..steps)
                .map(|i| {
                    let rho = if i + 1 == steps {
                        stop
                    } else {
                        start + width * i as f64
                    };
                    Redundancy::new(rho)
                })
                .collect()
        }
    }
}

/// Solves every grid point. Points are evaluated in parallel and returned in
/// grid order.
pub fn tradeoff_curve(q: &Profile, p: &Profile, grid: &[Redundancy]) -> Result<Vec<TradeoffPoint>> {
    if grid.is_empty() {
        return Err(Error::InvalidGrid("empty grid".into()));
    }
    if grid.windows(2).any(|w| w[0].value() >= w[1].value()) {
        return Err(Error::InvalidGrid("values must be strictly increasing".into()));
    }
    grid.par_iter().map(|&rho| solve(q, p, rho)).collect()
}

/// Measures how far `point` is from satisfying the optimality conditions of
/// the problem `(q, p, rho)`. Never fails; mismatched inputs show up as
/// infinite residuals.
pub fn verify_kkt(q: &Profile, p: &Profile, rho: Redundancy, point: &TradeoffPoint) -> SolveReport {
    let mut report = SolveReport {
        kkt_stationarity_residual: 0.0,
        primal_feasibility_residual: 0.0,
        complementary_slackness_residual: 0.0,
        dual_feasibility_residual: 0.0,
        oracle_gap_bits: None,
    };
    let s = &point.s_opt;
    if !q.is_aligned_with(p) || !q.is_aligned_with(s) {
        report.kkt_stationarity_residual = f64::INFINITY;
        report.primal_feasibility_residual = f64::INFINITY;
        return report;
    }

    let keep = 1.0 - rho.value();
    let lambda = point.lambda;
    let log_lambda = lambda.log2();
    let sum: f64 = s.pmf().iter().sum();
    let mut feasibility = (sum - 1.0).abs();

    for ((&qi, &pi), &si) in q.pmf().iter().zip(p.pmf()).zip(s.pmf()) {
        let floor = keep * qi;
        feasibility = feasibility.max((floor - si).max(0.0));
        if pi == 0.0 {
            if si > 0.0 {
                report.kkt_stationarity_residual = f64::INFINITY;
            }
            continue;
        }
        // Shortfall of log2(s_i / p_i) below the level; zero when lambda = 0.
        let below_level = if lambda == 0.0 {
            0.0
        } else if si == 0.0 {
            f64::INFINITY
        } else {
            (log_lambda - (si / pi).log2()).max(0.0)
        };
        let slack = si - floor;
        if slack > ACTIVE_SLACK {
            let gap = if si == 0.0 || lambda == 0.0 {
                f64::INFINITY
            } else {
                ((si / pi).log2() - log_lambda).abs()
            };
            report.kkt_stationarity_residual = report.kkt_stationarity_residual.max(gap);
        } else {
            report.dual_feasibility_residual = report.dual_feasibility_residual.max(below_level);
        }
        let cs = slack.max(0.0).min(below_level);
        report.complementary_slackness_residual = report.complementary_slackness_residual.max(cs);
    }
    report.primal_feasibility_residual = feasibility;
    report
}

/// KKT residuals plus the gap to an independent exponentiated-gradient run.
pub fn certify(
    q: &Profile,
    p: &Profile,
    rho: Redundancy,
    point: &TradeoffPoint,
    oracle_iterations: u32,
    seed: u64,
) -> Result<SolveReport> {
    let mut report = verify_kkt(q, p, rho, point);
    let oracle = oracle_solve(q, p, rho, oracle_iterations, seed)?;
    report.oracle_gap_bits = Some((oracle.risk - point.risk).abs());
    Ok(report)
}
