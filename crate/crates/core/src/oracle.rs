//! Independent cross-check for the water-filling solver.
//!
//! Minimizes `D((1 - rho) q + rho r || p)` directly over `r` on the simplex by
//! exponentiated gradient (entropic mirror descent). The gradient in nats is
//! `rho (ln(s_i / p_i) + 1)`, and the objective is `rho`-smooth relative to
//! the negative entropy of `r`, so the step `1 / rho` is admissible. With that
//! step the update reduces to the multiplicative rule
//!
//! ```text
//! r_i <- r_i p_i / s_i,   then renormalize
//! ```
//!
//! This path shares nothing with the level bisection beyond the objective.

use std::f64::consts::LN_2;

use crate::error::{Error, Result};
use crate::optimizer::{check_support, zero_redundancy_point, TradeoffPoint};
use crate::profile::{kl_nats, Profile, Redundancy};
use crate::rng::SeededRng;

/// Iteration stops early once no coordinate of `r` moves by more than this.
const STALL_TOLERANCE: f64 = 1e-17;

/// Exponentiated-gradient minimization of the privacy risk over `r`,
/// started from a seeded random interior point.
pub fn oracle_solve(
    q: &Profile,
    p: &Profile,
    rho: Redundancy,
    iterations: u32,
    seed: u64,
) -> Result<TradeoffPoint> {
    check_support(q, p)?;
    if iterations == 0 {
        return Err(Error::InvalidConfig("oracle needs at least one iteration".into()));
    }
    let categories = q.categories();
    let (qs, ps) = (q.pmf(), p.pmf());
    let n = qs.len();

    if rho.value() == 0.0 {
        return Ok(zero_redundancy_point(q, p));
    }

    let weight = rho.value();
    let keep = 1.0 - weight;
    let mut rng = SeededRng::new(seed);
    let mut r: Vec<f64> = ps
        .iter()
        .map(|&pi| {
            let u = rng.uniform();
            if pi > 0.0 {
                0.5 + u
            } else {
                0.0
            }
        })
        .collect();
    normalize(&mut r);

    let mut s = vec![0.0; n];
    let mut next = vec![0.0; n];
    let mut partition = 1.0;
    let mut iters = 0;
    while iters < iterations {
        iters += 1;
        for i in 0..n {
            s[i] = keep * qs[i] + weight * r[i];
            next[i] = if r[i] > 0.0 { r[i] * ps[i] / s[i] } else { 0.0 };
        }
        partition = next.iter().sum();
        let mut moved = 0.0_f64;
        for i in 0..n {
            let updated = next[i] / partition;
            moved = moved.max((updated - r[i]).abs());
            r[i] = updated;
        }
        if moved < STALL_TOLERANCE {
            break;
        }
    }

    for i in 0..n {
        s[i] = keep * qs[i] + weight * r[i];
    }
    Ok(TradeoffPoint {
        rho,
        risk: kl_nats(&s, ps) / LN_2,
        r_opt: Profile::from_parts_unchecked(categories, r),
        s_opt: Profile::from_parts_unchecked(categories, s),
        // At a fixed point sum_i r_i p_i / s_i = 1 / lambda.
        lambda: 1.0 / partition,
        solver_iters: iters,
    })
}

fn normalize(v: &mut [f64]) {
    let total: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= total);
}
