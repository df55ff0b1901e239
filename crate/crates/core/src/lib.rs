//! Privacy of query profiles under query forgery.
//!
//! User and population query profiles are probability mass functions over
//! categories ([`Profile`]). Privacy risk is the KL divergence of the profile
//! an observer sees from the population profile. A user who submits a
//! fraction `rho` of forged queries drawn from `r` presents the apparent
//! profile `(1 - rho) q + rho r`; [`solve`] finds the forged profile that
//! minimizes the risk for a given redundancy, and [`tradeoff_curve`] traces
//! the resulting privacy-redundancy function.
//!
//! Supporting modules:
//!
//! - [`types_lab`]: exact method-of-types computations (type-class sizes, type
//!   probabilities) that ground entropy and divergence as likelihood exponents.
//! - [`stream`]: seeded simulation of mixed genuine/forged query streams and
//!   of the profile an attacker estimates from them.
//!
//! All information quantities are in bits.

pub mod error;
pub mod export;
pub mod optimizer;
pub mod oracle;
pub mod profile;
pub mod rng;
pub mod stream;
pub mod types_lab;

pub use error::{Error, Result};
pub use optimizer::{
    certify, critical_redundancy, linear_grid, solve, tradeoff_curve, verify_kkt, SolveReport,
    TradeoffPoint, CERTIFY_TOLERANCE,
};
pub use oracle::oracle_solve;
pub use profile::{
    divergence_from_uniform, entropy, estimate_profile, kl_divergence, mix, privacy_risk,
    CategoryCounts, Profile, Redundancy,
};
pub use stream::{
    attacker_view, convergence_report, generate_stream, ConvergenceReport, ForgeryMode,
    QueryEvent, SimulationConfig,
};
pub use types_lab::{
    class_size_check, divergence_exponent_gap, enumerate_types, log2_multinomial, mean_type,
    type_probability, type_report, TypeReport, TypeVector,
};
