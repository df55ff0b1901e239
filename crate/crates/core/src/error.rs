use thiserror::Error;

/// Errors produced by the profile, optimizer, types and simulation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid profile: {0}")]
    InvalidProfile(String),

    #[error("category lists differ between the operands")]
    CategoryMismatch,

    #[error("redundancy must lie in [0, 1), got {0}")]
    InvalidRedundancy(f64),

    #[error("empty query log: total count is zero")]
    EmptyLog,

    /// The user puts mass on a category the population never queries, so the
    /// risk is infinite for every forged profile.
    #[error("category `{0}` has positive user mass but zero population mass")]
    UnsupportedCategory(String),

    #[error("invalid redundancy grid: {0}")]
    InvalidGrid(String),

    #[error("invalid type vector: {0}")]
    InvalidTypeVector(String),

    #[error("outside the exhaustive enumeration regime (n = {n}, k = {k})")]
    RegimeExceeded { n: usize, k: u64 },

    #[error("type has zero probability under the reference distribution")]
    ZeroProbability,

    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
