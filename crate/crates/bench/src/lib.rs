//! Benchmark fixtures for the privforge solvers. The benches live in `benches/`.

use privforge_core::rng::SeededRng;
use privforge_core::Profile;

/// Random profile over `n` indexed categories, full support.
pub fn random_profile(n: usize, seed: u64) -> Profile {
    let mut rng = SeededRng::new(seed);
    let weights: Vec<f64> = (0..n).map(|_| -(1.0 - rng.uniform()).ln()).collect();
    let total: f64 = weights.iter().sum();
    let labels = (0..n).map(|i| format!("c{i}")).collect();
    Profile::new(labels, weights.iter().map(|w| w / total).collect()).expect("valid profile")
}
