#![allow(dead_code)]

use privforge_core::rng::SeededRng;
use privforge_core::Profile;

pub fn labels(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("c{i:02}")).collect()
}

pub fn profile(pmf: &[f64]) -> Profile {
    Profile::new(labels(pmf.len()), pmf.to_vec()).unwrap()
}

/// Random PMF with exponential weights; with `zero_prob` each entry is
/// zeroed independently (at least one entry is kept positive).
pub fn random_pmf(rng: &mut SeededRng, n: usize, zero_prob: f64) -> Vec<f64> {
    let mut w: Vec<f64> = (0..n)
        .map(|_| {
            let keep = rng.uniform() >= zero_prob;
            let x = -(1.0 - rng.uniform()).ln();
            if keep {
                x
            } else {
                0.0
            }
        })
        .collect();
    if w.iter().all(|&x| x == 0.0) {
        w[0] = 1.0;
    }
    let total: f64 = w.iter().sum();
    w.iter().map(|x| x / total).collect()
}

pub fn random_profile(rng: &mut SeededRng, n: usize, zero_prob: f64) -> Profile {
    profile(&random_pmf(rng, n, zero_prob))
}

/// Textbook `sum p log2(p / q)`, written independently of the library.
pub fn naive_kl_bits(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .filter(|(&a, _)| a > 0.0)
        .map(|(&a, &b)| if b == 0.0 { f64::INFINITY } else { a * (a / b).log2() })
        .sum()
}
