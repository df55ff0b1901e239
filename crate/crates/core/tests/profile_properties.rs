mod common;

use common::{labels, naive_kl_bits};
use privforge_core::{
    divergence_from_uniform, entropy, estimate_profile, kl_divergence, mix, privacy_risk,
    CategoryCounts, Profile, Redundancy,
};
use proptest::prelude::*;

fn pmf_strategy(max_n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..1.0, 1..=max_n)
        .prop_filter("positive mass", |w| w.iter().sum::<f64>() > 1e-6)
        .prop_map(|w| {
            let total: f64 = w.iter().sum();
            w.iter().map(|x| x / total).collect()
        })
}

fn pair_strategy() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (1usize..30).prop_flat_map(|n| {
        let v = prop::collection::vec(0.001f64..1.0, n);
        (v.clone(), v)
    })
    .prop_map(|(a, b)| {
        let (sa, sb): (f64, f64) = (a.iter().sum(), b.iter().sum());
        (a.iter().map(|x| x / sa).collect(), b.iter().map(|x| x / sb).collect())
    })
}

fn profile(pmf: Vec<f64>) -> Profile {
    Profile::new(labels(pmf.len()), pmf).unwrap()
}

proptest! {
    #[test]
    fn entropy_is_bounded(pmf in pmf_strategy(40)) {
        let n = pmf.len() as f64;
        let h = entropy(&profile(pmf));
        prop_assert!(h >= 0.0);
        prop_assert!(h <= n.log2() + 1e-12);
    }

    #[test]
    fn uniform_identity(pmf in pmf_strategy(50)) {
        let p = profile(pmf);
        let u = Profile::uniform(p.categories().to_vec()).unwrap();
        let d = kl_divergence(&p, &u).unwrap();
        prop_assert!((d - divergence_from_uniform(&p)).abs() < 1e-12);
    }

    #[test]
    fn gibbs_inequality((a, b) in pair_strategy()) {
        let (p, r) = (profile(a), profile(b));
        let d = kl_divergence(&p, &r).unwrap();
        prop_assert!(d >= 0.0);
        prop_assert!((d - naive_kl_bits(p.pmf(), r.pmf())).abs() < 1e-12);
        prop_assert_eq!(kl_divergence(&p, &p).unwrap(), 0.0);
    }

    #[test]
    fn mix_is_affine((a, b) in pair_strategy(), rho in 0.0f64..1.0) {
        let (q, r) = (profile(a), profile(b));
        let s = mix(&q, &r, Redundancy::new(rho).unwrap()).unwrap();
        for ((si, qi), ri) in s.pmf().iter().zip(q.pmf()).zip(r.pmf()) {
            prop_assert!((si - ((1.0 - rho) * qi + rho * ri)).abs() <= 2.0 * f64::EPSILON);
        }
        prop_assert!((s.pmf().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let risk = privacy_risk(&q, &r, Redundancy::new(rho).unwrap(), &r).unwrap();
        prop_assert!((risk - kl_divergence(&s, &r).unwrap()).abs() == 0.0);
    }

    #[test]
    fn estimate_recovers_counts(counts in prop::collection::vec(0u64..10_000, 1..20)) {
        prop_assume!(counts.iter().sum::<u64>() > 0);
        let c = CategoryCounts::new(labels(counts.len()), counts.clone()).unwrap();
        let k = c.total() as f64;
        let p = estimate_profile(&c).unwrap();
        for (pi, ci) in p.pmf().iter().zip(&counts) {
            prop_assert_eq!((pi * k).round() as u64, *ci);
        }
    }

    #[test]
    fn json_round_trip(pmf in pmf_strategy(20)) {
        let p = profile(pmf);
        let back: Profile = serde_json::from_str(&serde_json::to_string(&p).unwrap()).unwrap();
        prop_assert!(back.max_abs_diff(&p).unwrap() <= 1e-15);
    }
}

#[test]
fn category_order_is_canonical() {
    let a = Profile::new(vec!["sports".into(), "news".into(), "health".into()], vec![0.2, 0.3, 0.5]).unwrap();
    let b = Profile::new(vec!["health".into(), "sports".into(), "news".into()], vec![0.5, 0.2, 0.3]).unwrap();
    assert_eq!(a, b);
    assert_eq!(kl_divergence(&a, &b).unwrap(), 0.0);
}
