use lintseq_core::metrics::{flops_per_token, pass_at_k, total_flops, FlopsModel, MetricsError};
use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Fraction of k-subsets of n samples (the first c correct) containing a correct one.
fn brute_force_pass_at_k(n: u32, c: u32, k: u32) -> f64 {
    let correct = (1u32 << c) - 1;
    let (mut hit, mut all) = (0u64, 0u64);
    for mask in 0u32..(1 << n) {
        if mask.count_ones() == k {
            all += 1;
            if mask & correct != 0 {
                hit += 1;
            }
        }
    }
    hit as f64 / all as f64
}

fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    (0..k).fold(BigUint::one(), |acc, i| acc * (n - i) / (i + 1))
}

#[test]
fn pass_at_k_matches_subset_enumeration() {
    for n in 1..=12u32 {
        for c in 0..=n {
            for k in 1..=n {
                let expected = brute_force_pass_at_k(n, c, k);
                let got = pass_at_k(n.into(), c.into(), k.into()).unwrap();
                assert!((got - expected).abs() <= 1e-12, "n={n} c={c} k={k}: {got} vs {expected}");
            }
        }
    }
    assert!((pass_at_k(10, 3, 5).unwrap() - 231.0 / 252.0).abs() <= 1e-12);
}

#[test]
fn pass_at_k_at_n_128_matches_exact_rational() {
    for c in 0..=128u64 {
        for k in 1..=128u64 {
            let got = pass_at_k(128, c, k).unwrap();
            assert!(got.is_finite());
            let exact = BigRational::one()
                - BigRational::new(binomial(128 - c, k).into(), binomial(128, k).into());
            let exact = exact.to_f64().unwrap();
            assert!((got - exact).abs() <= 1e-12, "c={c} k={k}: {got} vs {exact}");
        }
    }
}

fn big_flops(m: &FlopsModel) -> (BigUint, BigUint) {
    let b = |v: u64| BigUint::from(v);
    let per_token = b(2) * (b(m.n_params) + b(2) * b(m.n_layers) * b(m.context));
    let total = &per_token * b(m.avg_tokens_per_sample) * b(m.samples_per_problem) * b(m.problems);
    (per_token, total)
}

#[test]
fn flops_match_big_integer_evaluation() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..20 {
        let m = FlopsModel {
            n_params: rng.gen_range(1..=u64::MAX >> 8),
            n_layers: rng.gen_range(1..=256),
            context: rng.gen_range(1..=1 << 20),
            avg_tokens_per_sample: rng.gen_range(1..=4096),
            samples_per_problem: rng.gen_range(1..=1024),
            problems: rng.gen_range(1..=2000),
        };
        let (per_token, total) = big_flops(&m);
        assert_eq!(BigUint::from(flops_per_token(&m).unwrap()), per_token);
        assert_eq!(BigUint::from(total_flops(&m).unwrap()), total);
    }
}

#[test]
fn flops_overflow_is_reported() {
    let m = FlopsModel {
        n_params: u64::MAX,
        n_layers: u64::MAX,
        context: u64::MAX,
        avg_tokens_per_sample: u64::MAX,
        samples_per_problem: u64::MAX,
        problems: u64::MAX,
    };
    assert_eq!(total_flops(&m), Err(MetricsError::Overflow));
    assert_eq!(flops_per_token(&m), Err(MetricsError::Overflow));
    let per_token_fits = FlopsModel { n_layers: 1 << 20, context: 1 << 20, ..m };
    assert!(flops_per_token(&per_token_fits).is_ok());
}

proptest! {
    #[test]
    fn pass_at_k_is_monotone(n in 1u64..200, c_frac in 0.0f64..=1.0, k_frac in 0.0f64..=1.0) {
        let c = ((n as f64) * c_frac) as u64;
        let k = (((n - 1) as f64) * k_frac) as u64 + 1;
        let p = pass_at_k(n, c, k).unwrap();
        prop_assert!((0.0..=1.0).contains(&p));
        if k < n {
            prop_assert!(pass_at_k(n, c, k + 1).unwrap() >= p - 1e-12);
        }
        if c < n {
            prop_assert!(pass_at_k(n, c + 1, k).unwrap() >= p - 1e-12);
        }
    }
}
