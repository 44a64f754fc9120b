mod common;

use common::rel_close;
use edgesketch::scoring::{gaussian_likelihood, posterior_anomaly, raw_score, ScoringParams};
use proptest::prelude::*;

fn density(a: f64, mu: f64, var: f64) -> f64 {
    (-(a - mu) * (a - mu) / (2.0 * var)).exp() / (2.0 * std::f64::consts::PI * var).sqrt()
}

/// Textbook Bayes rule with linear-space densities.
fn direct_posterior(a: f64, s: f64, t: u64, p: &ScoringParams) -> f64 {
    let tf = t as f64;
    let mu = s / tf;
    let var = (s / (tf * tf)).max(p.variance_floor);
    let ln = density(a, mu, var);
    let la = density(a, mu + p.delta_shift, p.anomaly_variance_factor * var);
    p.prior * la / (p.prior * la + (1.0 - p.prior) * ln)
}

#[test]
fn raw_score_examples() {
    assert_eq!(raw_score(10.0, 20.0, 4).unwrap(), 25.0 * 4.0 / 60.0);
    assert_eq!(raw_score(5.0, 20.0, 4).unwrap(), 0.0);
    assert_eq!(raw_score(3.0, 10.0, 1).unwrap(), 0.0);
    assert_eq!(raw_score(3.0, 0.0, 6).unwrap(), 0.0);
}

#[test]
fn density_matches_textbook_formula() {
    for (a, mu, var) in [(0.0, 0.0, 1.0), (10.0, 20.0, 4.0), (1.5, -2.0, 0.3), (7.0, 7.0, 1e-6)] {
        let got = gaussian_likelihood(a, mu, var).unwrap();
        assert!(rel_close(got, density(a, mu, var), 1e-12), "{a} {mu} {var}");
    }
    assert!(gaussian_likelihood(1.0, 0.0, 0.0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn posterior_is_a_probability(
        a in 0.0f64..1e6,
        s in 0.0f64..1e7,
        t in 1u64..10_000,
        prior in 1e-6f64..0.999_999,
        delta in 0.01f64..1000.0,
    ) {
        let p = ScoringParams { prior, delta_shift: delta, ..Default::default() };
        let post = posterior_anomaly(a, s, t, &p);
        prop_assert!((0.0..=1.0).contains(&post), "{}", post);
    }

    #[test]
    fn posterior_matches_direct_bayes_where_representable(
        s in 1.0f64..500.0,
        t in 2u64..50,
        offset in -2.0f64..2.0,
        prior in 0.01f64..0.5,
    ) {
        let p = ScoringParams { prior, delta_shift: 3.0, ..Default::default() };
        let mu = s / t as f64;
        let sd = (s / (t * t) as f64).sqrt();
        let a = (mu + offset * sd).max(0.0);
        let want = direct_posterior(a, s, t, &p);
        prop_assume!(want.is_finite());
        let got = posterior_anomaly(a, s, t, &p);
        prop_assert!((got - want).abs() <= 1e-9, "{} vs {}", got, want);
    }

    #[test]
    fn posterior_rises_between_the_two_means(
        s in 1.0f64..1e4,
        t in 2u64..200,
        steps in prop::collection::vec(0.0f64..1.0, 2..20),
    ) {
        let p = ScoringParams::default();
        let mu = s / t as f64;
        let mut xs: Vec<f64> = steps.iter().map(|f| mu + f * p.delta_shift).collect();
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let posts: Vec<f64> = xs.iter().map(|&a| posterior_anomaly(a, s, t, &p)).collect();
        for w in posts.windows(2) {
            prop_assert!(w[1] >= w[0], "{:?}", posts);
        }
    }

    #[test]
    fn raw_score_scales_quadratically(
        s in 1.0f64..1e5,
        t in 2u64..1000,
        dev in 0.0f64..50.0,
        c in 0.0f64..4.0,
    ) {
        let mu = s / t as f64;
        let base = raw_score(mu + dev, s, t).unwrap();
        let scaled = raw_score(mu + c * dev, s, t).unwrap();
        prop_assert!((scaled - c * c * base).abs() <= 1e-9 * scaled.abs().max(1.0));
    }

    #[test]
    fn raw_score_zero_only_at_the_mean(
        s in 1u32..100_000,
        t in 2u64..1000,
        a in 0u32..100_000,
    ) {
        let (s, a) = (s as f64, a as f64);
        let r = raw_score(a, s, t).unwrap();
        prop_assert!(r >= 0.0);
        prop_assert_eq!(r == 0.0, a == s / t as f64);
    }
}
