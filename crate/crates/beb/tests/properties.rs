//! Property-based checks of algebraic identities the estimators rely on.

use beb::bagging::{jensen_gap, quantile};
use beb::data::{CountArea, GaussianArea};
use beb::stream::child_seed;
use beb::{fh, pg};
use proptest::prelude::*;

proptest! {
    /// The count-model posterior mean is the exposure-weighted convex
    /// combination of the direct rate and the prior mean.
    #[test]
    fn pg_bayes_is_a_convex_combination(
        z in 0u64..5000,
        n in 1.0f64..1000.0,
        b0 in -3.0f64..3.0,
        nu in 0.01f64..1e4,
    ) {
        let area = CountArea::new("a", z, n, vec![1.0]).unwrap();
        let params = pg::PgParams::new(vec![b0], nu).unwrap();
        let estimate = pg::bayes(&area, &params);
        let w = n / (n + nu);
        let combo = w * (z as f64 / n) + (1.0 - w) * b0.exp();
        let scale = combo.abs().max(1.0);
        prop_assert!((estimate - combo).abs() <= 1e-12 * scale);
        let lo = (z as f64 / n).min(b0.exp()) - 1e-12 * scale;
        let hi = (z as f64 / n).max(b0.exp()) + 1e-12 * scale;
        prop_assert!(estimate >= lo && estimate <= hi);
    }

    /// More prior precision (larger nu) pulls the estimate closer to the
    /// prior mean.
    #[test]
    fn pg_shrinkage_is_monotone_in_nu(
        z in 0u64..500,
        n in 1.0f64..200.0,
        b0 in -2.0f64..2.0,
        nu_lo in 0.1f64..50.0,
        extra in 0.1f64..50.0,
    ) {
        let area = CountArea::new("a", z, n, vec![1.0]).unwrap();
        let lo = pg::bayes(&area, &pg::PgParams::new(vec![b0], nu_lo).unwrap());
        let hi = pg::bayes(&area, &pg::PgParams::new(vec![b0], nu_lo + extra).unwrap());
        let prior = b0.exp();
        prop_assert!((hi - prior).abs() <= (lo - prior).abs() + 1e-12);
    }

    /// The normal-model posterior mean interpolates between the regression
    /// mean and the observation with weight A/(A+D) on the observation.
    #[test]
    fn fh_bayes_interpolates(
        y in -100.0f64..100.0,
        b0 in -50.0f64..50.0,
        a in 0.0f64..50.0,
        d in 0.01f64..50.0,
    ) {
        let area = GaussianArea::new("a", y, d, vec![1.0]).unwrap();
        let params = fh::FhParams::new(vec![b0], a).unwrap();
        let estimate = fh::bayes(&area, &params);
        let expected = b0 + a / (a + d) * (y - b0);
        prop_assert!((estimate - expected).abs() <= 1e-10 * expected.abs().max(1.0));
        let lo = y.min(b0) - 1e-10;
        let hi = y.max(b0) + 1e-10;
        prop_assert!(estimate >= lo && estimate <= hi);
    }

    /// jensen_gap is the mean squared deviation from the mean: always
    /// nonnegative, zero only for constant lists, and it satisfies
    /// mean(v^2) = mean(v)^2 + gap.
    #[test]
    fn jensen_gap_identity(values in prop::collection::vec(-50.0f64..50.0, 1..40)) {
        let gap = jensen_gap(&values);
        prop_assert!(gap >= 0.0);
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let mean_sq = values.iter().map(|v| v * v).sum::<f64>() / n;
        let scale = mean_sq.abs().max(1.0);
        prop_assert!((mean_sq - (mean * mean + gap)).abs() <= 1e-10 * scale);
    }

    /// Quantiles are monotone in the level and bounded by the extremes.
    #[test]
    fn quantiles_are_monotone(
        values in prop::collection::vec(-1000.0f64..1000.0, 1..60),
        p1 in 0.0f64..1.0,
        p2 in 0.0f64..1.0,
    ) {
        let (lo, hi) = if p1 <= p2 { (p1, p2) } else { (p2, p1) };
        let q_lo = quantile(&values, lo);
        let q_hi = quantile(&values, hi);
        prop_assert!(q_lo <= q_hi);
        let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(q_lo >= min && q_hi <= max);
    }

    /// Child seeds are a pure function of (seed, path) and distinguish
    /// sibling branches.
    #[test]
    fn child_seeds_are_stable_and_distinct(seed in any::<u64>(), a in 0u64..1000, b in 0u64..1000) {
        prop_assert_eq!(child_seed(seed, &[a, b]), child_seed(seed, &[a, b]));
        if a != b {
            prop_assert_ne!(child_seed(seed, &[a]), child_seed(seed, &[b]));
        }
    }
}
