//! Log-gamma and friends.
//!
//! Probability masses are assembled from `ln_gamma` throughout the crate;
//! raw `Γ` overflows for the argument sizes that show up once `ν·m` gets
//! large, and ratios of large gamma values lose precision, so the ratio
//! needed by the negative-binomial mass has its own entry point.

use std::f64::consts::PI;

// Lanczos approximation, g = 7, 9 terms.
const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

const HALF_LN_TWO_PI: f64 = 0.918_938_533_204_672_7;

/// Natural log of the gamma function for positive arguments.
pub fn ln_gamma(x: f64) -> f64 {
    assert!(x > 0.0 && x.is_finite(), "ln_gamma domain: x = {x}");
    if x < 0.5 {
        // reflection: Γ(x)Γ(1−x) = π / sin(πx)
        return (PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let z = x - 1.0;
    let mut series = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        series += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    HALF_LN_TWO_PI + (z + 0.5) * t.ln() - t + series.ln()
}

/// ln Γ(a + k) − ln Γ(a) for a nonnegative integer shift `k`.
///
/// Computed as Σ ln(a + j) while the shift is modest, which avoids the
/// cancellation of two large log-gamma values when `a` is huge.
pub fn ln_gamma_ratio(a: f64, k: u64) -> f64 {
    assert!(a > 0.0 && a.is_finite(), "ln_gamma_ratio domain: a = {a}");
    if k == 0 {
        return 0.0;
    }
    if k <= 512 {
        let mut s = 0.0;
        for j in 0..k {
            s += (a + j as f64).ln();
        }
        s
    } else {
        ln_gamma(a + k as f64) - ln_gamma(a)
    }
}

/// ln k! — exact zero for k ∈ {0, 1}, sum of logs for small k.
pub fn ln_factorial(k: u64) -> f64 {
    if k < 2 {
        0.0
    } else if k <= 512 {
        (2..=k).map(|j| (j as f64).ln()).sum()
    } else {
        ln_gamma(k as f64 + 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(got: f64, want: f64, tol: f64) {
        assert!(
            (got - want).abs() <= tol * want.abs().max(1.0),
            "got {got}, want {want}"
        );
    }

    #[test]
    fn known_values() {
        assert!(ln_gamma(1.0).abs() < 1e-13);
        assert!(ln_gamma(2.0).abs() < 1e-13);
        assert_close(ln_gamma(0.5), 0.5 * PI.ln(), 1e-14);
        assert_close(ln_gamma(3.0), 2f64.ln(), 1e-14);
        assert_close(ln_gamma(10.0), 362_880f64.ln(), 1e-14);
        // ln Γ(0.1), reference value
        assert_close(ln_gamma(0.1), 2.252_712_651_734_206, 1e-13);
        // ln Γ(101) = ln 100! against a direct log sum
        let ln_100_fact: f64 = (2..=100u64).map(|k| (k as f64).ln()).sum();
        assert_close(ln_gamma(101.0), ln_100_fact, 1e-13);
        // Stirling with the 1/(12x) correction is exact to ~1e-27 here
        let x = 1e8f64;
        let stirling = (x - 0.5) * x.ln() - x + HALF_LN_TWO_PI + 1.0 / (12.0 * x);
        assert_close(ln_gamma(x), stirling, 1e-12);
    }

    #[test]
    fn recurrence() {
        for &x in &[0.07, 0.3, 0.9, 1.5, 4.2, 33.0, 901.5, 1e6] {
            assert_close(ln_gamma(x + 1.0), ln_gamma(x) + x.ln(), 1e-12);
        }
    }

    #[test]
    fn ratio_matches_direct_difference() {
        for &(a, k) in &[(0.3, 5u64), (2.5, 40), (100.0, 512), (7.0, 600)] {
            let direct = ln_gamma(a + k as f64) - ln_gamma(a);
            assert_close(ln_gamma_ratio(a, k), direct, 1e-11);
        }
        assert_eq!(ln_gamma_ratio(3.7, 0), 0.0);
    }

    #[test]
    fn ratio_stays_accurate_for_huge_a() {
        // ln Γ(a+2) − ln Γ(a) = ln a + ln(a+1); the direct difference loses
        // most of its digits at this scale.
        let a: f64 = 1e12;
        let want = a.ln() + (a + 1.0).ln();
        assert_close(ln_gamma_ratio(a, 2), want, 1e-14);
    }

    #[test]
    fn factorials() {
        assert_eq!(ln_factorial(0), 0.0);
        assert_eq!(ln_factorial(1), 0.0);
        assert_close(ln_factorial(5), 120f64.ln(), 1e-14);
        assert_close(ln_factorial(600), ln_gamma(601.0), 1e-12);
    }
}
