//! In-house Gamma function.
//!
//! Lanczos approximation with g = 7 and 9 coefficients, better than 1e-12
//! relative accuracy on the range used by the closed-form constants
//! (arguments in (0, 30)). Kept in-house so every constant in the crate is
//! reproducible from this one table.

use std::f64::consts::PI;

const G: f64 = 7.0;

const COEFFS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Gamma(x) for real x that is not a non-positive integer.
pub fn gamma(x: f64) -> f64 {
    if x < 0.5 {
        // Reflection formula; poles at 0, -1, -2, ... come out as +-inf.
        PI / ((PI * x).sin() * gamma(1.0 - x))
    } else {
        let z = x - 1.0;
        let mut acc = COEFFS[0];
        for (i, &c) in COEFFS.iter().enumerate().skip(1) {
            acc += c / (z + i as f64);
        }
        let t = z + G + 0.5;
        (2.0 * PI).sqrt() * t.powf(z + 0.5) * (-t).exp() * acc
    }
}

/// ln Gamma(x) for x > 0.
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        (PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x)
    } else {
        let z = x - 1.0;
        let mut acc = COEFFS[0];
        for (i, &c) in COEFFS.iter().enumerate().skip(1) {
            acc += c / (z + i as f64);
        }
        let t = z + G + 0.5;
        0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + acc.ln()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // Reference values from a 30-digit evaluation frozen before the build.
    const GAMMA_075: f64 = 1.225_416_702_465_177_6;
    const GAMMA_025: f64 = 3.625_609_908_221_908_3;
    const GAMMA_175: f64 = 0.919_062_526_848_883_2;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn matches_reference_table() {
        assert!(rel(gamma(0.75), GAMMA_075) < 1e-12);
        assert!(rel(gamma(0.25), GAMMA_025) < 1e-12);
        assert!(rel(gamma(1.75), GAMMA_175) < 1e-12);
        assert!(rel(gamma(0.5), PI.sqrt()) < 1e-12);
        assert!(rel(gamma(1.0), 1.0) < 1e-13);
        assert!(rel(gamma(5.0), 24.0) < 1e-13);
        assert!(rel(gamma(10.0), 362_880.0) < 1e-13);
    }

    #[test]
    fn recurrence_holds() {
        for &x in &[0.1, 0.3, 0.6, 1.2, 2.7, 6.5] {
            assert!(rel(gamma(x + 1.0), x * gamma(x)) < 1e-12);
        }
    }

    #[test]
    fn ln_gamma_consistent() {
        for &x in &[0.25, 0.75, 1.5, 4.0, 12.0] {
            assert!(rel(ln_gamma(x).exp(), gamma(x)) < 1e-12);
        }
    }
}
