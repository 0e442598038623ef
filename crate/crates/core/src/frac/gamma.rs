//! Lanczos approximation of the gamma function.

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
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Γ(x) for real `x`, using the reflection formula below ½.
///
/// Relative error is below 1e-13 on (0, 20]. Poles return `NaN`.
pub fn gamma(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x <= 0.0 && x == x.floor() {
        return f64::NAN;
    }
    if x < 0.5 {
        return PI / ((PI * x).sin() * gamma(1.0 - x));
    }
    // Exact factorials keep integer-order baselines free of roundoff.
    if x == x.floor() && x <= 21.0 {
        return (1..x as u64).fold(1.0, |acc, k| acc * k as f64);
    }
    let z = x - 1.0;
    let mut sum = COEFFS[0];
    for (i, c) in COEFFS.iter().enumerate().skip(1) {
        sum += c / (z + i as f64);
    }
    let t = z + G + 0.5;
    (2.0 * PI).sqrt() * t.powf(z + 0.5) * (-t).exp() * sum
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factorials_are_exact() {
        assert_eq!(gamma(1.0), 1.0);
        assert_eq!(gamma(5.0), 24.0);
        assert_eq!(gamma(11.0), 3_628_800.0);
    }

    #[test]
    fn half_integer_values() {
        let sqrt_pi = PI.sqrt();
        assert!((gamma(0.5) / sqrt_pi - 1.0).abs() < 1e-14);
        assert!((gamma(1.5) / (0.5 * sqrt_pi) - 1.0).abs() < 1e-14);
        assert!((gamma(2.5) / (0.75 * sqrt_pi) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn recurrence_holds() {
        for i in 1..200 {
            let x = 0.05 + 0.097 * i as f64;
            let lhs = gamma(x + 1.0);
            let rhs = x * gamma(x);
            assert!((lhs / rhs - 1.0).abs() < 1e-13, "x = {x}");
        }
    }

    #[test]
    fn poles_are_nan() {
        assert!(gamma(0.0).is_nan());
        assert!(gamma(-3.0).is_nan());
    }
}
