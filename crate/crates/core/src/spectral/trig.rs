//! Evaluation of `sin(n·x)` for mode indices far beyond the range where the
//! floating product `n as f64 * x` carries any phase information.
//!
//! The product is formed exactly as a double-double and reduced modulo `π/2`
//! with a three-part split of `π/2`, so the result is `sin(n·x)` for the
//! exact binary value of `x` with an absolute error of a few ulps. Mode
//! indices must stay below `2^53` so that `n as f64` is exact.

use std::f64::consts::{FRAC_2_PI, FRAC_PI_2};

// π/2 = PIO2_1 + PIO2_2 + PIO2_3 to ~160 bits.
const PIO2_1: f64 = FRAC_PI_2;
const PIO2_2: f64 = 6.123_233_995_736_766e-17;
const PIO2_3: f64 = -1.497_384_904_859_169_8e-33;

/// Largest mode index whose conversion to `f64` is exact.
pub const MAX_EXACT_MODE: u64 = 1 << 53;

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

/// `sin(n·x)` with extended-precision argument reduction.
pub fn sin_mode(n: u64, x: f64) -> f64 {
    debug_assert!(n <= MAX_EXACT_MODE, "mode index {n} is not exactly representable");
    if n == 0 || x == 0.0 {
        return 0.0;
    }
    let nf = n as f64;
    let (hi, lo) = two_prod(nf, x);
    if hi.abs() < 1.0 {
        return (hi + lo).sin();
    }
    let k = (hi * FRAC_2_PI).round();
    let (a1, e1) = two_prod(k, PIO2_1);
    let (a2, e2) = two_prod(k, PIO2_2);
    // hi and a1 agree to within a quadrant, so the difference is exact.
    let head = hi - a1;
    let r = ((head - a2) + (lo - e1)) - (e2 + k * PIO2_3);
    match (k as i64).rem_euclid(4) {
        0 => r.sin(),
        1 => r.cos(),
        2 => -r.sin(),
        _ => -r.cos(),
    }
}

/// `sin(π·num/den)` evaluated from the exact rational phase.
///
/// Returns an exact zero whenever `num/den` is an integer.
pub fn sin_pi_rational(num: u128, den: u128) -> f64 {
    debug_assert!(den > 0);
    let period = 2 * den;
    let r = num % period;
    if r == 0 || r == den {
        return 0.0;
    }
    // Fold onto [0, den/2] so the argument handed to sin is at most π/2.
    let (r, sign) = if r > den { (r - den, -1.0) } else { (r, 1.0) };
    let r = if 2 * r > den { den - r } else { r };
    if 2 * r == den {
        return sign;
    }
    sign * (std::f64::consts::PI * (r as f64 / den as f64)).sin()
}

#[cfg(test)]
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn matches_high_precision_references() {
        // References from 60-digit arithmetic on the exact binary inputs.
        let cases = [
            (10_000_000_000u64, PI / 2.0, -6.123_233_995_736_383_2e-7),
            (10_000_000_000, 0.3, 0.987_004_904_314_549_97),
            (12_345_678_901, 2.5, 0.953_605_853_556_249_27),
            (1_000_000, 1.0, -0.349_993_502_171_292_95),
            (3, 1.0, 0.141_120_008_059_867_22),
        ];
        for (n, x, want) in cases {
            let got = sin_mode(n, x);
            assert!((got - want).abs() < 1e-14, "sin({n}·{x}) = {got}, want {want}");
        }
    }

    #[test]
    fn small_products_agree_with_libm() {
        for n in 1..50u64 {
            for j in 0..=20 {
                let x = j as f64 * PI / 20.0;
                let direct = (n as f64 * x).sin();
                assert!((sin_mode(n, x) - direct).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rational_phase_is_exact_at_integer_multiples() {
        assert_eq!(sin_pi_rational(0, 7), 0.0);
        assert_eq!(sin_pi_rational(10_000_000_000 * 37, 100), 0.0);
        assert_eq!(sin_pi_rational(1, 2), 1.0);
        assert_eq!(sin_pi_rational(3, 2), -1.0);
        assert!((sin_pi_rational(1, 6) - 0.5).abs() < 1e-15);
        assert!((sin_pi_rational(7, 6) + 0.5).abs() < 1e-15);
        assert!((sin_pi_rational(5, 3) - (5.0 * PI / 3.0).sin()).abs() < 1e-15);
    }
}
