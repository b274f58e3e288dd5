//! Composite Simpson quadrature refined by interval doubling, and the
//! exponential-kernel integrals that appear in every solution formula.

use crate::error::{Error, Result};
use crate::spectral::eigenvalue;

/// Refinement settings for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    initial_subdivisions: usize,
    max_subdivisions: usize,
    relative_tolerance: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            initial_subdivisions: 16,
            max_subdivisions: 1 << 20,
            relative_tolerance: 1e-10,
        }
    }
}

impl QuadratureConfig {
    pub fn new(initial_subdivisions: usize, max_subdivisions: usize, relative_tolerance: f64) -> Result<Self> {
        if initial_subdivisions < 1 || max_subdivisions < 1 {
            return Err(Error::InvalidParameter(
                "quadrature subdivision limits must be at least 1".into(),
            ));
        }
        if relative_tolerance.is_nan() || relative_tolerance <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "quadrature tolerance must be positive, got {relative_tolerance}"
            )));
        }
        Ok(Self {
            // Simpson needs an even interval count.
            initial_subdivisions: initial_subdivisions + initial_subdivisions % 2,
            max_subdivisions,
            relative_tolerance,
        })
    }

    pub fn with_tolerance(self, relative_tolerance: f64) -> Result<Self> {
        Self::new(self.initial_subdivisions, self.max_subdivisions, relative_tolerance)
    }

    pub fn initial_subdivisions(&self) -> usize {
        self.initial_subdivisions
    }

    pub fn max_subdivisions(&self) -> usize {
        self.max_subdivisions
    }

    pub fn relative_tolerance(&self) -> f64 {
        self.relative_tolerance
    }
}

/// `∫_a^b g`, doubling the Simpson interval count until two successive
/// estimates differ by at most `tol · ∫|g|`.
///
/// Nodal values are reused across refinements, so each level only evaluates
/// `g` at the new midpoints.
pub fn integrate<G: Fn(f64) -> f64>(g: G, a: f64, b: f64, cfg: &QuadratureConfig) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let mut n = cfg.initial_subdivisions;
    let mut h = (b - a) / n as f64;
    // Running sums of nodal values by Simpson weight class.
    let (ga, gb) = (g(a), g(b));
    let ends = ga + gb;
    let ends_abs = ga.abs() + gb.abs();
    let (mut even, mut even_abs) = (0.0, 0.0); // interior nodes with weight 2
    let (mut odd, mut odd_abs) = (0.0, 0.0); // nodes with weight 4
    for i in 1..n {
        let v = g(a + i as f64 * h);
        if i % 2 == 0 {
            even += v;
            even_abs += v.abs();
        } else {
            odd += v;
            odd_abs += v.abs();
        }
    }
    let mut estimate = h / 3.0 * (ends + 2.0 * even + 4.0 * odd);
    let mut previous = f64::NAN;
    let mut achieved = f64::NAN;

    while 2 * n <= cfg.max_subdivisions {
        // Old odd and even nodes all become weight-2 nodes at the finer level.
        even += odd;
        even_abs += odd_abs;
        n *= 2;
        h *= 0.5;
        odd = 0.0;
        odd_abs = 0.0;
        for i in (1..n).step_by(2) {
            let v = g(a + i as f64 * h);
            odd += v;
            odd_abs += v.abs();
        }
        let refined = h / 3.0 * (ends + 2.0 * even + 4.0 * odd);
        let magnitude = (h / 3.0 * (ends_abs + 2.0 * even_abs + 4.0 * odd_abs)).abs();
        let change = (refined - estimate).abs();
        if change <= cfg.relative_tolerance * magnitude {
            return Ok(refined);
        }
        previous = estimate;
        achieved = change / magnitude;
        estimate = refined;
    }
    Err(Error::QuadratureNonConvergence {
        intervals: n,
        last: estimate,
        previous,
        achieved,
    })
}

/// Beyond this decay exponent the kernel `e^{-u}` is below `1.6e-28` of its
/// peak and the remaining tail is dropped.
const KERNEL_DECAY_CUTOFF: f64 = 64.0;

/// `∫_0^length e^{-n² σ} g(σ) dσ`.
///
/// Integrated in the stretched variable `u = n² σ` so the kernel keeps a unit
/// width for every mode; for very large `n` the whole integral lives within
/// `σ < 64/n²`, where `g` is evaluated at its left endpoint to rounding.
pub fn decaying_kernel_integral<G: Fn(f64) -> f64>(n: u64, length: f64, g: G, cfg: &QuadratureConfig) -> Result<f64> {
    if length <= 0.0 {
        return Ok(0.0);
    }
    let lambda = eigenvalue(n);
    let upper = (lambda * length).min(KERNEL_DECAY_CUTOFF);
    let integral = integrate(|u| (-u).exp() * g(u / lambda), 0.0, upper, cfg)?;
    Ok(integral / lambda)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn integrates_polynomials_exactly() {
        let cfg = QuadratureConfig::default();
        let v = integrate(|x| x * x * x - x, 0.0, 2.0, &cfg).unwrap();
        assert_relative_eq!(v, 2.0, max_relative = 1e-14);
    }

    #[test]
    fn integrates_exponentials_to_tolerance() {
        let cfg = QuadratureConfig::default();
        let v = integrate(|x| (2.0 * x).exp(), 0.0, 1.0, &cfg).unwrap();
        let want = ((2.0f64).exp() - 1.0) / 2.0;
        assert_relative_eq!(v, want, max_relative = 1e-11);
    }

    #[test]
    fn zero_integrand_and_empty_interval() {
        let cfg = QuadratureConfig::default();
        assert_eq!(integrate(|_| 0.0, 0.0, 1.0, &cfg).unwrap(), 0.0);
        assert_eq!(integrate(|x| x, 0.3, 0.3, &cfg).unwrap(), 0.0);
    }

    #[test]
    fn reports_non_convergence_with_estimates() {
        let cfg = QuadratureConfig::new(4, 64, 1e-15).unwrap();
        let err = integrate(|x| (50.0 * x).sin().abs(), 0.0, 3.0, &cfg).unwrap_err();
        match err {
            Error::QuadratureNonConvergence {
                intervals,
                last,
                previous,
                ..
            } => {
                assert_eq!(intervals, 64);
                assert!(last.is_finite() && previous.is_finite());
                assert_ne!(last, previous);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_config() {
        assert!(QuadratureConfig::new(0, 10, 1e-8).is_err());
        assert!(QuadratureConfig::new(4, 10, 0.0).is_err());
        assert!(QuadratureConfig::new(4, 10, f64::NAN).is_err());
    }

    #[test]
    fn kernel_integral_matches_closed_form() {
        let cfg = QuadratureConfig::default();
        // ∫_0^L e^{-n²σ} e^{aσ} dσ = (1 - e^{(a-n²)L}) / (n² - a)
        for n in [1u64, 2, 5, 30] {
            for a in [-2.0, 0.0, 1.5] {
                let lam = (n * n) as f64;
                let want = (1.0 - ((a - lam) * 0.7f64).exp()) / (lam - a);
                let got = decaying_kernel_integral(n, 0.7, |s| (a * s).exp(), &cfg).unwrap();
                assert_relative_eq!(got, want, max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn kernel_integral_for_huge_modes() {
        let cfg = QuadratureConfig::default();
        let got = decaying_kernel_integral(10_000_000_000, 0.5, |s| 3.0 + s, &cfg).unwrap();
        assert_relative_eq!(got, 3.0e-20, max_relative = 1e-12);
    }
}
