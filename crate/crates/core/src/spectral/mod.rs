//! Sine-basis arithmetic on `[0, π]`.
//!
//! Functions vanishing at both endpoints are represented by their sine
//! coefficients `c_n` in `u(x) = Σ c_n sin(n x)`, normalized with the `2/π`
//! prefactor so that the coefficient of `sin(x)` in `sin(x)` is exactly one.
//! Spectra are sparse: the perturbations studied here put energy on single
//! modes with indices around `10^10`, far beyond any dense indexing.

mod trig;

pub use trig::{sin_mode, sin_pi_rational, MAX_EXACT_MODE};

use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{check_range, Error, Result};

/// Coefficients with magnitude below this are not stored by [`sine_coefficients`].
pub const DROP_TOLERANCE: f64 = 1e-14;

/// Above this index `n²` is formed in floating point instead of `u64`.
const EXACT_SQUARE_LIMIT: u64 = 3_000_000_000;

/// Eigenvalue `n²` of `-d²/dx²` with Dirichlet conditions on `[0, π]`.
///
/// Exact for `n ≤ 3·10⁹`. Larger indices are squared in `f64`, which rounds
/// `n²` to 53 bits; every consumer only uses the value in factors like
/// `e^{-p n²}` that underflow long before the rounding matters.
pub fn eigenvalue(n: u64) -> f64 {
    debug_assert!(n >= 1);
    if n <= EXACT_SQUARE_LIMIT {
        (n * n) as f64
    } else {
        let nf = n as f64;
        nf * nf
    }
}

/// Sparse sine spectrum: strictly increasing mode indices (all ≥ 1) with
/// finite coefficients. The empty spectrum is the zero function.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SineSpectrum {
    entries: Vec<(u64, f64)>,
}

impl SineSpectrum {
    pub fn zero() -> Self {
        Self::default()
    }

    /// A single mode `c·sin(n x)`.
    pub fn single(n: u64, c: f64) -> Result<Self> {
        Self::from_entries(vec![(n, c)])
    }

    /// Validates ordering, mode range and finiteness.
    pub fn from_entries(entries: Vec<(u64, f64)>) -> Result<Self> {
        for (i, &(n, c)) in entries.iter().enumerate() {
            if n == 0 {
                return Err(Error::InvalidSpectrum("mode index 0".into()));
            }
            if n > MAX_EXACT_MODE {
                return Err(Error::InvalidSpectrum(format!("mode index {n} exceeds 2^53")));
            }
            if !c.is_finite() {
                return Err(Error::InvalidSpectrum(format!(
                    "non-finite coefficient {c} on mode {n}"
                )));
            }
            if i > 0 && entries[i - 1].0 >= n {
                return Err(Error::InvalidSpectrum(format!(
                    "mode indices not strictly increasing at {n}"
                )));
            }
        }
        Ok(Self { entries })
    }

    /// Collects arbitrary `(n, c)` pairs, summing duplicates and dropping
    /// exact zeros.
    pub fn from_terms<I>(terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (u64, f64)>,
    {
        let mut map = std::collections::BTreeMap::new();
        for (n, c) in terms {
            *map.entry(n).or_insert(0.0) += c;
        }
        Self::from_entries(map.into_iter().filter(|&(_, c)| c != 0.0).collect())
    }

    /// Dense constructor: `coeffs[i]` is the coefficient of mode `i + 1`.
    pub fn dense(coeffs: &[f64]) -> Result<Self> {
        Self::from_entries(
            coeffs
                .iter()
                .enumerate()
                .filter(|(_, &c)| c != 0.0)
                .map(|(i, &c)| (i as u64 + 1, c))
                .collect(),
        )
    }

    pub fn entries(&self) -> &[(u64, f64)] {
        &self.entries
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, f64)> + '_ {
        self.entries.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Coefficient of mode `n`, zero when not stored.
    pub fn coefficient(&self, n: u64) -> f64 {
        self.entries
            .binary_search_by_key(&n, |&(m, _)| m)
            .map(|i| self.entries[i].1)
            .unwrap_or(0.0)
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: f64, other: &SineSpectrum, b: f64) -> SineSpectrum {
        let mut out = Vec::with_capacity(self.len() + other.len());
        let (mut i, mut j) = (0, 0);
        while i < self.len() || j < other.len() {
            let left = self.entries.get(i);
            let right = other.entries.get(j);
            let (n, c) = match (left, right) {
                (Some(&(n, c)), Some(&(m, _))) if n < m => {
                    i += 1;
                    (n, a * c)
                }
                (Some(&(n, _)), Some(&(m, d))) if m < n => {
                    j += 1;
                    (m, b * d)
                }
                (Some(&(n, c)), Some(&(_, d))) => {
                    i += 1;
                    j += 1;
                    (n, a * c + b * d)
                }
                (Some(&(n, c)), None) => {
                    i += 1;
                    (n, a * c)
                }
                (None, Some(&(m, d))) => {
                    j += 1;
                    (m, b * d)
                }
                (None, None) => unreachable!(),
            };
            if c != 0.0 {
                out.push((n, c));
            }
        }
        SineSpectrum { entries: out }
    }

    pub fn sub(&self, other: &SineSpectrum) -> SineSpectrum {
        self.combine(1.0, other, -1.0)
    }

    pub fn add(&self, other: &SineSpectrum) -> SineSpectrum {
        self.combine(1.0, other, 1.0)
    }

    pub fn scale(&self, a: f64) -> SineSpectrum {
        self.combine(a, &SineSpectrum::zero(), 0.0)
    }

    /// Largest per-mode coefficient difference.
    pub fn max_abs_diff(&self, other: &SineSpectrum) -> f64 {
        self.sub(other).iter().map(|(_, c)| c.abs()).fold(0.0, f64::max)
    }

    /// See [`evaluate_series`].
    pub fn evaluate(&self, points: &[f64]) -> Result<Vec<f64>> {
        evaluate_series(self, points)
    }

    /// See [`l2_norm`].
    pub fn l2_norm(&self) -> f64 {
        l2_norm(self)
    }
}

/// Uniform grid `x_j = jπ/K`, `j = 0..=K`, with `K` even so that composite
/// Simpson applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpaceGrid {
    k: usize,
}

impl SpaceGrid {
    pub fn new(k: usize) -> Result<Self> {
        if k < 2 || !k.is_multiple_of(2) {
            return Err(Error::InvalidGrid(k));
        }
        Ok(Self { k })
    }

    /// The subdivision count `K`.
    pub fn subdivisions(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.k + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        PI / self.k as f64
    }

    /// Node `x_j`. The endpoints are exactly `0` and `π` (as `f64`).
    pub fn node(&self, j: usize) -> f64 {
        debug_assert!(j <= self.k);
        if j == self.k {
            PI
        } else {
            j as f64 * PI / self.k as f64
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.k).map(|j| self.node(j)).collect()
    }

    /// `sin(n·x_j)` from the exact rational phase `n·j/K`.
    pub fn sin_mode_at(&self, n: u64, j: usize) -> f64 {
        sin_pi_rational(n as u128 * j as u128, self.k as u128)
    }

    /// Samples of `sin(n x)` at every node.
    pub fn sample_mode(&self, n: u64) -> Vec<f64> {
        (0..=self.k).map(|j| self.sin_mode_at(n, j)).collect()
    }

    pub fn sample<F: Fn(f64) -> f64>(&self, f: F) -> Vec<f64> {
        (0..=self.k).map(|j| f(self.node(j))).collect()
    }

    /// Composite Simpson quadrature of nodal values over `[0, π]`.
    pub fn simpson(&self, values: &[f64]) -> Result<f64> {
        if values.len() != self.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                actual: values.len(),
            });
        }
        let interior: f64 = values[1..self.k]
            .iter()
            .enumerate()
            .map(|(i, v)| if i % 2 == 0 { 4.0 * v } else { 2.0 * v })
            .sum();
        Ok(self.spacing() / 3.0 * (values[0] + interior + values[self.k]))
    }
}

/// Sine coefficients `(2/π)·Q(samples·sin(n x))` for `n = 1..=n_max`, with
/// `Q` the composite Simpson rule on `grid`.
///
/// The samples must vanish at both endpoints and `n_max` must be below `K`.
/// Simpson integrates `sin(kx)·sin(nx)` exactly when `k + n < K`, so modes
/// below `K/2` are recovered to rounding.
pub fn sine_coefficients(samples: &[f64], grid: &SpaceGrid, n_max: u64) -> Result<SineSpectrum> {
    let k = grid.subdivisions();
    if samples.len() != grid.len() {
        return Err(Error::LengthMismatch {
            expected: grid.len(),
            actual: samples.len(),
        });
    }
    if n_max as u128 >= k as u128 {
        return Err(Error::Aliasing { n_max, k });
    }
    if samples.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidSpectrum("non-finite sample".into()));
    }
    let scale = samples.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let (left, right) = (samples[0], samples[k]);
    if left.abs() > 1e-12 * scale || right.abs() > 1e-12 * scale {
        return Err(Error::BoundaryViolation { left, right });
    }

    let h3 = grid.spacing() / 3.0;
    let mut entries = Vec::new();
    for n in 1..=n_max {
        // Endpoint terms vanish: sin(0) = sin(nπ) = 0.
        let sum: f64 = (1..k)
            .map(|j| {
                let w = if j % 2 == 1 { 4.0 } else { 2.0 };
                w * samples[j] * grid.sin_mode_at(n, j)
            })
            .sum();
        let c = 2.0 / PI * h3 * sum;
        if c.abs() >= DROP_TOLERANCE {
            entries.push((n, c));
        }
    }
    SineSpectrum::from_entries(entries)
}

/// `Σ c_n sin(n x)` at each point, which must lie in `[0, π]`.
pub fn evaluate_series(spec: &SineSpectrum, points: &[f64]) -> Result<Vec<f64>> {
    points
        .iter()
        .map(|&x| {
            check_range("x", x, 0.0, PI)?;
            Ok(spec.iter().map(|(n, c)| c * sin_mode(n, x)).sum())
        })
        .collect()
}

/// Series values at every node of `grid`, using exact rational phases.
pub fn evaluate_on_grid(spec: &SineSpectrum, grid: &SpaceGrid) -> Vec<f64> {
    (0..grid.len())
        .map(|j| spec.iter().map(|(n, c)| c * grid.sin_mode_at(n, j)).sum())
        .collect()
}

/// `L²(0, π)` norm through Parseval: `√((π/2) Σ c_n²)`.
pub fn l2_norm(spec: &SineSpectrum) -> f64 {
    let sum_sq: f64 = spec.iter().map(|(_, c)| c * c).sum();
    (FRAC_PI_2 * sum_sq).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn grid(k: usize) -> SpaceGrid {
        SpaceGrid::new(k).unwrap()
    }

    #[test]
    fn eigenvalues_are_squares() {
        assert_eq!(eigenvalue(1), 1.0);
        assert_eq!(eigenvalue(2), 4.0);
        assert_eq!(eigenvalue(10), 100.0);
        assert_eq!(eigenvalue(3_000_000_000), 9e18);
        assert_eq!(eigenvalue(10_000_000_000), 1e20);
    }

    #[test]
    fn grid_endpoints_and_spacing() {
        let g = grid(100);
        assert_eq!(g.node(0), 0.0);
        assert_eq!(g.node(100), PI);
        assert_abs_diff_eq!(g.node(50), FRAC_PI_2, epsilon = 1e-16);
        assert!(SpaceGrid::new(101).is_err());
        assert!(SpaceGrid::new(0).is_err());
    }

    #[test]
    fn coefficients_of_sin_x() {
        let g = grid(100);
        let spec = sine_coefficients(&g.sample(f64::sin), &g, 10).unwrap();
        assert_eq!(spec.len(), 1);
        assert_eq!(spec.entries()[0].0, 1);
        assert_abs_diff_eq!(spec.coefficient(1), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn zero_samples_give_empty_spectrum() {
        let g = grid(100);
        let spec = sine_coefficients(&vec![0.0; 101], &g, 10).unwrap();
        assert!(spec.is_empty());
    }

    #[test]
    fn coefficients_of_perturbed_shape() {
        let g = grid(100);
        let e3 = (-3.0f64).exp();
        let samples = g.sample(|x| e3 * x.sin() + (2.0 * x).sin() / 2.0);
        let spec = sine_coefficients(&samples, &g, 10).unwrap();
        assert_eq!(spec.len(), 2);
        assert_abs_diff_eq!(spec.coefficient(1), e3, epsilon = 1e-10);
        assert_abs_diff_eq!(spec.coefficient(2), 0.5, epsilon = 1e-10);
    }

    #[test]
    fn rejects_boundary_and_aliasing_violations() {
        let g = grid(10);
        let mut samples = g.sample(f64::sin);
        assert!(matches!(
            sine_coefficients(&samples, &g, 10),
            Err(Error::Aliasing { .. })
        ));
        samples[0] = 0.5;
        assert!(matches!(
            sine_coefficients(&samples, &g, 4),
            Err(Error::BoundaryViolation { .. })
        ));
        assert!(matches!(
            sine_coefficients(&samples[1..], &g, 4),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn series_evaluation() {
        let one = SineSpectrum::single(1, 1.0).unwrap();
        assert_eq!(evaluate_series(&one, &[FRAC_PI_2]).unwrap(), vec![1.0]);
        let decayed = SineSpectrum::single(1, (-1.5f64).exp()).unwrap();
        assert_abs_diff_eq!(
            evaluate_series(&decayed, &[FRAC_PI_2]).unwrap()[0],
            0.223_130_160_1,
            epsilon = 1e-10
        );
        let second = SineSpectrum::single(2, 1.0).unwrap();
        assert_abs_diff_eq!(evaluate_series(&second, &[FRAC_PI_2]).unwrap()[0], 0.0, epsilon = 1e-15);
        assert!(matches!(evaluate_series(&one, &[-0.1]), Err(Error::OutOfDomain { .. })));
        assert!(evaluate_series(&one, &[3.2]).is_err());
    }

    #[test]
    fn norms() {
        let one = SineSpectrum::single(1, 1.0).unwrap();
        assert_abs_diff_eq!(l2_norm(&one), 1.253_314_137_315_500_3, epsilon = 1e-12);
        assert_eq!(l2_norm(&SineSpectrum::zero()), 0.0);
        let pert = SineSpectrum::single(2, 0.5).unwrap();
        assert_abs_diff_eq!(l2_norm(&pert), 0.626_657_068_657_750_1, epsilon = 1e-12);
    }

    #[test]
    fn spectrum_invariants_enforced() {
        assert!(SineSpectrum::from_entries(vec![(0, 1.0)]).is_err());
        assert!(SineSpectrum::from_entries(vec![(2, 1.0), (2, 1.0)]).is_err());
        assert!(SineSpectrum::from_entries(vec![(3, 1.0), (2, 1.0)]).is_err());
        assert!(SineSpectrum::from_entries(vec![(1, f64::NAN)]).is_err());
        let merged = SineSpectrum::from_terms([(3, 1.0), (1, 2.0), (3, -1.0)]).unwrap();
        assert_eq!(merged.entries(), &[(1, 2.0)]);
    }

    #[test]
    fn combine_merges_sparse_entries() {
        let a = SineSpectrum::from_entries(vec![(1, 1.0), (5, 2.0)]).unwrap();
        let b = SineSpectrum::from_entries(vec![(2, 3.0), (5, 2.0)]).unwrap();
        let d = a.sub(&b);
        assert_eq!(d.entries(), &[(1, 1.0), (2, -3.0)]);
        assert_eq!(a.add(&b).coefficient(5), 4.0);
        assert_eq!(a.scale(0.0), SineSpectrum::zero());
    }

    #[test]
    fn grid_evaluation_of_huge_modes_is_exact() {
        let g = grid(100);
        let spec = SineSpectrum::single(10_000_000_000, 1e-10).unwrap();
        assert!(evaluate_on_grid(&spec, &g).iter().all(|&v| v == 0.0));
        let spec = SineSpectrum::single(101, 1.0).unwrap();
        // sin(101 x_j) = (-1)^j sin(x_j)
        let vals = evaluate_on_grid(&spec, &g);
        for (j, v) in vals.iter().enumerate() {
            let want = if j % 2 == 0 { 1.0 } else { -1.0 } * g.node(j).sin();
            assert_abs_diff_eq!(*v, want, epsilon = 1e-13);
        }
    }
}
