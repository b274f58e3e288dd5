//! Problem instances for `u_t + u_s − Δu = f` on `[0, π] × [0, T]²` with
//! homogeneous Dirichlet conditions and data on the terminal edges:
//! `u(x, T, s) = ψ(x, s)` and `u(x, t, T) = φ(x, t)`.
//!
//! Every space-time function is stored per sine mode as a [`TimeProfile`].

mod io;
mod sampled;

pub use io::{load_problem, parse_problem, BUILTIN_WORKED_EXAMPLE};
pub use sampled::{SampledSeries, SampledSurface};

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;

use rand::Rng;
use serde::Deserialize;

use crate::error::{check_range, Error, Result};
use crate::spectral::{sine_coefficients, SineSpectrum, SpaceGrid};

/// `coef · exp(offset + rate·a + rate2·b)` for time arguments `(a, b)`.
///
/// One-argument profiles ignore `rate2`.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpTerm {
    #[serde(default = "one")]
    pub coef: f64,
    #[serde(default)]
    pub offset: f64,
    #[serde(default)]
    pub rate: f64,
    #[serde(default)]
    pub rate2: f64,
}

fn one() -> f64 {
    1.0
}

impl ExpTerm {
    pub fn constant(c: f64) -> Self {
        Self {
            coef: c,
            offset: 0.0,
            rate: 0.0,
            rate2: 0.0,
        }
    }

    pub fn eval(&self, a: f64, b: f64) -> f64 {
        self.coef * (self.offset + self.rate * a + self.rate2 * b).exp()
    }
}

/// Sampled component of a mode profile.
#[derive(Debug, Clone, PartialEq)]
pub enum Sampled {
    Series(SampledSeries),
    Surface(SampledSurface),
}

impl Sampled {
    fn eval(&self, a: f64, b: f64) -> f64 {
        match self {
            Sampled::Series(g) => g.eval(a),
            Sampled::Surface(g) => g.eval(a, b),
        }
    }

    fn step(&self) -> f64 {
        match self {
            Sampled::Series(g) => g.step(),
            Sampled::Surface(g) => g.step(),
        }
    }

    fn scale(&mut self, a: f64) {
        match self {
            Sampled::Series(g) => g.scale(a),
            Sampled::Surface(g) => g.scale(a),
        }
    }

    fn axpy(&mut self, a: f64, other: &Sampled) -> Result<()> {
        match (self, other) {
            (Sampled::Series(x), Sampled::Series(y)) if x.same_grid(y) => x.axpy(a, y),
            (Sampled::Surface(x), Sampled::Surface(y)) if x.same_grid(y) => x.axpy(a, y),
            _ => {
                return Err(Error::InvalidParameter(
                    "cannot combine sampled profiles on different grids".into(),
                ))
            }
        }
        Ok(())
    }
}

/// Time dependence of one sine mode: a sum of exponential terms plus an
/// optional sampled part.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ModeProfile {
    pub terms: Vec<ExpTerm>,
    pub sampled: Option<Sampled>,
}

impl ModeProfile {
    pub fn analytic(terms: Vec<ExpTerm>) -> Self {
        Self { terms, sampled: None }
    }

    pub fn eval(&self, a: f64, b: f64) -> f64 {
        let analytic: f64 = self.terms.iter().map(|term| term.eval(a, b)).sum();
        analytic + self.sampled.as_ref().map_or(0.0, |g| g.eval(a, b))
    }

    fn axpy(&mut self, a: f64, other: &ModeProfile) -> Result<()> {
        self.terms.extend(other.terms.iter().map(|term| ExpTerm {
            coef: a * term.coef,
            ..*term
        }));
        match (&mut self.sampled, &other.sampled) {
            (_, None) => {}
            (None, Some(g)) => {
                let mut g = g.clone();
                g.scale(a);
                self.sampled = Some(g);
            }
            (Some(mine), Some(theirs)) => mine.axpy(a, theirs)?,
        }
        Ok(())
    }
}

/// Number of time arguments a profile takes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Arity {
    One,
    Two,
}

/// Per-mode map `n → g_n`. Unlisted modes are identically zero.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeProfile {
    arity: Arity,
    modes: BTreeMap<u64, ModeProfile>,
}

impl TimeProfile {
    pub fn new(arity: Arity) -> Self {
        Self {
            arity,
            modes: BTreeMap::new(),
        }
    }

    pub fn arity(&self) -> Arity {
        self.arity
    }

    /// Adds `terms` to mode `n`.
    pub fn add_terms(&mut self, n: u64, terms: impl IntoIterator<Item = ExpTerm>) -> Result<()> {
        if n == 0 {
            return Err(Error::InvalidParameter("mode index 0".into()));
        }
        self.modes.entry(n).or_default().terms.extend(terms);
        Ok(())
    }

    /// Adds a sampled component to mode `n`.
    pub fn add_sampled(&mut self, n: u64, sampled: Sampled) -> Result<()> {
        if n == 0 {
            return Err(Error::InvalidParameter("mode index 0".into()));
        }
        match (&sampled, self.arity) {
            (Sampled::Series(_), Arity::One) | (Sampled::Surface(_), Arity::Two) => {}
            _ => {
                return Err(Error::InvalidParameter(format!(
                    "sampled data for mode {n} has the wrong number of time arguments"
                )))
            }
        }
        let profile = ModeProfile {
            terms: Vec::new(),
            sampled: Some(sampled),
        };
        self.modes.entry(n).or_default().axpy(1.0, &profile)
    }

    pub fn mode(&self, n: u64) -> Option<&ModeProfile> {
        self.modes.get(&n)
    }

    pub fn modes(&self) -> impl Iterator<Item = u64> + '_ {
        self.modes.keys().copied()
    }

    /// `g_n(a)` for one-argument profiles, `g_n(a, b)` otherwise.
    pub fn eval(&self, n: u64, a: f64, b: f64) -> f64 {
        self.modes.get(&n).map_or(0.0, |g| g.eval(a, b))
    }

    /// Spectrum of the profile at fixed time arguments, restricted to modes `≤ n_max`.
    pub fn spectrum_at(&self, a: f64, b: f64, n_max: u64) -> Result<SineSpectrum> {
        SineSpectrum::from_terms(self.modes.range(..=n_max).map(|(&n, g)| (n, g.eval(a, b))))
    }

    /// Smallest sampling step among sampled components, if any.
    fn finest_step(&self) -> Option<f64> {
        self.modes
            .values()
            .filter_map(|g| g.sampled.as_ref().map(Sampled::step))
            .reduce(f64::min)
    }

    /// Re-expresses the profile through the grid: every mode `n` is sampled
    /// on `grid` and projected back onto modes `1..=n_max`, so aliased or
    /// unresolvable modes land where a grid-based transform puts them.
    fn project(&self, grid: &SpaceGrid, n_max: u64, cutoff: u64) -> Result<TimeProfile> {
        let mut out = TimeProfile::new(self.arity);
        for (&n, g) in self.modes.range(..=cutoff) {
            let shape = sine_coefficients(&grid.sample_mode(n), grid, n_max)?;
            for (k, c) in shape.iter() {
                out.modes.entry(k).or_default().axpy(c, g)?;
            }
        }
        Ok(out)
    }
}

/// Full instance of the final-value problem.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    horizon: f64,
    /// `φ_n(t)`: data on the edge `s = T`.
    pub phi: TimeProfile,
    /// `ψ_n(s)`: data on the edge `t = T`.
    pub psi: TimeProfile,
    /// `f_n(t, s)`.
    pub source: TimeProfile,
    n_max: u64,
}

impl ProblemSpec {
    pub fn new(horizon: f64, phi: TimeProfile, psi: TimeProfile, source: TimeProfile, n_max: u64) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "horizon must be positive, got {horizon}"
            )));
        }
        if n_max == 0 {
            return Err(Error::InvalidParameter("mode cutoff must be at least 1".into()));
        }
        if phi.arity != Arity::One || psi.arity != Arity::One || source.arity != Arity::Two {
            return Err(Error::InvalidParameter(
                "edge data take one time argument and the source two".into(),
            ));
        }
        Ok(Self {
            horizon,
            phi,
            psi,
            source,
            n_max,
        })
    }

    /// All data identically zero.
    pub fn zero(horizon: f64, n_max: u64) -> Result<Self> {
        Self::new(
            horizon,
            TimeProfile::new(Arity::One),
            TimeProfile::new(Arity::One),
            TimeProfile::new(Arity::Two),
            n_max,
        )
    }

    /// The worked example on `[0, π] × [0, 1]²`:
    /// `f = −2e^{−2t−s} sin x`, `ψ = e^{−2−s} sin x`, `φ = e^{−2t−1} sin x`,
    /// with exact solution `e^{−2t−s} sin x`.
    pub fn worked_example() -> Self {
        let mut phi = TimeProfile::new(Arity::One);
        let mut psi = TimeProfile::new(Arity::One);
        let mut source = TimeProfile::new(Arity::Two);
        let term = |coef, offset, rate, rate2| ExpTerm {
            coef,
            offset,
            rate,
            rate2,
        };
        phi.add_terms(1, [term(1.0, -1.0, -2.0, 0.0)]).unwrap();
        psi.add_terms(1, [term(1.0, -2.0, -1.0, 0.0)]).unwrap();
        source.add_terms(1, [term(-2.0, 0.0, -2.0, -1.0)]).unwrap();
        Self::new(1.0, phi, psi, source, 1).expect("valid builtin")
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn n_max(&self) -> u64 {
        self.n_max
    }

    /// Modes `≤ n_max` carried by the given edge data or by the source.
    pub fn active_modes(&self, data: &TimeProfile) -> Vec<u64> {
        let mut modes: Vec<u64> = data
            .modes()
            .chain(self.source.modes())
            .filter(|&n| n <= self.n_max)
            .collect();
        modes.sort_unstable();
        modes.dedup();
        modes
    }

    /// Adds a time-independent spatial function to both `φ` and `ψ`.
    /// The mode cutoff grows to cover the new modes.
    pub fn with_data_offset(&self, offset: &SineSpectrum) -> Self {
        let mut out = self.clone();
        for (n, c) in offset.iter() {
            out.phi.add_terms(n, [ExpTerm::constant(c)]).expect("mode ≥ 1");
            out.psi.add_terms(n, [ExpTerm::constant(c)]).expect("mode ≥ 1");
            out.n_max = out.n_max.max(n);
        }
        out
    }

    /// Passes every profile through the sampled space grid (see
    /// [`TimeProfile::project`]); the result has cutoff `n_max`.
    pub fn project(&self, grid: &SpaceGrid, n_max: u64) -> Result<Self> {
        Self::new(
            self.horizon,
            self.phi.project(grid, n_max, self.n_max)?,
            self.psi.project(grid, n_max, self.n_max)?,
            self.source.project(grid, n_max, self.n_max)?,
            n_max,
        )
    }

    /// Compatibility tolerance matched to the representation error:
    /// `1e-9` for analytic data, `10·Δt⁴` when sampled data are present.
    pub fn default_compatibility_tolerance(&self) -> f64 {
        match self
            .phi
            .finest_step()
            .into_iter()
            .chain(self.psi.finest_step())
            .reduce(f64::min)
        {
            Some(dt) => (10.0 * dt.powi(4)).max(1e-9),
            None => 1e-9,
        }
    }
}

/// Edge data prescribed at `t = 0` (`psi`, as a function of `s`) and `s = 0`
/// (`phi`, as a function of `t`), the well-posed forward orientation.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialData(pub ProblemSpec);

/// Perturbation `sin(m x)/m` added to both edge data.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PerturbationSpec {
    m: u64,
}

impl PerturbationSpec {
    pub fn new(m: u64) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidParameter("perturbation index must be ≥ 1".into()));
        }
        Ok(Self { m })
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    /// Spectrum of `sin(m x)/m`.
    pub fn spectrum(&self) -> SineSpectrum {
        SineSpectrum::single(self.m, 1.0 / self.m as f64).expect("m ≥ 1")
    }
}

/// Adds `sin(m x)/m`, constant in time, to both `φ` and `ψ`.
pub fn perturb(spec: &ProblemSpec, pert: PerturbationSpec) -> ProblemSpec {
    spec.with_data_offset(&pert.spectrum())
}

/// `‖sin(m x)/m‖ = √(π/2)/m`.
pub fn noise_level(pert: PerturbationSpec) -> f64 {
    FRAC_PI_2.sqrt() / pert.m as f64
}

/// Random time-independent perturbation with `count` modes drawn from
/// `1..=max_mode` and coefficients uniform in `[-amplitude, amplitude]`.
pub fn random_perturbation<R: Rng>(rng: &mut R, max_mode: u64, count: usize, amplitude: f64) -> SineSpectrum {
    SineSpectrum::from_terms((0..count).map(|_| (rng.gen_range(1..=max_mode), rng.gen_range(-amplitude..=amplitude))))
        .expect("finite draws on valid modes")
}

/// Triangular halves of the time square.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    /// `s < t`.
    D1,
    /// `t < s`.
    D2,
    /// `t = s`, a member of both closed triangles.
    Diagonal,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeDomainPoint {
    pub t: f64,
    pub s: f64,
    pub region: Region,
}

pub fn classify_domain(t: f64, s: f64, horizon: f64) -> Result<TimeDomainPoint> {
    check_range("t", t, 0.0, horizon)?;
    check_range("s", s, 0.0, horizon)?;
    let region = if s < t {
        Region::D1
    } else if t < s {
        Region::D2
    } else {
        Region::Diagonal
    };
    Ok(TimeDomainPoint { t, s, region })
}

/// Outcome of [`compatibility_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct CompatibilityReport {
    pub tolerance: f64,
    /// Largest `|φ_n(T) − ψ_n(T)|` over the checked modes.
    pub max_residual: f64,
    /// `(n, φ_n(T) − ψ_n(T))` for every mode above tolerance.
    pub violations: Vec<(u64, f64)>,
}

impl CompatibilityReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks `φ_n(T) = ψ_n(T)` for every mode `≤ n_max`.
pub fn compatibility_check(spec: &ProblemSpec, tol: f64) -> Result<CompatibilityReport> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "compatibility tolerance must be positive, got {tol}"
        )));
    }
    let horizon = spec.horizon;
    let mut modes: Vec<u64> = spec.phi.modes().chain(spec.psi.modes()).collect();
    modes.sort_unstable();
    modes.dedup();
    let mut max_residual = 0.0f64;
    let mut violations = Vec::new();
    for n in modes.into_iter().filter(|&n| n <= spec.n_max) {
        let residual = spec.phi.eval(n, horizon, 0.0) - spec.psi.eval(n, horizon, 0.0);
        max_residual = max_residual.max(residual.abs());
        if residual.abs() > tol {
            violations.push((n, residual));
        }
    }
    Ok(CompatibilityReport {
        tolerance: tol,
        max_residual,
        violations,
    })
}
