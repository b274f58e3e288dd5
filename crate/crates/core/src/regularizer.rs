//! Filter regularization of the backward solution, its stability and error
//! estimates, and the elementary inequalities behind them as predicates.
//!
//! The amplification `e^{(T−τ)n²}` is replaced by the filter
//! `(ε + e^{−pn²})^{(τ−T)/p}`, evaluated as `exp(((τ−T)/p)·ln(ε + e^{−pn²}))`.
//! For `pn² > 750` the term `e^{−pn²}` is taken as zero and the filter is
//! exactly `ε^{(τ−T)/p}`.

use std::f64::consts::FRAC_PI_2;

use crate::error::{check_range, Error, Result};
use crate::problem::{classify_domain, ProblemSpec, Region};
use crate::quadrature::QuadratureConfig;
use crate::solver::{terminal_bracket, Branch};
use crate::spectral::{eigenvalue, SineSpectrum};

/// Past this exponent `e^{−pn²}` is treated as zero.
const FILTER_UNDERFLOW_EXPONENT: f64 = 750.0;

/// Filter exponent `p` and noise level `ε`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegularizationParams {
    p: f64,
    eps: f64,
}

impl RegularizationParams {
    /// Requires `p ≥ 1`, `p ≥ horizon` and `eps > 0`.
    pub fn new(p: f64, eps: f64, horizon: f64) -> Result<Self> {
        if !(p.is_finite() && p >= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "filter exponent p must be ≥ 1, got {p}"
            )));
        }
        if horizon.is_nan() || p < horizon {
            return Err(Error::InvalidParameter(format!(
                "filter exponent p = {p} must be at least the horizon {horizon}"
            )));
        }
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "noise level must be positive, got {eps}"
            )));
        }
        Ok(Self { p, eps })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    fn check_time(&self, tau: f64, horizon: f64) -> Result<()> {
        if horizon > self.p {
            return Err(Error::InvalidParameter(format!(
                "horizon {horizon} exceeds filter exponent {}",
                self.p
            )));
        }
        check_range("tau", tau, 0.0, horizon)
    }

    /// `(τ−T)/p`, the (non-positive) power applied to the filter base.
    fn power(&self, tau: f64, horizon: f64) -> f64 {
        (tau - horizon) / self.p
    }
}

/// `ln(ε + e^{−pn²})`.
fn log_filter_base(n: u64, p: f64, eps: f64) -> f64 {
    let decay = p * eigenvalue(n);
    if decay > FILTER_UNDERFLOW_EXPONENT {
        return eps.ln();
    }
    // ln(a + b) from ln a and ln b, larger one factored out.
    let (la, lb) = (eps.ln(), -decay);
    let (hi, lo) = if la >= lb { (la, lb) } else { (lb, la) };
    hi + (lo - hi).exp().ln_1p()
}

/// `ln` of [`filter_factor`].
pub fn log_filter_factor(n: u64, tau: f64, horizon: f64, params: &RegularizationParams) -> Result<f64> {
    params.check_time(tau, horizon)?;
    if n == 0 {
        return Err(Error::InvalidParameter("mode index must be ≥ 1".into()));
    }
    if tau == horizon {
        return Ok(0.0);
    }
    Ok(params.power(tau, horizon) * log_filter_base(n, params.p, params.eps))
}

/// `(ε + e^{−pn²})^{(τ−T)/p}`; lies in `(0, ε^{(τ−T)/p}]` and is `1` at `τ = T`.
pub fn filter_factor(n: u64, tau: f64, horizon: f64, params: &RegularizationParams) -> Result<f64> {
    log_filter_factor(n, tau, horizon, params).map(f64::exp)
}

/// Regularized solution at `(t, s)`: each backward bracket multiplied by the
/// filter at `τ = t` on `D1` (and the diagonal), `τ = s` on `D2`.
pub fn regularized_solve(
    spec: &ProblemSpec,
    params: &RegularizationParams,
    t: f64,
    s: f64,
    cfg: &QuadratureConfig,
) -> Result<SineSpectrum> {
    let horizon = spec.horizon();
    let point = classify_domain(t, s, horizon)?;
    let branch = Branch::for_region(point.region);
    let tau = branch.lead_time(t, s);
    params.check_time(tau, horizon)?;
    let terms = spec
        .active_modes(branch.data(spec))
        .into_iter()
        .map(|n| {
            let filter = filter_factor(n, tau, horizon, params)?;
            Ok((n, filter * terminal_bracket(spec, n, t, s, branch, cfg)?))
        })
        .collect::<Result<Vec<_>>>()?;
    SineSpectrum::from_terms(terms)
}

/// `ε^{(τ−T)/p}·δ`: bound on the distance between regularized solutions whose
/// data differ by `δ`.
pub fn stability_bound(delta: f64, tau: f64, horizon: f64, params: &RegularizationParams) -> Result<f64> {
    if delta.is_nan() || delta < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "data distance must be ≥ 0, got {delta}"
        )));
    }
    params.check_time(tau, horizon)?;
    if delta == 0.0 {
        return Ok(0.0);
    }
    Ok((params.power(tau, horizon) * params.eps.ln()).exp() * delta)
}

/// Smoothness constants of an exact solution and where their suprema sit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorBudget {
    /// Supremum over `D1` (diagonal included).
    pub c1: f64,
    /// Supremum over `D2` (diagonal included).
    pub c2: f64,
    pub c1_at: (f64, f64),
    pub c2_at: (f64, f64),
    /// Time intervals per axis of the finest grid used.
    pub intervals: usize,
}

impl ErrorBudget {
    /// `(1+√c1)·ε^{(t−T+p)/p}`.
    pub fn bound_d1(&self, t: f64, horizon: f64, params: &RegularizationParams) -> Result<f64> {
        error_bound(self, t, horizon, params, Region::D1)
    }

    /// `(1+√c2)·ε^{(s−T+p)/p}`.
    pub fn bound_d2(&self, s: f64, horizon: f64, params: &RegularizationParams) -> Result<f64> {
        error_bound(self, s, horizon, params, Region::D2)
    }
}

/// `(1+√C)·ε^{(τ−T+p)/p}` with `C = c1` on `D1` and the diagonal, `c2` on `D2`.
pub fn error_bound(
    budget: &ErrorBudget,
    tau: f64,
    horizon: f64,
    params: &RegularizationParams,
    region: Region,
) -> Result<f64> {
    params.check_time(tau, horizon)?;
    let c = match region {
        Region::D1 | Region::Diagonal => budget.c1,
        Region::D2 => budget.c2,
    };
    if !(c >= 0.0 && c.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "smoothness constant must be finite and ≥ 0, got {c}"
        )));
    }
    let rate = (tau - horizon + params.p) / params.p;
    Ok((1.0 + c.sqrt()) * (rate * params.eps.ln()).exp())
}

/// Refinement stops once the suprema change by less than this, relatively.
const SMOOTHNESS_REFINE_TOLERANCE: f64 = 1e-3;
const SMOOTHNESS_MAX_INTERVALS: usize = 1 << 12;

/// Estimates the smoothness constants
/// `C = (π/2)·sup Σ_n e^{2(p+τ−T)n²}·((π/2)c_n(t,s))²` of an exact solution
/// whose sine coefficients at `(t, s)` are returned by `exact`.
///
/// The supremum runs over the square grid with `intervals` cells per axis,
/// doubled until both constants move by less than 0.1%; the result is a
/// lower estimate of the continuous supremum.
pub fn smoothness_constants<F>(exact: F, horizon: f64, p: f64, intervals: usize) -> Result<ErrorBudget>
where
    F: Fn(f64, f64) -> SineSpectrum,
{
    if intervals < 1 {
        return Err(Error::InvalidGrid(intervals));
    }
    if !(p >= horizon && horizon > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need 0 < horizon ≤ p, got T = {horizon}, p = {p}"
        )));
    }
    let mut m = intervals;
    let mut budget = smoothness_on_grid(&exact, horizon, p, m)?;
    while 2 * m <= SMOOTHNESS_MAX_INTERVALS {
        m *= 2;
        let finer = smoothness_on_grid(&exact, horizon, p, m)?;
        let settled = |a: f64, b: f64| (b - a).abs() <= SMOOTHNESS_REFINE_TOLERANCE * b.abs();
        let done = settled(budget.c1, finer.c1) && settled(budget.c2, finer.c2);
        budget = finer;
        if done {
            break;
        }
    }
    Ok(budget)
}

fn smoothness_on_grid<F>(exact: &F, horizon: f64, p: f64, m: usize) -> Result<ErrorBudget>
where
    F: Fn(f64, f64) -> SineSpectrum,
{
    let h = horizon / m as f64;
    let mut budget = ErrorBudget {
        c1: 0.0,
        c2: 0.0,
        c1_at: (horizon, horizon),
        c2_at: (horizon, horizon),
        intervals: m,
    };
    for i in 0..=m {
        for j in 0..=m {
            let (t, s) = (i as f64 * h, j as f64 * h);
            let spectrum = exact(t, s);
            if i >= j {
                let c = weighted_energy(&spectrum, t, horizon, p, (t, s))?;
                if c > budget.c1 {
                    budget.c1 = c;
                    budget.c1_at = (t, s);
                }
            }
            if j >= i {
                let c = weighted_energy(&spectrum, s, horizon, p, (t, s))?;
                if c > budget.c2 {
                    budget.c2 = c;
                    budget.c2_at = (t, s);
                }
            }
        }
    }
    Ok(budget)
}

/// `(π/2)·Σ e^{2(p+τ−T)n²}((π/2)c_n)²`, summed in log space.
fn weighted_energy(spectrum: &SineSpectrum, tau: f64, horizon: f64, p: f64, at: (f64, f64)) -> Result<f64> {
    let logs: Vec<(u64, f64)> = spectrum
        .iter()
        .filter(|&(_, c)| c != 0.0)
        .map(|(n, c)| {
            (
                n,
                2.0 * (p + tau - horizon) * eigenvalue(n) + 2.0 * (FRAC_PI_2 * c.abs()).ln(),
            )
        })
        .collect();
    let Some(&(peak_mode, peak)) = logs.iter().max_by(|a, b| a.1.total_cmp(&b.1)) else {
        return Ok(0.0);
    };
    let sum: f64 = logs.iter().map(|&(_, l)| (l - peak).exp()).sum();
    let value = (FRAC_PI_2.ln() + peak + sum.ln()).exp();
    if !value.is_finite() {
        return Err(Error::UnboundedSmoothness {
            mode: peak_mode,
            t: at.0,
            s: at.1,
        });
    }
    Ok(value)
}

/// Slack allowed in the log-space comparison of [`lemma5_holds`].
const LEMMA5_SLACK: f64 = 1e-12;

/// `(ε+e^{−n²p})^{(t−T)/p} ≤ ε^{(t−T)/p}` for `0 ≤ t ≤ T ≤ p`, compared in log space.
pub fn lemma5_holds(eps: f64, n: u64, t: f64, horizon: f64, p: f64) -> Result<bool> {
    let params = RegularizationParams::new(p, eps, horizon)?;
    let lhs = log_filter_factor(n, t, horizon, &params)?;
    let rhs = params.power(t, horizon) * eps.ln();
    Ok(lhs <= rhs + LEMMA5_SLACK * rhs.abs().max(1.0))
}

/// `1 − (x+1)^{−α} ≤ x^{1−α}` for `x > 0`, `0 < α < 1`.
pub fn lemma6_holds(x: f64, alpha: f64) -> Result<bool> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(Error::out_of_domain("x", x, 0.0, f64::INFINITY));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::out_of_domain("alpha", alpha, 0.0, 1.0));
    }
    let lhs = -(-alpha * x.ln_1p()).exp_m1();
    let rhs = ((1.0 - alpha) * x.ln()).exp();
    Ok(lhs <= rhs * (1.0 + 1e-12))
}
