//! Forward (well-posed) and unregularized backward solutions, mode by mode.
//!
//! On `D1` (`s ≤ t`) the characteristic through `(t, s)` reaches the edge
//! `t = T` at `(T, T + s − t)`; on `D2` it reaches `s = T` at
//! `(T + t − s, T)`. The backward solution of mode `n` is the amplification
//! `e^{(T−τ)n²}` times a bracket holding the edge datum minus a kernel
//! integral of the source, with `τ = t` on `D1` and `τ = s` on `D2`:
//!
//! ```text
//! u_n(t, s) = e^{(T−t)n²} (ψ_n(T+s−t) − ∫_t^T e^{(t−η)n²} f_n(T+t−η, T+s−η) dη)   on D1
//! ```
//!
//! The bracket form keeps every kernel exponent non-positive; the growth is
//! confined to the single prefactor, which is tracked in log space.

use std::f64::consts::FRAC_PI_2;

use crate::error::{check_range, Error, Result};
use crate::problem::{classify_domain, perturb, InitialData, PerturbationSpec, ProblemSpec, Region, TimeProfile};
use crate::quadrature::{decaying_kernel_integral, integrate, QuadratureConfig};
use crate::spectral::{eigenvalue, SineSpectrum};

/// Modes whose natural-log magnitude exceeds this are flagged as overflowed.
pub const OVERFLOW_LOG_THRESHOLD: f64 = 700.0;

/// Which terminal edge the backward characteristic reaches.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// `s ≤ t`, data `ψ` on `t = T`.
    D1,
    /// `t ≤ s`, data `φ` on `s = T`.
    D2,
}

impl Branch {
    /// Diagonal points use the `D1` formula.
    pub fn for_region(region: Region) -> Self {
        match region {
            Region::D1 | Region::Diagonal => Branch::D1,
            Region::D2 => Branch::D2,
        }
    }

    /// The time variable that sets the amplification: `t` on `D1`, `s` on `D2`.
    pub fn lead_time(self, t: f64, s: f64) -> f64 {
        match self {
            Branch::D1 => t,
            Branch::D2 => s,
        }
    }

    /// Edge data used on this branch.
    pub fn data(self, spec: &ProblemSpec) -> &TimeProfile {
        match self {
            Branch::D1 => &spec.psi,
            Branch::D2 => &spec.phi,
        }
    }

    fn check(self, t: f64, s: f64) -> Result<()> {
        match self {
            Branch::D1 if s > t => Err(Error::InvalidParameter(format!("(t, s) = ({t}, {s}) is not in D1"))),
            Branch::D2 if t > s => Err(Error::InvalidParameter(format!("(t, s) = ({t}, {s}) is not in D2"))),
            _ => Ok(()),
        }
    }
}

/// One term of a backward series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeEvaluation {
    pub n: u64,
    /// The coefficient; `±∞` when overflowed.
    pub value: f64,
    /// `ln |value|`, finite even when `value` is not.
    pub log_magnitude: f64,
    /// `+1` or `-1`.
    pub sign: f64,
    pub overflowed: bool,
}

impl ModeEvaluation {
    fn from_log(n: u64, sign: f64, log_magnitude: f64) -> Self {
        let overflowed = log_magnitude > OVERFLOW_LOG_THRESHOLD;
        let value = if overflowed {
            sign * f64::INFINITY
        } else {
            sign * log_magnitude.exp()
        };
        Self {
            n,
            value,
            log_magnitude,
            sign,
            overflowed,
        }
    }
}

/// Collects non-overflowed evaluations into a spectrum.
pub fn evaluations_to_spectrum(evals: &[ModeEvaluation]) -> Result<SineSpectrum> {
    if let Some(e) = evals.iter().find(|e| e.overflowed) {
        return Err(Error::InvalidSpectrum(format!(
            "mode {} overflowed (ln|c| = {:.3})",
            e.n, e.log_magnitude
        )));
    }
    SineSpectrum::from_terms(evals.iter().map(|e| (e.n, e.value)))
}

/// A non-negative quantity carried as its natural logarithm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogNorm {
    pub ln: f64,
}

impl LogNorm {
    /// The value itself; `+∞` past the `f64` range.
    pub fn value(&self) -> f64 {
        self.ln.exp()
    }
}

/// `ln Σ e^{x_i}` without overflow; `-∞` for an empty input.
fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + xs.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

/// `ln ‖Σ c_n sin(n·)‖` from per-mode `ln |c_n|`, via Parseval.
pub fn log_l2_norm(log_coefficients: &[f64]) -> LogNorm {
    let doubled: Vec<f64> = log_coefficients.iter().map(|l| 2.0 * l).collect();
    LogNorm {
        ln: 0.5 * (FRAC_PI_2.ln() + log_sum_exp(&doubled)),
    }
}

/// Kernel integral of the backward bracket.
///
/// On `D1`: `∫_t^T e^{(t−η)n²} f_n(T+t−η, T+s−η) dη`; on `D2` the same with
/// `s` as the lower limit and kernel `e^{(s−η)n²}`. The kernel exponent is
/// never positive.
pub fn exp_kernel_integral(
    n: u64,
    t: f64,
    s: f64,
    horizon: f64,
    source: &TimeProfile,
    branch: Branch,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    check_range("t", t, 0.0, horizon)?;
    check_range("s", s, 0.0, horizon)?;
    if source.mode(n).is_none() {
        return Ok(0.0);
    }
    // σ = η − τ runs over [0, T − τ].
    match branch {
        Branch::D1 => decaying_kernel_integral(
            n,
            horizon - t,
            |sigma| source.eval(n, horizon - sigma, horizon + s - t - sigma),
            cfg,
        ),
        Branch::D2 => decaying_kernel_integral(
            n,
            horizon - s,
            |sigma| source.eval(n, horizon + t - s - sigma, horizon - sigma),
            cfg,
        ),
    }
}

/// Edge datum minus kernel integral for mode `n`; the quantity every
/// backward formula multiplies by its amplification or filter factor.
pub fn terminal_bracket(
    spec: &ProblemSpec,
    n: u64,
    t: f64,
    s: f64,
    branch: Branch,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    let horizon = spec.horizon();
    let datum = match branch {
        Branch::D1 => spec.psi.eval(n, horizon + s - t, 0.0),
        Branch::D2 => spec.phi.eval(n, horizon + t - s, 0.0),
    };
    let integral = exp_kernel_integral(n, t, s, horizon, &spec.source, branch, cfg)?;
    Ok(datum - integral)
}

/// Unregularized backward solution at `(t, s)`; diagonal points use `D1`.
///
/// Growth is reported, not clipped: modes with `ln|c_n| > 700` come back
/// flagged with their log magnitude.
pub fn backward_solve_naive(spec: &ProblemSpec, t: f64, s: f64, cfg: &QuadratureConfig) -> Result<Vec<ModeEvaluation>> {
    let point = classify_domain(t, s, spec.horizon())?;
    backward_solve_naive_on(spec, t, s, Branch::for_region(point.region), cfg)
}

/// [`backward_solve_naive`] with an explicit branch, which must contain `(t, s)`.
pub fn backward_solve_naive_on(
    spec: &ProblemSpec,
    t: f64,
    s: f64,
    branch: Branch,
    cfg: &QuadratureConfig,
) -> Result<Vec<ModeEvaluation>> {
    classify_domain(t, s, spec.horizon())?;
    branch.check(t, s)?;
    let lead = branch.lead_time(t, s);
    spec.active_modes(branch.data(spec))
        .into_iter()
        .map(|n| {
            let bracket = terminal_bracket(spec, n, t, s, branch, cfg)?;
            let growth = (spec.horizon() - lead) * eigenvalue(n);
            Ok(ModeEvaluation::from_log(
                n,
                if bracket < 0.0 { -1.0 } else { 1.0 },
                growth + bracket.abs().ln(),
            ))
        })
        .collect()
}

/// The backward solution with the amplification inside the integral,
/// `e^{(T−τ)n²} d_n − ∫_τ^T e^{(T−η)n²} f_n(T+t−η, T+s−η) dη`, integrated
/// directly in `η`. Serves as an independent route to cross-check
/// [`backward_solve_naive`]; overflowed modes are flagged without integrating.
pub fn backward_solve_unfactored(
    spec: &ProblemSpec,
    t: f64,
    s: f64,
    cfg: &QuadratureConfig,
) -> Result<Vec<ModeEvaluation>> {
    let point = classify_domain(t, s, spec.horizon())?;
    let branch = Branch::for_region(point.region);
    let horizon = spec.horizon();
    let lead = branch.lead_time(t, s);
    spec.active_modes(branch.data(spec))
        .into_iter()
        .map(|n| {
            let lambda = eigenvalue(n);
            let growth = (horizon - lead) * lambda;
            if growth > OVERFLOW_LOG_THRESHOLD {
                return Ok(ModeEvaluation::from_log(n, 1.0, growth));
            }
            let datum = match branch {
                Branch::D1 => spec.psi.eval(n, horizon + s - t, 0.0),
                Branch::D2 => spec.phi.eval(n, horizon + t - s, 0.0),
            };
            let integral = if spec.source.mode(n).is_some() {
                integrate(
                    |eta| ((horizon - eta) * lambda).exp() * spec.source.eval(n, horizon + t - eta, horizon + s - eta),
                    lead,
                    horizon,
                    cfg,
                )?
            } else {
                0.0
            };
            let value = growth.exp() * datum - integral;
            Ok(ModeEvaluation::from_log(
                n,
                if value < 0.0 { -1.0 } else { 1.0 },
                value.abs().ln(),
            ))
        })
        .collect()
}

/// Forward solution for data given on the edges `s = 0` (`φ`) and `t = 0`
/// (`ψ`):
///
/// ```text
/// u_n(t, s) = e^{−n²s} φ_n(t−s) + ∫_0^s e^{−n²(s−η)} f_n(t−s+η, η) dη    on D1
/// u_n(t, s) = e^{−n²t} ψ_n(s−t) + ∫_0^t e^{−n²(t−η)} f_n(η, s−t+η) dη    on D2
/// ```
///
/// Every exponent is non-positive, so no mode can overflow.
pub fn forward_solve(data: &InitialData, t: f64, s: f64, cfg: &QuadratureConfig) -> Result<SineSpectrum> {
    let spec = &data.0;
    let point = classify_domain(t, s, spec.horizon())?;
    let branch = Branch::for_region(point.region);
    // Distance travelled along the characteristic since leaving the edge.
    let elapsed = match branch {
        Branch::D1 => s,
        Branch::D2 => t,
    };
    let terms = spec
        .active_modes(branch.data(spec))
        .into_iter()
        .map(|n| {
            let lambda = eigenvalue(n);
            let datum = match branch {
                Branch::D1 => spec.phi.eval(n, t - s, 0.0),
                Branch::D2 => spec.psi.eval(n, s - t, 0.0),
            };
            let integral = if spec.source.mode(n).is_some() {
                decaying_kernel_integral(n, elapsed, |sigma| spec.source.eval(n, t - sigma, s - sigma), cfg)?
            } else {
                0.0
            };
            Ok((n, (-lambda * elapsed).exp() * datum + integral))
        })
        .collect::<Result<Vec<_>>>()?;
    SineSpectrum::from_terms(terms)
}

/// `ln ‖u_a(·, t, s) − u_b(·, t, s)‖` between the unregularized backward
/// solutions of two problems on the same horizon.
///
/// The amplification is common to both, so bracket differences are formed
/// first and scaled in log space; the distance stays finite in `ln` even
/// when it overflows `f64`.
pub fn naive_distance(a: &ProblemSpec, b: &ProblemSpec, t: f64, s: f64, cfg: &QuadratureConfig) -> Result<LogNorm> {
    if a.horizon() != b.horizon() {
        return Err(Error::InvalidParameter("problems have different horizons".into()));
    }
    let point = classify_domain(t, s, a.horizon())?;
    let branch = Branch::for_region(point.region);
    let lead = branch.lead_time(t, s);
    let mut modes = a.active_modes(branch.data(a));
    modes.extend(b.active_modes(branch.data(b)));
    modes.sort_unstable();
    modes.dedup();
    let logs = modes
        .into_iter()
        .map(|n| {
            let diff = terminal_bracket(a, n, t, s, branch, cfg)? - terminal_bracket(b, n, t, s, branch, cfg)?;
            Ok((a.horizon() - lead) * eigenvalue(n) + diff.abs().ln())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(log_l2_norm(&logs))
}

/// `‖u_m(·, t, s) − u(·, t, s)‖` for the worked example and its
/// `sin(m x)/m` perturbation; at `(½, ½)` this is `√(π e^{m²}/(2m²))`.
pub fn illposedness_norm(m: u64, t: f64, s: f64) -> Result<LogNorm> {
    let exact = ProblemSpec::worked_example();
    let perturbed = perturb(&exact, PerturbationSpec::new(m)?);
    naive_distance(&perturbed, &exact, t, s, &QuadratureConfig::default())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{Arity, ExpTerm};
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    #[test]
    fn kernel_integral_for_the_worked_example() {
        let spec = ProblemSpec::worked_example();
        let v = exp_kernel_integral(1, 0.0, 0.0, 1.0, &spec.source, Branch::D1, &cfg()).unwrap();
        let want = -(-3.0f64).exp() * ((2.0f64).exp() - 1.0);
        assert_relative_eq!(v, want, max_relative = 1e-10);
        assert_abs_diff_eq!(v, -0.318_092_4, epsilon = 1e-7);
    }

    #[test]
    fn kernel_integral_trivial_cases() {
        let spec = ProblemSpec::worked_example();
        let zero = TimeProfile::new(Arity::Two);
        assert_eq!(
            exp_kernel_integral(1, 0.2, 0.1, 1.0, &zero, Branch::D1, &cfg()).unwrap(),
            0.0
        );
        assert_eq!(
            exp_kernel_integral(1, 1.0, 0.4, 1.0, &spec.source, Branch::D1, &cfg()).unwrap(),
            0.0
        );
        assert!(exp_kernel_integral(1, 1.2, 0.4, 1.0, &spec.source, Branch::D1, &cfg()).is_err());
    }

    #[test]
    fn naive_backward_recovers_exact_mode() {
        let spec = ProblemSpec::worked_example();
        let evals = backward_solve_naive(&spec, 0.5, 0.5, &cfg()).unwrap();
        assert_eq!(evals.len(), 1);
        assert!(!evals[0].overflowed);
        assert_abs_diff_eq!(evals[0].value, 0.223_130_160_1, epsilon = 1e-10);
    }

    #[test]
    fn naive_backward_of_zero_data() {
        let spec = ProblemSpec::zero(1.0, 5).unwrap();
        let evals = backward_solve_naive(&spec, 0.3, 0.7, &cfg()).unwrap();
        assert!(evals.iter().all(|e| e.value == 0.0));
    }

    #[test]
    fn naive_backward_flags_overflow() {
        let base = ProblemSpec::worked_example();
        let spec = perturb(&base, PerturbationSpec::new(3).unwrap());
        let evals = backward_solve_naive(&spec, 0.0, 0.0, &cfg()).unwrap();
        let mode3 = evals.iter().find(|e| e.n == 3).unwrap();
        assert!(!mode3.overflowed);
        assert_abs_diff_eq!(mode3.log_magnitude, 9.0 - 3.0f64.ln(), epsilon = 1e-12);
        assert_relative_eq!(mode3.value, 9.0f64.exp() / 3.0, max_relative = 1e-12);

        let spec = perturb(&base, PerturbationSpec::new(40).unwrap());
        let evals = backward_solve_naive(&spec, 0.0, 0.0, &cfg()).unwrap();
        let mode40 = evals.iter().find(|e| e.n == 40).unwrap();
        assert!(mode40.overflowed);
        assert!(mode40.value.is_infinite());
        assert_abs_diff_eq!(mode40.log_magnitude, 1600.0 - 40.0f64.ln(), epsilon = 1e-9);
        assert!(evaluations_to_spectrum(&evals).is_err());
    }

    #[test]
    fn factored_and_unfactored_forms_agree() {
        let cfg_tight = cfg().with_tolerance(1e-14).unwrap();
        let base = perturb(&ProblemSpec::worked_example(), PerturbationSpec::new(2).unwrap());
        let mut spec = base.clone();
        spec.source
            .add_terms(
                2,
                [ExpTerm {
                    coef: 0.7,
                    offset: 0.0,
                    rate: 0.5,
                    rate2: -1.5,
                }],
            )
            .unwrap();
        spec.source
            .add_terms(
                3,
                [ExpTerm {
                    coef: -0.2,
                    offset: 0.1,
                    rate: 1.0,
                    rate2: 0.0,
                }],
            )
            .unwrap();
        for &(t, s) in &[(0.0, 0.0), (0.3, 0.1), (0.2, 0.9), (0.75, 0.75), (1.0, 0.4)] {
            let a = backward_solve_naive(&spec, t, s, &cfg_tight).unwrap();
            let b = backward_solve_unfactored(&spec, t, s, &cfg_tight).unwrap();
            assert_eq!(a.len(), b.len());
            for (x, y) in a.iter().zip(&b) {
                assert_eq!(x.n, y.n);
                assert_relative_eq!(x.value, y.value, max_relative = 1e-12, epsilon = 1e-300);
            }
        }
    }

    #[test]
    fn forward_solve_separable_solution() {
        // u = e^{-t} sin x solves u_t + u_s + u = 0 with u(t,0) = e^{-t}, u(0,s) = 1.
        let mut phi = TimeProfile::new(Arity::One);
        phi.add_terms(
            1,
            [ExpTerm {
                coef: 1.0,
                offset: 0.0,
                rate: -1.0,
                rate2: 0.0,
            }],
        )
        .unwrap();
        let mut psi = TimeProfile::new(Arity::One);
        psi.add_terms(1, [ExpTerm::constant(1.0)]).unwrap();
        let data = InitialData(ProblemSpec::new(1.0, phi, psi, TimeProfile::new(Arity::Two), 1).unwrap());
        for &(t, s) in &[(0.0, 0.0), (0.7, 0.2), (0.1, 0.9), (1.0, 1.0)] {
            let u = forward_solve(&data, t, s, &cfg()).unwrap();
            assert_abs_diff_eq!(u.coefficient(1), (-t).exp(), epsilon = 1e-14);
        }
    }

    #[test]
    fn forward_solve_single_mode_decay() {
        let mut phi = TimeProfile::new(Arity::One);
        phi.add_terms(2, [ExpTerm::constant(1.0)]).unwrap();
        let mut psi = TimeProfile::new(Arity::One);
        psi.add_terms(2, [ExpTerm::constant(1.0)]).unwrap();
        let data = InitialData(ProblemSpec::new(1.0, phi, psi, TimeProfile::new(Arity::Two), 2).unwrap());
        let u = forward_solve(&data, 0.5, 0.25, &cfg()).unwrap();
        assert_eq!(u.len(), 1);
        assert_abs_diff_eq!(u.coefficient(2), (-1.0f64).exp(), epsilon = 1e-15);
        let zero = InitialData(ProblemSpec::zero(1.0, 3).unwrap());
        assert!(forward_solve(&zero, 0.5, 0.5, &cfg()).unwrap().is_empty());
    }

    #[test]
    fn forward_solve_is_linear_in_data() {
        let base = ProblemSpec::worked_example();
        let mut scaled = ProblemSpec::zero(1.0, 1).unwrap();
        let c = -3.5;
        for (from, to) in [
            (&base.phi, &mut scaled.phi),
            (&base.psi, &mut scaled.psi),
            (&base.source, &mut scaled.source),
        ] {
            let terms = from
                .mode(1)
                .unwrap()
                .terms
                .iter()
                .map(|e| ExpTerm { coef: c * e.coef, ..*e });
            to.add_terms(1, terms).unwrap();
        }
        for &(t, s) in &[(0.4, 0.1), (0.2, 0.6)] {
            let u = forward_solve(&InitialData(base.clone()), t, s, &cfg()).unwrap();
            let v = forward_solve(&InitialData(scaled.clone()), t, s, &cfg()).unwrap();
            assert_relative_eq!(v.coefficient(1), c * u.coefficient(1), max_relative = 1e-14);
        }
    }

    #[test]
    fn forward_solve_satisfies_the_pde() {
        // Directional finite difference along (1, 1): u_t + u_s = f_n − n² u_n.
        let mut data = ProblemSpec::zero(1.0, 2).unwrap();
        data.phi
            .add_terms(
                2,
                [ExpTerm {
                    coef: 0.8,
                    offset: 0.0,
                    rate: -0.5,
                    rate2: 0.0,
                }],
            )
            .unwrap();
        data.psi.add_terms(2, [ExpTerm::constant(0.8)]).unwrap();
        data.source
            .add_terms(
                2,
                [ExpTerm {
                    coef: 1.3,
                    offset: 0.0,
                    rate: 0.4,
                    rate2: -0.9,
                }],
            )
            .unwrap();
        let data = InitialData(data);
        let tight = cfg().with_tolerance(1e-13).unwrap();
        let h = 1e-4;
        for &(t, s) in &[(0.6, 0.3), (0.3, 0.6), (0.8, 0.5)] {
            let fwd = forward_solve(&data, t + h, s + h, &tight).unwrap().coefficient(2);
            let bwd = forward_solve(&data, t - h, s - h, &tight).unwrap().coefficient(2);
            let mid = forward_solve(&data, t, s, &tight).unwrap().coefficient(2);
            let derivative = (fwd - bwd) / (2.0 * h);
            let rhs = data.0.source.eval(2, t, s) - 4.0 * mid;
            assert_abs_diff_eq!(derivative, rhs, epsilon = 1e-7);
        }
    }

    #[test]
    fn diagonal_branches_agree_for_compatible_data() {
        let spec = perturb(&ProblemSpec::worked_example(), PerturbationSpec::new(2).unwrap());
        for k in 0..=8 {
            let t = k as f64 / 8.0;
            let a = backward_solve_naive_on(&spec, t, t, Branch::D1, &cfg()).unwrap();
            let b = backward_solve_naive_on(&spec, t, t, Branch::D2, &cfg()).unwrap();
            for (x, y) in a.iter().zip(&b) {
                assert_relative_eq!(x.value, y.value, max_relative = 1e-8);
            }
        }
        assert!(backward_solve_naive_on(&spec, 0.2, 0.5, Branch::D1, &cfg()).is_err());
    }

    #[test]
    fn illposedness_closed_form() {
        for (m, want) in [(1u64, 2.0664), (2, 4.63050), (3, 37.606)] {
            let norm = illposedness_norm(m, 0.5, 0.5).unwrap();
            let mf = m as f64;
            let exact = (std::f64::consts::PI * (mf * mf).exp() / (2.0 * mf * mf)).sqrt();
            assert_relative_eq!(norm.value(), exact, max_relative = 1e-9);
            assert_relative_eq!(norm.value(), want, max_relative = 1e-4);
        }
    }

    #[test]
    fn illposedness_grows_without_bound() {
        let norms: Vec<f64> = (1..=8).map(|m| illposedness_norm(m, 0.5, 0.5).unwrap().ln).collect();
        assert!(norms.windows(2).all(|w| w[1] > w[0]));
        assert!(norms[7] > 20.0);
    }

    #[test]
    fn log_norm_handles_huge_modes() {
        let norm = illposedness_norm(40, 0.5, 0.5).unwrap();
        assert!(norm.ln.is_finite());
        assert!(norm.value().is_infinite());
        let want = 800.0 + (std::f64::consts::PI / (2.0 * 1600.0)).sqrt().ln();
        assert_relative_eq!(norm.ln, want, max_relative = 1e-12);
    }
}
