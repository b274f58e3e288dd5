//! End-to-end experiments on the worked example: the comparison table, the
//! blow-up of the unregularized solution, convergence-rate sweeps, the
//! closed-form regularized solution used as an oracle, and CSV output.
//!
//! The worked example has horizon `T = 1`, exact solution
//! `u = e^{−2t−s} sin x`, and is perturbed by `sin(m x)/m` with noise level
//! `ε = √(π/2)/m`.

use std::f64::consts::FRAC_PI_2;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::problem::{classify_domain, noise_level, perturb, PerturbationSpec, ProblemSpec, Region};
use crate::quadrature::QuadratureConfig;
use crate::regularizer::{regularized_solve, RegularizationParams};
use crate::solver::{backward_solve_naive, illposedness_norm, LogNorm, ModeEvaluation};
use crate::spectral::{evaluate_on_grid, evaluate_series, sin_mode, SineSpectrum, SpaceGrid, MAX_EXACT_MODE};

/// Times `τ` of the comparison rows `(π/2, τ, τ)`.
pub const TABLE_TIMES: [f64; 5] = [0.75, 0.5, 0.25, 0.125, 0.0];

/// One comparison between the exact and an approximate solution.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRow {
    pub x: f64,
    pub t: f64,
    pub s: f64,
    pub exact: f64,
    pub approx: f64,
    pub abs_error: f64,
    pub label: String,
}

impl ExperimentRow {
    pub fn new(x: f64, t: f64, s: f64, exact: f64, approx: f64, label: impl Into<String>) -> Self {
        Self {
            x,
            t,
            s,
            exact,
            approx,
            abs_error: (exact - approx).abs(),
            label: label.into(),
        }
    }
}

/// Space and time discretization plus the filter exponent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridConfig {
    space: SpaceGrid,
    time_intervals: usize,
    p: f64,
}

impl GridConfig {
    /// `k` even and ≥ 2, `time_intervals ≥ 1`, `p ≥ 1`.
    pub fn new(k: usize, time_intervals: usize, p: f64) -> Result<Self> {
        let space = SpaceGrid::new(k)?;
        if time_intervals < 1 {
            return Err(Error::InvalidParameter("time grid needs at least one interval".into()));
        }
        if !(p >= 1.0 && p.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "filter exponent p must be ≥ 1, got {p}"
            )));
        }
        Ok(Self {
            space,
            time_intervals,
            p,
        })
    }

    pub fn space(&self) -> &SpaceGrid {
        &self.space
    }

    pub fn time_intervals(&self) -> usize {
        self.time_intervals
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// Time node `k/M` on the unit horizon.
    pub fn time(&self, k: usize) -> f64 {
        k as f64 / self.time_intervals as f64
    }

    fn time_index(&self, tau: f64) -> Result<usize> {
        let k = (tau * self.time_intervals as f64).round();
        if (k / self.time_intervals as f64 - tau).abs() > 1e-12 || !(0.0..=self.time_intervals as f64).contains(&k) {
            return Err(Error::InvalidParameter(format!(
                "time {tau} is not a node of the grid with M = {}",
                self.time_intervals
            )));
        }
        Ok(k as usize)
    }
}

/// `"m=1e2"` for powers of ten, `"m=37"` otherwise.
pub fn mode_label(m: u64) -> String {
    let digits = m.to_string();
    if m >= 10 && digits[1..].bytes().all(|b| b == b'0') && digits.starts_with('1') {
        format!("m=1e{}", digits.len() - 1)
    } else {
        format!("m={m}")
    }
}

/// Parses a mode index written as an integer or in scientific notation
/// (`1e10`); it must be a whole number in `1..=2^53`.
pub fn parse_mode_index(text: &str) -> Result<u64> {
    let bad = || Error::InvalidParameter(format!("'{text}' is not a mode index ≥ 1"));
    let trimmed = text.trim();
    if let Ok(n) = trimmed.parse::<u64>() {
        return if (1..=MAX_EXACT_MODE).contains(&n) {
            Ok(n)
        } else {
            Err(bad())
        };
    }
    let v: f64 = trimmed.parse().map_err(|_| bad())?;
    if v.fract() != 0.0 || !(1.0..=MAX_EXACT_MODE as f64).contains(&v) {
        return Err(bad());
    }
    Ok(v as u64)
}

/// Exact solution `e^{−2t−s} sin x` of the worked example.
pub fn exact_solution(x: f64, t: f64, s: f64) -> f64 {
    (-2.0 * t - s).exp() * x.sin()
}

/// Sine spectrum of the exact solution at `(t, s)`.
pub fn exact_spectrum(t: f64, s: f64) -> SineSpectrum {
    SineSpectrum::single(1, (-2.0 * t - s).exp()).expect("mode 1 is valid")
}

/// Filter and mode-`m` coefficient of the closed-form regularized solution.
fn closed_form_parts(t: f64, s: f64, m: u64, p: f64) -> (f64, f64) {
    let eps = FRAC_PI_2.sqrt() / m as f64;
    let (tau, base) = match classify_domain(t, s, 1.0).map(|pt| pt.region) {
        Ok(Region::D2) => (s, (-1.0 - 2.0 * t).exp()),
        _ => (t, (-1.0 - t - s).exp()),
    };
    let power = (tau - 1.0) / p;
    let filter = |decay: f64| {
        let extra = if decay > 750.0 { 0.0 } else { (-decay).exp() };
        (power * (eps + extra).ln()).exp()
    };
    let lambda = m as f64 * m as f64;
    (filter(p) * base, filter(p * lambda) / m as f64)
}

/// Closed-form regularized solution of the perturbed worked example; on `D1`
///
/// ```text
/// (ε + e^{−p})^{(t−1)/p} e^{−1−t−s} sin x + (ε + e^{−pm²})^{(t−1)/p} sin(m x)/m
/// ```
///
/// with `ε = √(π/2)/m`, and on `D2` the same with `(s−1)/p` and `e^{−1−2t}`.
/// `sin(m x)` uses extended-precision argument reduction.
pub fn closed_form_regularized(x: f64, t: f64, s: f64, m: u64, p: f64) -> f64 {
    let (a, b) = closed_form_parts(t, s, m, p);
    a * x.sin() + b * sin_mode(m, x)
}

/// [`closed_form_regularized`] at every node of `grid`, with `sin(n x_j)`
/// taken from the exact rational phase.
pub fn closed_form_on_grid(grid: &SpaceGrid, t: f64, s: f64, m: u64, p: f64) -> Vec<f64> {
    let (a, b) = closed_form_parts(t, s, m, p);
    (0..grid.len())
        .map(|j| a * grid.sin_mode_at(1, j) + b * grid.sin_mode_at(m, j))
        .collect()
}

/// The worked example perturbed by `sin(m x)/m`, passed through the space
/// grid, with the matching filter parameters.
///
/// The projection keeps modes below `K/2`: the Simpson weights alias mode
/// `n` onto `K − n`, and are exact for `sin(kx)·sin(nx)` only when `k + n < K`.
pub fn table_problem(grid: &GridConfig, m: u64) -> Result<(ProblemSpec, RegularizationParams)> {
    let pert = PerturbationSpec::new(m)?;
    let space = grid.space();
    let spec = perturb(&ProblemSpec::worked_example(), pert).project(space, projection_cutoff(space))?;
    let params = RegularizationParams::new(grid.p(), noise_level(pert), spec.horizon())?;
    Ok((spec, params))
}

/// Largest mode kept when data pass through `grid`.
pub fn projection_cutoff(grid: &SpaceGrid) -> u64 {
    (grid.subdivisions() / 2).saturating_sub(1).max(1) as u64
}

/// Comparison rows at `(π/2, τ, τ)` for each `τ` in [`TABLE_TIMES`] and each
/// `m`. The approximation runs the full pipeline: perturb, project through
/// the space grid, regularize, and evaluate at the grid node `x = π/2`.
pub fn run_table1(grid: &GridConfig, m_values: &[u64]) -> Result<Vec<ExperimentRow>> {
    let cfg = QuadratureConfig::default();
    let space = grid.space();
    let mid = space.subdivisions() / 2;
    let x = space.node(mid);
    let mut rows = Vec::new();
    for &m in m_values {
        let (spec, params) = table_problem(grid, m)?;
        for tau in TABLE_TIMES {
            grid.time_index(tau)?;
            let v = regularized_solve(&spec, &params, tau, tau, &cfg)?;
            let approx: f64 = v.iter().map(|(n, c)| c * space.sin_mode_at(n, mid)).sum();
            rows.push(ExperimentRow::new(
                x,
                tau,
                tau,
                exact_solution(x, tau, tau),
                approx,
                mode_label(m),
            ));
        }
    }
    Ok(rows)
}

/// The same rows computed from the closed form.
pub fn table1_oracle(p: f64, m_values: &[u64]) -> Vec<ExperimentRow> {
    let x = FRAC_PI_2;
    m_values
        .iter()
        .flat_map(|&m| {
            TABLE_TIMES.iter().map(move |&tau| {
                ExperimentRow::new(
                    x,
                    tau,
                    tau,
                    exact_solution(x, tau, tau),
                    closed_form_regularized(x, tau, tau, m, p),
                    mode_label(m),
                )
            })
        })
        .collect()
}

/// Rows at `x = π/3`, where `sin(m x)` need not vanish. The perturbation is
/// kept as an exact spectral term (not projected) so that it stays visible
/// for every `m`.
pub fn run_table1_supplementary(grid: &GridConfig, m_values: &[u64]) -> Result<Vec<ExperimentRow>> {
    let cfg = QuadratureConfig::default();
    let x = std::f64::consts::FRAC_PI_3;
    let mut rows = Vec::new();
    for &m in m_values {
        let pert = PerturbationSpec::new(m)?;
        let spec = perturb(&ProblemSpec::worked_example(), pert);
        let params = RegularizationParams::new(grid.p(), noise_level(pert), spec.horizon())?;
        for tau in TABLE_TIMES {
            grid.time_index(tau)?;
            let v = regularized_solve(&spec, &params, tau, tau, &cfg)?;
            let approx = evaluate_series(&v, &[x])?[0];
            rows.push(ExperimentRow::new(
                x,
                tau,
                tau,
                exact_solution(x, tau, tau),
                approx,
                format!("{} supplementary", mode_label(m)),
            ));
        }
    }
    Ok(rows)
}

/// `ln ‖u_m − u‖` at `(½, ½)` for the unregularized solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DivergencePoint {
    pub m: u64,
    pub norm: LogNorm,
}

pub fn run_divergence(m_values: &[u64]) -> Result<Vec<DivergencePoint>> {
    m_values
        .iter()
        .map(|&m| {
            Ok(DivergencePoint {
                m,
                norm: illposedness_norm(m, 0.5, 0.5)?,
            })
        })
        .collect()
}

/// Unregularized solutions `u_m(x_j, ½, ½)` on the space grid, one column
/// per `m`, next to the exact solution. Overflowed modes give `±inf`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileTable {
    pub x: Vec<f64>,
    pub exact: Vec<f64>,
    pub columns: Vec<(u64, Vec<f64>)>,
}

pub fn divergence_profiles(m_values: &[u64], grid: &SpaceGrid) -> Result<ProfileTable> {
    let cfg = QuadratureConfig::default();
    let exact = evaluate_on_grid(&exact_spectrum(0.5, 0.5), grid);
    let columns = m_values
        .iter()
        .map(|&m| {
            let spec = perturb(&ProblemSpec::worked_example(), PerturbationSpec::new(m)?);
            let evals = backward_solve_naive(&spec, 0.5, 0.5, &cfg)?;
            Ok((m, sum_on_grid(&evals, grid)))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ProfileTable {
        x: grid.nodes(),
        exact,
        columns,
    })
}

fn sum_on_grid(evals: &[ModeEvaluation], grid: &SpaceGrid) -> Vec<f64> {
    (0..grid.len())
        .map(|j| {
            evals
                .iter()
                .map(|e| {
                    let phase = grid.sin_mode_at(e.n, j);
                    // An overflowed mode still vanishes at its nodes.
                    if phase == 0.0 {
                        0.0
                    } else {
                        e.value * phase
                    }
                })
                .sum()
        })
        .collect()
}

/// Least-squares fit of `ln error` against `ln ε`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square deviation of the points from the fitted line.
    pub residual: f64,
    /// `(ε, ‖v^ε − u‖)` for each `m`.
    pub points: Vec<(f64, f64)>,
}

/// Measures `‖v^ε(·, t, s) − u(·, t, s)‖` for each `m` with `ε = √(π/2)/m`
/// and fits the convergence rate. The perturbation is kept as an exact
/// spectral term, so its own contribution to the error is included.
pub fn run_convergence_sweep(p: f64, m_values: &[u64], point: (f64, f64)) -> Result<SweepResult> {
    let cfg = QuadratureConfig::default();
    let (t, s) = point;
    let exact = exact_spectrum(t, s);
    let points = m_values
        .iter()
        .map(|&m| {
            let pert = PerturbationSpec::new(m)?;
            let spec = perturb(&ProblemSpec::worked_example(), pert);
            let eps = noise_level(pert);
            let params = RegularizationParams::new(p, eps, spec.horizon())?;
            let v = regularized_solve(&spec, &params, t, s, &cfg)?;
            Ok((eps, v.sub(&exact).l2_norm()))
        })
        .collect::<Result<Vec<_>>>()?;
    let (slope, intercept, residual) = fit_log_log(&points)?;
    Ok(SweepResult {
        slope,
        intercept,
        residual,
        points,
    })
}

/// Slope, intercept and RMS residual of the line through `(ln x, ln y)`.
pub fn fit_log_log(points: &[(f64, f64)]) -> Result<(f64, f64, f64)> {
    if let Some(&(x, y)) = points
        .iter()
        .find(|(x, y)| !(*x > 0.0 && *y > 0.0 && x.is_finite() && y.is_finite()))
    {
        return Err(Error::DegenerateFit(format!("cannot take logarithms of ({x}, {y})")));
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|(x, y)| (x.ln(), y.ln())).collect();
    let mut distinct: Vec<f64> = logs.iter().map(|p| p.0).collect();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < 2 {
        return Err(Error::DegenerateFit(format!(
            "need at least 2 distinct noise levels, got {}",
            distinct.len()
        )));
    }
    let n = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (logs
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    Ok((slope, intercept, residual))
}

/// `v` in plain decimal notation with 10 significant digits.
pub fn format_decimal(v: f64) -> String {
    if !v.is_finite() {
        return v.to_string();
    }
    if v == 0.0 {
        return "0.000000000".to_string();
    }
    let sci = format!("{v:.9e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let (sign, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => ("-", rest),
        None => ("", mantissa),
    };
    let digits: String = mantissa.chars().filter(|c| *c != '.').collect();
    let body = if exp < 0 {
        format!("0.{}{digits}", "0".repeat((-exp - 1) as usize))
    } else {
        let point = exp as usize + 1;
        if point >= digits.len() {
            format!("{digits}{}", "0".repeat(point - digits.len()))
        } else {
            format!("{}.{}", &digits[..point], &digits[point..])
        }
    };
    format!("{sign}{body}")
}

/// Writes `x,t,s,exact,approx,abs_error,label` and one line per row.
pub fn emit_csv(rows: &[ExperimentRow], destination: &Path) -> Result<()> {
    let csv_err = |source| Error::Csv {
        path: destination.to_path_buf(),
        source,
    };
    let mut out = csv::Writer::from_path(destination).map_err(csv_err)?;
    out.write_record(["x", "t", "s", "exact", "approx", "abs_error", "label"])
        .map_err(csv_err)?;
    for r in rows {
        out.write_record([
            format_decimal(r.x),
            format_decimal(r.t),
            format_decimal(r.s),
            format_decimal(r.exact),
            format_decimal(r.approx),
            format_decimal(r.abs_error),
            r.label.clone(),
        ])
        .map_err(csv_err)?;
    }
    out.flush().map_err(|e| Error::io(destination, e))
}

/// Writes a header and rows of already-formatted cells.
pub fn emit_table<W: Write>(out: W, header: &[String], rows: &[Vec<String>]) -> std::result::Result<(), csv::Error> {
    let mut out = csv::Writer::from_writer(out);
    out.write_record(header)?;
    for r in rows {
        out.write_record(r)?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn reference_grid() -> GridConfig {
        GridConfig::new(100, 80, 10.0).unwrap()
    }

    #[test]
    fn grid_config_validation() {
        assert!(GridConfig::new(99, 80, 10.0).is_err());
        assert!(GridConfig::new(100, 0, 10.0).is_err());
        assert!(GridConfig::new(100, 80, 0.5).is_err());
        assert!(GridConfig::new(100, 3, 10.0).unwrap().time_index(0.5).is_err());
        assert_eq!(reference_grid().time_index(0.125).unwrap(), 10);
    }

    #[test]
    fn labels_and_mode_parsing() {
        assert_eq!(mode_label(100), "m=1e2");
        assert_eq!(mode_label(10_000_000_000), "m=1e10");
        assert_eq!(mode_label(1), "m=1");
        assert_eq!(mode_label(30), "m=30");
        assert_eq!(parse_mode_index("1e10").unwrap(), 10_000_000_000);
        assert_eq!(parse_mode_index(" 42 ").unwrap(), 42);
        assert_eq!(parse_mode_index("2.5E3").unwrap(), 2500);
        for bad in ["0", "1.5", "-3", "abc", "1e20"] {
            assert!(parse_mode_index(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn closed_form_examples() {
        assert_abs_diff_eq!(
            closed_form_regularized(FRAC_PI_2, 0.0, 0.0, 10_000_000_000, 10.0),
            0.999_999_723_9,
            epsilon = 1e-9
        );
        assert_abs_diff_eq!(
            closed_form_regularized(FRAC_PI_2, 0.125, 0.125, 100, 10.0),
            0.420_159_558_5,
            epsilon = 1e-9
        );
        assert_eq!(closed_form_regularized(0.0, 0.3, 0.6, 100, 10.0), 0.0);
    }

    #[test]
    fn closed_form_branches_meet_on_the_diagonal() {
        for tau in [0.0, 0.4, 1.0] {
            let below = closed_form_regularized(1.1, tau, tau - 1e-13, 5, 3.0);
            let above = closed_form_regularized(1.1, tau - 1e-13, tau, 5, 3.0);
            assert_abs_diff_eq!(below, above, epsilon = 1e-11);
        }
    }

    #[test]
    fn table_rows_match_the_closed_form() {
        let rows = run_table1(&reference_grid(), &[100, 10_000_000_000]).unwrap();
        let oracle = table1_oracle(10.0, &[100, 10_000_000_000]);
        assert_eq!(rows.len(), 10);
        for (r, o) in rows.iter().zip(&oracle) {
            assert_eq!(r.label, o.label);
            assert_abs_diff_eq!(r.approx, o.approx, epsilon = 1e-9);
            assert_abs_diff_eq!(r.exact, o.exact, epsilon = 1e-15);
            assert_eq!(r.abs_error, (r.exact - r.approx).abs());
        }
        assert_abs_diff_eq!(rows[1].approx, 0.168_433_906_8, epsilon = 1e-9);
        assert_abs_diff_eq!(rows[1].abs_error, 0.054_696_253_3, epsilon = 1e-9);
        assert_abs_diff_eq!(rows[5].abs_error, 7.4e-9, epsilon = 1e-6);
        assert_abs_diff_eq!(rows[5].abs_error, 7.274e-9, epsilon = 1e-11);
        assert_abs_diff_eq!(rows[9].abs_error, 2.761e-7, epsilon = 1e-10);
    }

    #[test]
    fn supplementary_rows_see_the_perturbation() {
        let rows = run_table1_supplementary(&reference_grid(), &[4]).unwrap();
        for r in &rows {
            let want = closed_form_regularized(r.x, r.t, r.s, 4, 10.0);
            assert_abs_diff_eq!(r.approx, want, epsilon = 1e-10);
            assert!(r.label.ends_with("supplementary"));
        }
    }

    #[test]
    fn divergence_norms_and_profiles() {
        let pts = run_divergence(&[1, 2, 3]).unwrap();
        assert_abs_diff_eq!(
            pts[1].norm.ln,
            (std::f64::consts::PI * 4f64.exp() / 8.0).sqrt().ln(),
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(pts[1].norm.value(), 4.630_50, epsilon = 1e-4);
        assert_abs_diff_eq!(pts[1].norm.ln, 1.5327, epsilon = 1e-4);
        assert_abs_diff_eq!(pts[2].norm.value(), 37.606, epsilon = 1e-3);

        let grid = SpaceGrid::new(12).unwrap();
        let table = divergence_profiles(&[2, 40], &grid).unwrap();
        let m2 = &table.columns[0].1;
        for ((x, exact), got) in table.x.iter().zip(&table.exact).zip(m2) {
            let want = exact + 2f64.exp() / 2.0 * (2.0 * x).sin();
            assert_abs_diff_eq!(*got, want, epsilon = 1e-9);
        }
        let m40 = &table.columns[1].1;
        assert_eq!(m40[0], 0.0);
        assert!(m40[1].is_infinite());
    }

    #[test]
    fn sweep_at_the_final_time_is_first_order() {
        let r = run_convergence_sweep(10.0, &[100, 10_000, 1_000_000, 100_000_000], (1.0, 1.0)).unwrap();
        assert!((r.slope - 1.0).abs() < 1e-9, "slope {}", r.slope);
        assert!(r.residual < 1e-9);
    }

    #[test]
    fn degenerate_fits_are_rejected() {
        assert!(matches!(fit_log_log(&[(0.1, 1.0)]), Err(Error::DegenerateFit(_))));
        assert!(matches!(
            fit_log_log(&[(0.1, 1.0), (0.1, 2.0)]),
            Err(Error::DegenerateFit(_))
        ));
        assert!(matches!(
            fit_log_log(&[(0.1, 0.0), (0.2, 2.0)]),
            Err(Error::DegenerateFit(_))
        ));
        let (slope, intercept, residual) = fit_log_log(&[(1.0, 3.0), (10.0, 30.0), (100.0, 300.0)]).unwrap();
        assert_abs_diff_eq!(slope, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(intercept, 3f64.ln(), epsilon = 1e-12);
        assert!(residual < 1e-12);
    }

    #[test]
    fn decimal_formatting() {
        assert_eq!(format_decimal(0.2231301601484298), "0.2231301601");
        assert_eq!(format_decimal(-0.0546962533), "-0.05469625330");
        assert_eq!(format_decimal(7.4e-9), "0.000000007400000000");
        assert_eq!(format_decimal(FRAC_PI_2), "1.570796327");
        assert_eq!(format_decimal(12345678901.0), "12345678900");
        assert_eq!(format_decimal(0.0), "0.000000000");
        for v in [0.1053992172, 3.14159e-5, 123.456] {
            let back: f64 = format_decimal(v).parse().unwrap();
            assert!((back - v).abs() <= 1e-9 * v.abs());
        }
    }

    #[test]
    fn csv_output() {
        let dir = tempfile::tempdir().unwrap();
        let empty = dir.path().join("empty.csv");
        emit_csv(&[], &empty).unwrap();
        assert_eq!(
            std::fs::read_to_string(&empty).unwrap(),
            "x,t,s,exact,approx,abs_error,label\n"
        );

        let one = dir.path().join("one.csv");
        let row = ExperimentRow::new(FRAC_PI_2, 0.5, 0.5, 0.2231301601, 0.1684339068, "m=1e2");
        emit_csv(&[row], &one).unwrap();
        let text = std::fs::read_to_string(&one).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert!(text.ends_with('\n'));
        assert_eq!(
            text.lines().nth(1).unwrap(),
            "1.570796327,0.5000000000,0.5000000000,0.2231301601,0.1684339068,0.05469625330,m=1e2"
        );

        let missing = dir.path().join("no/such/dir/out.csv");
        let err = emit_csv(&[], &missing).unwrap_err().to_string();
        assert!(err.contains("no/such/dir/out.csv"), "{err}");
    }
}
