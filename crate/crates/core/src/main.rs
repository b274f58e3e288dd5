//! Command-line driver for the regularization experiments.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use ultraparabolic::experiments::{
    divergence_profiles, emit_csv, emit_table, format_decimal, mode_label, parse_mode_index, run_convergence_sweep,
    run_divergence, run_table1, run_table1_supplementary, GridConfig,
};
use ultraparabolic::problem::{compatibility_check, load_problem};
use ultraparabolic::quadrature::QuadratureConfig;
use ultraparabolic::regularizer::{regularized_solve, RegularizationParams};
use ultraparabolic::spectral::{evaluate_on_grid, SpaceGrid};

#[derive(Parser)]
#[command(
    name = "ultrapara",
    version,
    about = "Filter-regularized backward solutions of u_t + u_s - u_xx = f"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compare exact and regularized solutions at (pi/2, tau, tau).
    Table1 {
        /// Space subdivisions.
        #[arg(long = "K", default_value = "100", value_parser = parse_count)]
        k: usize,
        /// Time subdivisions.
        #[arg(long = "M", default_value = "80", value_parser = parse_count)]
        time_intervals: usize,
        #[arg(long, default_value_t = 10.0)]
        p: f64,
        /// Perturbation indices, comma separated.
        #[arg(long, default_value = "1e2,1e10", value_parser = parse_mode_list, value_delimiter = ',')]
        m: Vec<u64>,
        #[arg(long)]
        out: PathBuf,
        /// Also emit rows at x = pi/3.
        #[arg(long)]
        supplementary: bool,
    },
    /// Norm of the unregularized error at (1/2, 1/2) as m grows.
    Diverge {
        #[arg(long, default_value = "1,2,3", value_parser = parse_mode_list, value_delimiter = ',')]
        m: Vec<u64>,
        /// Two-column CSV `m,log_norm`.
        #[arg(long)]
        out: PathBuf,
        /// Spatial profiles `x,exact,m=...` on the space grid.
        #[arg(long)]
        profiles: Option<PathBuf>,
        #[arg(long = "K", default_value = "100", value_parser = parse_count)]
        k: usize,
    },
    /// Fit the convergence rate of the regularized solution in eps.
    Sweep {
        #[arg(long, default_value_t = 10.0)]
        p: f64,
        #[arg(long, default_value = "1e2,1e4,1e6,1e8", value_parser = parse_mode_list, value_delimiter = ',')]
        m: Vec<u64>,
        /// Time point `t,s`.
        #[arg(long, default_value = "0,0", value_parser = parse_point)]
        point: (f64, f64),
        /// Two-column CSV `eps,error`.
        #[arg(long)]
        out: PathBuf,
    },
    /// Regularized solution of a problem file at one time point.
    Solve {
        #[arg(long)]
        problem: PathBuf,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        t: f64,
        #[arg(long)]
        s: f64,
        /// Space subdivisions of the output grid.
        #[arg(long = "K", default_value = "100", value_parser = parse_count)]
        k: usize,
        /// CSV `x,value`; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_count(text: &str) -> std::result::Result<usize, String> {
    let n = parse_mode_index(text).map_err(|e| e.to_string())?;
    usize::try_from(n).map_err(|e| e.to_string())
}

fn parse_mode_list(text: &str) -> std::result::Result<u64, String> {
    parse_mode_index(text).map_err(|e| e.to_string())
}

fn parse_point(text: &str) -> std::result::Result<(f64, f64), String> {
    let (t, s) = text
        .split_once(',')
        .ok_or_else(|| format!("expected 't,s', got '{text}'"))?;
    let num = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("'{v}': {e}"));
    Ok((num(t)?, num(s)?))
}

/// Decimal cells, switching to scientific notation for blown-up values.
fn cell(v: f64) -> String {
    if v.is_finite() && v.abs() >= 1e15 {
        format!("{v:.9e}")
    } else {
        format_decimal(v)
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(BufWriter::new(file))
}

fn write_table(path: &Path, header: &[String], rows: &[Vec<String>]) -> Result<()> {
    emit_table(create(path)?, header, rows).with_context(|| format!("writing {}", path.display()))
}

fn table1(k: usize, time_intervals: usize, p: f64, m: &[u64], out: &Path, supplementary: bool) -> Result<()> {
    let grid = GridConfig::new(k, time_intervals, p)?;
    let mut rows = run_table1(&grid, m)?;
    if supplementary {
        rows.extend(run_table1_supplementary(&grid, m)?);
    }
    emit_csv(&rows, out)?;
    for r in &rows {
        eprintln!(
            "{:>22} tau={:<6} exact={} approx={} err={:.3e}",
            r.label,
            r.t,
            format_decimal(r.exact),
            format_decimal(r.approx),
            r.abs_error
        );
    }
    Ok(())
}

fn diverge(m: &[u64], out: &Path, profiles: Option<&Path>, k: usize) -> Result<()> {
    let points = run_divergence(m)?;
    let rows: Vec<Vec<String>> = points
        .iter()
        .map(|d| vec![d.m.to_string(), format_decimal(d.norm.ln)])
        .collect();
    write_table(out, &["m".into(), "log_norm".into()], &rows)?;
    for d in &points {
        eprintln!("m={:<6} ln|u_m - u| = {:.6}", d.m, d.norm.ln);
    }
    if let Some(path) = profiles {
        let table = divergence_profiles(m, &SpaceGrid::new(k)?)?;
        let mut header = vec!["x".to_string(), "exact".to_string()];
        header.extend(table.columns.iter().map(|(m, _)| mode_label(*m)));
        let rows: Vec<Vec<String>> = (0..table.x.len())
            .map(|j| {
                let mut row = vec![format_decimal(table.x[j]), format_decimal(table.exact[j])];
                row.extend(table.columns.iter().map(|(_, v)| cell(v[j])));
                row
            })
            .collect();
        write_table(path, &header, &rows)?;
    }
    Ok(())
}

fn sweep(p: f64, m: &[u64], point: (f64, f64), out: &Path) -> Result<()> {
    let result = run_convergence_sweep(p, m, point)?;
    let rows: Vec<Vec<String>> = result
        .points
        .iter()
        .map(|(eps, err)| vec![format_decimal(*eps), format_decimal(*err)])
        .collect();
    write_table(out, &["eps".into(), "error".into()], &rows)?;
    println!(
        "slope={:.6} intercept={:.6} residual={:.3e}",
        result.slope, result.intercept, result.residual
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn solve(problem: &Path, eps: f64, p: f64, t: f64, s: f64, k: usize, out: Option<&Path>) -> Result<()> {
    let spec = load_problem(problem)?;
    let report = compatibility_check(&spec, spec.default_compatibility_tolerance())?;
    eprintln!(
        "compatibility residual {:.3e} (tolerance {:.1e}){}",
        report.max_residual,
        report.tolerance,
        if report.passed() {
            ""
        } else {
            ": edge data disagree at (T, T), error bounds do not apply"
        }
    );
    let params = RegularizationParams::new(p, eps, spec.horizon())?;
    let v = regularized_solve(&spec, &params, t, s, &QuadratureConfig::default())?;
    let grid = SpaceGrid::new(k)?;
    if v.iter().any(|(n, _)| n as usize >= k) {
        eprintln!("note: modes at or above K are sampled at grid nodes only");
    }
    let values = evaluate_on_grid(&v, &grid);
    let rows: Vec<Vec<String>> = grid
        .nodes()
        .iter()
        .zip(&values)
        .map(|(x, u)| vec![format_decimal(*x), cell(*u)])
        .collect();
    let header = ["x".to_string(), "value".to_string()];
    match out {
        Some(path) => write_table(path, &header, &rows),
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            emit_table(&mut lock, &header, &rows).context("writing to standard output")?;
            lock.flush().context("writing to standard output")
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Table1 {
            k,
            time_intervals,
            p,
            m,
            out,
            supplementary,
        } => table1(k, time_intervals, p, &m, &out, supplementary),
        Command::Diverge { m, out, profiles, k } => diverge(&m, &out, profiles.as_deref(), k),
        Command::Sweep { p, m, point, out } => sweep(p, &m, point, &out),
        Command::Solve {
            problem,
            eps,
            p,
            t,
            s,
            k,
            out,
        } => {
            if !eps.is_finite() || !p.is_finite() {
                bail!("--eps and --p must be finite");
            }
            solve(&problem, eps, p, t, s, k, out.as_deref())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
