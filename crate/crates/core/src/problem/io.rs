//! Problem files.
//!
//! A problem is a TOML document:
//!
//! ```toml
//! # start from the built-in worked example (optional)
//! builtin = "paper-example"
//! horizon = 1.0
//! n_max = 8
//! perturbation = 100          # adds sin(100 x)/100 to both edge data
//!
//! [[phi]]                     # φ_n(t) = Σ coef·exp(offset + rate·t)
//! mode = 1
//! terms = [{ offset = -1.0, rate = -2.0 }]
//!
//! [[source]]                  # f_n(t, s) = Σ coef·exp(offset + rate·t + rate2·s)
//! mode = 1
//! terms = [{ coef = -2.0, rate = -2.0, rate2 = -1.0 }]
//!
//! [sampled]                   # CSV paths, relative to the problem file
//! psi = "psi.csv"
//! ```
//!
//! Sampled edge data use the columns `time,<mode>,<mode>,…`; the sampled
//! source uses `t,s,<mode>,…` and must cover the full square grid. Header
//! names of the time columns are free; mode columns are mode indices.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use super::{
    perturb, Arity, ExpTerm, PerturbationSpec, ProblemSpec, Sampled, SampledSeries, SampledSurface, TimeProfile,
};
use crate::error::{Error, Result};

/// Name of the built-in worked example.
pub const BUILTIN_WORKED_EXAMPLE: &str = "paper-example";

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemFile {
    builtin: Option<String>,
    horizon: Option<f64>,
    n_max: Option<u64>,
    perturbation: Option<u64>,
    #[serde(default)]
    phi: Vec<ModeEntry>,
    #[serde(default)]
    psi: Vec<ModeEntry>,
    #[serde(default)]
    source: Vec<ModeEntry>,
    #[serde(default)]
    sampled: SampledPaths,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModeEntry {
    mode: u64,
    terms: Vec<ExpTerm>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SampledPaths {
    phi: Option<PathBuf>,
    psi: Option<PathBuf>,
    source: Option<PathBuf>,
}

/// Reads a problem file; relative CSV paths resolve against its directory.
pub fn load_problem(path: &Path) -> Result<ProblemSpec> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    parse_problem(&text, base)
}

/// Parses problem text; `base_dir` anchors relative CSV paths.
pub fn parse_problem(text: &str, base_dir: &Path) -> Result<ProblemSpec> {
    let file: ProblemFile = toml::from_str(text).map_err(|e| Error::Format(e.to_string()))?;

    let mut spec = match file.builtin.as_deref() {
        None => {
            let horizon = file.horizon.ok_or_else(|| Error::Format("missing `horizon`".into()))?;
            ProblemSpec::zero(horizon, 1)?
        }
        Some(BUILTIN_WORKED_EXAMPLE) => {
            let spec = ProblemSpec::worked_example();
            if let Some(h) = file.horizon {
                if h != spec.horizon() {
                    return Err(Error::Format(format!(
                        "builtin `{BUILTIN_WORKED_EXAMPLE}` has horizon {}, file says {h}",
                        spec.horizon()
                    )));
                }
            }
            spec
        }
        Some(other) => return Err(Error::Format(format!("unknown builtin `{other}`"))),
    };
    let horizon = spec.horizon();

    let mut highest = spec.n_max();
    for (entries, profile) in [
        (&file.phi, &mut spec.phi),
        (&file.psi, &mut spec.psi),
        (&file.source, &mut spec.source),
    ] {
        for entry in entries {
            profile.add_terms(entry.mode, entry.terms.iter().copied())?;
            highest = highest.max(entry.mode);
        }
    }

    let resolve = |p: &PathBuf| if p.is_absolute() { p.clone() } else { base_dir.join(p) };
    if let Some(p) = &file.sampled.phi {
        highest = highest.max(read_series_csv(&resolve(p), horizon, &mut spec.phi)?);
    }
    if let Some(p) = &file.sampled.psi {
        highest = highest.max(read_series_csv(&resolve(p), horizon, &mut spec.psi)?);
    }
    if let Some(p) = &file.sampled.source {
        highest = highest.max(read_surface_csv(&resolve(p), horizon, &mut spec.source)?);
    }

    let spec = ProblemSpec::new(horizon, spec.phi, spec.psi, spec.source, file.n_max.unwrap_or(highest))?;
    match file.perturbation {
        Some(m) => Ok(perturb(&spec, PerturbationSpec::new(m)?)),
        None => Ok(spec),
    }
}

fn csv_error(path: &Path) -> impl Fn(csv::Error) -> Error + '_ {
    move |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    }
}

/// Mode indices from the header, skipping the leading time columns.
fn mode_columns(path: &Path, headers: &csv::StringRecord, skip: usize) -> Result<Vec<u64>> {
    headers
        .iter()
        .skip(skip)
        .map(|h| match h.trim().parse::<u64>() {
            Ok(n) if n >= 1 => Ok(n),
            _ => Err(Error::Format(format!(
                "{}: column `{h}` is not a mode index",
                path.display()
            ))),
        })
        .collect()
}

fn parse_field(path: &Path, row: usize, field: &str) -> Result<f64> {
    field
        .trim()
        .parse::<f64>()
        .map_err(|_| Error::Format(format!("{}: row {row}: `{field}` is not a number", path.display())))
}

/// Index `k` with `value = k·step` to within rounding.
fn grid_index(path: &Path, value: f64, step: f64, intervals: usize) -> Result<usize> {
    let k = (value / step).round();
    if k < 0.0 || k > intervals as f64 || (value - k * step).abs() > 1e-9 * step.max(1.0) {
        return Err(Error::Format(format!(
            "{}: time {value} is not on the uniform grid with step {step}",
            path.display()
        )));
    }
    Ok(k as usize)
}

fn read_series_csv(path: &Path, horizon: f64, profile: &mut TimeProfile) -> Result<u64> {
    debug_assert_eq!(profile.arity(), Arity::One);
    let mut reader = csv::Reader::from_path(path).map_err(csv_error(path))?;
    let modes = mode_columns(path, reader.headers().map_err(csv_error(path))?, 1)?;
    let mut times = Vec::new();
    let mut columns = vec![Vec::new(); modes.len()];
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(csv_error(path))?;
        times.push(parse_field(path, row, &record[0])?);
        for (col, field) in columns.iter_mut().zip(record.iter().skip(1)) {
            col.push(parse_field(path, row, field)?);
        }
    }
    let intervals = times.len().saturating_sub(1);
    if intervals < 1 {
        return Err(Error::Format(format!("{}: no samples", path.display())));
    }
    let step = horizon / intervals as f64;
    for (k, &t) in times.iter().enumerate() {
        if grid_index(path, t, step, intervals)? != k {
            return Err(Error::Format(format!(
                "{}: sample times must be k·T/M in increasing order from 0 to T",
                path.display()
            )));
        }
    }
    for (&n, values) in modes.iter().zip(columns) {
        profile.add_sampled(n, Sampled::Series(SampledSeries::new(horizon, values)?))?;
    }
    Ok(modes.into_iter().max().unwrap_or(1))
}

fn read_surface_csv(path: &Path, horizon: f64, profile: &mut TimeProfile) -> Result<u64> {
    debug_assert_eq!(profile.arity(), Arity::Two);
    let mut reader = csv::Reader::from_path(path).map_err(csv_error(path))?;
    let modes = mode_columns(path, reader.headers().map_err(csv_error(path))?, 2)?;
    let mut rows = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(csv_error(path))?;
        let values: Vec<f64> = record
            .iter()
            .map(|field| parse_field(path, row, field))
            .collect::<Result<_>>()?;
        rows.push(values);
    }
    let side = (rows.len() as f64).sqrt().round() as usize;
    if side < 2 || side * side != rows.len() {
        return Err(Error::Format(format!(
            "{}: {} rows do not form a square (M+1)×(M+1) grid",
            path.display(),
            rows.len()
        )));
    }
    let intervals = side - 1;
    let step = horizon / intervals as f64;
    let mut grids: BTreeMap<u64, Vec<Option<f64>>> = modes.iter().map(|&n| (n, vec![None; side * side])).collect();
    for row in &rows {
        let k = grid_index(path, row[0], step, intervals)?;
        let l = grid_index(path, row[1], step, intervals)?;
        for (&n, &v) in modes.iter().zip(&row[2..]) {
            let slot = &mut grids.get_mut(&n).expect("mode column")[k * side + l];
            if slot.replace(v).is_some() {
                return Err(Error::Format(format!(
                    "{}: duplicate sample at (t, s) = ({}, {})",
                    path.display(),
                    row[0],
                    row[1]
                )));
            }
        }
    }
    for (n, values) in grids {
        let values = values
            .into_iter()
            .collect::<Option<Vec<f64>>>()
            .ok_or_else(|| Error::Format(format!("{}: grid has gaps", path.display())))?;
        profile.add_sampled(n, Sampled::Surface(SampledSurface::new(horizon, intervals, values)?))?;
    }
    Ok(modes.into_iter().max().unwrap_or(1))
}
