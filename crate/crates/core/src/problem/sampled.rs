//! Time profiles given as samples on a uniform grid over `[0, T]`,
//! interpolated with local four-point (cubic) Lagrange stencils.

use crate::error::{Error, Result};

/// Local cubic Lagrange weights for the stencil `i-1, i, i+1, i+2` at
/// fractional offset `u` from node `i`.
fn cubic_weights(u: f64) -> [f64; 4] {
    let (um1, up1, um2) = (u - 1.0, u + 1.0, u - 2.0);
    [
        -u * um1 * um2 / 6.0,
        up1 * um1 * um2 / 2.0,
        -up1 * u * um2 / 2.0,
        up1 * u * um1 / 6.0,
    ]
}

/// Stencil base and offset for position `x` on a grid of `intervals` cells
/// of width `h`. Stencils shift inward at the ends of the grid.
fn locate(x: f64, h: f64, intervals: usize) -> (usize, f64) {
    let pos = (x / h).clamp(0.0, intervals as f64);
    let cell = (pos.floor() as usize).min(intervals - 1);
    let base = cell.clamp(1, intervals - 2);
    (base - 1, pos - base as f64)
}

fn check_grid(horizon: f64, intervals: usize) -> Result<()> {
    if intervals < 3 {
        return Err(Error::InvalidParameter(format!(
            "sampled profiles need at least 3 time intervals, got {intervals}"
        )));
    }
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "sampled profile horizon must be positive, got {horizon}"
        )));
    }
    Ok(())
}

/// Samples `g(t_k)`, `t_k = k·T/M`, of a function of one time variable.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledSeries {
    horizon: f64,
    values: Vec<f64>,
}

impl SampledSeries {
    /// `values[k]` is the sample at `k·horizon/(values.len() - 1)`.
    pub fn new(horizon: f64, values: Vec<f64>) -> Result<Self> {
        check_grid(horizon, values.len().saturating_sub(1))?;
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite sample".into()));
        }
        Ok(Self { horizon, values })
    }

    pub fn intervals(&self) -> usize {
        self.values.len() - 1
    }

    pub fn step(&self) -> f64 {
        self.horizon / self.intervals() as f64
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn eval(&self, t: f64) -> f64 {
        let (start, u) = locate(t, self.step(), self.intervals());
        cubic_weights(u)
            .iter()
            .zip(&self.values[start..start + 4])
            .map(|(w, v)| w * v)
            .sum()
    }

    pub(crate) fn same_grid(&self, other: &Self) -> bool {
        self.horizon == other.horizon && self.values.len() == other.values.len()
    }

    pub(crate) fn axpy(&mut self, a: f64, other: &Self) {
        for (v, w) in self.values.iter_mut().zip(&other.values) {
            *v += a * w;
        }
    }

    pub(crate) fn scale(&mut self, a: f64) {
        self.values.iter_mut().for_each(|v| *v *= a);
    }
}

/// Samples `g(t_k, s_l)` of a function of two time variables on the square
/// grid with `M` intervals per axis; stored row-major in `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledSurface {
    horizon: f64,
    intervals: usize,
    values: Vec<f64>,
}

impl SampledSurface {
    pub fn new(horizon: f64, intervals: usize, values: Vec<f64>) -> Result<Self> {
        check_grid(horizon, intervals)?;
        let expected = (intervals + 1) * (intervals + 1);
        if values.len() != expected {
            return Err(Error::LengthMismatch {
                expected,
                actual: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite sample".into()));
        }
        Ok(Self {
            horizon,
            intervals,
            values,
        })
    }

    /// Tabulates `g` on the grid.
    pub fn tabulate<G: Fn(f64, f64) -> f64>(horizon: f64, intervals: usize, g: G) -> Result<Self> {
        let h = horizon / intervals as f64;
        let values = (0..=intervals)
            .flat_map(|k| (0..=intervals).map(move |l| (k, l)))
            .map(|(k, l)| g(k as f64 * h, l as f64 * h))
            .collect();
        Self::new(horizon, intervals, values)
    }

    pub fn intervals(&self) -> usize {
        self.intervals
    }

    pub fn step(&self) -> f64 {
        self.horizon / self.intervals as f64
    }

    pub fn eval(&self, t: f64, s: f64) -> f64 {
        let h = self.step();
        let (ti, tu) = locate(t, h, self.intervals);
        let (si, su) = locate(s, h, self.intervals);
        let (wt, ws) = (cubic_weights(tu), cubic_weights(su));
        let stride = self.intervals + 1;
        let mut acc = 0.0;
        for (a, wa) in wt.iter().enumerate() {
            let row = (ti + a) * stride + si;
            let inner: f64 = ws.iter().zip(&self.values[row..row + 4]).map(|(w, v)| w * v).sum();
            acc += wa * inner;
        }
        acc
    }

    pub(crate) fn same_grid(&self, other: &Self) -> bool {
        self.horizon == other.horizon && self.intervals == other.intervals
    }

    pub(crate) fn axpy(&mut self, a: f64, other: &Self) {
        for (v, w) in self.values.iter_mut().zip(&other.values) {
            *v += a * w;
        }
    }

    pub(crate) fn scale(&mut self, a: f64) {
        self.values.iter_mut().for_each(|v| *v *= a);
    }
}
