//! Shared domain types and closed-form reference quantities.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest Hermite polynomial order accepted by [`hermite`].
pub const MAX_HERMITE_ORDER: usize = 20;

/// Hurst index of a Rosenblatt process, restricted to the open interval (1/2, 1).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct HurstParam(f64);

impl HurstParam {
    pub fn new(h: f64) -> Result<Self> {
        if h.is_finite() && h > 0.5 && h < 1.0 {
            Ok(HurstParam(h))
        } else {
            Err(Error::invalid(format!(
                "Hurst parameter {h} must lie in the open interval (1/2, 1)"
            )))
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    /// Hurst index of the fractional Gaussian noise that drives the rank-2 construction.
    #[inline]
    pub fn driving_noise_index(self) -> f64 {
        (self.0 + 1.0) / 2.0
    }
}

impl TryFrom<f64> for HurstParam {
    type Error = Error;
    fn try_from(h: f64) -> Result<Self> {
        HurstParam::new(h)
    }
}

impl From<HurstParam> for f64 {
    fn from(h: HurstParam) -> f64 {
        h.0
    }
}

impl std::fmt::Display for HurstParam {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HurstPair {
    pub h1: HurstParam,
    pub h2: HurstParam,
}

impl HurstPair {
    pub fn new(h1: f64, h2: f64) -> Result<Self> {
        Ok(HurstPair {
            h1: HurstParam::new(h1)?,
            h2: HurstParam::new(h2)?,
        })
    }

    /// H1 H2 / (H1 + H2), the quantity governing intersection and collision existence.
    pub fn reduced(&self) -> f64 {
        let (a, b) = (self.h1.value(), self.h2.value());
        a * b / (a + b)
    }
}

/// Uniform grid `0 = s_0 < s_1 < ... < s_n = horizon`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    horizon: f64,
    n_steps: usize,
}

impl TimeGrid {
    pub fn new(horizon: f64, n_steps: usize) -> Result<Self> {
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::invalid(format!("horizon {horizon} must be positive")));
        }
        if n_steps == 0 {
            return Err(Error::invalid("grid needs at least one step"));
        }
        Ok(TimeGrid { horizon, n_steps })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn step(&self) -> f64 {
        self.horizon / self.n_steps as f64
    }

    pub fn len(&self) -> usize {
        self.n_steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Time of grid point `i`. The last point is exactly the horizon.
    pub fn point(&self, i: usize) -> f64 {
        if i == self.n_steps {
            self.horizon
        } else {
            i as f64 * self.step()
        }
    }

    pub fn points(&self) -> Vec<f64> {
        (0..=self.n_steps).map(|i| self.point(i)).collect()
    }

    /// Grid index of time `t`, provided `t` sits on the grid (relative tolerance 1e-9).
    pub fn index_of(&self, t: f64) -> Option<usize> {
        let pos = t / self.step();
        let idx = pos.round();
        if idx < 0.0 || idx > self.n_steps as f64 || (pos - idx).abs() > 1e-9 * pos.abs().max(1.0) {
            None
        } else {
            Some(idx as usize)
        }
    }
}

/// A sampled trajectory on a uniform grid, starting at the origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProcessPath {
    pub grid: TimeGrid,
    pub values: Vec<f64>,
    pub h: HurstParam,
    pub seed: u64,
}

impl ProcessPath {
    pub fn new(grid: TimeGrid, values: Vec<f64>, h: HurstParam, seed: u64) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::invalid(format!(
                "path has {} values for a grid of {} points",
                values.len(),
                grid.len()
            )));
        }
        if values[0] != 0.0 {
            return Err(Error::invalid("path must start at the origin"));
        }
        Ok(ProcessPath {
            grid,
            values,
            h,
            seed,
        })
    }

    /// Deterministic synthetic path `x(s)` on `grid`; used for degenerate and oracle checks.
    pub fn from_fn(grid: TimeGrid, h: HurstParam, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.points().into_iter().map(f).collect();
        ProcessPath::new(grid, values, h, 0)
    }
}

/// `½ (t^{2H} + s^{2H} − |t − s|^{2H})`, shared by fBm and the Rosenblatt process.
pub fn covariance(s: f64, t: f64, h: HurstParam) -> f64 {
    let two_h = 2.0 * h.value();
    0.5 * (t.powf(two_h) + s.powf(two_h) - (t - s).abs().powf(two_h))
}

/// Probabilists' Hermite polynomial `He_j(x)` via the three-term recurrence.
pub fn hermite(j: usize, x: f64) -> Result<f64> {
    if j > MAX_HERMITE_ORDER {
        return Err(Error::invalid(format!(
            "Hermite order {j} exceeds the maximum {MAX_HERMITE_ORDER}"
        )));
    }
    let (mut prev, mut cur) = (1.0, x);
    if j == 0 {
        return Ok(prev);
    }
    for k in 1..j {
        let next = x * cur - k as f64 * prev;
        prev = cur;
        cur = next;
    }
    Ok(cur)
}
