//! Mollified local-time functionals on discretized paths.
//!
//! With `f_ε(x) = (2πε)^{−1/2} e^{−x²/(2ε)}` and trapezoid weights `w` on the
//! grid (half weight at both ends of the horizon):
//!
//! * self-intersection: `Σ_{j<i≤k} w_i w_j f_ε(X_i − X_j − y)` (strict triangle, `r < s`),
//! * intersection: `Σ_{i,j≤k} w_i w_j f_ε(X¹_i − X²_j − y)` over the full square,
//! * collision: `Σ_{i≤k} w_i f_ε(X¹_i − X²_i − y)`.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::ensemble::try_replicate;
use crate::error::{Error, Result};
use crate::process::{HurstParam, ProcessPath, TimeGrid};
use crate::simulator::{pair_from, Normalization, RosenblattSimulator, DEFAULT_OVERSAMPLE};

/// Default `κ` in the resolution floor `ε ≥ κ Δ^{2H}`.
pub const DEFAULT_KAPPA: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LocalTimeKind {
    Slt,
    Ilt,
    Clt,
}

impl LocalTimeKind {
    pub fn needs_pair(self) -> bool {
        !matches!(self, LocalTimeKind::Slt)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            LocalTimeKind::Slt => "slt",
            LocalTimeKind::Ilt => "ilt",
            LocalTimeKind::Clt => "clt",
        }
    }
}

impl std::str::FromStr for LocalTimeKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "slt" => Ok(LocalTimeKind::Slt),
            "ilt" => Ok(LocalTimeKind::Ilt),
            "clt" => Ok(LocalTimeKind::Clt),
            other => Err(Error::invalid(format!("unknown local-time kind '{other}'"))),
        }
    }
}

impl std::fmt::Display for LocalTimeKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct MollifierScale(f64);

impl MollifierScale {
    pub fn new(eps: f64) -> Result<Self> {
        if eps.is_finite() && eps > 0.0 {
            Ok(MollifierScale(eps))
        } else {
            Err(Error::invalid(format!("mollifier scale {eps} must be positive")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for MollifierScale {
    type Error = Error;
    fn try_from(v: f64) -> Result<Self> {
        MollifierScale::new(v)
    }
}

impl From<MollifierScale> for f64 {
    fn from(e: MollifierScale) -> f64 {
        e.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
pub struct SpaceOffset(pub f64);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalTimeEstimate {
    pub kind: LocalTimeKind,
    pub value: f64,
    pub y: SpaceOffset,
    /// Horizon actually integrated over.
    pub t: f64,
    pub epsilon: MollifierScale,
    pub grid_steps: usize,
    pub seeds: Vec<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentEstimate {
    pub p: f64,
    pub mean: f64,
    pub stderr: f64,
    pub reps: usize,
}

/// Gaussian kernel of variance `ε`.
#[inline]
pub fn mollifier(x: f64, eps: MollifierScale) -> f64 {
    let e = eps.value();
    (-x * x / (2.0 * e)).exp() / (2.0 * PI * e).sqrt()
}

struct Kernel {
    inv_two_eps: f64,
    norm: f64,
}

impl Kernel {
    fn new(eps: MollifierScale) -> Self {
        Kernel {
            inv_two_eps: 1.0 / (2.0 * eps.value()),
            norm: 1.0 / (2.0 * PI * eps.value()).sqrt(),
        }
    }

    #[inline]
    fn eval(&self, x: f64) -> f64 {
        self.norm * (-x * x * self.inv_two_eps).exp()
    }
}

/// Self-intersection values at each horizon index in `horizons`, from one O(n²) pass.
pub fn slt_horizon_values(path: &ProcessPath, eps: MollifierScale, y: SpaceOffset, horizons: &[usize]) -> Vec<f64> {
    let x = &path.values;
    let kmax = horizons.iter().copied().max().unwrap_or(0).min(x.len() - 1);
    let ker = Kernel::new(eps);
    // rows[i] = Σ_{j<i} v_j f(X_i − X_j − y), v_0 = ½, v_j = 1 otherwise.
    let mut rows = vec![0.0; kmax + 1];
    for i in 1..=kmax {
        let xi = x[i] - y.0;
        let mut acc = 0.5 * ker.eval(xi - x[0]);
        for &xj in &x[1..i] {
            acc += ker.eval(xi - xj);
        }
        rows[i] = acc;
    }
    let d2 = path.grid.step().powi(2);
    let mut prefix = vec![0.0; kmax + 1];
    for i in 1..=kmax {
        prefix[i] = prefix[i - 1] + rows[i];
    }
    horizons
        .iter()
        .map(|&k| {
            let k = k.min(kmax);
            if k == 0 {
                0.0
            } else {
                d2 * (prefix[k - 1] + 0.5 * rows[k])
            }
        })
        .collect()
}

pub fn slt_estimate(path: &ProcessPath, eps: MollifierScale, y: SpaceOffset) -> LocalTimeEstimate {
    let n = path.grid.n_steps();
    LocalTimeEstimate {
        kind: LocalTimeKind::Slt,
        value: slt_horizon_values(path, eps, y, &[n])[0],
        y,
        t: path.grid.horizon(),
        epsilon: eps,
        grid_steps: n,
        seeds: vec![path.seed],
    }
}

fn check_same_grid(a: &ProcessPath, b: &ProcessPath) -> Result<()> {
    if a.grid != b.grid {
        return Err(Error::invalid("paths live on different grids"));
    }
    Ok(())
}

#[inline]
fn end_weight(i: usize, k: usize) -> f64 {
    if i == 0 || i == k {
        0.5
    } else {
        1.0
    }
}

/// Intersection value over `[0, s_k]²`.
pub fn ilt_value_upto(p1: &ProcessPath, p2: &ProcessPath, eps: MollifierScale, y: SpaceOffset, k: usize) -> Result<f64> {
    check_same_grid(p1, p2)?;
    let k = k.min(p1.grid.n_steps());
    if k == 0 {
        return Ok(0.0);
    }
    let ker = Kernel::new(eps);
    let (x1, x2) = (&p1.values, &p2.values);
    let mut total = 0.0;
    for i in 0..=k {
        let xi = x1[i] - y.0;
        let mut row = 0.0;
        for (j, &xj) in x2[..=k].iter().enumerate() {
            row += end_weight(j, k) * ker.eval(xi - xj);
        }
        total += end_weight(i, k) * row;
    }
    Ok(total * p1.grid.step().powi(2))
}

pub fn ilt_estimate(p1: &ProcessPath, p2: &ProcessPath, eps: MollifierScale, y: SpaceOffset) -> Result<LocalTimeEstimate> {
    let n = p1.grid.n_steps();
    Ok(LocalTimeEstimate {
        kind: LocalTimeKind::Ilt,
        value: ilt_value_upto(p1, p2, eps, y, n)?,
        y,
        t: p1.grid.horizon(),
        epsilon: eps,
        grid_steps: n,
        seeds: vec![p1.seed, p2.seed],
    })
}

/// Collision value over `[0, s_k]`.
pub fn clt_value_upto(p1: &ProcessPath, p2: &ProcessPath, eps: MollifierScale, y: SpaceOffset, k: usize) -> Result<f64> {
    check_same_grid(p1, p2)?;
    let k = k.min(p1.grid.n_steps());
    if k == 0 {
        return Ok(0.0);
    }
    let ker = Kernel::new(eps);
    let total: f64 = (0..=k)
        .map(|i| end_weight(i, k) * ker.eval(p1.values[i] - p2.values[i] - y.0))
        .sum();
    Ok(total * p1.grid.step())
}

pub fn clt_estimate(p1: &ProcessPath, p2: &ProcessPath, eps: MollifierScale, y: SpaceOffset) -> Result<LocalTimeEstimate> {
    let n = p1.grid.n_steps();
    Ok(LocalTimeEstimate {
        kind: LocalTimeKind::Clt,
        value: clt_value_upto(p1, p2, eps, y, n)?,
        y,
        t: p1.grid.horizon(),
        epsilon: eps,
        grid_steps: n,
        seeds: vec![p1.seed, p2.seed],
    })
}

/// Smallest admissible `ε` on a grid of step `dt`: `κ dt^{2H}`.
pub fn resolution_floor(dt: f64, h: HurstParam, kappa: f64) -> f64 {
    kappa * dt.powf(2.0 * h.value())
}

/// Mean of `|x|^p` with a jackknife standard error.
pub fn moment_estimate(samples: &[f64], p: f64) -> Result<MomentEstimate> {
    if samples.len() < 2 {
        return Err(Error::invalid("moment estimate needs at least two samples"));
    }
    if !(p.is_finite() && p >= 1.0) {
        return Err(Error::invalid(format!("moment order {p} must be at least 1")));
    }
    let n = samples.len();
    let powered: Vec<f64> = samples.iter().map(|x| x.abs().powf(p)).collect();
    let total: f64 = powered.iter().sum();
    let mean = total / n as f64;
    let nf = n as f64;
    let spread: f64 = powered
        .iter()
        .map(|v| {
            let loo = (total - v) / (nf - 1.0);
            (loo - mean).powi(2)
        })
        .sum();
    Ok(MomentEstimate {
        p,
        mean,
        stderr: ((nf - 1.0) / nf * spread).sqrt(),
        reps: n,
    })
}

/// Ensemble settings shared by the local-time studies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathParams {
    pub kind: LocalTimeKind,
    pub h1: HurstParam,
    /// Second index, required for intersection and collision.
    pub h2: Option<HurstParam>,
    pub n_steps: usize,
    pub oversample: usize,
    pub horizon: f64,
    pub y: SpaceOffset,
    pub seed: u64,
    pub workers: usize,
    pub kappa: f64,
    /// Order of the delta derivative; only 0 is supported.
    pub derivative_order: u32,
}

impl PathParams {
    pub fn new(kind: LocalTimeKind, h1: HurstParam, h2: Option<HurstParam>, n_steps: usize, seed: u64) -> Self {
        PathParams {
            kind,
            h1,
            h2,
            n_steps,
            oversample: DEFAULT_OVERSAMPLE,
            horizon: 1.0,
            y: SpaceOffset(0.0),
            seed,
            workers: 1,
            kappa: DEFAULT_KAPPA,
            derivative_order: 0,
        }
    }

    pub fn grid(&self) -> Result<TimeGrid> {
        TimeGrid::new(self.horizon, self.n_steps)
    }

    /// Index governing the resolution floor: the rougher of the two processes.
    pub fn floor_h(&self) -> HurstParam {
        match (self.kind.needs_pair(), self.h2) {
            (true, Some(h2)) if h2 < self.h1 => h2,
            _ => self.h1,
        }
    }

    pub fn floor(&self) -> Result<f64> {
        Ok(resolution_floor(self.grid()?.step(), self.floor_h(), self.kappa))
    }

    pub fn validate(&self) -> Result<()> {
        if self.derivative_order != 0 {
            return Err(Error::invalid(format!(
                "derivative order {} is not supported; only underived local times are implemented",
                self.derivative_order
            )));
        }
        if self.kind.needs_pair() && self.h2.is_none() {
            return Err(Error::invalid(format!("{} needs a second Hurst parameter", self.kind)));
        }
        if self.oversample == 0 {
            return Err(Error::invalid("oversample must be at least 1"));
        }
        if !(self.kappa.is_finite() && self.kappa > 0.0) {
            return Err(Error::invalid("kappa must be positive"));
        }
        self.grid().map(|_| ())
    }

    pub fn check_eps(&self, eps: f64) -> Result<MollifierScale> {
        let e = MollifierScale::new(eps)?;
        let floor = self.floor()?;
        if eps < floor {
            return Err(Error::BelowResolutionFloor { eps, floor });
        }
        Ok(e)
    }
}

pub(crate) enum Sampled {
    Single(ProcessPath),
    Pair(ProcessPath, ProcessPath),
}

impl Sampled {
    /// Local-time value at `y` over `[0, s_k]` for each `k` in `horizons`.
    pub(crate) fn values(&self, eps: MollifierScale, y: SpaceOffset, horizons: &[usize], kind: LocalTimeKind) -> Result<Vec<f64>> {
        match (self, kind) {
            (Sampled::Single(p), LocalTimeKind::Slt) => Ok(slt_horizon_values(p, eps, y, horizons)),
            (Sampled::Pair(a, b), LocalTimeKind::Ilt) => horizons.iter().map(|&k| ilt_value_upto(a, b, eps, y, k)).collect(),
            (Sampled::Pair(a, b), LocalTimeKind::Clt) => horizons.iter().map(|&k| clt_value_upto(a, b, eps, y, k)).collect(),
            _ => Err(Error::invalid("path arity does not match the local-time kind")),
        }
    }
}

/// Simulators for the paths of replication `r` under a master seed.
/// Replication `r` uses stream `derive_seed(seed, r)` whatever is evaluated on it.
pub(crate) struct PathEnsemble {
    kind: LocalTimeKind,
    first: RosenblattSimulator,
    second: Option<RosenblattSimulator>,
    seed: u64,
}

impl PathEnsemble {
    pub(crate) fn new(params: &PathParams) -> Result<Self> {
        params.validate()?;
        let grid = params.grid()?;
        let first = RosenblattSimulator::new(grid.clone(), params.h1, params.oversample, Normalization::ExactVariance)?;
        let second = match (params.kind.needs_pair(), params.h2) {
            (true, Some(h2)) if h2 == params.h1 => Some(first.clone()),
            (true, Some(h2)) => Some(RosenblattSimulator::new(grid, h2, params.oversample, Normalization::ExactVariance)?),
            _ => None,
        };
        Ok(PathEnsemble {
            kind: params.kind,
            first,
            second,
            seed: params.seed,
        })
    }

    pub(crate) fn sample(&self, rep: usize) -> Sampled {
        let s = crate::seed::derive_seed(self.seed, rep as u64);
        match &self.second {
            None => Sampled::Single(self.first.path(s)),
            Some(second) => {
                let (a, b) = pair_from(&self.first, second, s);
                Sampled::Pair(a, b)
            }
        }
    }

    pub(crate) fn kind(&self) -> LocalTimeKind {
        self.kind
    }

    pub(crate) fn grid(&self) -> &TimeGrid {
        self.first.grid()
    }
}

/// One estimate per replication; replication `r` is driven by `derive_seed(seed, r)`.
pub fn estimate_ensemble(params: &PathParams, eps: f64, reps: usize) -> Result<Vec<LocalTimeEstimate>> {
    let e = params.check_eps(eps)?;
    let ensemble = PathEnsemble::new(params)?;
    try_replicate(reps, params.workers, |r| match ensemble.sample(r) {
        Sampled::Single(p) => Ok(slt_estimate(&p, e, params.y)),
        Sampled::Pair(a, b) => match params.kind {
            LocalTimeKind::Ilt => ilt_estimate(&a, &b, e, params.y),
            _ => clt_estimate(&a, &b, e, params.y),
        },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsilonRow {
    pub eps: f64,
    pub mean: f64,
    pub mean_stderr: f64,
    /// `E|α_ε|^p`.
    pub abs_moment: MomentEstimate,
    /// `E|α_ε − α_{ε'}|` against the next rung, absent on the last rung.
    pub next_difference: Option<MomentEstimate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsilonStudy {
    pub params: PathParams,
    pub ladder: Vec<f64>,
    pub reps: usize,
    pub moment_order: f64,
    pub rows: Vec<EpsilonRow>,
}

impl EpsilonStudy {
    pub fn differences(&self) -> Vec<MomentEstimate> {
        self.rows.iter().filter_map(|r| r.next_difference).collect()
    }
}

/// `E|α_{ε_k} − α_{ε_{k+1}}|` for consecutive rungs; `values[r][k]` is replication `r` at rung `k`.
pub fn rung_differences(values: &[Vec<f64>]) -> Result<Vec<MomentEstimate>> {
    let rungs = values.first().map_or(0, Vec::len);
    (0..rungs.saturating_sub(1))
        .map(|k| {
            let d: Vec<f64> = values.iter().map(|v| v[k] - v[k + 1]).collect();
            moment_estimate(&d, 1.0)
        })
        .collect()
}

/// Mollified values along a decreasing `ε` ladder, evaluated on common paths.
pub fn epsilon_convergence_study(params: &PathParams, ladder: &[f64], reps: usize, moment_order: f64) -> Result<EpsilonStudy> {
    if ladder.len() < 2 {
        return Err(Error::invalid("epsilon ladder needs at least two rungs"));
    }
    if ladder.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::invalid("epsilon ladder must be strictly decreasing"));
    }
    if reps < 2 {
        return Err(Error::invalid("need at least two replications"));
    }
    let scales: Vec<MollifierScale> = ladder.iter().map(|&e| params.check_eps(e)).collect::<Result<_>>()?;
    let ensemble = PathEnsemble::new(params)?;
    let n = ensemble.grid().n_steps();
    let values: Vec<Vec<f64>> = try_replicate(reps, params.workers, |r| {
        let sampled = ensemble.sample(r);
        scales
            .iter()
            .map(|&e| sampled.values(e, params.y, &[n], ensemble.kind()).map(|v| v[0]))
            .collect::<Result<Vec<f64>>>()
    })?;
    let diffs = rung_differences(&values)?;
    let rows = scales
        .iter()
        .enumerate()
        .map(|(k, e)| {
            let column: Vec<f64> = values.iter().map(|v| v[k]).collect();
            let plain = moment_estimate(&column, 1.0)?;
            Ok(EpsilonRow {
                eps: e.value(),
                mean: plain.mean,
                mean_stderr: plain.stderr,
                abs_moment: moment_estimate(&column, moment_order)?,
                next_difference: diffs.get(k).copied(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EpsilonStudy {
        params: params.clone(),
        ladder: ladder.to_vec(),
        reps,
        moment_order,
        rows,
    })
}
