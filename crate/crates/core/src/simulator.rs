//! Rosenblatt sample paths from the non-central limit construction.
//!
//! A stationary standard Gaussian sequence with fractional-Gaussian-noise
//! correlation of index `H' = (H + 1) / 2` is drawn exactly by circulant
//! embedding. Its correlation decays like `n^{2H' - 2} = n^{(2H - 2)/2}`, so the
//! normalized partial sums of `H_2(ξ) = ξ² − 1` converge to a Rosenblatt
//! process of index `H`.

use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::process::{HurstParam, ProcessPath, TimeGrid};
use crate::seed::{derive_seed, rng_from_seed};

/// Relative tolerance below which negative embedding eigenvalues count as roundoff.
const EMBEDDING_NEGATIVITY_TOL: f64 = 1e-10;

pub const DEFAULT_OVERSAMPLE: usize = 16;

/// Correlation at lag `k` of standardized fractional Gaussian noise with index `h_prime`.
pub fn fgn_correlation(k: u64, h_prime: f64) -> f64 {
    let e = 2.0 * h_prime;
    if k < 32 {
        let k = k as f64;
        return 0.5 * ((k + 1.0).powf(e) - 2.0 * k.powf(e) + (k - 1.0).abs().powf(e));
    }
    // k^e Σ_{m≥1} C(e, 2m) k^{−2m}, free of the cancellation in the second difference.
    let k = k as f64;
    let u2 = 1.0 / (k * k);
    let mut coef = 0.5 * e * (e - 1.0);
    let mut power = u2;
    let mut sum = coef * power;
    let mut m = 1.0;
    loop {
        coef *= (e - 2.0 * m) * (e - 2.0 * m - 1.0) / ((2.0 * m + 1.0) * (2.0 * m + 2.0));
        power *= u2;
        let term = coef * power;
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() {
            break;
        }
        m += 1.0;
    }
    k.powf(e) * sum
}

/// Exact FFT sampler for a stationary Gaussian sequence of fixed length.
#[derive(Clone)]
pub struct CirculantSampler {
    len: usize,
    scale: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for CirculantSampler {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CirculantSampler")
            .field("len", &self.len)
            .field("embedding", &self.scale.len())
            .finish()
    }
}

impl CirculantSampler {
    /// Embed the first `len` lags of `corr` into a circulant of size `2 len`.
    pub fn new(len: usize, corr: impl Fn(u64) -> f64) -> Result<Self> {
        if len == 0 {
            return Err(Error::invalid("sequence length must be at least 1"));
        }
        let m = 2 * len;
        let mut row: Vec<Complex64> = (0..m)
            .map(|k| {
                let lag = if k <= len { k } else { m - k };
                Complex64::new(corr(lag as u64), 0.0)
            })
            .collect();
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(m);
        fft.process(&mut row);

        let peak = row.iter().map(|c| c.re.abs()).fold(0.0, f64::max);
        let mut scale = Vec::with_capacity(m);
        for (index, c) in row.iter().enumerate() {
            let mut lam = c.re;
            if lam < 0.0 {
                if lam < -EMBEDDING_NEGATIVITY_TOL * peak {
                    return Err(Error::NegativeEmbedding { index, value: lam });
                }
                lam = 0.0;
            }
            scale.push((lam / m as f64).sqrt());
        }
        Ok(CirculantSampler { len, scale, fft })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let mut buf: Vec<Complex64> = self
            .scale
            .iter()
            .map(|&s| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Complex64::new(s * re, s * im)
            })
            .collect();
        self.fft.process(&mut buf);
        buf.truncate(self.len);
        buf.into_iter().map(|c| c.re).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LrdGaussianSequence {
    pub values: Vec<f64>,
    pub h: HurstParam,
    pub q: u32,
    pub seed: u64,
}

fn lrd_sampler(n: usize, h: HurstParam) -> Result<CirculantSampler> {
    let hp = h.driving_noise_index();
    CirculantSampler::new(n, |k| fgn_correlation(k, hp))
}

/// Stationary standard Gaussian sequence with correlation `fgn_correlation(·, (H+1)/2)`.
pub fn generate_lrd_gaussian(n: usize, h: HurstParam, seed: u64) -> Result<LrdGaussianSequence> {
    let sampler = lrd_sampler(n, h)?;
    let values = sampler.sample(&mut rng_from_seed(seed));
    Ok(LrdGaussianSequence {
        values,
        h,
        q: 2,
        seed,
    })
}

/// `Var(N^{-H} Σ_{j≤N} H_2(ξ_j))`, using `E[H_2(ξ_i) H_2(ξ_j)] = 2 ρ(i − j)²`.
pub fn exact_partial_sum_variance(n: usize, h: HurstParam) -> f64 {
    assert!(n >= 1, "partial sum needs at least one term");
    let hp = h.driving_noise_index();
    let nf = n as f64;
    let mut total = 2.0 * nf;
    for k in 1..n {
        let r = fgn_correlation(k as u64, hp);
        total += 2.0 * (nf - k as f64) * 2.0 * r * r;
    }
    total / nf.powf(2.0 * h.value())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    /// Scale so that `Var X(T) = T^{2H}` holds exactly at the discrete level.
    #[default]
    ExactVariance,
    /// Plain `N^{-H}` scaling.
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub n_steps: usize,
    pub oversample: usize,
    pub horizon: f64,
    pub h: HurstParam,
    pub seed: u64,
    pub normalization: Normalization,
}

impl SimulationConfig {
    pub fn new(h: HurstParam, n_steps: usize, seed: u64) -> Self {
        SimulationConfig {
            n_steps,
            oversample: DEFAULT_OVERSAMPLE,
            horizon: 1.0,
            h,
            seed,
            normalization: Normalization::ExactVariance,
        }
    }

    pub fn with_oversample(mut self, m: usize) -> Self {
        self.oversample = m;
        self
    }

    pub fn with_horizon(mut self, t: f64) -> Self {
        self.horizon = t;
        self
    }

    pub fn with_normalization(mut self, normalization: Normalization) -> Self {
        self.normalization = normalization;
        self
    }

    pub fn grid(&self) -> Result<TimeGrid> {
        TimeGrid::new(self.horizon, self.n_steps)
    }

    /// Length of the driving Gaussian sequence.
    pub fn internal_len(&self) -> usize {
        self.oversample * self.n_steps
    }

    fn validate(&self) -> Result<()> {
        if self.oversample == 0 {
            return Err(Error::invalid("oversample must be at least 1"));
        }
        self.grid().map(|_| ())
    }
}

/// Reusable simulator: the circulant spectrum and normalization are computed once.
#[derive(Debug, Clone)]
pub struct RosenblattSimulator {
    grid: TimeGrid,
    h: HurstParam,
    oversample: usize,
    sampler: CirculantSampler,
    scale: f64,
}

impl RosenblattSimulator {
    pub fn new(grid: TimeGrid, h: HurstParam, oversample: usize, normalization: Normalization) -> Result<Self> {
        if oversample == 0 {
            return Err(Error::invalid("oversample must be at least 1"));
        }
        let n = oversample * grid.n_steps();
        let sampler = lrd_sampler(n, h)?;
        let nh = (n as f64).powf(h.value());
        let sigma = match normalization {
            Normalization::ExactVariance => exact_partial_sum_variance(n, h).sqrt(),
            Normalization::None => 1.0,
        };
        let scale = grid.horizon().powf(h.value()) / (sigma * nh);
        Ok(RosenblattSimulator {
            grid,
            h,
            oversample,
            sampler,
            scale,
        })
    }

    pub fn from_config(config: &SimulationConfig) -> Result<Self> {
        config.validate()?;
        RosenblattSimulator::new(config.grid()?, config.h, config.oversample, config.normalization)
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn h(&self) -> HurstParam {
        self.h
    }

    pub fn path(&self, seed: u64) -> ProcessPath {
        let xi = self.sampler.sample(&mut rng_from_seed(seed));
        let mut values = Vec::with_capacity(self.grid.len());
        values.push(0.0);
        let mut partial = 0.0;
        for chunk in xi.chunks_exact(self.oversample) {
            partial += chunk.iter().map(|x| x * x - 1.0).sum::<f64>();
            values.push(self.scale * partial);
        }
        ProcessPath {
            grid: self.grid.clone(),
            values,
            h: self.h,
            seed,
        }
    }
}

pub fn simulate_rosenblatt(config: &SimulationConfig) -> Result<ProcessPath> {
    Ok(RosenblattSimulator::from_config(config)?.path(config.seed))
}

/// Two independent paths on `grid`, driven by the streams `derive_seed(seed, 0)` and `derive_seed(seed, 1)`.
pub fn simulate_independent_pair(
    grid: &TimeGrid,
    h1: HurstParam,
    h2: HurstParam,
    oversample: usize,
    seed: u64,
) -> Result<(ProcessPath, ProcessPath)> {
    let first = RosenblattSimulator::new(grid.clone(), h1, oversample, Normalization::ExactVariance)?;
    let second = if h1 == h2 {
        first.clone()
    } else {
        RosenblattSimulator::new(grid.clone(), h2, oversample, Normalization::ExactVariance)?
    };
    Ok(pair_from(&first, &second, seed))
}

pub(crate) fn pair_from(
    first: &RosenblattSimulator,
    second: &RosenblattSimulator,
    seed: u64,
) -> (ProcessPath, ProcessPath) {
    (first.path(derive_seed(seed, 0)), second.path(derive_seed(seed, 1)))
}
