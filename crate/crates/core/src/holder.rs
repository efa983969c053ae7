//! Theoretical Hölder exponent suprema and Monte Carlo moment-scaling fits.

use serde::{Deserialize, Serialize};

use crate::ensemble::try_replicate;
use crate::error::{Error, Result};
use crate::local_time::{moment_estimate, LocalTimeKind, PathEnsemble, PathParams, SpaceOffset};
use crate::process::HurstParam;

/// Existence condition and exponent suprema for one functional.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentTable {
    pub kind: LocalTimeKind,
    pub h1: f64,
    pub h2: Option<f64>,
    pub exists: bool,
    pub space_exponent_sup: f64,
    pub time_exponent_sup: f64,
}

pub fn theoretical_exponents(kind: LocalTimeKind, h1: HurstParam, h2: Option<HurstParam>) -> Result<ExponentTable> {
    let (exists, space, time) = match kind {
        LocalTimeKind::Slt => {
            let h = h1.value();
            (h < 1.0, (1.0 / h - 1.0).min(1.0), 1.0 - h)
        }
        LocalTimeKind::Ilt | LocalTimeKind::Clt => {
            let h2 = h2.ok_or_else(|| Error::invalid(format!("{kind} needs a second Hurst parameter")))?;
            let (a, b) = (h1.value(), h2.value());
            let red = a * b / (a + b);
            if kind == LocalTimeKind::Ilt {
                (red < 1.0, (0.5 / red - 0.5).min(1.0), 1.0 - red)
            } else {
                (red < 0.5, (0.25 / red - 0.5).min(1.0), 1.0 - 2.0 * red)
            }
        }
    };
    Ok(ExponentTable {
        kind,
        h1: h1.value(),
        h2: h2.filter(|_| kind.needs_pair()).map(HurstParam::value),
        exists,
        space_exponent_sup: space,
        time_exponent_sup: time,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub slope: f64,
    pub intercept: f64,
    pub stderr_slope: f64,
    pub num_points: usize,
    pub moment_order: u32,
}

/// Least-squares line through `(ln δ, ln m)`.
pub fn fit_exponent(points: &[(f64, f64)], moment_order: u32) -> Result<ExponentFit> {
    if points.len() < 3 {
        return Err(Error::invalid("exponent fit needs at least three points"));
    }
    if points.iter().any(|&(d, m)| !(d > 0.0 && m > 0.0 && d.is_finite() && m.is_finite())) {
        return Err(Error::invalid("exponent fit needs positive finite deltas and moments"));
    }
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(Error::invalid("exponent fit needs at least two distinct deltas"));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    Ok(ExponentFit {
        slope,
        intercept,
        stderr_slope: (sse / (n - 2.0) / sxx).sqrt(),
        num_points: points.len(),
        moment_order,
    })
}

/// Settings for a moment-scaling experiment.
///
/// For the time experiment `base` is `t_base` and the deltas are time
/// separations; `t_base + δ` must be grid points within the horizon. For the
/// space experiment the functional is taken over the whole horizon, `base` is
/// `y_base` and the deltas are offsets in absolute units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HolderParams {
    pub path: PathParams,
    pub moment_order: u32,
    pub eps: f64,
    pub base: f64,
    pub deltas: Vec<f64>,
    pub reps: usize,
    /// Absolute slack below `n · sup` allowed for the fitted slope.
    pub tolerance: f64,
}

pub const DEFAULT_TOLERANCE: f64 = 0.15;

impl HolderParams {
    pub fn new(path: PathParams, eps: f64, base: f64, deltas: Vec<f64>, reps: usize) -> Self {
        HolderParams {
            path,
            moment_order: 2,
            eps,
            base,
            deltas,
            reps,
            tolerance: DEFAULT_TOLERANCE,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.moment_order) {
            return Err(Error::invalid(format!("moment order {} must be 1, 2 or 3", self.moment_order)));
        }
        if self.reps < 2 {
            return Err(Error::invalid("need at least two replications"));
        }
        if self.deltas.iter().any(|d| !(d.is_finite() && *d > 0.0)) {
            return Err(Error::invalid("deltas must be positive"));
        }
        let mut sorted = self.deltas.clone();
        sorted.sort_by(f64::total_cmp);
        sorted.dedup();
        if sorted.len() < 3 {
            return Err(Error::invalid("delta ladder needs at least three distinct values"));
        }
        if !(self.tolerance.is_finite() && self.tolerance >= 0.0) {
            return Err(Error::invalid("tolerance must be nonnegative"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HolderRow {
    pub delta: f64,
    pub moment: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HolderReport {
    pub fit: ExponentFit,
    pub rows: Vec<HolderRow>,
    pub table: ExponentTable,
    /// `n · sup − tolerance`.
    pub threshold: f64,
    pub passed: bool,
}

enum Axis {
    Time,
    Space,
}

fn run_experiment(params: &HolderParams, axis: Axis) -> Result<HolderReport> {
    params.validate()?;
    let p = &params.path;
    let eps = p.check_eps(params.eps)?;
    let ensemble = PathEnsemble::new(p)?;
    let grid = ensemble.grid().clone();
    let kind = p.kind;
    let n = grid.n_steps();

    // One evaluation per replication: index 0 is the base, then one per delta.
    let eval: Box<dyn Fn(usize) -> Result<Vec<f64>> + Sync> = match axis {
        Axis::Time => {
            let locate = |t: f64| {
                grid.index_of(t)
                    .ok_or_else(|| Error::invalid(format!("time {t} is not a grid point of the horizon")))
            };
            let mut horizons = vec![locate(params.base)?];
            for d in &params.deltas {
                horizons.push(locate(params.base + d)?);
            }
            let y = p.y;
            let ens = &ensemble;
            Box::new(move |r| ens.sample(r).values(eps, y, &horizons, kind))
        }
        Axis::Space => {
            let ys: Vec<f64> = std::iter::once(params.base)
                .chain(params.deltas.iter().map(|d| params.base + d))
                .collect();
            let ens = &ensemble;
            Box::new(move |r| {
                let sampled = ens.sample(r);
                ys.iter()
                    .map(|&y| sampled.values(eps, SpaceOffset(y), &[n], kind).map(|v| v[0]))
                    .collect()
            })
        }
    };

    // Identical seeds must give a zero increment at δ = 0.
    let again = eval(0)?;
    let first = eval(0)?;
    if first[0] - again[0] != 0.0 {
        return Err(Error::Reproducibility(format!(
            "replication 0 gave {} and {} on identical seeds",
            first[0], again[0]
        )));
    }

    let values = try_replicate(params.reps, p.workers, &*eval)?;
    let order = params.moment_order;
    let rows = params
        .deltas
        .iter()
        .enumerate()
        .map(|(k, &delta)| {
            let diffs: Vec<f64> = values.iter().map(|v| v[k + 1] - v[0]).collect();
            let m = moment_estimate(&diffs, order as f64)?;
            Ok(HolderRow {
                delta,
                moment: m.mean,
                stderr: m.stderr,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let points: Vec<(f64, f64)> = rows.iter().map(|r| (r.delta, r.moment)).collect();
    let fit = fit_exponent(&points, order)?;
    let table = theoretical_exponents(kind, p.h1, p.h2)?;
    let sup = match axis {
        Axis::Time => table.time_exponent_sup,
        Axis::Space => table.space_exponent_sup,
    };
    let threshold = order as f64 * sup - params.tolerance;
    Ok(HolderReport {
        passed: fit.slope >= threshold,
        fit,
        rows,
        table,
        threshold,
    })
}

/// `E|α_{t_base+δ}(y) − α_{t_base}(y)|ⁿ` on common paths, fitted against `δ`.
pub fn holder_time_experiment(params: &HolderParams) -> Result<HolderReport> {
    run_experiment(params, Axis::Time)
}

/// `E|α_t(y_base+δ) − α_t(y_base)|ⁿ` on common paths, fitted against `δ`.
pub fn holder_space_experiment(params: &HolderParams) -> Result<HolderReport> {
    run_experiment(params, Axis::Space)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn h(v: f64) -> HurstParam {
        HurstParam::new(v).unwrap()
    }

    #[test]
    fn exponent_examples() {
        let slt = theoretical_exponents(LocalTimeKind::Slt, h(0.7), None).unwrap();
        assert!((slt.space_exponent_sup - 3.0 / 7.0).abs() < 1e-12);
        assert!((slt.time_exponent_sup - 0.3).abs() < 1e-12);
        let ilt = theoretical_exponents(LocalTimeKind::Ilt, h(0.6), Some(h(0.6))).unwrap();
        assert!((ilt.time_exponent_sup - 0.7).abs() < 1e-12);
        assert_eq!(ilt.space_exponent_sup, 1.0);
        let clt = theoretical_exponents(LocalTimeKind::Clt, h(0.8), Some(h(0.8))).unwrap();
        assert!((clt.time_exponent_sup - 0.2).abs() < 1e-12);
        assert!((clt.space_exponent_sup - 0.125).abs() < 1e-12);
        assert!(theoretical_exponents(LocalTimeKind::Clt, h(0.8), None).is_err());
    }

    #[test]
    fn equal_indices_always_exist() {
        for k in 0..9 {
            let v = 0.55 + 0.05 * k as f64;
            for kind in [LocalTimeKind::Slt, LocalTimeKind::Ilt, LocalTimeKind::Clt] {
                let t = theoretical_exponents(kind, h(v), Some(h(v))).unwrap();
                assert!(t.exists);
                assert!(t.space_exponent_sup > 0.0 && t.space_exponent_sup <= 1.0);
                assert!(t.time_exponent_sup > 0.0 && t.time_exponent_sup <= 1.0);
            }
            // The reduced index of equal parameters is H/2.
            let ilt = theoretical_exponents(LocalTimeKind::Ilt, h(v), Some(h(v))).unwrap();
            assert!((ilt.time_exponent_sup - (1.0 - v / 2.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn fit_recovers_power_laws() {
        let pts: Vec<(f64, f64)> = [0.01, 0.03, 0.1, 0.3, 0.9].iter().map(|&d: &f64| (d, 2.5 * d.powf(1.37))).collect();
        let f = fit_exponent(&pts, 2).unwrap();
        assert!((f.slope - 1.37).abs() < 1e-10);
        assert!((f.intercept - 2.5f64.ln()).abs() < 1e-10);
        assert!(f.stderr_slope < 1e-10);

        let padded = [(0.1, 0.2), (0.4, 0.8), (0.4, 0.8)];
        assert!((fit_exponent(&padded, 1).unwrap().slope - 1.0).abs() < 1e-12);

        assert!(fit_exponent(&pts[..2], 2).is_err());
        assert!(fit_exponent(&[(0.1, 1.0), (0.2, 0.0), (0.3, 1.0)], 2).is_err());
        assert!(fit_exponent(&[(0.1, 1.0), (0.1, 2.0), (0.1, 1.0)], 2).is_err());
    }

    #[test]
    fn fit_with_noise_within_three_stderr() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        let mut hits = 0;
        for _ in 0..50 {
            let pts: Vec<(f64, f64)> = (0..8)
                .map(|k| {
                    let d = 0.02 * 1.6f64.powi(k);
                    let noise: f64 = rng.sample(rand_distr::StandardNormal);
                    (d, 0.7 * d.powf(0.9) * (1.0 + 0.05 * noise))
                })
                .collect();
            let f = fit_exponent(&pts, 2).unwrap();
            if (f.slope - 0.9).abs() < 3.0 * f.stderr_slope {
                hits += 1;
            }
        }
        assert!(hits >= 47, "{hits}");
    }

    fn small_params(kind: LocalTimeKind) -> HolderParams {
        let h2 = kind.needs_pair().then(|| h(0.7));
        let mut path = PathParams::new(kind, h(0.7), h2, 100, 31);
        path.oversample = 4;
        path.workers = 2;
        HolderParams::new(path, 0.1, 0.5, vec![0.05, 0.1, 0.2, 0.4], 60)
    }

    #[test]
    fn rejects_degenerate_ladders() {
        let mut p = small_params(LocalTimeKind::Slt);
        p.deltas = vec![0.1, 0.1, 0.2];
        assert!(holder_time_experiment(&p).is_err());
        p.deltas = vec![0.1; 4];
        assert!(holder_space_experiment(&p).is_err());
        p.deltas = vec![0.05, 0.1, 0.123];
        assert!(holder_time_experiment(&p).is_err());
        p.deltas = vec![0.1, 0.2, 0.6];
        assert!(holder_time_experiment(&p).is_err());
        p.deltas = vec![0.1, 0.2, 0.3];
        p.moment_order = 4;
        assert!(holder_time_experiment(&p).is_err());
    }

    #[test]
    fn moments_grow_with_separation() {
        for kind in [LocalTimeKind::Slt, LocalTimeKind::Clt] {
            let r = holder_time_experiment(&small_params(kind)).unwrap();
            assert_eq!(r.rows.len(), 4);
            for w in r.rows.windows(2) {
                assert!(w[1].moment + 2.0 * w[1].stderr >= w[0].moment - 2.0 * w[0].stderr);
            }
            assert!(r.fit.slope > 0.0);
        }
        let mut p = small_params(LocalTimeKind::Ilt);
        p.base = 0.0;
        p.deltas = vec![0.1, 0.2, 0.4];
        let r = holder_space_experiment(&p).unwrap();
        assert!(r.rows.iter().all(|row| row.moment > 0.0));
    }

    #[test]
    fn doubling_reps_shrinks_stderr() {
        let mut p = small_params(LocalTimeKind::Slt);
        p.reps = 200;
        let a = holder_time_experiment(&p).unwrap();
        p.reps = 400;
        let b = holder_time_experiment(&p).unwrap();
        for (x, y) in a.rows.iter().zip(&b.rows) {
            let ratio = x.stderr / y.stderr;
            assert!((ratio / 2f64.sqrt() - 1.0).abs() < 0.2, "{ratio}");
        }
    }
}
