use serde::{Deserialize, Serialize};

use super::kernels::IntervalCoefficients;
use super::operator::EigenSpectrum;
use crate::error::{Error, Result};
use crate::process::HurstParam;
use crate::seed::rng_from_seed;
use rand::Rng;

/// The rescaled singular values `σ_j j^H` on `[10, J/2]` must stay above this
/// fraction of their maximum there to count as bounded away from zero.
pub const BOUNDED_AWAY_FRACTION: f64 = 0.1;

const TAIL_START: usize = 10;

/// Outcome of checking `σ_j ≥ c · max_i |u_i| |Δℓ_i|^H · j^{−H}` for `j ≤ J/2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    /// Largest `c` for which the bound holds at every checked `j`.
    pub fitted_constant: f64,
    /// `max_i |u_i| |Δℓ_i|^H`.
    pub amplitude: f64,
    /// `σ_j j^H / amplitude` for `j = 1..=J/2`.
    pub ratios: Vec<f64>,
    pub tail_min: f64,
    pub tail_max: f64,
    /// Negative eigenvalues among the retained spectrum; reported, not asserted.
    pub negative_eigenvalues: usize,
    pub passed: bool,
}

pub fn verify_lower_bound(spec: &EigenSpectrum, coeffs: &IntervalCoefficients, h: HurstParam) -> Result<BoundReport> {
    if spec.h != h {
        return Err(Error::invalid("spectrum was computed for a different Hurst parameter"));
    }
    if let Some(src) = &spec.source {
        if src != coeffs {
            return Err(Error::invalid("spectrum was computed for different coefficients"));
        }
    }
    let checked = spec.eigenvalues.len() / 2;
    if checked < TAIL_START {
        return Err(Error::invalid(format!(
            "truncation {} too small: need J/2 >= {TAIL_START}",
            spec.eigenvalues.len()
        )));
    }
    let mut sigma = spec.singular_values();
    sigma.sort_by(|a, b| b.total_cmp(a));
    let amplitude = coeffs.amplitude(h.value());
    let ratios: Vec<f64> = sigma[..checked]
        .iter()
        .enumerate()
        .map(|(i, s)| s * ((i + 1) as f64).powf(h.value()) / amplitude)
        .collect();
    let fitted_constant = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let tail = &ratios[TAIL_START - 1..];
    let tail_min = tail.iter().copied().fold(f64::INFINITY, f64::min);
    let tail_max = tail.iter().copied().fold(0.0, f64::max);
    let passed = fitted_constant > 0.0 && tail_min >= BOUNDED_AWAY_FRACTION * tail_max;
    Ok(BoundReport {
        fitted_constant,
        amplitude,
        ratios,
        tail_min,
        tail_max,
        negative_eigenvalues: spec.negative_count(),
        passed,
    })
}

/// A step function on `[0, 1]` with `pieces` intervals, interior breakpoints
/// uniform in `(0, 1)` and coefficients uniform in `[−1, 1]`.
pub fn random_interval_coefficients(seed: u64, pieces: usize) -> Result<IntervalCoefficients> {
    if pieces == 0 {
        return Err(Error::invalid("need at least one piece"));
    }
    let mut rng = rng_from_seed(seed);
    loop {
        let mut inner: Vec<f64> = (1..pieces).map(|_| rng.random::<f64>()).collect();
        inner.sort_by(f64::total_cmp);
        let mut breaks = vec![0.0];
        breaks.extend(inner);
        breaks.push(1.0);
        let coeffs: Vec<f64> = (0..pieces).map(|_| rng.random_range(-1.0..=1.0)).collect();
        if let Ok(c) = IntervalCoefficients::new(breaks, coeffs) {
            return Ok(c);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law_passes_and_collapse_fails() {
        let h = HurstParam::new(0.7).unwrap();
        let unit = IntervalCoefficients::single_interval(1.0).unwrap();
        let good = EigenSpectrum::from_eigenvalues((1..=60).map(|j| 0.3 * (j as f64).powf(-0.7)).collect(), h);
        let r = verify_lower_bound(&good, &unit, h).unwrap();
        assert!(r.passed);
        assert!((r.fitted_constant - 0.3).abs() < 1e-12);
        assert_eq!(r.ratios.len(), 30);

        let bad = EigenSpectrum::from_eigenvalues((1..=60).map(|j| (j as f64).powf(-3.0)).collect(), h);
        assert!(!verify_lower_bound(&bad, &unit, h).unwrap().passed);
    }

    #[test]
    fn random_coefficients_are_valid_and_seeded() {
        let a = random_interval_coefficients(3, 3).unwrap();
        assert_eq!(a.coefficients().len(), 3);
        assert_eq!(a.breakpoints()[0], 0.0);
        assert_eq!(a.breakpoints()[3], 1.0);
        assert!(a.coefficients().iter().all(|u| u.abs() <= 1.0));
        assert_eq!(a, random_interval_coefficients(3, 3).unwrap());
        assert_ne!(a, random_interval_coefficients(4, 3).unwrap());
    }

    #[test]
    fn rejects_mismatched_inputs() {
        let h = HurstParam::new(0.7).unwrap();
        let unit = IntervalCoefficients::single_interval(1.0).unwrap();
        let short = EigenSpectrum::from_eigenvalues(vec![1.0; 10], h);
        assert!(verify_lower_bound(&short, &unit, h).is_err());
        let other = HurstParam::new(0.6).unwrap();
        let spec = EigenSpectrum::from_eigenvalues(vec![1.0; 40], h);
        assert!(verify_lower_bound(&spec, &unit, other).is_err());
    }
}
