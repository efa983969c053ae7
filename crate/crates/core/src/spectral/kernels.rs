use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Below this modulus the removable singularities are evaluated by series.
pub const SERIES_SWITCH: f64 = 1e-6;

/// Step function `g = Σ u_i 1_[ℓ_i, ℓ_{i+1}]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalCoefficients {
    breakpoints: Vec<f64>,
    coefficients: Vec<f64>,
}

impl IntervalCoefficients {
    pub fn new(breakpoints: Vec<f64>, coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.is_empty() || breakpoints.len() != coefficients.len() + 1 {
            return Err(Error::invalid(format!(
                "need m + 1 breakpoints for m coefficients (got {} and {})",
                breakpoints.len(),
                coefficients.len()
            )));
        }
        if breakpoints.iter().chain(&coefficients).any(|v| !v.is_finite()) {
            return Err(Error::invalid("breakpoints and coefficients must be finite"));
        }
        if breakpoints[0] < 0.0 {
            return Err(Error::invalid("first breakpoint must be non-negative"));
        }
        if breakpoints.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("breakpoints must be strictly increasing"));
        }
        if coefficients.iter().all(|&u| u == 0.0) {
            return Err(Error::invalid("coefficients must not all be zero"));
        }
        Ok(IntervalCoefficients {
            breakpoints,
            coefficients,
        })
    }

    /// The indicator of `[0, t]`, whose operator describes `X_t`.
    pub fn single_interval(t: f64) -> Result<Self> {
        IntervalCoefficients::new(vec![0.0, t], vec![1.0])
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn pieces(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.coefficients
            .iter()
            .zip(self.breakpoints.windows(2))
            .map(|(&u, w)| (u, w[0], w[1]))
    }

    pub fn scaled(&self, a: f64) -> Result<Self> {
        IntervalCoefficients::new(
            self.breakpoints.clone(),
            self.coefficients.iter().map(|u| a * u).collect(),
        )
    }

    /// `max_i |u_i| |ℓ_{i+1} − ℓ_i|^H`.
    pub fn amplitude(&self, h: f64) -> f64 {
        self.pieces()
            .map(|(u, a, b)| u.abs() * (b - a).powf(h))
            .fold(0.0, f64::max)
    }
}

/// `H_t(x, y) = (e^{i t (x+y)} − 1) / (i (x + y))`.
pub fn kernel_ht(x: f64, y: f64, t: f64) -> Complex64 {
    let s = x + y;
    if s.abs() < SERIES_SWITCH {
        // t + i t² s / 2 − t³ s² / 6
        Complex64::new(t - t * t * t * s * s / 6.0, 0.5 * t * t * s)
    } else {
        let (sin, cos) = (t * s).sin_cos();
        // (cos − 1 + i sin) / (i s)
        Complex64::new(sin / s, (1.0 - cos) / s)
    }
}

/// Fourier transform `ĝ(z) = Σ u_i (e^{−i ℓ_{i+1} z} − e^{−i ℓ_i z}) / (−i z)`.
pub fn fourier_step(coeffs: &IntervalCoefficients, z: f64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    if z.abs() < SERIES_SWITCH {
        for (u, a, b) in coeffs.pieces() {
            // (b − a) − i z (b² − a²)/2 − z² (b³ − a³)/6
            let re = (b - a) - z * z * (b * b * b - a * a * a) / 6.0;
            let im = -z * (b * b - a * a) / 2.0;
            acc += u * Complex64::new(re, im);
        }
    } else {
        for (u, a, b) in coeffs.pieces() {
            let (sb, cb) = (b * z).sin_cos();
            let (sa, ca) = (a * z).sin_cos();
            // (e^{−ibz} − e^{−iaz}) / (−iz) = i (e^{−ibz} − e^{−iaz}) / z
            let dre = cb - ca;
            let dim = -(sb - sa);
            acc += u * Complex64::new(-dim / z, dre / z);
        }
    }
    acc
}
