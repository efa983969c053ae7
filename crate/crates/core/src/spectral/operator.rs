use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::kernels::{fourier_step, IntervalCoefficients};
use crate::error::{Error, Result};
use crate::process::HurstParam;

/// Relative tolerance on `max |M − M^H| / max |M|`.
const HERMITIAN_TOL: f64 = 1e-12;

/// Graded Nyström grid `x = ±Ω ((k − ½) / (N/2))^γ`, `k = 1..N/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    /// Total node count `N` (even; half on each side of the origin).
    pub nodes: usize,
    /// Frequency cutoff `Ω`.
    pub omega: f64,
    /// Grading exponent `γ`; values above 1 cluster nodes at the origin.
    pub grading: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            nodes: 2000,
            omega: 1500.0,
            grading: 4.0,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if self.nodes < 16 || self.nodes % 2 != 0 {
            return Err(Error::invalid(format!(
                "node count {} must be even and at least 16",
                self.nodes
            )));
        }
        if !(self.omega.is_finite() && self.omega > 0.0) {
            return Err(Error::invalid(format!("cutoff omega {} must be positive", self.omega)));
        }
        if !(self.grading.is_finite() && self.grading >= 1.0) {
            return Err(Error::invalid(format!("grading {} must be at least 1", self.grading)));
        }
        Ok(())
    }

    /// Nodes in ascending order with their weights; node `N − 1 − k` is `−x_k`.
    pub fn nodes_and_weights(&self) -> (Vec<f64>, Vec<f64>) {
        let half = self.nodes / 2;
        let hf = half as f64;
        let (pos, wpos): (Vec<f64>, Vec<f64>) = (1..=half)
            .map(|k| {
                let u = (k as f64 - 0.5) / hf;
                (
                    self.omega * u.powf(self.grading),
                    self.omega * self.grading * u.powf(self.grading - 1.0) / hf,
                )
            })
            .unzip();
        let nodes = pos.iter().rev().map(|x| -x).chain(pos.iter().copied()).collect();
        let weights = wpos.iter().rev().chain(wpos.iter()).copied().collect();
        (nodes, weights)
    }
}

#[derive(Debug, Clone)]
pub struct OperatorDiscretization {
    pub h: HurstParam,
    pub freq_points: Vec<f64>,
    pub weights: Vec<f64>,
    pub matrix: DMatrix<Complex64>,
}

impl OperatorDiscretization {
    pub fn dim(&self) -> usize {
        self.freq_points.len()
    }

    /// The same operator with its basis listed in reverse order.
    pub fn reversed(&self) -> Self {
        let n = self.dim();
        OperatorDiscretization {
            h: self.h,
            freq_points: self.freq_points.iter().rev().copied().collect(),
            weights: self.weights.iter().rev().copied().collect(),
            matrix: DMatrix::from_fn(n, n, |i, j| self.matrix[(n - 1 - i, n - 1 - j)]),
        }
    }

    /// `max |M − M^H| / max |M|`.
    pub fn hermitian_defect(&self) -> f64 {
        let m = &self.matrix;
        let n = m.nrows();
        let mut peak: f64 = 0.0;
        let mut defect: f64 = 0.0;
        for i in 0..n {
            for j in 0..=i {
                peak = peak.max(m[(i, j)].norm());
                defect = defect.max((m[(i, j)] - m[(j, i)].conj()).norm());
            }
        }
        if peak == 0.0 {
            0.0
        } else {
            defect / peak
        }
    }

    fn is_reflection_symmetric(&self) -> bool {
        let n = self.dim();
        (0..n).all(|k| self.freq_points[n - 1 - k] == -self.freq_points[k])
    }

    /// Eigenvalues of the (uncalibrated) Hermitian matrix, unsorted.
    ///
    /// On a grid symmetric under `x → −x` the reflection `P` satisfies
    /// `P M P = conj(M)`, and `U = (I + iP)/√2` turns `M` into the real
    /// symmetric matrix `S_kj = Re M_kj − Im M_{k, P j}` with the same spectrum.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let n = self.dim();
        let vals: Vec<f64> = if self.is_reflection_symmetric() {
            let m = &self.matrix;
            let s = DMatrix::from_fn(n, n, |k, j| m[(k, j)].re - m[(k, n - 1 - j)].im);
            s.symmetric_eigenvalues().iter().copied().collect()
        } else {
            self.matrix
                .symmetric_eigenvalues()
                .iter()
                .copied()
                .collect()
        };
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(Error::Eigen("non-finite eigenvalue".into()));
        }
        Ok(vals)
    }
}

/// Nyström matrix `M_kj = √(w_k w_j) |x_k|^{-H/2} ĝ(x_k − x_j) |x_j|^{-H/2} / (2π)`.
pub fn discretize_operator(
    coeffs: &IntervalCoefficients,
    h: HurstParam,
    quad: &QuadratureConfig,
) -> Result<OperatorDiscretization> {
    quad.validate()?;
    let (nodes, weights) = quad.nodes_and_weights();
    let n = nodes.len();
    let half_h = h.value() / 2.0;
    let amp: Vec<f64> = nodes
        .iter()
        .zip(&weights)
        .map(|(x, w)| w.sqrt() * x.abs().powf(-half_h))
        .collect();
    let inv_2pi = 1.0 / (2.0 * PI);
    let matrix = DMatrix::from_fn(n, n, |k, j| {
        fourier_step(coeffs, nodes[k] - nodes[j]) * (amp[k] * amp[j] * inv_2pi)
    });
    let disc = OperatorDiscretization {
        h,
        freq_points: nodes,
        weights,
        matrix,
    };
    let defect = disc.hermitian_defect();
    if defect > HERMITIAN_TOL {
        return Err(Error::NonHermitian(defect));
    }
    Ok(disc)
}

/// Leading eigenvalues `λ_1..λ_J` sorted by descending modulus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenSpectrum {
    pub eigenvalues: Vec<f64>,
    pub truncation: usize,
    /// Scale factor applied to the raw matrix eigenvalues.
    pub calibration: f64,
    pub h: HurstParam,
    pub source: Option<IntervalCoefficients>,
}

impl EigenSpectrum {
    /// A spectrum given directly by its eigenvalues (no operator behind it).
    pub fn from_eigenvalues(mut eigenvalues: Vec<f64>, h: HurstParam) -> Self {
        eigenvalues.sort_by(|a, b| b.abs().total_cmp(&a.abs()));
        EigenSpectrum {
            truncation: eigenvalues.len(),
            eigenvalues,
            calibration: 1.0,
            h,
            source: None,
        }
    }

    pub fn sum_squares(&self) -> f64 {
        self.eigenvalues.iter().map(|l| l * l).sum()
    }

    pub fn sum_cubes(&self) -> f64 {
        self.eigenvalues.iter().map(|l| l * l * l).sum()
    }

    /// Variance of `Σ λ_j (Y_j² − 1)`.
    pub fn variance(&self) -> f64 {
        2.0 * self.sum_squares()
    }

    pub fn negative_count(&self) -> usize {
        self.eigenvalues.iter().filter(|&&l| l < 0.0).count()
    }

    pub fn singular_values(&self) -> Vec<f64> {
        self.eigenvalues.iter().map(|l| l.abs()).collect()
    }
}

/// Keep the `truncation` largest-modulus eigenvalues and multiply by `scale`.
pub fn eigen_spectrum(disc: &OperatorDiscretization, truncation: usize, scale: f64) -> Result<EigenSpectrum> {
    if truncation == 0 || truncation > disc.dim() {
        return Err(Error::invalid(format!(
            "truncation {truncation} must lie in 1..={}",
            disc.dim()
        )));
    }
    let mut vals = disc.eigenvalues()?;
    vals.sort_by(|a, b| b.abs().total_cmp(&a.abs()));
    vals.truncate(truncation);
    for v in &mut vals {
        *v *= scale;
    }
    Ok(EigenSpectrum {
        eigenvalues: vals,
        truncation,
        calibration: scale,
        h: disc.h,
        source: None,
    })
}

/// The multiplicative constant `c_H` fixed so that the truncated spectrum of
/// `1_[0,1]` has `Σ λ_j² = 1/2`, i.e. `Var X_1 = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub h: HurstParam,
    pub quadrature: QuadratureConfig,
    pub truncation: usize,
    pub scale: f64,
}

impl Calibration {
    pub fn compute(h: HurstParam, quadrature: QuadratureConfig, truncation: usize) -> Result<Self> {
        let unit = IntervalCoefficients::single_interval(1.0)?;
        let disc = discretize_operator(&unit, h, &quadrature)?;
        let raw = eigen_spectrum(&disc, truncation, 1.0)?;
        let scale = (0.5 / raw.sum_squares()).sqrt();
        Ok(Calibration {
            h,
            quadrature,
            truncation,
            scale,
        })
    }

    /// Calibrated spectrum of the operator attached to `coeffs`.
    pub fn spectrum(&self, coeffs: &IntervalCoefficients) -> Result<EigenSpectrum> {
        let disc = discretize_operator(coeffs, self.h, &self.quadrature)?;
        let mut spec = eigen_spectrum(&disc, self.truncation, self.scale)?;
        spec.source = Some(coeffs.clone());
        Ok(spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h(v: f64) -> HurstParam {
        HurstParam::new(v).unwrap()
    }

    fn small() -> QuadratureConfig {
        QuadratureConfig {
            nodes: 160,
            omega: 120.0,
            grading: 4.0,
        }
    }

    #[test]
    fn grid_is_symmetric_without_origin() {
        let (x, w) = small().nodes_and_weights();
        assert_eq!(x.len(), 160);
        assert!(x.iter().all(|&v| v != 0.0));
        assert!(x.windows(2).all(|p| p[1] > p[0]));
        for k in 0..x.len() {
            assert_eq!(x[159 - k], -x[k]);
            assert_eq!(w[159 - k], w[k]);
        }
        // Weights integrate |x|^0 over [−Ω, Ω] to second order.
        let total: f64 = w.iter().sum();
        assert!((total / 240.0 - 1.0).abs() < 1e-3);
    }

    #[test]
    fn matrix_is_hermitian() {
        let c = IntervalCoefficients::new(vec![0.1, 0.4, 0.9], vec![1.0, -2.0]).unwrap();
        let d = discretize_operator(&c, h(0.7), &small()).unwrap();
        assert!(d.hermitian_defect() <= 1e-12);
    }

    #[test]
    fn real_reduction_matches_complex_eigensolver() {
        let c = IntervalCoefficients::new(vec![0.0, 0.3, 1.2, 1.5], vec![1.0, -0.4, 2.0]).unwrap();
        let d = discretize_operator(&c, h(0.65), &small()).unwrap();
        let mut fast = d.eigenvalues().unwrap();
        let mut reference: Vec<f64> = d.matrix.clone().symmetric_eigenvalues().iter().copied().collect();
        fast.sort_by(f64::total_cmp);
        reference.sort_by(f64::total_cmp);
        let peak = reference.iter().map(|v| v.abs()).fold(0.0, f64::max);
        for (a, b) in fast.iter().zip(&reference) {
            assert!((a - b).abs() < 1e-10 * peak, "{a} vs {b}");
        }
    }

    #[test]
    fn reversed_basis_gives_same_spectrum() {
        let c = IntervalCoefficients::single_interval(1.0).unwrap();
        let d = discretize_operator(&c, h(0.7), &small()).unwrap();
        let a = eigen_spectrum(&d, 40, 1.0).unwrap();
        let b = eigen_spectrum(&d.reversed(), 40, 1.0).unwrap();
        for (x, y) in a.eigenvalues.iter().zip(&b.eigenvalues) {
            assert!((x - y).abs() < 1e-12 * a.eigenvalues[0].abs());
        }
    }

    #[test]
    fn truncation_bounds() {
        let c = IntervalCoefficients::single_interval(1.0).unwrap();
        let d = discretize_operator(&c, h(0.7), &small()).unwrap();
        assert!(eigen_spectrum(&d, 0, 1.0).is_err());
        assert!(eigen_spectrum(&d, 161, 1.0).is_err());
        let bad = QuadratureConfig { nodes: 8, ..small() };
        assert!(discretize_operator(&c, h(0.7), &bad).is_err());
    }

    #[test]
    fn spectrum_is_linear_in_coefficients() {
        let cal = Calibration::compute(h(0.7), small(), 60).unwrap();
        let c = IntervalCoefficients::new(vec![0.0, 0.5, 1.0], vec![1.0, 0.3]).unwrap();
        let base = cal.spectrum(&c).unwrap();
        for a in [0.25, 3.0] {
            let scaled = cal.spectrum(&c.scaled(a).unwrap()).unwrap();
            for (x, y) in base.eigenvalues.iter().zip(&scaled.eigenvalues) {
                assert!((a * x - y).abs() <= 1e-10 * (a * x).abs().max(1e-3 * a * base.eigenvalues[0].abs()));
            }
        }
    }

    #[test]
    fn calibrated_unit_interval_has_unit_variance() {
        let cal = Calibration::compute(h(0.7), small(), 60).unwrap();
        let s = cal.spectrum(&IntervalCoefficients::single_interval(1.0).unwrap()).unwrap();
        assert!((s.sum_squares() - 0.5).abs() < 1e-12);
        let top = s.eigenvalues.iter().fold(0.0f64, |m, l| m.max(l.abs()));
        let worst = s.eigenvalues.iter().fold(0.0f64, |m, &l| m.min(l));
        assert!(worst > -1e-6 * top, "negative eigenvalue {worst} vs top {top}");
    }
}
