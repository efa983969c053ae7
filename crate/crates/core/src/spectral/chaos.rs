use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use std::f64::consts::PI;

use super::operator::EigenSpectrum;
use crate::ensemble::replicate;
use crate::error::{Error, Result};
use crate::seed::{derive_seed, rng_from_seed};

/// Replications drawn from one derived stream in [`sample_second_chaos`].
const SAMPLE_CHUNK: usize = 4096;
/// Integrand modulus at which the inversion integral is cut off.
const INVERSION_CUTOFF: f64 = 1e-10;
/// Largest tail mass outside the density grid.
const MAX_TAIL_MASS: f64 = 1e-4;
/// Most negative density value tolerated from the inversion.
const NEGATIVITY_FLOOR: f64 = -1e-3;

/// `E e^{ipX} = Π_j e^{−ipλ_j} (1 − 2ipλ_j)^{−1/2}` over the truncated spectrum.
pub fn char_function(spec: &EigenSpectrum, p: f64) -> Complex64 {
    let mut log = Complex64::new(0.0, 0.0);
    for &lam in &spec.eigenvalues {
        let z = Complex64::new(1.0, -2.0 * p * lam);
        log += Complex64::new(0.0, -p * lam) - 0.5 * z.ln();
    }
    log.exp()
}

/// `reps` independent draws of `Σ_j λ_j (Y_j² − 1)`.
pub fn sample_second_chaos(spec: &EigenSpectrum, seed: u64, reps: usize, workers: usize) -> Vec<f64> {
    let chunks = reps.div_ceil(SAMPLE_CHUNK);
    replicate(chunks, workers, |c| {
        let mut rng = rng_from_seed(derive_seed(seed, c as u64));
        let count = SAMPLE_CHUNK.min(reps - c * SAMPLE_CHUNK);
        (0..count)
            .map(|_| {
                spec.eigenvalues
                    .iter()
                    .map(|&lam| {
                        let y: f64 = rng.sample(StandardNormal);
                        lam * (y * y - 1.0)
                    })
                    .sum::<f64>()
            })
            .collect::<Vec<f64>>()
    })
    .into_iter()
    .flatten()
    .collect()
}

/// Chernoff bound on `P(X ≥ a) + P(X ≤ −a)`.
pub fn tail_mass_bound(spec: &EigenSpectrum, a: f64) -> f64 {
    let one_side = |sign: f64| -> f64 {
        // P(sign X ≥ a) ≤ inf_θ exp(−θa + K(θ)), K the cumulant generating function.
        let top = spec
            .eigenvalues
            .iter()
            .map(|l| sign * l)
            .fold(0.0, f64::max);
        let theta_max = if top > 0.0 {
            0.5 / top
        } else {
            50.0 / spec.variance().sqrt().max(1e-12)
        };
        (1..400)
            .map(|k| {
                let theta = theta_max * k as f64 / 400.0;
                let cgf: f64 = spec
                    .eigenvalues
                    .iter()
                    .map(|l| {
                        let x = theta * sign * l;
                        -x - 0.5 * (1.0 - 2.0 * x).ln()
                    })
                    .sum();
                (-theta * a + cgf).exp()
            })
            .fold(1.0, f64::min)
    };
    one_side(1.0) + one_side(-1.0)
}

/// Smallest half-width `a` on a 1/4-unit lattice, starting from four standard
/// deviations, whose Chernoff tail mass is below a tenth of the inversion limit.
pub fn density_half_width(spec: &EigenSpectrum) -> f64 {
    let mut a = (4.0 * spec.variance().sqrt() * 4.0).ceil() / 4.0;
    while tail_mass_bound(spec, a) >= 0.1 * MAX_TAIL_MASS {
        a += 0.25;
    }
    a
}

/// Density of `Σ λ_j (Y_j² − 1)` on `x_grid` by trapezoid Fourier inversion.
///
/// The grid must be ascending and symmetric, `[−a, a]`, with Chernoff tail
/// mass below 1e−4 outside it. Frequencies are spaced `2π / (4a)` so that
/// aliased copies of the density sit at least `2a` away from every grid point,
/// and the sum stops once `|φ| < 1e−10`.
pub fn marginal_density(spec: &EigenSpectrum, x_grid: &[f64]) -> Result<Vec<f64>> {
    if x_grid.len() < 3 {
        return Err(Error::invalid("density grid needs at least three points"));
    }
    if x_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("density grid must be strictly increasing"));
    }
    let a = x_grid[x_grid.len() - 1];
    if a <= 0.0 || (x_grid[0] + a).abs() > 1e-9 * a {
        return Err(Error::invalid("density grid must be symmetric about 0"));
    }
    let tail = tail_mass_bound(spec, a);
    if tail >= MAX_TAIL_MASS {
        return Err(Error::invalid(format!(
            "density grid [-{a}, {a}] leaves tail mass up to {tail:e}; widen it"
        )));
    }

    let step = 2.0 * PI / (4.0 * a);
    let mut phis = vec![char_function(spec, 0.0)];
    loop {
        let p = step * phis.len() as f64;
        let phi = char_function(spec, p);
        if phi.norm() < INVERSION_CUTOFF {
            break;
        }
        if phis.len() > 5_000_000 {
            return Err(Error::invalid("characteristic function decays too slowly to invert"));
        }
        phis.push(phi);
    }

    let mut density = Vec::with_capacity(x_grid.len());
    for &x in x_grid {
        let mut acc = 0.5 * phis[0].re;
        for (k, phi) in phis.iter().enumerate().skip(1) {
            let (s, c) = (step * k as f64 * x).sin_cos();
            // Re(φ e^{−ipx})
            acc += phi.re * c + phi.im * s;
        }
        let value = acc * step / PI;
        if value < NEGATIVITY_FLOOR {
            return Err(Error::NegativeDensity { x, value });
        }
        density.push(value);
    }
    Ok(density)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::process::HurstParam;
    use crate::stats;

    fn spectrum(vals: &[f64]) -> EigenSpectrum {
        EigenSpectrum::from_eigenvalues(vals.to_vec(), HurstParam::new(0.7).unwrap())
    }

    fn power_law() -> EigenSpectrum {
        let raw: Vec<f64> = (1..=60).map(|j| (j as f64).powf(-0.7)).collect();
        let s: f64 = raw.iter().map(|l| l * l).sum();
        spectrum(&raw.iter().map(|l| l * (0.5 / s).sqrt()).collect::<Vec<_>>())
    }

    #[test]
    fn char_function_basics() {
        let spec = power_law();
        assert_eq!(char_function(&spec, 0.0), Complex64::new(1.0, 0.0));
        let modulus: f64 = spec
            .eigenvalues
            .iter()
            .map(|l| (1.0 + 4.0 * l * l).powf(-0.25))
            .product();
        assert!((char_function(&spec, 1.0).norm() - modulus).abs() < 1e-14);
    }

    #[test]
    fn single_eigenvalue_is_centered_chi_square() {
        let lam = 0.8;
        let spec = spectrum(&[lam]);
        for p in [-2.0, 0.3, 1.0, 5.0] {
            let i = Complex64::i();
            let direct = (-i * p * lam).exp() / (Complex64::new(1.0, 0.0) - 2.0 * i * p * lam).sqrt();
            assert!((char_function(&spec, p) - direct).norm() < 1e-14);
        }
    }

    #[test]
    fn third_cumulant_of_single_term() {
        // κ₃ of λ(Y² − 1) by direct quadrature against the Gaussian density.
        let lam = 0.6;
        let n = 200_000;
        let (lo, hi) = (-12.0f64, 12.0f64);
        let dx = (hi - lo) / n as f64;
        let third: f64 = (0..=n)
            .map(|k| {
                let y = lo + k as f64 * dx;
                let w = if k == 0 || k == n { 0.5 } else { 1.0 };
                w * (lam * (y * y - 1.0)).powi(3) * (-0.5 * y * y).exp() / (2.0 * PI).sqrt()
            })
            .sum::<f64>()
            * dx;
        assert!((third - 8.0 * lam.powi(3)).abs() < 1e-9);
    }

    #[test]
    fn sample_moments() {
        let spec = power_law();
        let xs = sample_second_chaos(&spec, 4, 100_000, 4);
        assert_eq!(xs.len(), 100_000);
        assert_eq!(xs, sample_second_chaos(&spec, 4, 100_000, 1));
        let m = stats::mean(&xs);
        assert!(m.abs() < 4.0 * stats::std_error(&xs));
        let sq: Vec<f64> = xs.iter().map(|x| (x - m).powi(2)).collect();
        assert!((stats::mean(&sq) - spec.variance()).abs() < 4.0 * stats::std_error(&sq));
        let cube: Vec<f64> = xs.iter().map(|x| (x - m).powi(3)).collect();
        assert!((stats::mean(&cube) - 8.0 * spec.sum_cubes()).abs() < 4.0 * stats::std_error(&cube));
    }

    #[test]
    fn empirical_char_function_agrees() {
        let spec = power_law();
        let xs = sample_second_chaos(&spec, 9, 100_000, 4);
        for p in [0.5, 1.0, 2.0] {
            let re: Vec<f64> = xs.iter().map(|x| (p * x).cos()).collect();
            let im: Vec<f64> = xs.iter().map(|x| (p * x).sin()).collect();
            let emp = Complex64::new(stats::mean(&re), stats::mean(&im));
            let se = (stats::std_error(&re).powi(2) + stats::std_error(&im).powi(2)).sqrt();
            assert!((emp - char_function(&spec, p)).norm() < 4.0 * se);
        }
    }

    #[test]
    fn density_normalization_mean_and_ks() {
        let spec = power_law();
        let grid: Vec<f64> = (0..=4000).map(|k| -20.0 + k as f64 * 0.01).collect();
        let dens = marginal_density(&spec, &grid).unwrap();
        let dx = 0.01;
        let trap = |f: &dyn Fn(usize) -> f64| -> f64 {
            (0..grid.len())
                .map(|k| if k == 0 || k == grid.len() - 1 { 0.5 * f(k) } else { f(k) })
                .sum::<f64>()
                * dx
        };
        assert!((trap(&|k| dens[k]) - 1.0).abs() < 1e-3);
        assert!(trap(&|k| grid[k] * dens[k]).abs() < 1e-3);

        let mut cdf = vec![0.0; grid.len()];
        for k in 1..grid.len() {
            cdf[k] = cdf[k - 1] + 0.5 * dx * (dens[k] + dens[k - 1]);
        }
        let xs = sample_second_chaos(&spec, 12, 100_000, 4);
        assert!(stats::ks_distance(&xs, &grid, &cdf) < 0.01);
    }

    #[test]
    fn automatic_half_width_is_accepted() {
        let spec = power_law();
        let a = density_half_width(&spec);
        assert!(a > 4.0 && tail_mass_bound(&spec, a) < 1e-5);
        let grid: Vec<f64> = (0..=200).map(|k| -a + k as f64 * a / 100.0).collect();
        assert!(marginal_density(&spec, &grid).is_ok());
    }

    #[test]
    fn density_rejects_narrow_or_asymmetric_grids() {
        let spec = power_law();
        let narrow: Vec<f64> = (0..=100).map(|k| -1.0 + k as f64 * 0.02).collect();
        assert!(matches!(marginal_density(&spec, &narrow), Err(Error::InvalidInput(_))));
        let skew: Vec<f64> = (0..=100).map(|k| -5.0 + k as f64 * 0.2).collect();
        assert!(marginal_density(&spec, &skew).is_err());
    }
}
