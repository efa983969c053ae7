//! Second-chaos spectral machinery.
//!
//! The law of `Σ u_i (X_{ℓ_{i+1}} − X_{ℓ_i})` is that of `Σ_j λ_j (Y_j² − 1)` where
//! the `λ_j` are eigenvalues of the frequency-domain operator with kernel
//! `c_H |x|^{-H/2} ĝ(x − y) |y|^{-H/2}`, `g` being the step function with the
//! given breakpoints and coefficients. This module discretizes that operator
//! on a graded Nyström grid, extracts its leading eigenvalues, and evaluates
//! characteristic functions, densities and samples of the resulting law.

mod bound;
mod chaos;
mod kernels;
mod operator;

pub use bound::{random_interval_coefficients, verify_lower_bound, BoundReport, BOUNDED_AWAY_FRACTION};
pub use chaos::{char_function, density_half_width, marginal_density, sample_second_chaos, tail_mass_bound};
pub use kernels::{fourier_step, kernel_ht, IntervalCoefficients, SERIES_SWITCH};
pub use operator::{
    discretize_operator, eigen_spectrum, Calibration, EigenSpectrum, OperatorDiscretization,
    QuadratureConfig,
};
