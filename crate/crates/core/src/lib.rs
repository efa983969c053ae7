//! Rosenblatt process laboratory.
//!
//! Sample paths come from the non-central limit construction (Hermite rank 2
//! transforms of long-range-dependent Gaussian noise). Marginal laws come from
//! the second-chaos eigenvalue expansion of a discretized frequency-domain
//! operator. Mollified self-intersection, intersection and collision local
//! times are estimated on simulated paths, and their moment scaling in time
//! and space is fitted against the theoretical Hölder exponents.

pub mod ensemble;
pub mod error;
pub mod holder;
pub mod local_time;
pub mod process;
pub mod seed;
pub mod simulator;
pub mod spectral;
pub mod stats;

pub use error::{Error, Result};
pub use holder::{
    fit_exponent, holder_space_experiment, holder_time_experiment, theoretical_exponents,
    ExponentFit, ExponentTable, HolderParams, HolderReport, HolderRow,
};
pub use local_time::{
    clt_estimate, epsilon_convergence_study, estimate_ensemble, ilt_estimate, moment_estimate, mollifier,
    resolution_floor, slt_estimate, EpsilonStudy, LocalTimeEstimate, LocalTimeKind,
    MollifierScale, MomentEstimate, PathParams, SpaceOffset,
};
pub use process::{covariance, hermite, HurstPair, HurstParam, ProcessPath, TimeGrid};
pub use simulator::{
    exact_partial_sum_variance, fgn_correlation, generate_lrd_gaussian, simulate_independent_pair,
    simulate_rosenblatt, LrdGaussianSequence, Normalization, RosenblattSimulator, SimulationConfig,
};
pub use spectral::{
    char_function, density_half_width, discretize_operator, eigen_spectrum, fourier_step, kernel_ht, marginal_density,
    random_interval_coefficients, sample_second_chaos, verify_lower_bound, BoundReport, Calibration, EigenSpectrum,
    IntervalCoefficients, OperatorDiscretization, QuadratureConfig,
};
