//! Python bindings: path simulation, second-chaos spectra, local-time
//! estimators, epsilon and Hölder studies, and theoretical exponents.

use lab::holder::HolderParams;
use num_complex::Complex64;
use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn to_py(e: lab::Error) -> PyErr {
    if e.is_numerical() {
        PyArithmeticError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

fn hurst(v: f64) -> PyResult<lab::HurstParam> {
    lab::HurstParam::new(v).map_err(to_py)
}

fn kind(s: &str) -> PyResult<lab::LocalTimeKind> {
    s.parse().map_err(to_py)
}

fn coefficients(t: f64, breakpoints: Option<Vec<f64>>, coeffs: Option<Vec<f64>>) -> PyResult<lab::IntervalCoefficients> {
    match (breakpoints, coeffs) {
        (Some(b), Some(u)) => lab::IntervalCoefficients::new(b, u),
        (None, None) => lab::IntervalCoefficients::single_interval(t),
        _ => return Err(PyValueError::new_err("give breakpoints and coefficients together")),
    }
    .map_err(to_py)
}

/// A simulated path on a uniform grid.
#[pyclass(frozen, module = "rosenlab")]
struct Path {
    inner: lab::ProcessPath,
}

#[pymethods]
impl Path {
    #[getter]
    fn times(&self) -> Vec<f64> {
        self.inner.grid.points()
    }

    #[getter]
    fn values(&self) -> Vec<f64> {
        self.inner.values.clone()
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.inner.seed
    }

    #[getter]
    fn h(&self) -> f64 {
        self.inner.h.value()
    }

    fn __len__(&self) -> usize {
        self.inner.values.len()
    }
}

/// Rosenblatt path sampler on `[0, horizon]` with `steps` grid steps.
#[pyclass(frozen, module = "rosenlab")]
struct Simulator {
    inner: lab::RosenblattSimulator,
}

#[pymethods]
impl Simulator {
    #[new]
    #[pyo3(signature = (h, steps, oversample = 16, horizon = 1.0, exact_variance = true))]
    fn new(h: f64, steps: usize, oversample: usize, horizon: f64, exact_variance: bool) -> PyResult<Self> {
        let grid = lab::TimeGrid::new(horizon, steps).map_err(to_py)?;
        let norm = if exact_variance {
            lab::Normalization::ExactVariance
        } else {
            lab::Normalization::None
        };
        let inner = lab::RosenblattSimulator::new(grid, hurst(h)?, oversample, norm).map_err(to_py)?;
        Ok(Simulator { inner })
    }

    fn path(&self, py: Python<'_>, seed: u64) -> Path {
        Path {
            inner: py.detach(|| self.inner.path(seed)),
        }
    }
}

/// Truncated, calibrated eigenvalue spectrum of a step function's operator.
#[pyclass(frozen, module = "rosenlab")]
struct Spectrum {
    inner: lab::EigenSpectrum,
}

#[pymethods]
impl Spectrum {
    #[new]
    #[pyo3(signature = (h, t = 1.0, breakpoints = None, coefficients = None, nodes = 2000, omega = 1500.0, grading = 4.0, truncation = 200))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        py: Python<'_>,
        h: f64,
        t: f64,
        breakpoints: Option<Vec<f64>>,
        coefficients: Option<Vec<f64>>,
        nodes: usize,
        omega: f64,
        grading: f64,
        truncation: usize,
    ) -> PyResult<Self> {
        let hp = hurst(h)?;
        let coeffs = self::coefficients(t, breakpoints, coefficients)?;
        let quad = lab::QuadratureConfig { nodes, omega, grading };
        let inner = py
            .detach(|| lab::Calibration::compute(hp, quad, truncation).and_then(|c| c.spectrum(&coeffs)))
            .map_err(to_py)?;
        Ok(Spectrum { inner })
    }

    #[getter]
    fn eigenvalues(&self) -> Vec<f64> {
        self.inner.eigenvalues.clone()
    }

    #[getter]
    fn calibration(&self) -> f64 {
        self.inner.calibration
    }

    fn sum_squares(&self) -> f64 {
        self.inner.sum_squares()
    }

    fn variance(&self) -> f64 {
        self.inner.variance()
    }

    fn char_function(&self, p: f64) -> Complex64 {
        lab::char_function(&self.inner, p)
    }

    #[pyo3(signature = (seed, reps, workers = 1))]
    fn sample(&self, py: Python<'_>, seed: u64, reps: usize, workers: usize) -> Vec<f64> {
        py.detach(|| lab::sample_second_chaos(&self.inner, seed, reps, workers))
    }

    fn density(&self, py: Python<'_>, x: Vec<f64>) -> PyResult<Vec<f64>> {
        py.detach(|| lab::marginal_density(&self.inner, &x)).map_err(to_py)
    }

    fn density_half_width(&self) -> f64 {
        lab::density_half_width(&self.inner)
    }

    /// Lower-bound report against the step function the spectrum was built from.
    fn verify_bound<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let src = self
            .inner
            .source
            .clone()
            .ok_or_else(|| PyValueError::new_err("spectrum has no source step function"))?;
        let r = lab::verify_lower_bound(&self.inner, &src, self.inner.h).map_err(to_py)?;
        let d = PyDict::new(py);
        d.set_item("fitted_constant", r.fitted_constant)?;
        d.set_item("amplitude", r.amplitude)?;
        d.set_item("ratios", r.ratios)?;
        d.set_item("tail_min", r.tail_min)?;
        d.set_item("tail_max", r.tail_max)?;
        d.set_item("negative_eigenvalues", r.negative_eigenvalues)?;
        d.set_item("passed", r.passed)?;
        Ok(d)
    }
}

#[pyfunction]
fn covariance(s: f64, t: f64, h: f64) -> PyResult<f64> {
    Ok(lab::covariance(s, t, hurst(h)?))
}

#[pyfunction]
fn exact_partial_sum_variance(n: usize, h: f64) -> PyResult<f64> {
    if n == 0 {
        return Err(PyValueError::new_err("n must be at least 1"));
    }
    Ok(lab::exact_partial_sum_variance(n, hurst(h)?))
}

#[pyfunction]
fn mollifier(x: f64, eps: f64) -> PyResult<f64> {
    Ok(lab::mollifier(x, lab::MollifierScale::new(eps).map_err(to_py)?))
}

#[pyfunction]
#[pyo3(signature = (path, eps, y = 0.0))]
fn slt(path: &Path, eps: f64, y: f64) -> PyResult<f64> {
    let e = lab::MollifierScale::new(eps).map_err(to_py)?;
    Ok(lab::slt_estimate(&path.inner, e, lab::SpaceOffset(y)).value)
}

#[pyfunction]
#[pyo3(signature = (path1, path2, eps, y = 0.0))]
fn ilt(path1: &Path, path2: &Path, eps: f64, y: f64) -> PyResult<f64> {
    let e = lab::MollifierScale::new(eps).map_err(to_py)?;
    Ok(lab::ilt_estimate(&path1.inner, &path2.inner, e, lab::SpaceOffset(y)).map_err(to_py)?.value)
}

#[pyfunction]
#[pyo3(signature = (path1, path2, eps, y = 0.0))]
fn clt(path1: &Path, path2: &Path, eps: f64, y: f64) -> PyResult<f64> {
    let e = lab::MollifierScale::new(eps).map_err(to_py)?;
    Ok(lab::clt_estimate(&path1.inner, &path2.inner, e, lab::SpaceOffset(y)).map_err(to_py)?.value)
}

#[pyfunction]
#[pyo3(signature = (kind, h1, h2 = None))]
fn theoretical_exponents<'py>(py: Python<'py>, kind: &str, h1: f64, h2: Option<f64>) -> PyResult<Bound<'py, PyDict>> {
    let h2 = h2.map(hurst).transpose()?;
    let t = lab::theoretical_exponents(self::kind(kind)?, hurst(h1)?, h2).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("kind", t.kind.as_str())?;
    d.set_item("h1", t.h1)?;
    d.set_item("h2", t.h2)?;
    d.set_item("exists", t.exists)?;
    d.set_item("space_exponent_sup", t.space_exponent_sup)?;
    d.set_item("time_exponent_sup", t.time_exponent_sup)?;
    Ok(d)
}

#[pyfunction]
#[pyo3(signature = (points, moment_order = 2))]
fn fit_exponent(points: Vec<(f64, f64)>, moment_order: u32) -> PyResult<(f64, f64, f64)> {
    let f = lab::fit_exponent(&points, moment_order).map_err(to_py)?;
    Ok((f.slope, f.intercept, f.stderr_slope))
}

#[allow(clippy::too_many_arguments)]
fn path_params(
    kind: &str,
    h: f64,
    h2: Option<f64>,
    steps: usize,
    seed: u64,
    oversample: usize,
    y: f64,
    workers: usize,
) -> PyResult<lab::PathParams> {
    let k = self::kind(kind)?;
    let second = if k.needs_pair() { Some(hurst(h2.unwrap_or(h))?) } else { None };
    let mut p = lab::PathParams::new(k, hurst(h)?, second, steps, seed);
    p.oversample = oversample;
    p.y = lab::SpaceOffset(y);
    p.workers = workers;
    Ok(p)
}

/// Mollified values on a decreasing epsilon ladder with common random paths.
#[pyfunction]
#[pyo3(signature = (kind, h, steps, ladder, reps, seed = 0, h2 = None, oversample = 16, y = 0.0, workers = 1, moment_order = 1.0))]
#[allow(clippy::too_many_arguments)]
fn epsilon_study<'py>(
    py: Python<'py>,
    kind: &str,
    h: f64,
    steps: usize,
    ladder: Vec<f64>,
    reps: usize,
    seed: u64,
    h2: Option<f64>,
    oversample: usize,
    y: f64,
    workers: usize,
    moment_order: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let p = path_params(kind, h, h2, steps, seed, oversample, y, workers)?;
    let study = py
        .detach(|| lab::epsilon_convergence_study(&p, &ladder, reps, moment_order))
        .map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("eps", study.rows.iter().map(|r| r.eps).collect::<Vec<_>>())?;
    d.set_item("mean", study.rows.iter().map(|r| r.mean).collect::<Vec<_>>())?;
    d.set_item("mean_stderr", study.rows.iter().map(|r| r.mean_stderr).collect::<Vec<_>>())?;
    d.set_item("abs_moment", study.rows.iter().map(|r| r.abs_moment.mean).collect::<Vec<_>>())?;
    let diffs = study.differences();
    d.set_item("differences", diffs.iter().map(|m| m.mean).collect::<Vec<_>>())?;
    d.set_item("difference_stderr", diffs.iter().map(|m| m.stderr).collect::<Vec<_>>())?;
    Ok(d)
}

/// Moment-scaling experiment in time (`axis="time"`, base is `t_base`) or
/// space (`axis="space"`, base is `y_base`, deltas in absolute units).
#[pyfunction]
#[pyo3(signature = (axis, kind, h, steps, eps, base, deltas, reps, seed = 0, h2 = None, oversample = 16, workers = 1, moment_order = 2, tolerance = 0.15))]
#[allow(clippy::too_many_arguments)]
fn holder_experiment<'py>(
    py: Python<'py>,
    axis: &str,
    kind: &str,
    h: f64,
    steps: usize,
    eps: f64,
    base: f64,
    deltas: Vec<f64>,
    reps: usize,
    seed: u64,
    h2: Option<f64>,
    oversample: usize,
    workers: usize,
    moment_order: u32,
    tolerance: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let path = path_params(kind, h, h2, steps, seed, oversample, 0.0, workers)?;
    let mut hp = HolderParams::new(path, eps, base, deltas, reps);
    hp.moment_order = moment_order;
    hp.tolerance = tolerance;
    let r = match axis {
        "time" => py.detach(|| lab::holder_time_experiment(&hp)),
        "space" => py.detach(|| lab::holder_space_experiment(&hp)),
        other => return Err(PyValueError::new_err(format!("axis must be 'time' or 'space', not '{other}'"))),
    }
    .map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("slope", r.fit.slope)?;
    d.set_item("stderr", r.fit.stderr_slope)?;
    d.set_item("threshold", r.threshold)?;
    d.set_item("passed", r.passed)?;
    d.set_item("delta", r.rows.iter().map(|x| x.delta).collect::<Vec<_>>())?;
    d.set_item("moment", r.rows.iter().map(|x| x.moment).collect::<Vec<_>>())?;
    d.set_item("moment_stderr", r.rows.iter().map(|x| x.stderr).collect::<Vec<_>>())?;
    Ok(d)
}

#[pymodule]
fn rosenlab(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Path>()?;
    m.add_class::<Simulator>()?;
    m.add_class::<Spectrum>()?;
    m.add_function(wrap_pyfunction!(covariance, m)?)?;
    m.add_function(wrap_pyfunction!(exact_partial_sum_variance, m)?)?;
    m.add_function(wrap_pyfunction!(mollifier, m)?)?;
    m.add_function(wrap_pyfunction!(slt, m)?)?;
    m.add_function(wrap_pyfunction!(ilt, m)?)?;
    m.add_function(wrap_pyfunction!(clt, m)?)?;
    m.add_function(wrap_pyfunction!(theoretical_exponents, m)?)?;
    m.add_function(wrap_pyfunction!(fit_exponent, m)?)?;
    m.add_function(wrap_pyfunction!(epsilon_study, m)?)?;
    m.add_function(wrap_pyfunction!(holder_experiment, m)?)?;
    Ok(())
}
