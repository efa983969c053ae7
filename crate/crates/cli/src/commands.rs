//! Subcommand bodies. Each resolves its defaults into the config (so the
//! manifest echoes exactly what ran), validates, computes, and returns its
//! tables plus a human-readable summary.

use rosenlab::ensemble::replicate;
use rosenlab::holder::{HolderParams, DEFAULT_TOLERANCE};
use rosenlab::seed::derive_seed;
use rosenlab::{
    covariance, density_half_width, discretize_operator, eigen_spectrum, epsilon_convergence_study,
    estimate_ensemble, holder_space_experiment, holder_time_experiment, marginal_density,
    random_interval_coefficients, sample_second_chaos, stats, theoretical_exponents, verify_lower_bound,
    Calibration, EigenSpectrum, HurstParam, IntervalCoefficients, LocalTimeKind, QuadratureConfig, RosenblattSimulator,
    SimulationConfig,
};

use crate::config::{Config, DeltaUnits};
use crate::output::{Cell, OutputFile, Table};
use crate::CliError;

pub struct Outcome {
    pub outputs: Vec<OutputFile>,
    pub summary: Vec<String>,
    /// Result of the self-test, when the command has one and it was requested.
    pub check: Option<Result<(), String>>,
}

impl Outcome {
    fn new(outputs: Vec<OutputFile>, summary: Vec<String>) -> Self {
        Outcome {
            outputs,
            summary,
            check: None,
        }
    }

    fn with_check(mut self, config: &Config, passed: bool, what: impl Into<String>) -> Self {
        if config.check {
            self.check = Some(if passed { Ok(()) } else { Err(what.into()) });
        }
        self
    }
}

/// Decimal with at most ten fractional digits and no trailing zeros.
pub fn fmt_short(v: f64) -> String {
    let s = format!("{v:.10}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

pub fn run_command(name: &str, config: &mut Config) -> Result<Outcome, CliError> {
    config.validate_workers()?;
    match name {
        "simulate" => simulate(config),
        "spectrum" => spectrum(config),
        "density" => density(config),
        "slt" => local_time(config, LocalTimeKind::Slt),
        "ilt" => local_time(config, LocalTimeKind::Ilt),
        "clt" => local_time(config, LocalTimeKind::Clt),
        "eps-study" => eps_study(config),
        "holder-time" => holder(config, false),
        "holder-space" => holder(config, true),
        "exponents" => exponents(config),
        "refine" => refine(config),
        "verify-bound" => verify_bound(config),
        other => Err(CliError::Invalid(format!("unknown command '{other}'"))),
    }
}

fn path_tables(config: &Config) -> Result<Vec<OutputFile>, CliError> {
    let h = config.hurst()?;
    let sim_config = SimulationConfig::new(h, config.steps, config.seed)
        .with_oversample(config.oversample)
        .with_horizon(config.horizon)
        .with_normalization(config.normalization);
    let sim = RosenblattSimulator::from_config(&sim_config)?;
    let reps = config.reps_or(1);
    let seed = config.seed;
    Ok(replicate(reps, config.workers, |r| {
        let path = sim.path(derive_seed(seed, r as u64));
        let mut t = Table::new(&format!("path_{r:04}.csv"), &["s", "x"]);
        for (k, x) in path.values.iter().enumerate() {
            t.row(vec![path.grid.point(k).into(), (*x).into()]);
        }
        t.into_output()
    }))
}

fn simulate(config: &mut Config) -> Result<Outcome, CliError> {
    config.reps = Some(config.reps_or(1));
    if config.reps == Some(0) {
        return Err(CliError::Invalid("field 'reps': must be at least 1".into()));
    }
    config.path_params(LocalTimeKind::Slt)?;
    let outputs = path_tables(config)?;
    let summary = vec![format!(
        "simulated {} path(s): H = {}, {} steps, oversample {}",
        outputs.len(),
        config.h,
        config.steps,
        config.oversample
    )];
    let mut passed = true;
    if config.check {
        let alt_workers = if config.workers == 1 { 4 } else { 1 };
        let alt = path_tables(&Config {
            workers: alt_workers,
            ..config.clone()
        })?;
        passed = alt.iter().zip(&outputs).all(|(a, b)| a.digest() == b.digest());
    }
    Ok(Outcome::new(outputs, summary).with_check(config, passed, "outputs differ between worker counts"))
}

fn coefficients(config: &Config) -> Result<IntervalCoefficients, CliError> {
    let c = match (&config.breakpoints, &config.coefficients, config.random_pieces) {
        (Some(b), Some(u), None) => IntervalCoefficients::new(b.clone(), u.clone()),
        (None, None, Some(k)) => random_interval_coefficients(config.seed, k),
        (None, None, None) => IntervalCoefficients::single_interval(config.t),
        _ => {
            return Err(CliError::Invalid(
                "field 'breakpoints/coefficients/random_pieces': give breakpoints with coefficients, or random_pieces, or neither".into(),
            ))
        }
    };
    c.map_err(|e| CliError::Invalid(format!("field 'breakpoints/coefficients': {e}")))
}

fn calibrated_spectrum(config: &Config) -> Result<(EigenSpectrum, IntervalCoefficients, Calibration), CliError> {
    let h = config.hurst()?;
    let quad = config.quadrature()?;
    let coeffs = coefficients(config)?;
    let cal = Calibration::compute(h, quad, config.truncation)?;
    let spec = cal.spectrum(&coeffs)?;
    Ok((spec, coeffs, cal))
}

/// `Var Σ u_i (X(b_i) − X(a_i))` from the covariance function.
fn step_variance(coeffs: &IntervalCoefficients, h: HurstParam) -> f64 {
    let pieces: Vec<(f64, f64, f64)> = coeffs.pieces().collect();
    let cov = |s: f64, t: f64| covariance(s, t, h);
    let mut v = 0.0;
    for &(u, a, b) in &pieces {
        for &(w, c, d) in &pieces {
            v += u * w * (cov(b, d) - cov(b, c) - cov(a, d) + cov(a, c));
        }
    }
    v
}

fn spectrum_table(name: &str, spec: &EigenSpectrum) -> OutputFile {
    let mut t = Table::new(name, &["j", "lambda_j"]);
    for (j, l) in spec.eigenvalues.iter().enumerate() {
        t.row(vec![(j + 1).into(), (*l).into()]);
    }
    t.into_output()
}

fn spectrum(config: &mut Config) -> Result<Outcome, CliError> {
    let (spec, coeffs, cal) = calibrated_spectrum(config)?;
    let target = step_variance(&coeffs, config.hurst()?) / 2.0;
    let rel = (spec.sum_squares() - target).abs() / target;
    let summary = vec![
        format!("calibration scale {}", cal.scale),
        format!("sum of squared eigenvalues {} (expected {target}, relative error {rel:.2e})", spec.sum_squares()),
        format!("negative eigenvalues among the retained {}: {}", spec.truncation, spec.negative_count()),
    ];
    Ok(Outcome::new(vec![spectrum_table("spectrum.csv", &spec)], summary).with_check(
        config,
        rel < 0.02,
        format!("sum of squares off by {rel:.3e} (limit 0.02)"),
    ))
}

fn density(config: &mut Config) -> Result<Outcome, CliError> {
    config.reps = Some(config.reps_or(0));
    if !(config.density_step.is_finite() && config.density_step > 0.0) {
        return Err(CliError::Invalid("field 'density_step': must be positive".into()));
    }
    if let Some(a) = config.half_width {
        if !(a.is_finite() && a > 0.0) {
            return Err(CliError::Invalid("field 'half_width': must be positive".into()));
        }
    }
    let (spec, _, _) = calibrated_spectrum(config)?;
    let a = match config.half_width {
        Some(a) => a,
        None => {
            let a = density_half_width(&spec);
            config.half_width = Some(a);
            a
        }
    };
    let n = ((2.0 * a / config.density_step).round() as usize).max(2);
    let dx = 2.0 * a / n as f64;
    let grid: Vec<f64> = (0..=n).map(|k| if k == n { a } else { -a + k as f64 * dx }).collect();
    let p = marginal_density(&spec, &grid)?;
    let mut cdf = vec![0.0; grid.len()];
    for k in 1..grid.len() {
        cdf[k] = cdf[k - 1] + 0.5 * dx * (p[k] + p[k - 1]);
    }
    let mass = cdf[grid.len() - 1];
    let mut t = Table::new("density.csv", &["x", "p"]);
    for (x, v) in grid.iter().zip(&p) {
        t.row(vec![(*x).into(), (*v).into()]);
    }
    let mut summary = vec![format!("density on [-{a}, {a}] with {} points, total mass {mass}", grid.len())];
    let mut passed = (mass - 1.0).abs() < 1e-3;
    let reps = config.reps_or(0);
    if reps > 0 {
        let xs = sample_second_chaos(&spec, config.seed, reps, config.workers);
        let ks = stats::ks_distance(&xs, &grid, &cdf);
        summary.push(format!("KS distance to {reps} chaos samples: {ks}"));
        passed &= ks < 0.01;
    }
    Ok(Outcome::new(vec![t.into_output()], summary).with_check(config, passed, "density mass or KS distance out of tolerance"))
}

fn local_time(config: &mut Config, kind: LocalTimeKind) -> Result<Outcome, CliError> {
    config.kind = Some(kind);
    config.reps = Some(config.reps_or(1));
    if config.reps == Some(0) {
        return Err(CliError::Invalid("field 'reps': must be at least 1".into()));
    }
    let params = config.path_params(kind)?;
    config.check_eps("eps", config.eps, &params)?;
    let est = estimate_ensemble(&params, config.eps, config.reps_or(1))?;
    let mut t = Table::new("estimates.csv", &["kind", "t", "y", "eps", "value", "seed"]);
    for e in &est {
        let seeds: Vec<String> = e.seeds.iter().map(u64::to_string).collect();
        t.row(vec![
            kind.as_str().into(),
            e.t.into(),
            e.y.0.into(),
            e.epsilon.value().into(),
            e.value.into(),
            seeds.join(";").into(),
        ]);
    }
    let values: Vec<f64> = est.iter().map(|e| e.value).collect();
    let mean = stats::mean(&values);
    let mut summary = vec![format!("{kind} at y = {}, eps = {}: mean {mean} over {} replication(s)", config.y, config.eps, values.len())];
    let mut passed = false;
    if values.len() >= 2 {
        let se = stats::std_error(&values);
        summary.push(format!("standard error {se} (relative {:.3e})", se / mean));
        passed = mean > 0.0 && se / mean < 0.05;
    }
    Ok(Outcome::new(vec![t.into_output()], summary).with_check(config, passed, "ensemble mean is not stable to 5%"))
}

fn study_table(name: &str, rows: impl Iterator<Item = (f64, f64, f64)>) -> OutputFile {
    let mut t = Table::new(name, &["delta", "moment", "stderr"]);
    for (d, m, s) in rows {
        t.row(vec![d.into(), m.into(), s.into()]);
    }
    t.into_output()
}

fn eps_study(config: &mut Config) -> Result<Outcome, CliError> {
    let kind = config.kind_or(LocalTimeKind::Slt);
    config.kind = Some(kind);
    config.reps = Some(config.reps_or(100));
    let params = config.path_params(kind)?;
    config.validate_ladder(&params)?;
    if config.moment_order == 0 {
        return Err(CliError::Invalid("field 'moment_order': must be at least 1".into()));
    }
    let study = epsilon_convergence_study(&params, &config.ladder, config.reps_or(100), config.moment_order as f64)?;
    let diffs = study_table(
        "eps_differences.csv",
        study
            .rows
            .iter()
            .filter_map(|r| r.next_difference.map(|d| (r.eps, d.mean, d.stderr))),
    );
    let moments = study_table(
        "eps_moments.csv",
        study.rows.iter().map(|r| (r.eps, r.abs_moment.mean, r.abs_moment.stderr)),
    );
    let mut summary = vec![format!("{kind} epsilon ladder, {} replications (delta = rung epsilon)", study.reps)];
    for r in &study.rows {
        let diff = r
            .next_difference
            .map(|d| format!(", E|next difference| {} ± {}", d.mean, d.stderr))
            .unwrap_or_default();
        summary.push(format!("  eps {}: mean {} ± {}{diff}", r.eps, r.mean, r.mean_stderr));
    }
    let d = study.differences();
    let decreasing = d.windows(2).all(|w| w[1].mean < w[0].mean);
    let last = study.rows.last().expect("ladder has rungs");
    let final_ratio = d.last().map_or(f64::INFINITY, |x| x.mean) / last.mean;
    summary.push(format!("differences strictly decreasing: {decreasing}; final difference / estimate = {final_ratio:.4}"));
    Ok(Outcome::new(vec![diffs, moments], summary).with_check(
        config,
        decreasing && final_ratio < 0.05,
        format!("decreasing = {decreasing}, final ratio {final_ratio:.4} (limit 0.05)"),
    ))
}

fn holder(config: &mut Config, space: bool) -> Result<Outcome, CliError> {
    let kind = config.kind_or(LocalTimeKind::Slt);
    config.kind = Some(kind);
    config.reps = Some(config.reps_or(200));
    let units = *config
        .delta_units
        .get_or_insert(if space { DeltaUnits::SqrtEps } else { DeltaUnits::Absolute });
    let tolerance = *config.tolerance.get_or_insert(DEFAULT_TOLERANCE);
    let params = config.path_params(kind)?;
    config.check_eps("eps", config.eps, &params)?;
    let scale = match units {
        DeltaUnits::Absolute => 1.0,
        DeltaUnits::SqrtEps => config.eps.sqrt(),
    };
    let deltas: Vec<f64> = config.deltas.iter().map(|d| d * scale).collect();
    let base = if space { config.y } else { config.t_base };
    let mut hp = HolderParams::new(params, config.eps, base, deltas, config.reps_or(200));
    hp.moment_order = config.moment_order;
    hp.tolerance = tolerance;
    let report = if space {
        holder_space_experiment(&hp)
    } else {
        holder_time_experiment(&hp)
    }
    .map_err(|e| match e {
        rosenlab::Error::InvalidInput(m) => CliError::Invalid(format!("field 'deltas/t_base/moment_order': {m}")),
        other => other.into(),
    })?;
    let study = study_table("holder_study.csv", report.rows.iter().map(|r| (r.delta, r.moment, r.stderr)));
    let mut fit = Table::new("holder_fit.csv", &["slope", "stderr", "n", "kind", "H1", "H2"]);
    fit.row(vec![
        report.fit.slope.into(),
        report.fit.stderr_slope.into(),
        report.fit.moment_order.into(),
        kind.as_str().into(),
        report.table.h1.into(),
        report.table.h2.map_or(Cell::S(String::new()), Cell::F),
    ]);
    let axis = if space { "space" } else { "time" };
    let summary = vec![
        format!(
            "{kind} {axis} scaling, n = {}: slope {} ± {} (threshold {})",
            report.fit.moment_order, report.fit.slope, report.fit.stderr_slope, report.threshold
        ),
        format!(
            "theoretical {axis} exponent supremum {}",
            if space { report.table.space_exponent_sup } else { report.table.time_exponent_sup }
        ),
    ];
    Ok(Outcome::new(vec![study, fit.into_output()], summary).with_check(
        config,
        report.passed,
        format!("slope {} below threshold {}", report.fit.slope, report.threshold),
    ))
}

fn exponents(config: &mut Config) -> Result<Outcome, CliError> {
    let kind = config.kind_or(LocalTimeKind::Slt);
    config.kind = Some(kind);
    let h1 = config.hurst()?;
    let h2 = if kind.needs_pair() { Some(config.hurst2()?) } else { None };
    let table = theoretical_exponents(kind, h1, h2)?;
    let mut t = Table::new("exponents.csv", &["kind", "H1", "H2", "exists", "space_sup", "time_sup"]);
    t.row(vec![
        kind.as_str().into(),
        table.h1.into(),
        table.h2.map_or(Cell::S(String::new()), Cell::F),
        table.exists.into(),
        table.space_exponent_sup.into(),
        table.time_exponent_sup.into(),
    ]);
    let summary = vec![
        format!("{kind} exists: {}", table.exists),
        format!("space sup {}", fmt_short(table.space_exponent_sup)),
        format!("time sup {}", fmt_short(table.time_exponent_sup)),
    ];
    Ok(Outcome::new(vec![t.into_output()], summary).with_check(config, table.exists, "existence condition fails"))
}

fn refine(config: &mut Config) -> Result<Outcome, CliError> {
    if config.levels < 2 {
        return Err(CliError::Invalid("field 'levels': need at least two refinement levels".into()));
    }
    let h = config.hurst()?;
    let base = config.quadrature()?;
    let coeffs = coefficients(config)?;
    let mut t = Table::new("refine.csv", &["nodes", "omega", "grading", "sum_squares", "lambda_1", "rel_change"]);
    let mut summary = vec!["nodes and cutoff refined together (raw, uncalibrated spectrum)".to_string()];
    let mut prev: Option<f64> = None;
    let mut last_change = f64::INFINITY;
    for l in 0..config.levels {
        let f = 0.5f64.powi((config.levels - 1 - l) as i32);
        let nodes = (((base.nodes as f64 * f) / 2.0).round() as usize * 2).max(16);
        let quad = QuadratureConfig {
            nodes,
            omega: base.omega * f,
            grading: base.grading,
        };
        quad.validate()?;
        let disc = discretize_operator(&coeffs, h, &quad)?;
        let spec = eigen_spectrum(&disc, config.truncation.min(nodes), 1.0)?;
        let s = spec.sum_squares();
        let change = prev.map(|p| (s - p).abs() / p);
        if let Some(c) = change {
            last_change = c;
        }
        t.row(vec![
            nodes.into(),
            quad.omega.into(),
            quad.grading.into(),
            s.into(),
            spec.eigenvalues[0].into(),
            change.map_or(Cell::S(String::new()), Cell::F),
        ]);
        summary.push(format!(
            "  N = {nodes}, omega = {}: sum of squares {s}{}",
            quad.omega,
            change.map(|c| format!(", relative change {c:.3e}")).unwrap_or_default()
        ));
        prev = Some(s);
    }
    Ok(Outcome::new(vec![t.into_output()], summary).with_check(
        config,
        last_change < 0.01,
        format!("last refinement changed the sum of squares by {last_change:.3e} (limit 0.01)"),
    ))
}

fn verify_bound(config: &mut Config) -> Result<Outcome, CliError> {
    let (spec, coeffs, _) = calibrated_spectrum(config)?;
    let report = verify_lower_bound(&spec, &coeffs, config.hurst()?)?;
    let mut t = Table::new("bound.csv", &["j", "ratio"]);
    for (j, r) in report.ratios.iter().enumerate() {
        t.row(vec![(j + 1).into(), (*r).into()]);
    }
    let summary = vec![
        format!("fitted constant c = {} (amplitude {})", report.fitted_constant, report.amplitude),
        format!(
            "sigma_j j^H / amplitude on j in [10, {}]: min {}, max {}",
            report.ratios.len(),
            report.tail_min,
            report.tail_max
        ),
        format!("negative eigenvalues: {}", report.negative_eigenvalues),
        format!("bound holds: {}", report.passed),
    ];
    Ok(Outcome::new(vec![spectrum_table("spectrum.csv", &spec), t.into_output()], summary).with_check(
        config,
        report.passed,
        "singular values are not bounded below by c j^-H",
    ))
}
