//! Acceptance criteria, one test per criterion. Each prints a single
//! `[PASS]`/`[FAIL]` line with the measured quantities before asserting.
//! Run with `cargo test -p rosenlab-cli --test acceptance -- --nocapture`.

use std::path::Path;
use std::sync::OnceLock;

use num_complex::Complex64;
use rosenlab::holder::HolderParams;
use rosenlab::seed::derive_seed;
use rosenlab::{
    char_function, covariance, density_half_width, epsilon_convergence_study, exact_partial_sum_variance,
    fgn_correlation, holder_space_experiment, holder_time_experiment, marginal_density,
    random_interval_coefficients, sample_second_chaos, slt_estimate, stats, verify_lower_bound, Calibration,
    EigenSpectrum, HurstParam, IntervalCoefficients, LocalTimeKind, MollifierScale, Normalization, PathParams,
    ProcessPath, QuadratureConfig, RosenblattSimulator, SpaceOffset, TimeGrid,
};

fn workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn h(v: f64) -> HurstParam {
    HurstParam::new(v).unwrap()
}

fn report(n: u32, pass: bool, detail: String) -> bool {
    println!("[{}] criterion {n}: {detail}", if pass { "PASS" } else { "FAIL" });
    pass
}

/// Default-quadrature spectrum of `1_[0,1]` at H = 0.7, J = 200.
fn unit_spectrum() -> &'static EigenSpectrum {
    static SPEC: OnceLock<EigenSpectrum> = OnceLock::new();
    SPEC.get_or_init(|| {
        let cal = Calibration::compute(h(0.7), QuadratureConfig::default(), 200).unwrap();
        cal.spectrum(&IntervalCoefficients::single_interval(1.0).unwrap()).unwrap()
    })
}

fn chaos_samples() -> &'static Vec<f64> {
    static XS: OnceLock<Vec<f64>> = OnceLock::new();
    XS.get_or_init(|| sample_second_chaos(unit_spectrum(), 2024, 100_000, workers()))
}

#[test]
fn criterion_01_covariance_reproduction() {
    let grid = TimeGrid::new(1.0, 256).unwrap();
    let sim = RosenblattSimulator::new(grid, h(0.7), 16, Normalization::ExactVariance).unwrap();
    let times = [0.25, 0.5, 0.75, 1.0];
    let idx: Vec<usize> = times.iter().map(|t| (t * 256.0) as usize).collect();
    let draws = rosenlab::ensemble::replicate(10_000, workers(), |r| {
        let p = sim.path(derive_seed(101, r as u64));
        idx.iter().map(|&i| p.values[i]).collect::<Vec<f64>>()
    });
    let mut worst: f64 = 0.0;
    let mut all = true;
    for a in 0..4 {
        for b in a..4 {
            let xa: Vec<f64> = draws.iter().map(|d| d[a]).collect();
            let xb: Vec<f64> = draws.iter().map(|d| d[b]).collect();
            let emp = stats::covariance(&xa, &xb);
            let se = stats::covariance_std_error(&xa, &xb);
            let z = (emp - covariance(times[a], times[b], h(0.7))).abs() / se;
            worst = worst.max(z);
            all &= z < 4.0;
        }
    }
    assert!(report(1, all, format!("10^4 paths, 10 time pairs, largest |error| = {worst:.2} standard errors (limit 4)")));
}

#[test]
fn criterion_02_spectral_variance_identity() {
    let mut all = true;
    let mut lines = Vec::new();
    for hv in [0.6, 0.7, 0.8] {
        let cal = Calibration::compute(h(hv), QuadratureConfig::default(), 200).unwrap();
        for t in [1.0, 0.5, 2.0] {
            let spec = cal.spectrum(&IntervalCoefficients::single_interval(t).unwrap()).unwrap();
            let target = t.powf(2.0 * hv) / 2.0;
            let rel = (spec.sum_squares() - target).abs() / target;
            all &= rel < 0.02;
            lines.push(format!("H={hv} t={t}: {rel:.2e}"));
        }
    }
    assert!(report(2, all, format!("relative error of sum lambda^2 (limit 0.02): {}", lines.join(", "))));
}

fn empirical_cf(xs: &[f64], p: f64) -> (Complex64, f64) {
    let re: Vec<f64> = xs.iter().map(|x| (p * x).cos()).collect();
    let im: Vec<f64> = xs.iter().map(|x| (p * x).sin()).collect();
    let z = Complex64::new(stats::mean(&re), stats::mean(&im));
    // Delta-method standard error of the modulus.
    let (ur, ui) = (z.re / z.norm(), z.im / z.norm());
    let proj: Vec<f64> = re.iter().zip(&im).map(|(a, b)| ur * a + ui * b).collect();
    (z, stats::std_error(&proj))
}

#[test]
fn criterion_03_characteristic_function() {
    let spec = unit_spectrum();
    let xs = chaos_samples();
    let grid = TimeGrid::new(1.0, 1).unwrap();
    let sim = RosenblattSimulator::new(grid, h(0.7), 4096, Normalization::ExactVariance).unwrap();
    let x1 = rosenlab::ensemble::replicate(20_000, workers(), |r| sim.path(derive_seed(303, r as u64)).values[1]);
    let mut all = true;
    let mut lines = Vec::new();
    for p in [0.5, 1.0, 2.0] {
        let theory = char_function(spec, p).norm();
        let (emp, se) = empirical_cf(xs, p);
        let z = (emp.norm() - theory).abs() / se;
        let (sim_cf, _) = empirical_cf(&x1, p);
        let gap = (sim_cf.norm() - theory).abs();
        all &= z < 4.0 && gap < 0.03;
        lines.push(format!("p={p}: |phi|={theory:.4}, chaos {z:.2} se, simulator gap {gap:.4}"));
    }
    assert!(report(3, all, format!("{} (limits 4 se, 0.03)", lines.join("; "))));
}

#[test]
fn criterion_04_third_cumulant() {
    let spec = unit_spectrum();
    let xs = chaos_samples();
    let m = stats::mean(xs);
    let cubes: Vec<f64> = xs.iter().map(|x| (x - m).powi(3)).collect();
    let emp = stats::mean(&cubes);
    let se = stats::std_error(&cubes);
    let theory = 8.0 * spec.sum_cubes();
    let z = (emp - theory).abs() / se;
    assert!(report(4, z < 4.0, format!("third central moment {emp:.4} vs 8 sum lambda^3 = {theory:.4}, {z:.2} se (limit 4)")));
}

#[test]
fn criterion_05_density_inversion() {
    let spec = unit_spectrum();
    let a = density_half_width(spec);
    let n = (2.0 * a / 0.01).round() as usize;
    let dx = 2.0 * a / n as f64;
    let grid: Vec<f64> = (0..=n).map(|k| -a + k as f64 * dx).collect();
    let p = marginal_density(spec, &grid).unwrap();
    let mut cdf = vec![0.0; grid.len()];
    for k in 1..grid.len() {
        cdf[k] = cdf[k - 1] + 0.5 * dx * (p[k] + p[k - 1]);
    }
    let mass = cdf[n];
    let ks = stats::ks_distance(chaos_samples(), &grid, &cdf);
    let pass = (mass - 1.0).abs() < 1e-3 && ks < 0.01;
    assert!(report(5, pass, format!("mass {mass:.6} (limit 1 +- 1e-3), KS {ks:.4} (limit 0.01)")));
}

#[test]
fn criterion_06_slt_epsilon_cauchy() {
    let mut params = PathParams::new(LocalTimeKind::Slt, h(0.6), None, 1024, 606);
    params.workers = workers();
    let study = epsilon_convergence_study(&params, &[0.1, 0.05, 0.025, 0.0125], 500, 1.0).unwrap();
    let d = study.differences();
    let decreasing = d.windows(2).all(|w| w[1].mean < w[0].mean);
    let last = study.rows.last().unwrap().mean;
    let ratio = d.last().unwrap().mean / last;
    let diffs: Vec<String> = d.iter().map(|m| format!("{:.4}", m.mean)).collect();
    let pass = decreasing && ratio < 0.05;
    assert!(report(
        6,
        pass,
        format!(
            "differences [{}] strictly decreasing: {decreasing}; final difference / estimate {ratio:.4} (limit 0.05)",
            diffs.join(", ")
        )
    ));
}

fn holder_params(kind: LocalTimeKind, hv: f64, tolerance: f64, seed: u64) -> HolderParams {
    let h2 = kind.needs_pair().then(|| h(hv));
    let mut path = PathParams::new(kind, h(hv), h2, 500, seed);
    path.workers = workers();
    let mut p = HolderParams::new(path, 0.01, 0.5, vec![0.05, 0.1, 0.2, 0.4], 500);
    p.tolerance = tolerance;
    p
}

#[test]
fn criterion_07_holder_time_exponent() {
    let mut all = true;
    let mut lines = Vec::new();
    for (kind, hv, tol) in [
        (LocalTimeKind::Slt, 0.6, 0.15),
        (LocalTimeKind::Ilt, 0.6, 0.2),
        (LocalTimeKind::Clt, 0.8, 0.15),
    ] {
        let r = holder_time_experiment(&holder_params(kind, hv, tol, 707)).unwrap();
        all &= r.passed;
        lines.push(format!("{kind} slope {:.3} +- {:.3} (threshold {:.3})", r.fit.slope, r.fit.stderr_slope, r.threshold));
    }
    assert!(report(7, all, lines.join("; ")));
}

#[test]
fn criterion_08_holder_space_exponent() {
    let mut p = holder_params(LocalTimeKind::Slt, 0.7, 0.2, 808);
    let root = p.eps.sqrt();
    p.base = 0.0;
    p.deltas = [0.05, 0.1, 0.2, 0.4].iter().map(|d| d * root).collect();
    let r = holder_space_experiment(&p).unwrap();
    assert!(report(
        8,
        r.passed,
        format!("SLT H=0.7 slope {:.3} +- {:.3} (threshold {:.4})", r.fit.slope, r.fit.stderr_slope, r.threshold)
    ));
}

#[test]
fn criterion_09_eigenvalue_lower_bound() {
    let cal = Calibration::compute(h(0.7), QuadratureConfig::default(), 200).unwrap();
    let mut functions = vec![IntervalCoefficients::single_interval(1.0).unwrap()];
    for s in 0..3 {
        functions.push(random_interval_coefficients(derive_seed(909, s), 3).unwrap());
    }
    let mut all = true;
    let mut lines = Vec::new();
    for f in &functions {
        let spec = cal.spectrum(f).unwrap();
        let r = verify_lower_bound(&spec, f, h(0.7)).unwrap();
        all &= r.passed && r.fitted_constant > 0.0;
        lines.push(format!("c={:.4} tail [{:.4}, {:.4}]", r.fitted_constant, r.tail_min, r.tail_max));
    }
    assert!(report(9, all, format!("j <= 100: {}", lines.join("; "))));
}

fn cli(args: &[&str]) -> i32 {
    let mut full = vec!["rosenlab"];
    full.extend_from_slice(args);
    rosenlab_cli::run(full)
}

fn replay_ok(dir: &Path, workers: &str) -> bool {
    let m = dir.join("manifest.json");
    let out = dir.join(format!("replay-{workers}"));
    cli(&["replay", m.to_str().unwrap(), "--workers", workers, "--out-dir", out.to_str().unwrap()]) == 0
}

#[test]
fn criterion_10_determinism_and_replay() {
    let tmp = tempfile::tempdir().unwrap();
    let spectral = ["--nodes", "400", "--omega", "300", "--truncation", "60"];
    let cases: Vec<(&str, Vec<&str>)> = vec![
        ("simulate", vec!["--h", "0.7", "--steps", "256", "--seed", "5", "--reps", "3"]),
        ("spectrum", [&["--h", "0.7", "--t", "0.5"][..], &spectral].concat()),
        ("density", [&["--h", "0.7", "--reps", "2000"][..], &spectral].concat()),
        ("slt", vec!["--steps", "128", "--reps", "20", "--eps", "0.05"]),
        ("ilt", vec!["--steps", "64", "--reps", "10", "--eps", "0.05", "--h2", "0.6"]),
        ("clt", vec!["--steps", "64", "--reps", "10", "--eps", "0.05"]),
        ("eps-study", vec!["--steps", "128", "--reps", "20", "--oversample", "4"]),
        ("holder-time", vec!["--steps", "100", "--reps", "20", "--eps", "0.05", "--oversample", "4"]),
        ("holder-space", vec!["--steps", "100", "--reps", "20", "--eps", "0.05", "--kind", "clt"]),
        ("exponents", vec!["--kind", "ilt", "--h", "0.6", "--h2", "0.8"]),
        ("refine", [&["--levels", "2"][..], &spectral].concat()),
        ("verify-bound", [&["--random-pieces", "3", "--seed", "2"][..], &spectral].concat()),
    ];
    let mut failed = Vec::new();
    let n = workers().max(2).to_string();
    for (cmd, args) in &cases {
        let dir = tmp.path().join(cmd);
        let mut full = vec![*cmd, "--out-dir", dir.to_str().unwrap()];
        full.extend(args.iter().copied());
        let code = cli(&full);
        if code != 0 || !replay_ok(&dir, "1") || !replay_ok(&dir, &n) {
            failed.push(format!("{cmd} (exit {code})"));
        }
    }
    let pass = failed.is_empty();
    let detail = if pass {
        format!("{} subcommands replayed byte-identically at 1 and {n} workers", cases.len())
    } else {
        format!("replay failed for {}", failed.join(", "))
    };
    assert!(report(10, pass, detail));
}

#[test]
fn criterion_11_oracle_equivalences() {
    let n = 512;
    let mut worst: f64 = 0.0;
    for hv in [0.6, 0.7, 0.8] {
        let hp = h(hv).driving_noise_index();
        let mut brute = 0.0;
        for i in 0..n {
            for j in 0..n {
                let r = fgn_correlation((i as i64 - j as i64).unsigned_abs(), hp);
                brute += 2.0 * r * r;
            }
        }
        brute /= (n as f64).powf(2.0 * hv);
        let fast = exact_partial_sum_variance(n, h(hv));
        worst = worst.max((fast - brute).abs() / brute);
    }

    // ∫₀¹ (1 − u) f_ε(u) du by composite Simpson on 20000 panels.
    let eps = 0.1;
    let panels = 20_000;
    let du = 1.0 / panels as f64;
    let g = |u: f64| (1.0 - u) * (-u * u / (2.0 * eps)).exp() / (2.0 * std::f64::consts::PI * eps).sqrt();
    let oracle = (0..panels)
        .map(|k| {
            let a = k as f64 * du;
            du / 6.0 * (g(a) + 4.0 * g(a + 0.5 * du) + g(a + du))
        })
        .sum::<f64>();
    let path = ProcessPath::from_fn(TimeGrid::new(1.0, 1000).unwrap(), h(0.7), |s| s).unwrap();
    let est = slt_estimate(&path, MollifierScale::new(eps).unwrap(), SpaceOffset(0.0)).value;
    let gap = (est - oracle).abs();
    let pass = worst < 1e-10 && gap < 1e-3;
    assert!(report(
        11,
        pass,
        format!("partial-sum variance O(N) vs O(N^2) at N=512: {worst:.1e} (limit 1e-10); linear-path SLT gap {gap:.2e} (limit 1e-3)")
    ));
}
