//! Command-line harness: argument parsing, config resolution, manifests and replay.
//!
//! Exit codes: 0 success, 1 invalid input or usage, 2 numerical failure,
//! 3 failed self-check (`--check`) or replay digest mismatch.

pub mod commands;
pub mod config;
pub mod output;

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rosenlab::{LocalTimeKind, Normalization};

use config::{load_config, Config, DeltaUnits};
use output::{emit, Manifest};

#[derive(Debug)]
pub enum CliError {
    Invalid(String),
    Numerical(String),
    Io(String),
    CheckFailed(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Invalid(m) => write!(f, "invalid input: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::CheckFailed(m) => write!(f, "check failed: {m}"),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Invalid(_) | CliError::Io(_) => 1,
            CliError::Numerical(_) => 2,
            CliError::CheckFailed(_) => 3,
        }
    }
}

impl From<rosenlab::Error> for CliError {
    fn from(e: rosenlab::Error) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e.to_string())
        } else {
            CliError::Invalid(e.to_string())
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "rosenlab", version, about = "Rosenblatt process simulation, spectra and local-time experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Default)]
struct Common {
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Monte Carlo replications.
    #[arg(long)]
    reps: Option<usize>,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    /// JSON config; command-line flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Run the command's self-check and exit 3 if it fails.
    #[arg(long)]
    check: bool,
}

impl Common {
    fn apply(&self, c: &mut Config) {
        set(&mut c.seed, self.seed);
        if self.reps.is_some() {
            c.reps = self.reps;
        }
        set(&mut c.workers, self.workers);
        c.check |= self.check;
    }
}

fn set<T: Clone>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

fn parse_normalization(s: &str) -> Result<Normalization, String> {
    match s {
        "exact-variance" => Ok(Normalization::ExactVariance),
        "none" => Ok(Normalization::None),
        _ => Err(format!("'{s}' is not one of exact-variance, none")),
    }
}

fn parse_units(s: &str) -> Result<DeltaUnits, String> {
    match s {
        "absolute" => Ok(DeltaUnits::Absolute),
        "sqrt-eps" => Ok(DeltaUnits::SqrtEps),
        _ => Err(format!("'{s}' is not one of absolute, sqrt-eps")),
    }
}

#[derive(Args, Debug, Clone, Default)]
struct PathArgs {
    #[arg(long)]
    h: Option<f64>,
    /// Grid steps on [0, horizon].
    #[arg(long)]
    steps: Option<usize>,
    /// Driving-noise samples per grid step.
    #[arg(long)]
    oversample: Option<usize>,
    #[arg(long)]
    horizon: Option<f64>,
    #[arg(long, value_parser = parse_normalization)]
    normalization: Option<Normalization>,
}

impl PathArgs {
    fn apply(&self, c: &mut Config) {
        set(&mut c.h, self.h);
        set(&mut c.steps, self.steps);
        set(&mut c.oversample, self.oversample);
        set(&mut c.horizon, self.horizon);
        set(&mut c.normalization, self.normalization);
    }
}

#[derive(Args, Debug, Clone, Default)]
struct PairArgs {
    /// Index of the second process (defaults to --h).
    #[arg(long)]
    h2: Option<f64>,
}

#[derive(Args, Debug, Clone, Default)]
struct MollifierArgs {
    #[arg(long)]
    eps: Option<f64>,
    /// Space offset.
    #[arg(long, allow_hyphen_values = true)]
    y: Option<f64>,
    /// Resolution floor factor in eps >= kappa dt^(2H).
    #[arg(long)]
    kappa: Option<f64>,
    /// Order of the delta derivative; only 0 is supported.
    #[arg(long)]
    derivative_order: Option<u32>,
}

impl MollifierArgs {
    fn apply(&self, c: &mut Config) {
        set(&mut c.eps, self.eps);
        set(&mut c.y, self.y);
        set(&mut c.kappa, self.kappa);
        set(&mut c.derivative_order, self.derivative_order);
    }
}

#[derive(Args, Debug, Clone, Default)]
struct SpectralArgs {
    #[arg(long)]
    h: Option<f64>,
    /// Total quadrature nodes.
    #[arg(long)]
    nodes: Option<usize>,
    /// Frequency cutoff.
    #[arg(long)]
    omega: Option<f64>,
    #[arg(long)]
    grading: Option<f64>,
    /// Retained eigenvalues J.
    #[arg(long)]
    truncation: Option<usize>,
    /// Right end of the interval [0, t].
    #[arg(long)]
    t: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    breakpoints: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    coefficients: Option<Vec<f64>>,
    /// Random step function on [0, 1] with this many pieces, drawn from the seed.
    #[arg(long)]
    random_pieces: Option<usize>,
}

impl SpectralArgs {
    fn apply(&self, c: &mut Config) {
        set(&mut c.h, self.h);
        set(&mut c.nodes, self.nodes);
        set(&mut c.omega, self.omega);
        set(&mut c.grading, self.grading);
        set(&mut c.truncation, self.truncation);
        set(&mut c.t, self.t);
        if self.breakpoints.is_some() {
            c.breakpoints = self.breakpoints.clone();
        }
        if self.coefficients.is_some() {
            c.coefficients = self.coefficients.clone();
        }
        if self.random_pieces.is_some() {
            c.random_pieces = self.random_pieces;
        }
    }
}

#[derive(Args, Debug, Clone, Default)]
struct KindArgs {
    #[arg(long)]
    kind: Option<LocalTimeKind>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate Rosenblatt paths.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        path: PathArgs,
    },
    /// Calibrated eigenvalue spectrum of a step function's operator.
    Spectrum {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        spectral: SpectralArgs,
    },
    /// Marginal density by Fourier inversion of the characteristic function.
    Density {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        spectral: SpectralArgs,
        #[arg(long)]
        half_width: Option<f64>,
        #[arg(long)]
        step: Option<f64>,
    },
    /// Mollified self-intersection local time.
    Slt {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        path: PathArgs,
        #[command(flatten)]
        moll: MollifierArgs,
    },
    /// Mollified intersection local time of two independent paths.
    Ilt {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        path: PathArgs,
        #[command(flatten)]
        pair: PairArgs,
        #[command(flatten)]
        moll: MollifierArgs,
    },
    /// Mollified collision local time of two independent paths.
    Clt {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        path: PathArgs,
        #[command(flatten)]
        pair: PairArgs,
        #[command(flatten)]
        moll: MollifierArgs,
    },
    /// Mollified values along a decreasing epsilon ladder on common paths.
    EpsStudy {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        kind: KindArgs,
        #[command(flatten)]
        path: PathArgs,
        #[command(flatten)]
        pair: PairArgs,
        #[command(flatten)]
        moll: MollifierArgs,
        #[arg(long, value_delimiter = ',')]
        ladder: Option<Vec<f64>>,
        /// Order p of the reported E|alpha|^p.
        #[arg(long)]
        moment_order: Option<u32>,
    },
    /// Moment scaling of time increments.
    HolderTime {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        kind: KindArgs,
        #[command(flatten)]
        path: PathArgs,
        #[command(flatten)]
        pair: PairArgs,
        #[command(flatten)]
        moll: MollifierArgs,
        #[command(flatten)]
        ladder: HolderArgs,
        #[arg(long)]
        t_base: Option<f64>,
    },
    /// Moment scaling of space increments around --y.
    HolderSpace {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        kind: KindArgs,
        #[command(flatten)]
        path: PathArgs,
        #[command(flatten)]
        pair: PairArgs,
        #[command(flatten)]
        moll: MollifierArgs,
        #[command(flatten)]
        ladder: HolderArgs,
    },
    /// Theoretical existence condition and Hölder exponent suprema.
    Exponents {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        kind: KindArgs,
        #[arg(long)]
        h: Option<f64>,
        #[command(flatten)]
        pair: PairArgs,
    },
    /// Spectral refinement study with nodes and cutoff doubled together.
    Refine {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        spectral: SpectralArgs,
        #[arg(long)]
        levels: Option<usize>,
    },
    /// Check the power-law lower bound on the singular values.
    VerifyBound {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        spectral: SpectralArgs,
    },
    /// Re-run a manifest and compare output digests.
    Replay {
        manifest: PathBuf,
        /// Directory for the re-run outputs (default: <manifest dir>/replay).
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Override the worker count; digests must not change.
        #[arg(long)]
        workers: Option<usize>,
    },
}

#[derive(Args, Debug, Clone, Default)]
struct HolderArgs {
    #[arg(long, value_delimiter = ',')]
    deltas: Option<Vec<f64>>,
    #[arg(long, value_parser = parse_units)]
    delta_units: Option<DeltaUnits>,
    /// Moment order n in {1, 2, 3}.
    #[arg(long)]
    moment_order: Option<u32>,
    /// Slack below n times the exponent supremum.
    #[arg(long)]
    tolerance: Option<f64>,
}

impl HolderArgs {
    fn apply(&self, c: &mut Config) {
        if self.deltas.is_some() {
            c.deltas = self.deltas.clone().unwrap();
        }
        if self.delta_units.is_some() {
            c.delta_units = self.delta_units;
        }
        set(&mut c.moment_order, self.moment_order);
        if self.tolerance.is_some() {
            c.tolerance = self.tolerance;
        }
    }
}

fn base_config(common: &Common) -> Result<Config, CliError> {
    let mut c = match &common.config {
        Some(p) => load_config(p)?,
        None => Config::default(),
    };
    common.apply(&mut c);
    Ok(c)
}

fn apply_pair(pair: &PairArgs, c: &mut Config) {
    if pair.h2.is_some() {
        c.h2 = pair.h2;
    }
}

fn apply_kind(kind: &KindArgs, c: &mut Config) {
    if kind.kind.is_some() {
        c.kind = kind.kind;
    }
}

/// Runs one experiment and writes its outputs and manifest into `out_dir`.
pub fn execute(name: &str, mut config: Config, out_dir: &Path) -> Result<(Manifest, commands::Outcome), CliError> {
    let start = Instant::now();
    let outcome = commands::run_command(name, &mut config)?;
    let manifest = emit(out_dir, name, &config, &outcome.outputs, start.elapsed().as_secs_f64())?;
    Ok((manifest, outcome))
}

fn replay(manifest_path: &Path, out_dir: Option<PathBuf>, workers: Option<usize>) -> Result<(), CliError> {
    let original = Manifest::load(manifest_path)?;
    let dir = out_dir.unwrap_or_else(|| manifest_path.parent().unwrap_or(Path::new(".")).join("replay"));
    let mut config = original.parameters.clone();
    set(&mut config.workers, workers);
    config.check = false;
    let (fresh, _) = execute(&original.command, config, &dir)?;
    let mut mismatches = Vec::new();
    for rec in &original.outputs {
        match fresh.outputs.iter().find(|r| r.path == rec.path) {
            Some(r) if r.sha256 == rec.sha256 => {}
            Some(_) => mismatches.push(format!("{} digest differs", rec.path)),
            None => mismatches.push(format!("{} not produced", rec.path)),
        }
    }
    if fresh.outputs.len() != original.outputs.len() {
        mismatches.push(format!("{} outputs instead of {}", fresh.outputs.len(), original.outputs.len()));
    }
    if mismatches.is_empty() {
        println!("replay: {} output(s) byte-identical ({})", original.outputs.len(), dir.display());
        Ok(())
    } else {
        Err(CliError::CheckFailed(mismatches.join("; ")))
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    let (name, config, out_dir) = match cli.command {
        Command::Replay {
            manifest,
            out_dir,
            workers,
        } => return replay(&manifest, out_dir, workers),
        Command::Simulate { common, path } => {
            let mut c = base_config(&common)?;
            path.apply(&mut c);
            ("simulate", c, common.out_dir)
        }
        Command::Spectrum { common, spectral } => {
            let mut c = base_config(&common)?;
            spectral.apply(&mut c);
            ("spectrum", c, common.out_dir)
        }
        Command::Density {
            common,
            spectral,
            half_width,
            step,
        } => {
            let mut c = base_config(&common)?;
            spectral.apply(&mut c);
            if half_width.is_some() {
                c.half_width = half_width;
            }
            set(&mut c.density_step, step);
            ("density", c, common.out_dir)
        }
        Command::Slt { common, path, moll } => {
            let mut c = base_config(&common)?;
            path.apply(&mut c);
            moll.apply(&mut c);
            ("slt", c, common.out_dir)
        }
        Command::Ilt { common, path, pair, moll } => {
            let mut c = base_config(&common)?;
            path.apply(&mut c);
            apply_pair(&pair, &mut c);
            moll.apply(&mut c);
            ("ilt", c, common.out_dir)
        }
        Command::Clt { common, path, pair, moll } => {
            let mut c = base_config(&common)?;
            path.apply(&mut c);
            apply_pair(&pair, &mut c);
            moll.apply(&mut c);
            ("clt", c, common.out_dir)
        }
        Command::EpsStudy {
            common,
            kind,
            path,
            pair,
            moll,
            ladder,
            moment_order,
        } => {
            let mut c = base_config(&common)?;
            apply_kind(&kind, &mut c);
            path.apply(&mut c);
            apply_pair(&pair, &mut c);
            moll.apply(&mut c);
            if let Some(l) = ladder {
                c.ladder = l;
            }
            set(&mut c.moment_order, moment_order);
            ("eps-study", c, common.out_dir)
        }
        Command::HolderTime {
            common,
            kind,
            path,
            pair,
            moll,
            ladder,
            t_base,
        } => {
            let mut c = base_config(&common)?;
            apply_kind(&kind, &mut c);
            path.apply(&mut c);
            apply_pair(&pair, &mut c);
            moll.apply(&mut c);
            ladder.apply(&mut c);
            set(&mut c.t_base, t_base);
            ("holder-time", c, common.out_dir)
        }
        Command::HolderSpace {
            common,
            kind,
            path,
            pair,
            moll,
            ladder,
        } => {
            let mut c = base_config(&common)?;
            apply_kind(&kind, &mut c);
            path.apply(&mut c);
            apply_pair(&pair, &mut c);
            moll.apply(&mut c);
            ladder.apply(&mut c);
            ("holder-space", c, common.out_dir)
        }
        Command::Exponents { common, kind, h, pair } => {
            let mut c = base_config(&common)?;
            apply_kind(&kind, &mut c);
            set(&mut c.h, h);
            apply_pair(&pair, &mut c);
            ("exponents", c, common.out_dir)
        }
        Command::Refine {
            common,
            spectral,
            levels,
        } => {
            let mut c = base_config(&common)?;
            spectral.apply(&mut c);
            set(&mut c.levels, levels);
            ("refine", c, common.out_dir)
        }
        Command::VerifyBound { common, spectral } => {
            let mut c = base_config(&common)?;
            spectral.apply(&mut c);
            ("verify-bound", c, common.out_dir)
        }
    };
    let (manifest, outcome) = execute(name, config, &out_dir)?;
    for line in &outcome.summary {
        println!("{line}");
    }
    for o in &manifest.outputs {
        println!("wrote {} (sha256 {})", out_dir.join(&o.path).display(), o.sha256);
    }
    match outcome.check {
        Some(Err(why)) => Err(CliError::CheckFailed(why)),
        Some(Ok(())) => {
            println!("check passed");
            Ok(())
        }
        None => Ok(()),
    }
}

/// Entry point; `args[0]` is the program name. Returns the process exit code.
pub fn run<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn error_classes_map_to_exit_codes() {
        let numerical: CliError = rosenlab::Error::NegativeEmbedding { index: 3, value: -1.0 }.into();
        assert_eq!(numerical.exit_code(), 2);
        let invalid: CliError = rosenlab::Error::BelowResolutionFloor { eps: 1e-6, floor: 1e-3 }.into();
        assert_eq!(invalid.exit_code(), 1);
        assert_eq!(CliError::CheckFailed(String::new()).exit_code(), 3);
    }
}
