//! `stirap-forge`: design, tune, simulate and reproduce shortcut pulses.
//!
//! Exit codes: 0 success, 1 a check missed tolerance, 2 usage or validation,
//! 3 I/O, 4 numerical failure.

// Validation is written as `!(x > 0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use stirap_forge::bench::{self, BenchConfig, Target, ORIGINAL_EPSILON};
use stirap_forge::io::{fmt_sig, CsvSink};
use stirap_forge::pulses::{from_two_pi_mhz, to_two_pi_mhz};
use stirap_forge::{
    evolve, find_equal_maxima_d, find_min_ses_d, peak_amplitudes, sample_schedule, scan_qs, ses_m_domain, Error,
    IntegratorConfig, InterpolatedSchedule, OriginalProtocol, ProtocolParams, PulseSchedule, PulseSource,
    SesTuneOptions, SesVariant, StateVector3,
};

use config::{parse_angle, parse_count, parse_real, parse_string, Angle, ConfigFile};

const THREADS_VAR: &str = "STIRAP_FORGE_THREADS";

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self { code: 2, message: message.into() }
    }

    pub fn io(message: impl Into<String>) -> Self {
        Self { code: 3, message: message.into() }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Domain { .. } | Error::SingularParameter(_) | Error::Argument(_) => 2,
            Error::Io(_) | Error::Csv(_) | Error::Format(_) => 3,
            Error::Bracketing(_) | Error::IntegrationFailure { .. } => 4,
        };
        Self { code, message: e.to_string() }
    }
}

type CliResult<T = ()> = Result<T, CliError>;

#[derive(Parser)]
#[command(name = "stirap-forge", version, about = "Inverse-engineered robust STIRAP shortcut pulses")]
struct Cli {
    /// Plain-text `key = value` file; flags given on the command line win.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a pulse pair and write its sampled schedule.
    Design(DesignArgs),
    /// Choose the phase constant D.
    Tune(TuneArgs),
    /// Propagate the three-level system under a pulse pair.
    Simulate(SimulateArgs),
    /// Regenerate the reference table and figure data.
    Reproduce(ReproduceArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum VariantArg {
    Compact,
    Propagated,
}

impl VariantArg {
    fn parse(s: &str) -> Result<Self, String> {
        <Self as ValueEnum>::from_str(s, true)
    }

    fn core(self) -> SesVariant {
        match self {
            VariantArg::Compact => SesVariant::Compact,
            VariantArg::Propagated => SesVariant::Propagated,
        }
    }
}

#[derive(clap::Args)]
struct DesignArgs {
    /// Population parameter, radians or e.g. `pi/6`.
    #[arg(long = "B", value_parser = parse_angle, allow_hyphen_values = true)]
    b: Option<Angle>,
    /// Phase constant.
    #[arg(long = "D", value_parser = parse_real, allow_hyphen_values = true)]
    d: Option<f64>,
    /// Duration in µs [default: 0.1].
    #[arg(long = "T", value_parser = parse_real)]
    t: Option<f64>,
    /// Initial mixing angle [default: 0].
    #[arg(long, value_parser = parse_angle, allow_hyphen_values = true)]
    beta0: Option<Angle>,
    /// Final mixing angle [default: pi/2].
    #[arg(long, value_parser = parse_angle, allow_hyphen_values = true)]
    beta1: Option<Angle>,
    /// Schedule samples [default: 1001].
    #[arg(long, value_parser = parse_count)]
    samples: Option<usize>,
    /// SES functional used for the reported q_s [default: compact].
    #[arg(long, value_parser = VariantArg::parse)]
    ses_variant: Option<VariantArg>,
    /// Schedule CSV to write.
    #[arg(long, value_parser = parse_string)]
    out: Option<String>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum TuneMode {
    MinSes,
    EqualMax,
}

impl TuneMode {
    fn parse(s: &str) -> Result<Self, String> {
        <Self as ValueEnum>::from_str(s, true)
    }
}

fn parse_range(s: &str) -> Result<(f64, f64), String> {
    let parts: Vec<&str> = s.split(|c: char| c.is_whitespace() || c == ',').filter(|p| !p.is_empty()).collect();
    match parts.as_slice() {
        [lo, hi] => Ok((parse_real(lo)?, parse_real(hi)?)),
        _ => Err(format!("expected `lo hi`, got `{s}`")),
    }
}

#[derive(clap::Args)]
struct TuneArgs {
    #[arg(long = "B", value_parser = parse_angle, allow_hyphen_values = true)]
    b: Option<Angle>,
    #[arg(long, value_parser = TuneMode::parse)]
    mode: Option<TuneMode>,
    /// D search interval [default: -40 40 for min-ses, 0.1 100 for equal-max].
    #[arg(long, num_args = 2, value_names = ["LO", "HI"], value_parser = parse_real, allow_hyphen_values = true)]
    range: Option<Vec<f64>>,
    /// Duration in µs, used by equal-max [default: 0.1].
    #[arg(long = "T", value_parser = parse_real)]
    t: Option<f64>,
    #[arg(long, value_parser = parse_angle, allow_hyphen_values = true)]
    beta0: Option<Angle>,
    #[arg(long, value_parser = parse_angle, allow_hyphen_values = true)]
    beta1: Option<Angle>,
    /// Points in the optional q_s scan [default: 801].
    #[arg(long, value_parser = parse_count)]
    points: Option<usize>,
    #[arg(long, value_parser = VariantArg::parse)]
    ses_variant: Option<VariantArg>,
    /// Write a (D, q_s) scan over the range to this CSV.
    #[arg(long, value_parser = parse_string)]
    out: Option<String>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ProtocolArg {
    Optimal,
    Original,
}

impl ProtocolArg {
    fn parse(s: &str) -> Result<Self, String> {
        <Self as ValueEnum>::from_str(s, true)
    }
}

#[derive(clap::Args)]
struct SimulateArgs {
    /// Pulse schedule CSV, as written by `design`.
    #[arg(long, value_parser = parse_string)]
    schedule: Option<String>,
    /// Analytic pulse family when no schedule is given [default: optimal].
    #[arg(long, value_parser = ProtocolArg::parse)]
    protocol: Option<ProtocolArg>,
    #[arg(long = "B", value_parser = parse_angle, allow_hyphen_values = true)]
    b: Option<Angle>,
    #[arg(long = "D", value_parser = parse_real, allow_hyphen_values = true)]
    d: Option<f64>,
    #[arg(long = "T", value_parser = parse_real)]
    t: Option<f64>,
    #[arg(long, value_parser = parse_angle, allow_hyphen_values = true)]
    beta0: Option<Angle>,
    #[arg(long, value_parser = parse_angle, allow_hyphen_values = true)]
    beta1: Option<Angle>,
    /// Peak amplitude of the original protocol in ×2π MHz [default: 28.5].
    #[arg(long, value_parser = parse_real)]
    peak: Option<f64>,
    /// Proportional amplitude error.
    #[arg(long, value_parser = parse_real, allow_hyphen_values = true)]
    lambda: Option<f64>,
    #[arg(long, value_parser = parse_real)]
    rel_tol: Option<f64>,
    #[arg(long, value_parser = parse_real)]
    abs_tol: Option<f64>,
    /// Uniform output samples [default: 501].
    #[arg(long, value_parser = parse_count)]
    points: Option<usize>,
    /// Trajectory CSV to write.
    #[arg(long, value_parser = parse_string)]
    out: Option<String>,
}

#[derive(clap::Args)]
struct ReproduceArgs {
    /// table1, fig1, fig2a ... fig6, or all.
    #[arg(long, value_parser = parse_string)]
    target: Option<String>,
    /// Output directory [default: .].
    #[arg(long, value_parser = parse_string)]
    outdir: Option<String>,
    /// Also write a gnuplot script next to each figure CSV.
    #[arg(long)]
    gnuplot: bool,
}

fn parse_bool(s: &str) -> Result<bool, String> {
    match s.trim() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        other => Err(format!("expected true or false, got `{other}`")),
    }
}

fn required<T>(value: Option<T>, key: &str) -> CliResult<T> {
    value.ok_or_else(|| CliError::usage(format!("missing required value --{key}")))
}

fn positive(x: f64, key: &str) -> CliResult<f64> {
    if x > 0.0 {
        Ok(x)
    } else {
        Err(CliError::usage(format!("--{key} must be positive, got {}", fmt_sig(x))))
    }
}

fn version_line() -> String {
    format!("generator = stirap-forge {}", env!("CARGO_PKG_VERSION"))
}

fn angle_meta(key: &str, a: &Angle) -> String {
    if a.text == fmt_sig(a.rad) {
        format!("{key} = {}", a.text)
    } else {
        format!("{key} = {} = {}", a.text, fmt_sig(a.rad))
    }
}

/// Endpoint angles and duration shared by design and simulate.
struct Design {
    b: Angle,
    d: f64,
    duration: f64,
    beta0: Angle,
    beta1: Angle,
}

impl Design {
    fn params(&self) -> CliResult<ProtocolParams> {
        Ok(ProtocolParams::with_endpoints(self.b.rad, self.d, self.duration, self.beta0.rad, self.beta1.rad)?)
    }

    fn metadata(&self) -> Vec<String> {
        vec![
            angle_meta("B", &self.b),
            format!("D = {}", fmt_sig(self.d)),
            format!("T_us = {}", fmt_sig(self.duration)),
            angle_meta("beta0", &self.beta0),
            angle_meta("beta1", &self.beta1),
        ]
    }
}

#[allow(clippy::too_many_arguments)]
fn resolve_design(
    cfg: &ConfigFile,
    b: Option<Angle>,
    d: Option<f64>,
    t: Option<f64>,
    beta0: Option<Angle>,
    beta1: Option<Angle>,
) -> CliResult<Design> {
    Ok(Design {
        b: required(cfg.resolve("B", b, parse_angle)?, "B")?,
        d: required(cfg.resolve("D", d, parse_real)?, "D")?,
        duration: positive(cfg.resolve("T", t, parse_real)?.unwrap_or(bench::DURATION), "T")?,
        beta0: cfg.resolve("beta0", beta0, parse_angle)?.unwrap_or_else(|| Angle::rad(0.0)),
        beta1: cfg
            .resolve("beta1", beta1, parse_angle)?
            .unwrap_or_else(|| Angle { rad: FRAC_PI_2, text: "pi/2".into() }),
    })
}

fn cmd_design(a: DesignArgs, cfg: &ConfigFile) -> CliResult {
    cfg.check_keys(&["B", "D", "T", "beta0", "beta1", "samples", "ses-variant", "out"])?;
    let design = resolve_design(cfg, a.b, a.d, a.t, a.beta0, a.beta1)?;
    let samples = cfg.resolve("samples", a.samples, parse_count)?.unwrap_or(1001);
    let variant = cfg.resolve("ses-variant", a.ses_variant, VariantArg::parse)?.unwrap_or(VariantArg::Compact).core();
    let out = cfg.resolve("out", a.out, parse_string)?;
    if samples < 2 {
        return Err(CliError::usage("--samples must be at least 2"));
    }
    let params = design.params()?;

    let (wp, ws) = peak_amplitudes(&params)?;
    let q = ses_m_domain(design.b.rad, design.d, design.beta0.rad, design.beta1.rad, 1e-10, variant)?;
    println!("peak_omega_p = {} x2pi MHz", fmt_sig(to_two_pi_mhz(wp)));
    println!("peak_omega_s = {} x2pi MHz", fmt_sig(to_two_pi_mhz(ws)));
    println!("peak_omega = {} x2pi MHz", fmt_sig(to_two_pi_mhz(wp.max(ws))));
    println!("q_s = {} ({})", fmt_sig(q.q_s), variant.label());

    if let Some(out) = out {
        let mut meta = vec![version_line()];
        meta.extend(design.metadata());
        meta.push(format!("samples = {samples}"));
        meta.push(format!("q_s = {}", fmt_sig(q.q_s)));
        meta.push(format!("ses_variant = {}", variant.label()));
        sample_schedule(&params, samples)?.write_csv(Path::new(&out), &meta)?;
        println!("schedule written to {out}");
    }
    Ok(())
}

fn cmd_tune(a: TuneArgs, cfg: &ConfigFile) -> CliResult {
    cfg.check_keys(&["B", "mode", "range", "T", "beta0", "beta1", "points", "ses-variant", "out"])?;
    let b = required(cfg.resolve("B", a.b, parse_angle)?, "B")?;
    let mode = required(cfg.resolve("mode", a.mode, TuneMode::parse)?, "mode")?;
    let range = a.range.map(|v| (v[0], v[1]));
    let (lo, hi) = cfg.resolve("range", range, parse_range)?.unwrap_or(match mode {
        TuneMode::MinSes => (-40.0, 40.0),
        TuneMode::EqualMax => (0.1, 100.0),
    });
    if !(lo < hi) {
        return Err(CliError::usage(format!("empty range [{}, {}]", fmt_sig(lo), fmt_sig(hi))));
    }
    let duration = positive(cfg.resolve("T", a.t, parse_real)?.unwrap_or(bench::DURATION), "T")?;
    let beta0 = cfg.resolve("beta0", a.beta0, parse_angle)?.map_or(0.0, |x| x.rad);
    let beta1 = cfg.resolve("beta1", a.beta1, parse_angle)?.map_or(FRAC_PI_2, |x| x.rad);
    let points = cfg.resolve("points", a.points, parse_count)?.unwrap_or(801);
    let variant = cfg.resolve("ses-variant", a.ses_variant, VariantArg::parse)?.unwrap_or(VariantArg::Compact).core();
    let out = cfg.resolve("out", a.out, parse_string)?;

    let opts = SesTuneOptions { variant, beta_start: beta0, beta_end: beta1, ..SesTuneOptions::default() };
    let (result, objective) = match mode {
        TuneMode::MinSes => (find_min_ses_d(b.rad, lo, hi, &opts)?, "q_s"),
        TuneMode::EqualMax => (find_equal_maxima_d(b.rad, duration, lo, hi, 1e-9, beta0, beta1)?, "peak_gap"),
    };
    println!("d_star = {}", fmt_sig(result.d_star));
    println!("{objective} = {}", fmt_sig(result.objective_value));
    println!("iterations = {}", result.iterations);
    println!("converged = {}", result.converged);

    if let Some(out) = out {
        let scan = scan_qs(b.rad, lo, hi, points, &opts)?;
        let meta = vec![
            version_line(),
            angle_meta("B", &b),
            format!("range = {} {}", fmt_sig(lo), fmt_sig(hi)),
            format!("ses_variant = {}", variant.label()),
            format!("d_star = {}", fmt_sig(result.d_star)),
        ];
        let mut sink = CsvSink::create(Path::new(&out), &meta, &["D", "q_s"])?;
        for (d, q) in scan {
            sink.row(&[d, q])?;
        }
        sink.finish()?;
        println!("scan written to {out}");
    }
    Ok(())
}

fn cmd_simulate(a: SimulateArgs, cfg: &ConfigFile) -> CliResult {
    cfg.check_keys(&[
        "schedule", "protocol", "B", "D", "T", "beta0", "beta1", "peak", "lambda", "rel-tol", "abs-tol", "points",
        "out",
    ])?;
    let schedule = cfg.resolve("schedule", a.schedule, parse_string)?;
    let protocol = cfg.resolve("protocol", a.protocol, ProtocolArg::parse)?;
    let lambda = cfg.resolve("lambda", a.lambda, parse_real)?.unwrap_or(0.0);
    let integ = IntegratorConfig {
        rel_tol: positive(cfg.resolve("rel-tol", a.rel_tol, parse_real)?.unwrap_or(1e-10), "rel-tol")?,
        abs_tol: positive(cfg.resolve("abs-tol", a.abs_tol, parse_real)?.unwrap_or(1e-12), "abs-tol")?,
        output_points: cfg
            .resolve("points", a.points, parse_count)?
            .unwrap_or(stirap_forge::propagator::MIN_OUTPUT_POINTS),
        ..IntegratorConfig::default()
    };
    let out = cfg.resolve("out", a.out, parse_string)?;
    let mut meta = vec![version_line(), format!("lambda = {}", fmt_sig(lambda))];

    let source: Box<dyn PulseSource<f64> + Sync> = match (schedule, protocol) {
        (Some(_), Some(_)) => return Err(CliError::usage("--schedule and --protocol are mutually exclusive")),
        (Some(path), None) => {
            if a.b.is_some() || a.d.is_some() {
                return Err(CliError::usage("--schedule cannot be combined with --B/--D"));
            }
            if !Path::new(&path).is_file() {
                return Err(CliError::usage(format!("schedule file not found: {path}")));
            }
            meta.push(format!("schedule = {path}"));
            Box::new(InterpolatedSchedule::new(&PulseSchedule::read_csv(Path::new(&path))?))
        }
        (None, Some(ProtocolArg::Original)) => {
            let duration = positive(cfg.resolve("T", a.t, parse_real)?.unwrap_or(bench::DURATION), "T")?;
            let peak =
                positive(cfg.resolve("peak", a.peak, parse_real)?.unwrap_or(bench::COMPARISON_PEAK_MHZ), "peak")?;
            let p = OriginalProtocol::tuned_to_peak(ORIGINAL_EPSILON, duration, from_two_pi_mhz(peak))?;
            meta.push("protocol = original".into());
            meta.push(format!("T_us = {}", fmt_sig(duration)));
            meta.push(format!("peak = {} x2pi MHz", fmt_sig(peak)));
            meta.push(format!("theta_mid = {}", fmt_sig(p.params().theta_mid)));
            Box::new(p)
        }
        (None, _) => {
            let design = resolve_design(cfg, a.b, a.d, a.t, a.beta0, a.beta1)?;
            meta.push("protocol = optimal".into());
            meta.extend(design.metadata());
            Box::new(design.params()?)
        }
    };
    integ.validate(source.duration())?;

    let traj = evolve(source.as_ref(), &StateVector3::basis(1)?, lambda, &integ)?;
    let last = traj.times.len() - 1;
    let (t2, p2) = traj.peak_population(2)?;
    println!("P1(T) = {}", fmt_sig(traj.populations[0][last]));
    println!("P2(T) = {}", fmt_sig(traj.populations[1][last]));
    println!("P3(T) = {}", fmt_sig(traj.populations[2][last]));
    println!("max P2 = {} at t = {} us", fmt_sig(p2), fmt_sig(t2));
    println!("max norm error = {}", fmt_sig(traj.max_norm_error()));
    if let Some(out) = out {
        traj.write_csv(Path::new(&out), &meta)?;
        println!("trajectory written to {out}");
    }
    Ok(())
}

/// Returns whether every check passed.
fn cmd_reproduce(a: ReproduceArgs, cfg: &ConfigFile) -> CliResult<bool> {
    cfg.check_keys(&["target", "outdir", "gnuplot"])?;
    let name = cfg.resolve("target", a.target, parse_string)?.unwrap_or_else(|| "all".into());
    let target = Target::parse(&name).ok_or_else(|| {
        let figs: Vec<&str> = bench::Figure::ALL.iter().map(|f| f.name()).collect();
        CliError::usage(format!("unknown target `{name}` (table1, {}, all)", figs.join(", ")))
    })?;
    let outdir = cfg.resolve("outdir", a.outdir, parse_string)?.unwrap_or_else(|| ".".into());
    let gnuplot = a.gnuplot || cfg.resolve("gnuplot", None, parse_bool)?.unwrap_or(false);
    let checks = bench::reproduce(target, Path::new(&outdir), &BenchConfig { gnuplot, ..BenchConfig::default() })?;
    for c in &checks {
        println!("{c}");
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    println!("{} checks, {failed} failed; outputs in {outdir}", checks.len());
    Ok(failed == 0)
}

fn configure_threads() -> CliResult {
    let Ok(raw) = std::env::var(THREADS_VAR) else { return Ok(()) };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::usage(format!("{THREADS_VAR} must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::usage(format!("cannot configure {n} threads: {e}")))
}

fn run(cli: Cli) -> CliResult<bool> {
    configure_threads()?;
    let cfg = match &cli.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    match cli.command {
        Command::Design(a) => cmd_design(a, &cfg).map(|_| true),
        Command::Tune(a) => cmd_tune(a, &cfg).map(|_| true),
        Command::Simulate(a) => cmd_simulate(a, &cfg).map(|_| true),
        Command::Reproduce(a) => cmd_reproduce(a, &cfg),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code)
        }
    }
}
