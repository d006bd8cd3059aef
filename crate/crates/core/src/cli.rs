//! Command-line front end. Every subcommand reads JSON, writes JSON and maps
//! its outcome onto a fixed exit code: 0 success, 1 bad input or failed
//! precondition, 2 a check that ran and failed.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::cube::Cube;
use crate::error::{Error, Result};
use crate::flat::{
    flatness_check, iterative_primitive, FlatnessOptions, FlatnessReport, GridForm, GridFormJson, IterativeOptions,
    ResidualHistory, Verdict,
};
use crate::form::{PolyForm, PolyFormJson};
use crate::poincare::{
    bounded_primitive_with, closed_approx_with, verify_certificate, Inequality, NormCertificate, NormCertificateJson,
    PoincareOptions, TauRule,
};
use crate::rational;
use crate::supnorm::{self, NormBoundJson};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_CHECK: i32 = 2;

/// Thread count for internal parallelism. The current pipeline runs on one
/// thread, so the value is validated and recorded but does not change results.
pub const THREADS_ENV: &str = "POINCARE_LINF_THREADS";

#[derive(Debug, Parser)]
#[command(name = "poincare-linf", version, about = "Sup-norm certified primitives and flat-form audits")]
pub struct Cli {
    /// Write a run report (inputs, digests, parameters, timings) to this file.
    #[arg(long, global = true, value_name = "FILE")]
    pub report: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exterior derivative of a polynomial form.
    D(FormIo),
    /// Bounded primitive of a closed polynomial form.
    Primitive(PrimitiveArgs),
    /// Closed approximation of a polynomial form.
    ClosedApprox(ClosedApproxArgs),
    /// Certified sup-norm bounds.
    Supnorm(SupnormArgs),
    /// Boundary-integral audit of a grid form.
    FlatCheck(FlatCheckArgs),
    /// Iterated mollify-fit-primitive pipeline on a grid form.
    MollifySolve(MollifySolveArgs),
    /// Re-check a certificate, flatness report, residual history or run report.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct FormIo {
    /// Input file, `-` for stdin.
    pub input: PathBuf,
    /// Output file; stdout when absent.
    #[arg(short, long, value_name = "FILE")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CubeArgs {
    /// Lower corner, comma-separated rationals; defaults to the origin.
    #[arg(long, value_name = "X1,X2,...", allow_hyphen_values = true)]
    pub lo: Option<String>,
    /// Upper corner; defaults to all ones.
    #[arg(long, value_name = "X1,X2,...", allow_hyphen_values = true)]
    pub hi: Option<String>,
}

#[derive(Debug, Args)]
pub struct BoundArgs {
    /// Sample points per axis for lower bounds.
    #[arg(long, default_value_t = 3)]
    pub grid: usize,
    /// Starting bisection level for Bernstein upper bounds.
    #[arg(long, default_value_t = 0)]
    pub subdivision: u32,
    /// Highest bisection level tried before a certificate is reported as failed.
    #[arg(long, default_value_t = 2)]
    pub max_subdivision: u32,
}

#[derive(Debug, Args)]
pub struct PrimitiveArgs {
    #[command(flatten)]
    pub io: FormIo,
    #[command(flatten)]
    pub cube: CubeArgs,
    #[command(flatten)]
    pub bounds: BoundArgs,
    /// Write the recursion trace.
    #[arg(long, value_name = "FILE")]
    pub trace: Option<PathBuf>,
    /// Write the norm certificate.
    #[arg(long, value_name = "FILE")]
    pub cert: Option<PathBuf>,
    /// Scan this many extra base points per level instead of the midpoint.
    #[arg(long, value_name = "M")]
    pub tau_scan: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ClosedApproxArgs {
    #[command(flatten)]
    pub io: FormIo,
    #[command(flatten)]
    pub cube: CubeArgs,
    #[command(flatten)]
    pub bounds: BoundArgs,
    #[arg(long, value_name = "FILE")]
    pub trace: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    pub cert: Option<PathBuf>,
    #[arg(long, value_name = "M")]
    pub tau_scan: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SupnormArgs {
    #[command(flatten)]
    pub io: FormIo,
    #[command(flatten)]
    pub cube: CubeArgs,
    #[arg(long, default_value_t = 3)]
    pub grid: usize,
    #[arg(long, default_value_t = 0)]
    pub subdivision: u32,
    /// Bound `max(|w|, |dw|)` instead of `|w|`.
    #[arg(long)]
    pub flat: bool,
}

#[derive(Debug, Args)]
pub struct FlatCheckArgs {
    #[command(flatten)]
    pub io: FormIo,
    #[arg(long, default_value_t = 2000)]
    pub simplices: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Simplex scale range `a,b`.
    #[arg(long, value_name = "A,B", default_value = "0.01,0.3")]
    pub scales: String,
    /// Claimed bound `N'`; exit 2 when a ratio exceeds it.
    #[arg(long, value_name = "X")]
    pub nprime: Option<f64>,
    #[arg(long, default_value_t = 10)]
    pub bins: usize,
}

#[derive(Debug, Args)]
pub struct MollifySolveArgs {
    /// Input grid form, `-` for stdin.
    pub input: PathBuf,
    #[arg(long, default_value_t = 5)]
    pub stages: usize,
    /// `r1,r2,...` or `geometric:FIRST:RATIO`; halving from a tenth of the
    /// shortest edge when absent.
    #[arg(long, value_name = "SCHEDULE")]
    pub radii: Option<String>,
    /// Fit degree per stage, `d1,d2,...`.
    #[arg(long, value_name = "D1,D2,...")]
    pub degrees: Option<String>,
    #[arg(long, value_name = "TOL")]
    pub closedness_tolerance: Option<f64>,
    /// Write θ as a grid form.
    #[arg(long, value_name = "FILE")]
    pub theta: Option<PathBuf>,
    /// Write the exact polynomial θ.
    #[arg(long, value_name = "FILE")]
    pub theta_form: Option<PathBuf>,
    /// Write the residual history; stdout when absent.
    #[arg(long, value_name = "FILE")]
    pub history: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Certificate, flatness report, residual history or run report.
    pub file: PathBuf,
    /// Original input. Reports are recomputed from it and compared; for a
    /// certificate this is the polynomial form it was issued for.
    #[arg(long, value_name = "FILE")]
    pub input: Option<PathBuf>,
    /// Result form a certificate was issued for (θ or w').
    #[arg(long, value_name = "FILE")]
    pub result: Option<PathBuf>,
    #[command(flatten)]
    pub cube: CubeArgs,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Timing {
    pub total_ms: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub command: String,
    pub tool_version: String,
    pub arguments: Vec<String>,
    pub threads: usize,
    pub parameters: Value,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    pub certificates: Vec<NormCertificateJson>,
    pub summary: Vec<String>,
    pub exit_code: i32,
    pub timings: Timing,
}

#[derive(Debug, Default)]
struct Outcome {
    code: i32,
    parameters: Value,
    inputs: Vec<PathBuf>,
    outputs: Vec<PathBuf>,
    certificates: Vec<NormCertificateJson>,
    summary: Vec<String>,
}

impl Outcome {
    fn note(&mut self, line: impl Into<String>) {
        self.summary.push(line.into());
    }
}

/// Runs the tool on `args` (including the program name) and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    let threads = match thread_count() {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INPUT;
        }
    };
    let started = Instant::now();
    let name = command_name(&cli.command);
    let outcome = match dispatch(&cli.command) {
        Ok(o) => o,
        Err(e) => {
            let code = match e {
                Error::Stagnation { .. } => EXIT_CHECK,
                _ => EXIT_INPUT,
            };
            Outcome { code, summary: vec![format!("error: {e}")], ..Outcome::default() }
        }
    };
    for line in &outcome.summary {
        eprintln!("{line}");
    }
    if let Some(path) = &cli.report {
        let report = RunReport {
            command: name.to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            arguments: args.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect(),
            threads,
            parameters: outcome.parameters.clone(),
            inputs: outcome.inputs.iter().filter_map(|p| digest_file(p).ok()).collect(),
            outputs: outcome.outputs.iter().filter_map(|p| digest_file(p).ok()).collect(),
            certificates: outcome.certificates.clone(),
            summary: outcome.summary.clone(),
            exit_code: outcome.code,
            timings: Timing { total_ms: started.elapsed().as_secs_f64() * 1e3 },
        };
        if let Err(e) = write_json(Some(path), &report) {
            eprintln!("error: cannot write report: {e}");
            return EXIT_INPUT;
        }
    }
    outcome.code
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::D(_) => "d",
        Command::Primitive(_) => "primitive",
        Command::ClosedApprox(_) => "closed-approx",
        Command::Supnorm(_) => "supnorm",
        Command::FlatCheck(_) => "flat-check",
        Command::MollifySolve(_) => "mollify-solve",
        Command::Verify(_) => "verify",
    }
}

fn thread_count() -> Result<usize> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(1),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(t) if t >= 1 => Ok(t),
            _ => Err(Error::InvalidArgument(format!("{THREADS_ENV} must be a positive integer, got {v:?}"))),
        },
    }
}

fn dispatch(command: &Command) -> Result<Outcome> {
    match command {
        Command::D(a) => cmd_d(a),
        Command::Primitive(a) => cmd_primitive(a),
        Command::ClosedApprox(a) => cmd_closed_approx(a),
        Command::Supnorm(a) => cmd_supnorm(a),
        Command::FlatCheck(a) => cmd_flat_check(a),
        Command::MollifySolve(a) => cmd_mollify_solve(a),
        Command::Verify(a) => cmd_verify(a),
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn digest_file(path: &Path) -> Result<FileDigest> {
    let bytes = fs::read(path)?;
    Ok(FileDigest { path: path.display().to_string(), sha256: sha256_hex(&bytes), bytes: bytes.len() as u64 })
}

fn read_text(path: &Path) -> Result<String> {
    if path == Path::new("-") {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s)?;
        Ok(s)
    } else {
        fs::read_to_string(path).map_err(|e| Error::Io(io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
    }
}

fn parse_json<T: for<'de> Deserialize<'de>>(path: &Path, text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

pub fn read_form(path: &Path) -> Result<PolyForm> {
    let json: PolyFormJson = parse_json(path, &read_text(path)?)?;
    PolyForm::try_from(&json)
}

pub fn read_grid(path: &Path) -> Result<GridForm> {
    let json: GridFormJson = parse_json(path, &read_text(path)?)?;
    GridForm::try_from(&json)
}

/// Pretty JSON with a trailing newline, to `path` via temp file and rename,
/// or to stdout.
pub fn write_json<T: Serialize>(path: Option<&PathBuf>, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    match path {
        None => {
            io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
        Some(path) => write_atomic(path, text.as_bytes()),
    }
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

fn parse_list<T: std::str::FromStr>(text: &str, what: &str) -> Result<Vec<T>> {
    text.split(',')
        .map(|s| s.trim().parse::<T>().map_err(|_| Error::Parse(format!("bad {what} entry {s:?} in {text:?}"))))
        .collect()
}

fn parse_cube(args: &CubeArgs, n: usize) -> Result<Cube> {
    let corner = |text: &Option<String>, default: i64| -> Result<Vec<rational::Rational>> {
        match text {
            None => Ok(vec![rational::int(default); n]),
            Some(t) => {
                let v = t.split(',').map(rational::parse).collect::<Result<Vec<_>>>()?;
                if v.len() != n {
                    return Err(Error::DimensionMismatch { expected: n, found: v.len() });
                }
                Ok(v)
            }
        }
    };
    Cube::new(corner(&args.lo, 0)?, corner(&args.hi, 1)?)
}

fn poincare_options(bounds: &BoundArgs, tau_scan: Option<usize>) -> PoincareOptions {
    PoincareOptions {
        tau: tau_scan.map_or(TauRule::Midpoint, |candidates| TauRule::Scan { candidates }),
        grid_per_axis: bounds.grid,
        subdivision: bounds.subdivision,
        max_subdivision: bounds.max_subdivision.max(bounds.subdivision),
        record_trace: true,
    }
}

fn cube_json(cube: &Cube) -> Value {
    let f = |v: &[rational::Rational]| v.iter().map(rational::format).collect::<Vec<_>>();
    serde_json::json!({ "lo": f(cube.lo()), "hi": f(cube.hi()) })
}

fn record_output(outcome: &mut Outcome, path: &Option<PathBuf>) {
    if let Some(p) = path {
        outcome.outputs.push(p.clone());
    }
}

fn input_list(path: &Path) -> Vec<PathBuf> {
    if path == Path::new("-") {
        Vec::new()
    } else {
        vec![path.to_path_buf()]
    }
}

fn cmd_d(a: &FormIo) -> Result<Outcome> {
    let w = read_form(&a.input)?;
    let dw = w.d();
    write_json(a.output.as_ref(), &PolyFormJson::from(&dw))?;
    let mut out = Outcome { inputs: input_list(&a.input), ..Outcome::default() };
    record_output(&mut out, &a.output);
    out.note(format!("d of a {}-form in dimension {}: {} term(s)", w.degree(), w.dim(), dw.terms().count()));
    Ok(out)
}

fn certificate_outcome(out: &mut Outcome, cert: &NormCertificate) {
    let report = verify_certificate(cert);
    out.certificates.push(cert.into());
    out.note(report.message.clone());
    if !report.verified {
        out.code = EXIT_CHECK;
    }
}

fn cmd_primitive(a: &PrimitiveArgs) -> Result<Outcome> {
    let w = read_form(&a.io.input)?;
    let cube = parse_cube(&a.cube, w.dim())?;
    let opts = poincare_options(&a.bounds, a.tau_scan);
    let p = bounded_primitive_with(&w, &cube, &opts)?;
    write_json(a.io.output.as_ref(), &PolyFormJson::from(&p.theta))?;
    if let Some(path) = &a.cert {
        write_json(Some(path), &NormCertificateJson::from(&p.certificate))?;
    }
    if let Some(path) = &a.trace {
        write_json(Some(path), &p.trace.to_json())?;
    }
    let mut out = Outcome {
        inputs: input_list(&a.io.input),
        parameters: serde_json::json!({
            "cube": cube_json(&cube),
            "grid": a.bounds.grid,
            "subdivision": a.bounds.subdivision,
            "max_subdivision": a.bounds.max_subdivision,
            "tau_scan": a.tau_scan,
        }),
        ..Outcome::default()
    };
    for path in [&a.io.output, &a.cert, &a.trace] {
        record_output(&mut out, path);
    }
    certificate_outcome(&mut out, &p.certificate);
    Ok(out)
}

fn cmd_closed_approx(a: &ClosedApproxArgs) -> Result<Outcome> {
    let w = read_form(&a.io.input)?;
    let cube = parse_cube(&a.cube, w.dim())?;
    let opts = poincare_options(&a.bounds, a.tau_scan);
    let c = closed_approx_with(&w, &cube, &opts)?;
    write_json(a.io.output.as_ref(), &PolyFormJson::from(&c.wprime))?;
    if let Some(path) = &a.cert {
        write_json(Some(path), &NormCertificateJson::from(&c.certificate))?;
    }
    if let Some(path) = &a.trace {
        write_json(Some(path), &c.trace.to_json())?;
    }
    let mut out = Outcome {
        inputs: input_list(&a.io.input),
        parameters: serde_json::json!({
            "cube": cube_json(&cube),
            "grid": a.bounds.grid,
            "subdivision": a.bounds.subdivision,
            "max_subdivision": a.bounds.max_subdivision,
            "tau_scan": a.tau_scan,
        }),
        ..Outcome::default()
    };
    for path in [&a.io.output, &a.cert, &a.trace] {
        record_output(&mut out, path);
    }
    certificate_outcome(&mut out, &c.certificate);
    Ok(out)
}

fn cmd_supnorm(a: &SupnormArgs) -> Result<Outcome> {
    let w = read_form(&a.io.input)?;
    let cube = parse_cube(&a.cube, w.dim())?;
    let bound = if a.flat {
        let dw = w.d();
        let b = supnorm::sup_norm_with(&w, &cube, a.grid, a.subdivision)?;
        let db = supnorm::sup_norm_with(&dw, &cube, a.grid, a.subdivision)?;
        if db.upper > b.upper || (db.upper == b.upper && db.lower > b.lower) {
            db
        } else {
            b
        }
    } else {
        supnorm::sup_norm_with(&w, &cube, a.grid, a.subdivision)?
    };
    write_json(a.io.output.as_ref(), &NormBoundJson::from(&bound))?;
    let mut out = Outcome {
        inputs: input_list(&a.io.input),
        parameters: serde_json::json!({
            "cube": cube_json(&cube),
            "grid": a.grid,
            "subdivision": a.subdivision,
            "flat": a.flat,
        }),
        ..Outcome::default()
    };
    record_output(&mut out, &a.io.output);
    out.note(format!(
        "{} <= |w| <= {}",
        rational::format(&bound.lower),
        rational::format(&bound.upper)
    ));
    Ok(out)
}

pub fn parse_scales(text: &str) -> Result<(f64, f64)> {
    let v: Vec<f64> = parse_list(text, "scale")?;
    match v.as_slice() {
        &[a, b] if a > 0.0 && b >= a => Ok((a, b)),
        _ => Err(Error::InvalidArgument(format!("--scales needs 0 < a <= b, got {text:?}"))),
    }
}

fn blowup_table(report: &FlatnessReport) -> Vec<String> {
    let mut lines = vec![format!("{:>10} {:>10} {:>6} {:>12} {:>12} {:>12}", "scale_lo", "scale_hi", "count", "median", "q90", "max")];
    for b in &report.bins {
        lines.push(format!(
            "{:>10.4} {:>10.4} {:>6} {:>12.5e} {:>12.5e} {:>12.5e}",
            b.scale_lo, b.scale_hi, b.count, b.median, b.q90, b.max
        ));
    }
    lines
}

fn cmd_flat_check(a: &FlatCheckArgs) -> Result<Outcome> {
    let w = read_grid(&a.io.input)?;
    let options = FlatnessOptions {
        sample_count: a.simplices,
        seed: a.seed,
        scale_range: parse_scales(&a.scales)?,
        nprime: a.nprime,
        bins: a.bins,
    };
    let report = flatness_check(&w, &options)?;
    write_json(a.io.output.as_ref(), &report)?;
    let mut out = Outcome {
        inputs: input_list(&a.io.input),
        parameters: serde_json::to_value(&options)?,
        ..Outcome::default()
    };
    record_output(&mut out, &a.io.output);
    out.note(format!(
        "max ratio {:.6e} over {} simplices, blow-up {}, scale exponent {}, verdict {:?}",
        report.max_ratio,
        report.records.len(),
        report.scale_blowup.map_or("n/a".to_string(), |b| format!("{b:.3}")),
        report.scale_exponent.map_or("n/a".to_string(), |p| format!("{p:.3}")),
        report.verdict
    ));
    if let Some(x) = a.nprime {
        if report.max_ratio > x {
            out.code = EXIT_CHECK;
            out.note(format!("max ratio exceeds N' = {x}"));
            out.summary.extend(blowup_table(&report));
        }
    }
    Ok(out)
}

pub fn parse_radii(text: &str, stages: usize) -> Result<Vec<f64>> {
    if let Some(rest) = text.strip_prefix("geometric:") {
        let v: Vec<f64> = rest
            .split(':')
            .map(|s| s.trim().parse::<f64>().map_err(|_| Error::Parse(format!("bad schedule {text:?}"))))
            .collect::<Result<_>>()?;
        return match v.as_slice() {
            &[first, ratio] => Ok(crate::flat::geometric_radii(first, ratio, stages)),
            _ => Err(Error::Parse(format!("expected geometric:FIRST:RATIO, got {text:?}"))),
        };
    }
    parse_list(text, "radius")
}

fn cmd_mollify_solve(a: &MollifySolveArgs) -> Result<Outcome> {
    let w = read_grid(&a.input)?;
    let options = IterativeOptions {
        stages: a.stages,
        radii: a.radii.as_deref().map(|r| parse_radii(r, a.stages)).transpose()?,
        degrees: a.degrees.as_deref().map(|d| parse_list(d, "degree")).transpose()?,
        closedness_tolerance: a.closedness_tolerance,
        ..IterativeOptions::default()
    };
    let result = iterative_primitive(&w, &options)?;
    if let Some(path) = &a.theta {
        write_json(Some(path), &result.theta.to_json())?;
    }
    if let Some(path) = &a.theta_form {
        write_json(Some(path), &PolyFormJson::from(&result.theta_form))?;
    }
    write_json(a.history.as_ref(), &result.history)?;
    let mut out = Outcome {
        inputs: input_list(&a.input),
        parameters: serde_json::to_value(&options)?,
        ..Outcome::default()
    };
    for path in [&a.theta, &a.theta_form, &a.history] {
        record_output(&mut out, path);
    }
    for s in &result.history.stages {
        out.note(format!(
            "stage {}: radius {:.4e}, degree {}, residual {:.4e}, interior {:.4e}",
            s.stage, s.radius, s.degree, s.residual, s.interior_residual
        ));
    }
    Ok(out)
}

/// Which kind of document a JSON value is, judged by its keys.
fn classify(value: &Value) -> Option<&'static str> {
    let has = |k: &str| value.get(k).is_some();
    if has("inequality") && has("norm_input") {
        Some("certificate")
    } else if has("records") && has("max_ratio") {
        Some("flatness")
    } else if has("stages") && has("radii") {
        Some("history")
    } else if has("tool_version") && has("command") {
        Some("run")
    } else {
        None
    }
}

fn cmd_verify(a: &VerifyArgs) -> Result<Outcome> {
    let text = read_text(&a.file)?;
    let value: Value = parse_json(&a.file, &text)?;
    let mut out = Outcome { inputs: input_list(&a.file), ..Outcome::default() };
    if let Some(p) = &a.input {
        out.inputs.push(p.clone());
    }
    let problems = match classify(&value) {
        Some("certificate") => {
            let json: NormCertificateJson = serde_json::from_value(value)?;
            let cert = NormCertificate::try_from(&json)?;
            verify_certificate_file(&cert, a, &mut out)?
        }
        Some("flatness") => {
            let report: FlatnessReport = serde_json::from_value(value)?;
            verify_flatness(&report, a, &mut out)?
        }
        Some("history") => {
            let history: ResidualHistory = serde_json::from_value(value)?;
            verify_history(&history, a, &mut out)?
        }
        Some("run") => {
            let report: RunReport = serde_json::from_value(value)?;
            verify_run(&report, &mut out)?
        }
        _ => return Err(Error::Parse(format!("{}: not a certificate or report", a.file.display()))),
    };
    if problems.is_empty() {
        out.note("verified");
    } else {
        out.code = EXIT_CHECK;
        for p in problems {
            out.note(format!("FAILED: {p}"));
        }
    }
    Ok(out)
}

fn verify_certificate_file(cert: &NormCertificate, a: &VerifyArgs, out: &mut Outcome) -> Result<Vec<String>> {
    let mut problems = Vec::new();
    let report = verify_certificate(cert);
    out.note(report.message.clone());
    out.certificates.push(cert.into());
    if !report.verified {
        problems.push("inequality does not hold for the recorded bounds".to_string());
    }
    let (Some(input), Some(result)) = (&a.input, &a.result) else {
        return Ok(problems);
    };
    let w = read_form(input)?;
    let r = read_form(result)?;
    let cube = parse_cube(&a.cube, w.dim())?;
    let upper = |f: &PolyForm| supnorm::bernstein_bound_form(f, &cube, cert.subdivision);
    let (source, defect) = match cert.inequality {
        Inequality::BoundedPrimitive => {
            if r.d() != w {
                problems.push("d(result) differs from the input".into());
            }
            (w.clone(), None)
        }
        Inequality::ClosedApprox => {
            if !r.d().is_zero() {
                problems.push("result is not closed".into());
            }
            (w.d(), Some(w.sub(&r)?))
        }
    };
    if upper(&source) != cert.norm_input.upper {
        problems.push("recomputed input bound differs from the certificate".into());
    }
    if upper(&r) != cert.norm_output.upper {
        problems.push("recomputed output bound differs from the certificate".into());
    }
    if let (Some(d), Some(b)) = (defect, &cert.defect_norm) {
        if upper(&d) != b.upper {
            problems.push("recomputed defect bound differs from the certificate".into());
        }
    }
    Ok(problems)
}

fn verify_flatness(report: &FlatnessReport, a: &VerifyArgs, out: &mut Outcome) -> Result<Vec<String>> {
    let mut problems = Vec::new();
    let mut max: f64 = 0.0;
    for (i, r) in report.records.iter().enumerate() {
        let ratio = r.boundary_integral.abs() / r.volume;
        if (ratio - r.ratio).abs() > 1e-12 * ratio.max(1.0) {
            problems.push(format!("record {i}: ratio {} but |integral|/volume = {ratio}", r.ratio));
        }
        max = max.max(r.ratio);
    }
    if max != report.max_ratio {
        problems.push(format!("max_ratio {} but records give {max}", report.max_ratio));
    }
    let binned: usize = report.bins.iter().map(|b| b.count).sum();
    if binned != report.records.len() {
        problems.push(format!("bins hold {binned} records, report has {}", report.records.len()));
    }
    let expected = match report.options.nprime {
        Some(x) => (report.max_ratio <= x, format!("N' = {x}")),
        None => (
            !report.scale_exponent.is_some_and(|p| p < crate::flat::flatness::EXPONENT_THRESHOLD),
            format!("scale exponent {:?}", report.scale_exponent),
        ),
    };
    if (report.verdict == Verdict::Flat) != expected.0 {
        problems.push(format!("verdict {:?} inconsistent with {}", report.verdict, expected.1));
    }
    out.parameters = serde_json::to_value(&report.options)?;
    out.note(format!("{} records, max ratio {:.6e}", report.records.len(), report.max_ratio));
    if let Some(input) = &a.input {
        let w = read_grid(input)?;
        let again = flatness_check(&w, &report.options)?;
        if serde_json::to_value(&again)? != serde_json::to_value(report)? {
            problems.push("re-running with the echoed parameters gives a different report".into());
        } else {
            out.note("re-run reproduces the report");
        }
    }
    Ok(problems)
}

fn verify_history(history: &ResidualHistory, a: &VerifyArgs, out: &mut Outcome) -> Result<Vec<String>> {
    let mut problems = Vec::new();
    for (i, s) in history.stages.iter().enumerate() {
        if s.stage != i + 1 {
            problems.push(format!("stage numbering broken at entry {i}"));
        }
        if history.radii.get(i) != Some(&s.radius) || history.degrees.get(i) != Some(&s.degree) {
            problems.push(format!("stage {} disagrees with the echoed schedule", s.stage));
        }
        if !s.residual.is_finite() || !s.certificate_verified {
            problems.push(format!("stage {} has a non-finite residual or unverified certificate", s.stage));
        }
    }
    if history.closedness_residual > history.closedness_tolerance {
        problems.push("input exceeds the recorded closedness tolerance".into());
    }
    if history.converged {
        let last = history.stages.last().map_or(f64::INFINITY, |s| s.residual);
        if last > crate::flat::CONVERGED * history.input_norm {
            problems.push("marked converged but the last residual is above the floor".into());
        }
    }
    out.parameters = serde_json::to_value(&history.options)?;
    out.note(format!("{} stages, residuals {:?}", history.stages.len(), history.residuals()));
    if let Some(input) = &a.input {
        let w = read_grid(input)?;
        let again = iterative_primitive(&w, &history.options)?;
        if serde_json::to_value(&again.history)? != serde_json::to_value(history)? {
            problems.push("re-running with the echoed options gives a different history".into());
        } else {
            out.note("re-run reproduces the history");
        }
    }
    Ok(problems)
}

fn verify_run(report: &RunReport, out: &mut Outcome) -> Result<Vec<String>> {
    let mut problems = Vec::new();
    for c in &report.certificates {
        let cert = NormCertificate::try_from(c)?;
        let v = verify_certificate(&cert);
        if v.verified != c.verified {
            problems.push(format!("certificate claims verified = {} but re-check gives {}", c.verified, v.verified));
        }
        out.certificates.push(c.clone());
    }
    for d in report.inputs.iter().chain(&report.outputs) {
        match digest_file(Path::new(&d.path)) {
            Ok(now) if now.sha256 == d.sha256 => {}
            Ok(_) => problems.push(format!("{} changed since the run", d.path)),
            Err(_) => out.note(format!("{} not available, digest not checked", d.path)),
        }
    }
    out.parameters = report.parameters.clone();
    out.note(format!("{} run, exit code {}", report.command, report.exit_code));
    Ok(problems)
}
