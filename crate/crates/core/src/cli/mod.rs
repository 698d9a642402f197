//! Command-line front end: config layering, dispatch, artifacts, manifest.

pub mod commands;
pub mod output;
pub mod params;

use clap::{Parser, Subcommand};
use output::{json_compact, json_pretty, sha256_hex, FORMAT_VERSION};
use params::*;
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;
use tacnode_pearcey::acceptance::Check;

/// Environment variable holding the worker-pool size.
pub const WORKERS_ENV: &str = "TACNODE_WORKERS";

#[derive(Debug, Parser)]
#[command(name = "tacnode-pearcey", version, about = "Pearcey, tacnode and critical kernel laboratory")]
pub struct Cli {
    /// JSON config file with the subcommand's parameters; flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory [default: out/<subcommand>].
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// γ and c from (a, σ, model).
    Gamma(GammaFlags),
    /// Quartic, cut relations, symmetries and series of the spectral curve.
    CurveVerify(CurveFlags),
    /// Closed-form λ constants and the convergence deviation.
    LambdaVerify(LambdaFlags),
    /// Re λ_j along the estimate contours.
    SignReport(SignFlags),
    /// p, q, the kernel and Φ^Pe at one point.
    PearceyEval(PearceyEvalFlags),
    /// Integral vs RH Pearcey kernel on a grid.
    PearceyConsistency(ConsistencyFlags),
    /// Jump determinants, cyclic products and the transformation audit.
    ParametrixAudit(AuditFlags),
    /// Jumps, determinant and asymptotics of the global parametrix.
    GlobalCheck(GlobalFlags),
    /// Decay of the matching condition on ∂D(0, δ).
    Matching(MatchingFlags),
    /// Tacnode kernel approximation against K^Pe(y, x).
    TacnodeConverge(ConvergeFlags),
    /// Critical kernel approximation against K^Pe(x, y).
    CriticalConverge(ConvergeFlags),
    /// Phase classification and diagram.
    Phase(PhaseFlags),
    /// Non-intersecting Brownian bridges.
    Simulate(SimulateFlags),
    /// Acceptance criteria 1–10.
    AllAcceptance(AcceptanceFlags),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Gamma(_) => "gamma",
            Command::CurveVerify(_) => "curve-verify",
            Command::LambdaVerify(_) => "lambda-verify",
            Command::SignReport(_) => "sign-report",
            Command::PearceyEval(_) => "pearcey-eval",
            Command::PearceyConsistency(_) => "pearcey-consistency",
            Command::ParametrixAudit(_) => "parametrix-audit",
            Command::GlobalCheck(_) => "global-check",
            Command::Matching(_) => "matching",
            Command::TacnodeConverge(_) => "tacnode-converge",
            Command::CriticalConverge(_) => "critical-converge",
            Command::Phase(_) => "phase",
            Command::Simulate(_) => "simulate",
            Command::AllAcceptance(_) => "all-acceptance",
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical failure in {check}: {message}")]
    Numerical { check: String, message: String },
    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn config(e: impl std::fmt::Display) -> Self {
        CliError::Config(e.to_string())
    }

    /// Maps a library error raised while computing `check`.
    pub fn numerical<E: std::fmt::Display>(check: &str) -> impl FnOnce(E) -> Self + '_ {
        move |e| CliError::Numerical { check: check.to_string(), message: e.to_string() }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Io { .. } => 2,
            CliError::Numerical { .. } => 3,
        }
    }

    fn status(&self) -> &'static str {
        match self {
            CliError::Config(_) | CliError::Io { .. } => "config_error",
            CliError::Numerical { .. } => "numerical_error",
        }
    }
}

/// Result of one subcommand before anything is written.
#[derive(Debug, Default)]
pub struct Outcome {
    pub checks: Vec<Check>,
    /// File name and bytes, written in order.
    pub artifacts: Vec<(String, Vec<u8>)>,
    /// Primary result printed on stdout.
    pub stdout: Option<String>,
}

impl Outcome {
    pub fn json<T: Serialize>(&mut self, name: &str, body: &T) -> Result<(), CliError> {
        let bytes = output::versioned(body).map_err(CliError::numerical("serialize"))?;
        self.artifacts.push((name.to_string(), bytes));
        Ok(())
    }

    pub fn csv(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
        let bytes = output::csv_table(header, rows).map_err(CliError::numerical("serialize"))?;
        self.artifacts.push((name.to_string(), bytes));
        Ok(())
    }
}

#[derive(Serialize)]
struct OutputEntry {
    name: String,
    bytes: usize,
    sha256: String,
}

#[derive(Serialize)]
struct Timings {
    compute_seconds: f64,
    total_seconds: f64,
}

#[derive(Serialize)]
struct Manifest {
    format_version: u32,
    tool: &'static str,
    version: &'static str,
    subcommand: &'static str,
    config_file: Option<String>,
    /// Resolved parameters, defaults included.
    config: Value,
    /// SHA-256 of the compact resolved config; absent when resolution failed.
    config_hash: Option<String>,
    out: String,
    workers: usize,
    status: &'static str,
    error: Option<String>,
    checks: Vec<Check>,
    outputs: Vec<OutputEntry>,
    timings: Timings,
}

fn read_config(path: &Path) -> Result<Map<String, Value>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    match serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))? {
        Value::Object(m) => Ok(m),
        _ => Err(CliError::Config(format!("{}: top level must be an object", path.display()))),
    }
}

/// Defaults, then the config file, then the flags. Returns the typed
/// parameters, their JSON form and the output directory named by the file.
pub fn resolve<P: Serialize + DeserializeOwned + Default>(
    subcommand: &str,
    file: Option<Map<String, Value>>,
    flags: &impl Serialize,
) -> Result<(P, Value, Option<PathBuf>), CliError> {
    let Value::Object(mut merged) = serde_json::to_value(P::default()).map_err(CliError::config)? else {
        unreachable!("parameter structs serialize to objects")
    };
    let mut out = None;
    for (k, v) in file.into_iter().flatten() {
        match k.as_str() {
            "format_version" if v != Value::from(FORMAT_VERSION) => {
                return Err(CliError::Config(format!("format_version {v} is not supported (expected {FORMAT_VERSION})")));
            }
            "format_version" => {}
            "subcommand" if v != Value::from(subcommand) => {
                return Err(CliError::Config(format!("config is for subcommand {v}, not {subcommand}")));
            }
            "subcommand" => {}
            "out" => out = Some(PathBuf::from(v.as_str().ok_or_else(|| CliError::config("out must be a string"))?)),
            _ => {
                merged.insert(k, v);
            }
        }
    }
    if let Value::Object(f) = serde_json::to_value(flags).map_err(CliError::config)? {
        merged.extend(f);
    }
    let value = Value::Object(merged);
    let params = serde_json::from_value(value.clone()).map_err(CliError::config)?;
    let value = serde_json::to_value(&params).map_err(CliError::config)?;
    Ok((params, value, out))
}

fn configure_workers() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(WORKERS_ENV) else { return Ok(()) };
    let n: usize = raw.trim().parse().map_err(|_| CliError::Config(format!("{WORKERS_ENV}={raw} is not a positive integer")))?;
    if n == 0 {
        return Err(CliError::Config(format!("{WORKERS_ENV} must be positive")));
    }
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(CliError::config)
}

fn prepare<P: Serialize + DeserializeOwned + Default>(
    cli: &Cli,
    flags: &impl Serialize,
    config: &mut Value,
    out_from_file: &mut Option<PathBuf>,
) -> Result<P, CliError> {
    configure_workers()?;
    let file = cli.config.as_deref().map(read_config).transpose()?;
    let (params, value, out) = resolve::<P>(cli.command.name(), file, flags)?;
    *config = value;
    *out_from_file = out;
    Ok(params)
}

fn execute<P: Serialize + DeserializeOwned + Default>(
    cli: &Cli,
    flags: &impl Serialize,
    run: fn(&P) -> Result<Outcome, CliError>,
) -> ExitCode {
    let start = Instant::now();
    let name = cli.command.name();
    let mut config = Value::Null;
    let mut out_from_file = None;
    let prepared = prepare::<P>(cli, flags, &mut config, &mut out_from_file);
    let out = cli.out.clone().or(out_from_file).unwrap_or_else(|| Path::new("out").join(name));
    let compute = Instant::now();
    let result = prepared.and_then(|p| run(&p));
    let compute_seconds = compute.elapsed().as_secs_f64();

    let (mut outcome, error) = match result {
        Ok(o) => (o, None),
        Err(e) => (Outcome::default(), Some(e)),
    };
    let mut outputs = Vec::new();
    let written = std::fs::create_dir_all(&out)
        .map_err(|source| CliError::Io { path: out.clone(), source })
        .and_then(|()| {
            for (file, bytes) in &outcome.artifacts {
                let path = out.join(file);
                std::fs::write(&path, bytes).map_err(|source| CliError::Io { path, source })?;
                outputs.push(OutputEntry { name: file.clone(), bytes: bytes.len(), sha256: sha256_hex(bytes) });
            }
            Ok(())
        });
    let error = error.or(written.err());
    let failed: Vec<String> = outcome.checks.iter().filter(|c| !c.pass).map(|c| c.name.clone()).collect();
    let status = match (&error, failed.is_empty()) {
        (Some(e), _) => e.status(),
        (None, true) => "pass",
        (None, false) => "check_failed",
    };
    let config_hash = (!config.is_null()).then(|| json_compact(&config).map(|b| sha256_hex(&b)).ok()).flatten();
    let manifest = Manifest {
        format_version: FORMAT_VERSION,
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        subcommand: name,
        config_file: cli.config.as_ref().map(|p| p.display().to_string()),
        config,
        config_hash,
        out: out.display().to_string(),
        workers: rayon::current_num_threads(),
        status,
        error: error.as_ref().map(ToString::to_string),
        checks: std::mem::take(&mut outcome.checks),
        outputs,
        timings: Timings { compute_seconds, total_seconds: start.elapsed().as_secs_f64() },
    };
    let manifest_path = out.join("manifest.json");
    if let Err(e) = json_pretty(&manifest).map_err(std::io::Error::other).and_then(|b| std::fs::write(&manifest_path, b)) {
        eprintln!("cannot write {}: {e}", manifest_path.display());
    }

    if let Some(s) = &outcome.stdout {
        println!("{s}");
    }
    for c in &manifest.checks {
        eprintln!("{} {c}", if c.pass { "PASS" } else { "FAIL" });
    }
    match error {
        Some(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
        None if failed.is_empty() => ExitCode::SUCCESS,
        None => {
            for name in failed {
                eprintln!("check failed: {name}");
            }
            ExitCode::from(3)
        }
    }
}

pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    use commands as c;
    match &cli.command {
        Command::Gamma(f) => execute(&cli, f, c::gamma),
        Command::CurveVerify(f) => execute(&cli, f, c::curve_verify),
        Command::LambdaVerify(f) => execute(&cli, f, c::lambda_verify),
        Command::SignReport(f) => execute(&cli, f, c::sign_report),
        Command::PearceyEval(f) => execute(&cli, f, c::pearcey_eval),
        Command::PearceyConsistency(f) => execute(&cli, f, c::pearcey_consistency),
        Command::ParametrixAudit(f) => execute(&cli, f, c::parametrix_audit),
        Command::GlobalCheck(f) => execute(&cli, f, c::global_check),
        Command::Matching(f) => execute(&cli, f, c::matching),
        Command::TacnodeConverge(f) => execute(&cli, f, c::tacnode_converge),
        Command::CriticalConverge(f) => execute(&cli, f, c::critical_converge),
        Command::Phase(f) => execute(&cli, f, c::phase),
        Command::Simulate(f) => execute(&cli, f, c::simulate),
        Command::AllAcceptance(f) => execute(&cli, f, c::all_acceptance),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn obj(v: Value) -> Map<String, Value> {
        match v {
            Value::Object(m) => m,
            _ => panic!("not an object"),
        }
    }

    #[test]
    fn defaults_then_file_then_flags() {
        let file = obj(json!({"a": -4.0, "sigma": 2.0, "out": "here"}));
        let flags = GammaFlags { sigma: Some(0.5), ..Default::default() };
        let (p, v, out): (GammaParams, _, _) = resolve("gamma", Some(file), &flags).unwrap();
        assert_eq!((p.a, p.sigma), (-4.0, 0.5));
        assert_eq!(v["model"], "brownian");
        assert_eq!(out, Some(PathBuf::from("here")));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let file = obj(json!({"a": -4.0, "sigmaa": 2.0}));
        let err = resolve::<GammaParams>("gamma", Some(file), &GammaFlags::default()).unwrap_err();
        assert!(matches!(err, CliError::Config(ref m) if m.contains("sigmaa")), "{err}");
    }

    #[test]
    fn format_version_and_subcommand_are_validated() {
        let bad = obj(json!({"format_version": 2}));
        assert!(resolve::<GammaParams>("gamma", Some(bad), &GammaFlags::default()).is_err());
        let other = obj(json!({"subcommand": "phase"}));
        assert!(resolve::<GammaParams>("gamma", Some(other), &GammaFlags::default()).is_err());
        let ok = obj(json!({"format_version": 1, "subcommand": "gamma"}));
        assert!(resolve::<GammaParams>("gamma", Some(ok), &GammaFlags::default()).is_ok());
    }

    #[test]
    fn renamed_keys_follow_the_flag_names() {
        let file = obj(json!({"T": 2.0}));
        let (p, v, _): (PhaseParams, _, _) = resolve("phase", Some(file), &PhaseFlags::default()).unwrap();
        assert_eq!(p.t, 2.0);
        assert_eq!(v["T"].as_f64(), Some(2.0));
        assert!(resolve::<PhaseParams>("phase", Some(obj(json!({"t": 2.0}))), &PhaseFlags::default()).is_err());
    }

    #[test]
    fn flags_parse_negative_values_and_lists() {
        let cli = Cli::try_parse_from(["x", "matching", "--ladder", "-4,-6", "--models", "two_matrix", "--sigmas", "-1"]).unwrap();
        let Command::Matching(f) = cli.command else { panic!() };
        assert_eq!(f.ladder, Some(vec![-4.0, -6.0]));
        assert_eq!(f.sigmas, Some(vec![-1.0]));
        let cli = Cli::try_parse_from(["x", "phase", "--T", "1", "--tau", "0.6667"]).unwrap();
        let Command::Phase(f) = cli.command else { panic!() };
        assert_eq!((f.t, f.tau), (Some(1.0), Some(0.6667)));
    }
}
