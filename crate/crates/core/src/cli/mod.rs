//! Manifest-driven command-line front end.
//!
//! Exit codes: 0 when every requested check passes, 1 when a check fails or
//! errors (the report is still written), 2 for unreadable or invalid
//! manifests and bad flags.

pub mod checks;
pub mod manifest;
pub mod report;

use std::ffi::OsString;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::grid::GridSpec;
use crate::invariants::{certify, Verdict};
use checks::{run_check, RunSettings};
use manifest::{resolve, Manifest, ManifestError, Resolved};
use report::{grid_csv, Certificate, CheckOutcome, Residual, RunReport, Status};

pub const SEED_VAR: &str = "FOLIA_SEED";
pub const DEFAULT_SEED: u64 = 42;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_MANIFEST: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "folia", version, about = "Non-holomorphy and hyperbolicity checks for foliations by parabolic curves")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse the manifest and validate the model.
    Validate(RunArgs),
    /// Dump ω and Γ over the grid as CSV.
    Eval(RunArgs),
    /// Sample Γ over the grid and issue a verdict.
    Certify(RunArgs),
    /// Run the checks listed in the manifest.
    Check(RunArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Validate(_) => "validate",
            Command::Eval(_) => "eval",
            Command::Certify(_) => "certify",
            Command::Check(_) => "check",
        }
    }

    fn args(&self) -> &RunArgs {
        match self {
            Command::Validate(a) | Command::Eval(a) | Command::Certify(a) | Command::Check(a) => a,
        }
    }
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Path to the JSON manifest.
    pub manifest: PathBuf,
    /// Grid size as NxM (base points x fiber points).
    #[arg(long, value_parser = parse_grid)]
    pub grid: Option<GridSpec>,
    /// Override for the identity tolerances.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u8).range(3..=4))]
    pub jet_order: u8,
    /// Worker threads for grid evaluation.
    #[arg(long, value_parser = clap::value_parser!(u16).range(1..))]
    pub threads: Option<u16>,
    /// Report path; overrides the manifest.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// CSV path for eval; overrides the manifest.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

pub fn parse_grid(s: &str) -> Result<GridSpec, String> {
    let (n, m) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected NxM, got \"{s}\""))?;
    let n: usize = n.trim().parse().map_err(|e| format!("bad N in \"{s}\": {e}"))?;
    let m: usize = m.trim().parse().map_err(|e| format!("bad M in \"{s}\": {e}"))?;
    if n == 0 || m == 0 {
        return Err("grid dimensions must be positive".into());
    }
    Ok(GridSpec { base: n, fiber: m })
}

fn seed_from_env() -> Result<u64, ManifestError> {
    match std::env::var(SEED_VAR) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| ManifestError::Invalid(format!("{SEED_VAR}={v} is not an unsigned integer"))),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

/// Parses arguments and runs; returns the process exit code.
pub fn main() -> i32 {
    run(std::env::args_os())
}

pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_MANIFEST } else { EXIT_OK };
        }
    };
    execute(&cli.command)
}

pub fn execute(command: &Command) -> i32 {
    let args = command.args();
    match args.threads {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n as usize).build() {
            Ok(pool) => pool.install(|| dispatch(command)),
            Err(e) => {
                eprintln!("error: cannot start {n} threads: {e}");
                EXIT_MANIFEST
            }
        },
        None => dispatch(command),
    }
}

struct Loaded {
    manifest: Manifest,
    bytes: Vec<u8>,
    dir: PathBuf,
    seed: u64,
}

fn load(path: &Path) -> Result<Loaded, ManifestError> {
    let bytes = fs::read(path).map_err(|source| ManifestError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let text = String::from_utf8_lossy(&bytes);
    let manifest = Manifest::from_json(&text)?;
    let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok(Loaded {
        manifest,
        bytes,
        dir,
        seed: seed_from_env()?,
    })
}

fn dispatch(command: &Command) -> i32 {
    let args = command.args();
    let loaded = match load(&args.manifest) {
        Ok(l) => l,
        Err(e) => {
            eprintln!("error: {e}");
            return if matches!(command, Command::Validate(_)) {
                EXIT_CHECK_FAILED
            } else {
                EXIT_MANIFEST
            };
        }
    };
    let mut report = RunReport::new(command.name(), loaded.manifest.model.kind(), &loaded.bytes, loaded.seed);
    let resolved = resolve(&loaded.manifest.model, args.grid);
    let report_path = args
        .report
        .clone()
        .or_else(|| loaded.manifest.output.report.as_ref().map(|p| loaded.dir.join(p)));

    let resolved = match (command, resolved) {
        (Command::Validate(_), Err(e)) => {
            report.checks.push(CheckOutcome::error("model", e.to_string()));
            report.finish();
            eprintln!("error: {e}");
            return emit_report(&report, report_path.as_deref(), true).unwrap_or(EXIT_MANIFEST).max(EXIT_CHECK_FAILED);
        }
        (_, Err(e)) => {
            eprintln!("error: {e}");
            return EXIT_MANIFEST;
        }
        (_, Ok(r)) => r,
    };

    let settings = RunSettings {
        jet_order: args.jet_order,
        tol: args.tol,
        seed: loaded.seed,
    };
    match command {
        Command::Validate(_) => {
            report.checks.push(CheckOutcome::judged("model", Default::default()));
        }
        Command::Check(_) => {
            if loaded.manifest.checks.is_empty() {
                eprintln!("error: the manifest requests no checks");
                return EXIT_MANIFEST;
            }
            for (i, spec) in loaded.manifest.checks.iter().enumerate() {
                report.checks.push(run_check(spec, i, &resolved, &settings));
            }
        }
        Command::Certify(_) | Command::Eval(_) => {
            let Resolved::Model(model) = &resolved else {
                eprintln!("error: {} needs a model in the cylinder class, not a leafwise map", command.name());
                return EXIT_MANIFEST;
            };
            let tensor = match certify(model, settings.jet_order) {
                Ok(t) => t,
                Err(e) => {
                    report.checks.push(CheckOutcome::error("certify", e.to_string()));
                    report.finish();
                    return emit_report(&report, report_path.as_deref(), true).unwrap_or(EXIT_MANIFEST).max(EXIT_CHECK_FAILED);
                }
            };
            if let Command::Eval(_) = command {
                let csv_path = args
                    .csv
                    .clone()
                    .or_else(|| loaded.manifest.output.csv.as_ref().map(|p| loaded.dir.join(p)));
                if let Err(e) = write_or_print(csv_path.as_deref(), &grid_csv(&tensor.points)) {
                    eprintln!("error: {e}");
                    return EXIT_MANIFEST;
                }
                for p in &tensor.excluded {
                    eprintln!("excluded ({}, {}) at x = {}, y = {}: {}", p.row, p.col, p.x, p.y, p.reason);
                }
                report.checks.push(CheckOutcome::judged("eval", Default::default()));
            } else {
                let mut residuals = std::collections::BTreeMap::new();
                residuals.insert("max_gamma".to_string(), Residual::info(tensor.summary.max_gamma));
                let mut outcome = CheckOutcome::judged("certify", residuals).with_message(tensor.verdict.to_string());
                if tensor.verdict == Verdict::Inconclusive {
                    outcome.status = Status::Fail;
                }
                report.checks.push(outcome);
                report.certificate = Some(Certificate {
                    verdict: tensor.verdict,
                    gamma_threshold: tensor.gamma_threshold,
                    summary: tensor.summary.clone(),
                    evaluated_points: tensor.points.len(),
                });
            }
            report.excluded = tensor.excluded;
        }
    }
    report.finish();
    let to_stdout = !matches!(command, Command::Eval(_));
    match emit_report(&report, report_path.as_deref(), to_stdout) {
        Ok(code) => code,
        Err(code) => code,
    }
}

/// Writes the report and returns the exit code it implies.
fn emit_report(report: &RunReport, path: Option<&Path>, to_stdout: bool) -> Result<i32, i32> {
    let json = report.to_json();
    match path {
        Some(p) => write_or_print(Some(p), &json).map_err(|e| {
            eprintln!("error: {e}");
            EXIT_MANIFEST
        })?,
        None if to_stdout => write_or_print(None, &json).map_err(|_| EXIT_MANIFEST)?,
        None => {}
    }
    for c in report.checks.iter().filter(|c| c.status != Status::Pass) {
        eprintln!(
            "{}: {}{}",
            c.name,
            match c.status {
                Status::Fail => "fail",
                _ => "error",
            },
            c.message.as_deref().map(|m| format!(" ({m})")).unwrap_or_default()
        );
    }
    Ok(if report.passed { EXIT_OK } else { EXIT_CHECK_FAILED })
}

fn write_or_print(path: Option<&Path>, text: &str) -> Result<(), String> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| format!("cannot write {}: {e}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).and_then(|_| out.flush()).map_err(|e| e.to_string())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_flag_parses() {
        assert_eq!(parse_grid("21x21"), Ok(GridSpec { base: 21, fiber: 21 }));
        assert_eq!(parse_grid("5X7"), Ok(GridSpec { base: 5, fiber: 7 }));
        assert!(parse_grid("0x3").is_err());
        assert!(parse_grid("21").is_err());
    }
}
