//! `torus-green`: evaluation, critical points, moduli scans, inequality
//! checks and mean field solutions from the command line.
//!
//! Exit codes: 0 success, 2 domain error, 3 internal consistency violation
//! (the report is still written when one exists), 64 usage error, 74 I/O
//! failure.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, CommandFactory, Parser, Subcommand};
use serde_json::{json, Value};
use torus_green::critical::{DEFAULT_DEGENERACY_EPS, EXCLUSION_RADIUS, TIE_TOL};
use torus_green::moduli::SCAN_TOL;
use torus_green::{Complex64, Error};

pub mod commands;
pub mod config;
pub mod output;
pub mod selftest;

pub use config::{parse_complex, parse_grid, parse_region, CommandKind, OutputFormat, Rho, RunConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DOMAIN: i32 = 2;
pub const EXIT_CONSISTENCY: i32 = 3;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_IO: i32 = 74;

pub const DEFAULT_REGION: &str = "-0.0125,0.2,0.9875,2.0";

#[derive(Parser, Debug)]
#[command(name = "torus-green", version, about = "Green functions of flat tori", arg_required_else_help = true)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args, Debug, Clone)]
struct OutArgs {
    /// Report format; csv is available for scan only
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    format: OutputFormat,
    /// Write the report here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Green function, Weierstrass data and theta at one point
    Eval {
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        tau: Complex64,
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        z: Option<Complex64>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// All critical points of G with Morse classes and the half-period comparison
    Critical {
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        tau: Complex64,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long, default_value_t = EXCLUSION_RADIUS)]
        exclusion_radius: f64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Critical-point counts over a grid of moduli
    Scan {
        #[arg(long, value_parser = parse_region, allow_hyphen_values = true, default_value = DEFAULT_REGION)]
        region: [f64; 4],
        #[arg(long, value_parser = parse_grid, default_value = "40x40")]
        grid: (usize, usize),
        #[arg(long, default_value_t = SCAN_TOL)]
        tol: f64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Degeneracy thresholds b0 and b1 on Re tau = 1/2
    Thresholds {
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Theta inequalities along Re tau = 1/2 and the functional equation
    Inequalities {
        /// Comma-separated values of Im tau; defaults to 0.1, 0.15, ..., 3.0
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        b: Vec<f64>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Explicit mean field solution and its verification
    Mfe {
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        tau: Complex64,
        #[arg(long, value_enum)]
        rho: Rho,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        lambda: f64,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        /// Verification grid; must be square
        #[arg(long, value_parser = parse_grid, default_value = "64x64")]
        grid: (usize, usize),
        #[arg(long, default_value_t = EXCLUSION_RADIUS)]
        exclusion_radius: f64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Invariant suites of every module
    Selftest {
        #[command(flatten)]
        out: OutArgs,
    },
}

/// Why a command stopped.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Domain(String),
    Consistency(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_consistency_violation() {
            Failure::Consistency(e.to_string())
        } else {
            Failure::Domain(e.to_string())
        }
    }
}

/// A finished report; `violation` turns a written report into exit 3.
pub struct Outcome {
    pub results: Value,
    pub diagnostics: Value,
    pub csv: Option<String>,
    pub violation: Option<String>,
}

impl Outcome {
    pub fn ok(results: Value, diagnostics: Value) -> Self {
        Outcome { results, diagnostics, csv: None, violation: None }
    }
}

fn build_config(cmd: &Cmd) -> (RunConfig, OutArgs) {
    use CommandKind as K;
    let (kind, out) = match cmd {
        Cmd::Eval { out, .. } => (K::Eval, out),
        Cmd::Critical { out, .. } => (K::Critical, out),
        Cmd::Scan { out, .. } => (K::Scan, out),
        Cmd::Thresholds { out, .. } => (K::Thresholds, out),
        Cmd::Inequalities { out, .. } => (K::Inequalities, out),
        Cmd::Mfe { out, .. } => (K::Mfe, out),
        Cmd::Selftest { out } => (K::Selftest, out),
    };
    let mut cfg = RunConfig::new(kind);
    cfg.output_format = out.format;
    cfg.output_path = out.out.clone();
    match cmd {
        Cmd::Eval { tau, z, .. } => {
            cfg.tau = Some((*tau).into());
            cfg.z = z.map(Into::into);
        }
        Cmd::Critical { tau, tol, exclusion_radius, .. } => {
            cfg.tau = Some((*tau).into());
            cfg.tolerances.solver = Some(*tol);
            cfg.tolerances.tie = Some(TIE_TOL);
            cfg.tolerances.degeneracy = Some(DEFAULT_DEGENERACY_EPS);
            cfg.exclusion_radius = Some(*exclusion_radius);
        }
        Cmd::Scan { region, grid, tol, .. } => {
            cfg.region = Some(*region);
            cfg.grid = Some(*grid);
            cfg.tolerances.solver = Some(*tol);
        }
        Cmd::Thresholds { tol, .. } => cfg.tolerances.solver = Some(*tol),
        Cmd::Inequalities { b, .. } => {
            cfg.b = if b.is_empty() { commands::default_b_grid() } else { b.clone() };
        }
        Cmd::Mfe { tau, rho, lambda, tol, grid, exclusion_radius, .. } => {
            cfg.tau = Some((*tau).into());
            cfg.rho = Some(*rho);
            cfg.lambda = Some(*lambda);
            cfg.tolerances.solver = Some(*tol);
            cfg.tolerances.residual = Some(commands::MFE_RESIDUAL_TOL);
            cfg.grid = Some(*grid);
            cfg.exclusion_radius = Some(*exclusion_radius);
        }
        Cmd::Selftest { .. } => {}
    }
    (cfg, out.clone())
}

/// Runs the command described by `cfg` and assembles the full report.
pub fn execute(cfg: &RunConfig) -> Result<(Value, Outcome), Failure> {
    if cfg.output_format == OutputFormat::Csv && cfg.command != CommandKind::Scan {
        return Err(Failure::Usage(format!("--format csv is only available for scan, not {}", cfg.command.name())));
    }
    let outcome = commands::dispatch(cfg)?;
    let mut inputs = cfg.clone();
    inputs.output_path = None;
    let report = json!({
        "schema_version": output::SCHEMA_VERSION,
        "command": cfg.command.name(),
        "inputs": serde_json::to_value(&inputs).expect("config serializes"),
        "results": outcome.results,
        "diagnostics": outcome.diagnostics,
    });
    Ok((report, outcome))
}

/// Parses `argv` (program name first), runs the command and returns the
/// process exit code. Reports go to `out` unless `--out` names a file.
pub fn run_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{}", e.render());
                    EXIT_OK
                }
                ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
                    let _ = write!(err, "{}", e.render());
                    EXIT_USAGE
                }
                _ => {
                    let _ = writeln!(err, "{}", e.render());
                    let _ = write!(err, "{}", Cli::command().render_help());
                    EXIT_USAGE
                }
            };
        }
    };
    let (cfg, out_args) = build_config(&cli.command);
    let (report, outcome) = match execute(&cfg) {
        Ok(r) => r,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}\n");
            let _ = write!(err, "{}", Cli::command().render_help());
            return EXIT_USAGE;
        }
        Err(Failure::Domain(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            return EXIT_DOMAIN;
        }
        Err(Failure::Consistency(msg)) => {
            let _ = writeln!(err, "consistency violation: {msg}");
            return EXIT_CONSISTENCY;
        }
    };
    let text = match (cfg.output_format, &outcome.csv) {
        (OutputFormat::Csv, Some(csv)) => csv.clone(),
        _ => output::to_canonical_json(&report),
    };
    let written = match &out_args.out {
        Some(path) => std::fs::write(path, text.as_bytes()),
        None => out.write_all(text.as_bytes()),
    };
    if let Err(e) = written {
        let _ = writeln!(err, "error: cannot write report: {e}");
        return EXIT_IO;
    }
    match outcome.violation {
        Some(msg) => {
            let _ = writeln!(err, "consistency violation: {msg}");
            EXIT_CONSISTENCY
        }
        None => EXIT_OK,
    }
}

pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}
