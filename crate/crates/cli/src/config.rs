//! Run configuration and the value parsers behind the command-line flags.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use torus_green::Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CommandKind {
    Eval,
    Critical,
    Scan,
    Thresholds,
    Inequalities,
    Mfe,
    Selftest,
}

impl CommandKind {
    pub fn name(&self) -> &'static str {
        match self {
            CommandKind::Eval => "eval",
            CommandKind::Critical => "critical",
            CommandKind::Scan => "scan",
            CommandKind::Thresholds => "thresholds",
            CommandKind::Inequalities => "inequalities",
            CommandKind::Mfe => "mfe",
            CommandKind::Selftest => "selftest",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
pub enum Rho {
    #[serde(rename = "4pi")]
    #[value(name = "4pi")]
    FourPi,
    #[serde(rename = "8pi")]
    #[value(name = "8pi")]
    EightPi,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Pair {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for Pair {
    fn from(z: Complex64) -> Self {
        Pair { re: z.re, im: z.im }
    }
}

impl From<Pair> for Complex64 {
    fn from(p: Pair) -> Self {
        Complex64::new(p.re, p.im)
    }
}

/// Every tolerance a command consults; unused entries are `None`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    pub solver: Option<f64>,
    pub tie: Option<f64>,
    pub degeneracy: Option<f64>,
    pub residual: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: CommandKind,
    pub tau: Option<Pair>,
    pub z: Option<Pair>,
    pub b: Vec<f64>,
    pub tolerances: Tolerances,
    pub grid: Option<(usize, usize)>,
    pub region: Option<[f64; 4]>,
    pub exclusion_radius: Option<f64>,
    pub lambda: Option<f64>,
    pub rho: Option<Rho>,
    pub output_format: OutputFormat,
    pub output_path: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(command: CommandKind) -> Self {
        RunConfig {
            command,
            tau: None,
            z: None,
            b: Vec::new(),
            tolerances: Tolerances::default(),
            grid: None,
            region: None,
            exclusion_radius: None,
            lambda: None,
            rho: None,
            output_format: OutputFormat::Json,
            output_path: None,
        }
    }
}

/// Parses `a+bi`, `a-bi`, `bi`, `a`, `i`, `-i` with optional exponents;
/// `j` is accepted for `i`.
pub fn parse_complex(s: &str) -> Result<Complex64, String> {
    let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || format!("cannot parse {s:?} as a complex number a+bi");
    if s.is_empty() {
        return Err(bad());
    }
    let num = |t: &str| -> Result<f64, String> {
        let x: f64 = t.parse().map_err(|_| bad())?;
        if x.is_finite() {
            Ok(x)
        } else {
            Err(bad())
        }
    };
    let Some(body) = s.strip_suffix('i').or_else(|| s.strip_suffix('j')) else {
        return Ok(Complex64::new(num(&s)?, 0.0));
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (num(&body[..k])?, &body[k..]),
        None => (0.0, body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        t => num(t)?,
    };
    Ok(Complex64::new(re, im))
}

/// `NXxNY`, or a single `N` for a square grid.
pub fn parse_grid(s: &str) -> Result<(usize, usize), String> {
    let bad = || format!("grid must look like NXxNY, got {s:?}");
    let parts: Vec<&str> = s.split(['x', 'X']).collect();
    let n: Vec<usize> = parts
        .iter()
        .map(|p| p.trim().parse::<usize>().map_err(|_| bad()))
        .collect::<Result<_, _>>()?;
    match n[..] {
        [k] if k > 0 => Ok((k, k)),
        [a, b] if a > 0 && b > 0 => Ok((a, b)),
        _ => Err(bad()),
    }
}

/// `re0,im0,re1,im1`.
pub fn parse_region(s: &str) -> Result<[f64; 4], String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| format!("region must be re0,im0,re1,im1, got {s:?}"))?;
    v.try_into()
        .map_err(|_| format!("region needs exactly four numbers, got {s:?}"))
}
