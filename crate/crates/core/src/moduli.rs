//! Moduli-space questions on the family of tori.
//!
//! Along the rhombic line `tau = 1/2 + i b` the half period `1/2` is a
//! degenerate critical point exactly at the roots `b_0` of `e_1 + eta_1` and
//! `b_1` of `e_1 + eta_1 - 2 pi / b`. Off that line, [`scan`] classifies a
//! grid of moduli by the number of critical points.

use std::time::{Duration, Instant};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::critical::find_critical_points;
use crate::error::{Error, Result};
use crate::green::green_eval;
use crate::lattice::{LatticeCoords, Torus};
use crate::theta::{log_theta1_b_derivs, log_theta3_null_b_derivs};
use crate::weier::{invariants, EllipticInvariants};

use std::f64::consts::PI;

pub const BRACKET: (f64, f64) = (0.05, 2.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdReport {
    pub b0: f64,
    pub b1: f64,
    /// `|e_1 + eta_1|` at `b0`.
    pub residual_b0: f64,
    /// `|e_1 + eta_1 - 2 pi / b|` at `b1`.
    pub residual_b1: f64,
    /// Final width of the larger of the two brackets.
    pub bracket_width: f64,
    /// `|e_2 / e_1|^2` at `b1`.
    pub e2_over_e1_sq_at_b1: f64,
    pub tol: f64,
}

fn rhombic_invariants(b: f64) -> Result<EllipticInvariants> {
    Ok(invariants(&Torus::rhombic(b)?))
}

/// `e_1 + eta_1` on `tau = 1/2 + i b`, which is `2 pi G_xx(1/2)`.
pub fn e1_plus_eta1(b: f64) -> Result<f64> {
    let inv = rhombic_invariants(b)?;
    Ok((inv.e1 + inv.eta1).re)
}

/// `e_1 + eta_1 - 2 pi / b`, which is `-2 pi G_yy(1/2)`.
pub fn e1_plus_eta1_minus(b: f64) -> Result<f64> {
    Ok(e1_plus_eta1(b)? - 2.0 * PI / b)
}

/// Root of `f` on `[lo, hi]` by bisection; returns `(root, |f(root)|, width)`.
pub fn bisect<F: Fn(f64) -> Result<f64>>(f: F, lo: f64, hi: f64, tol: f64) -> Result<(f64, f64, f64)> {
    let (mut a, mut c) = (lo, hi);
    let mut fa = f(a)?;
    let fc = f(c)?;
    if fa.signum() == fc.signum() {
        return Err(Error::BracketFailure { lo, hi });
    }
    while c - a > tol {
        let m = 0.5 * (a + c);
        if m <= a || m >= c {
            break;
        }
        let fm = f(m)?;
        if fm == 0.0 {
            return Ok((m, 0.0, c - a));
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            c = m;
        }
    }
    let m = 0.5 * (a + c);
    Ok((m, f(m)?.abs(), c - a))
}

/// `b_0` and `b_1` by bisection on [`BRACKET`], each to width `tol`.
pub fn thresholds(tol: f64) -> Result<ThresholdReport> {
    if !(tol >= 1e-12) {
        return Err(Error::InvalidArgument(format!(
            "threshold tolerance {tol:e} below 1e-12"
        )));
    }
    let (lo, hi) = BRACKET;
    let (b0, r0, w0) = bisect(e1_plus_eta1, lo, hi, tol)?;
    let (b1, r1, w1) = bisect(e1_plus_eta1_minus, lo, hi, tol)?;
    let inv = rhombic_invariants(b1)?;
    Ok(ThresholdReport {
        b0,
        b1,
        residual_b0: r0,
        residual_b1: r1,
        bracket_width: w0.max(w1),
        e2_over_e1_sq_at_b1: (inv.e2 / inv.e1).norm_sqr(),
        tol,
    })
}

/// Checks at one `b` of the two monotonicity statements and their bridges.
#[derive(Debug, Clone, PartialEq)]
pub struct InequalityRow {
    pub b: f64,
    /// `-4 pi (log|theta_2(0)|)_bb`.
    pub theta2_term: f64,
    /// `d(e_1 + eta_1)/db` by finite differences.
    pub de1_eta1_db: f64,
    /// `(log|theta_3(0)|)_b`.
    pub theta3_b: f64,
    /// `(log|theta_3(0)|)_bb`.
    pub theta3_bb: f64,
    /// `e_1 / 2 - eta_1`.
    pub half_e1_minus_eta1: f64,
    /// Signs of `(G_xx, G_yy)` at `1/2`.
    pub sign_pattern: (i8, i8),
}

#[derive(Debug, Clone, PartialEq)]
pub struct InequalityReport {
    pub rows: Vec<InequalityRow>,
    /// `(b, description)` for every failed check.
    pub violations: Vec<(f64, String)>,
    pub bridge1_tol: f64,
    pub bridge2_tol: f64,
}

pub const BRIDGE1_TOL: f64 = 1e-6;
pub const BRIDGE2_TOL: f64 = 1e-9;

/// Fourth-order central difference.
fn derivative(f: impl Fn(f64) -> Result<f64>, x: f64, h: f64) -> Result<f64> {
    let (a, b, c, d) = (f(x - 2.0 * h)?, f(x - h)?, f(x + h)?, f(x + 2.0 * h)?);
    Ok((a - 8.0 * b + 8.0 * c - d) / (12.0 * h))
}

fn sign(x: f64) -> i8 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
}

/// Checks, for every `b` in the grid, that `e_1 + eta_1` increases in `b`
/// via `-4 pi (log|theta_2(0)|)_bb > 0`, and that `(log|theta_3(0)|)_b < 0`
/// with `(log|theta_3(0)|)_bb > 0`, together with the identities tying them
/// to the Weierstrass data. Tolerances are relative to the size of the
/// compared quantities (absolute below magnitude 1).
pub fn verify_fundamental_inequalities(b_grid: &[f64]) -> Result<InequalityReport> {
    let mut rows = Vec::with_capacity(b_grid.len());
    let mut violations = Vec::new();
    for &b in b_grid {
        if !(b > 0.0) {
            return Err(Error::NonPositiveImaginaryPart(b));
        }
        let (_, th2_bb) = log_theta1_b_derivs(0.5, b)?;
        let theta2_term = -4.0 * PI * th2_bb;
        let de = derivative(e1_plus_eta1, b, 1e-3 * b)?;
        let (t3b, t3bb) = log_theta3_null_b_derivs(b)?;
        let inv = rhombic_invariants(b)?;
        let half = (0.5 * inv.e1 - inv.eta1).re;
        let torus = Torus::rhombic(b)?;
        let e = green_eval(Complex64::new(0.5, 0.0), &torus)?;
        let row = InequalityRow {
            b,
            theta2_term,
            de1_eta1_db: de,
            theta3_b: t3b,
            theta3_bb: t3bb,
            half_e1_minus_eta1: half,
            sign_pattern: (sign(e.hessian[0][0]), sign(e.hessian[1][1])),
        };
        if !(theta2_term > 0.0) {
            violations.push((b, format!("-4pi (log|th2|)_bb = {theta2_term:e} is not positive")));
        }
        if (theta2_term - de).abs() > BRIDGE1_TOL * de.abs().max(1.0) {
            violations.push((
                b,
                format!("-4pi (log|th2|)_bb = {theta2_term:e} but d(e1+eta1)/db = {de:e}"),
            ));
        }
        if !(t3b < 0.0) {
            violations.push((b, format!("(log|th3|)_b = {t3b:e} is not negative")));
        }
        if !(t3bb > 0.0) {
            violations.push((b, format!("(log|th3|)_bb = {t3bb:e} is not positive")));
        }
        let lhs = 4.0 * PI * t3b;
        if (lhs - half).abs() > BRIDGE2_TOL * half.abs().max(1.0) {
            violations.push((
                b,
                format!("4pi (log|th3|)_b = {lhs:e} but e1/2 - eta1 = {half:e}"),
            ));
        }
        rows.push(row);
    }
    Ok(InequalityReport {
        rows,
        violations,
        bridge1_tol: BRIDGE1_TOL,
        bridge2_tol: BRIDGE2_TOL,
    })
}

/// `f(b) = (log|theta_1(1/2; 1/2 + i b)|)_b`.
pub fn half_point_log_derivative(b: f64) -> Result<f64> {
    Ok(log_theta1_b_derivs(0.5, b)?.0)
}

/// `|f(1/4b) + 2b + 4b^2 f(b)|`.
pub fn functional_equation_residual(b: f64) -> Result<f64> {
    if !(b > 0.0) {
        return Err(Error::NonPositiveImaginaryPart(b));
    }
    let f = half_point_log_derivative;
    Ok((f(0.25 / b)? + 2.0 * b + 4.0 * b * b * f(b)?).abs())
}

/// `||lambda(tau) - 1| - 1|`, zero exactly on `Re tau = 1/2`.
pub fn lambda_circle_residual(tau: Complex64) -> Result<f64> {
    let inv = invariants(&Torus::new(tau)?);
    Ok(((inv.lambda - 1.0).norm() - 1.0).abs())
}

/// A rectangle `[re0, re1] x [im0, im1]` in the upper half plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Region {
    pub re0: f64,
    pub im0: f64,
    pub re1: f64,
    pub im1: f64,
}

impl Region {
    pub fn new(re0: f64, im0: f64, re1: f64, im1: f64) -> Result<Self> {
        if !(im0 > 0.0 && im1 > im0 && re1 > re0) {
            return Err(Error::InvalidArgument(format!(
                "region [{re0}, {re1}] x [{im0}, {im1}] must be nonempty with Im > 0"
            )));
        }
        Ok(Region { re0, im0, re1, im1 })
    }

    /// Centre of cell `(i, j)`, column `i` and row `j`.
    pub fn cell_center(&self, i: usize, j: usize, nx: usize, ny: usize) -> Complex64 {
        Complex64::new(
            self.re0 + (i as f64 + 0.5) * (self.re1 - self.re0) / nx as f64,
            self.im0 + (j as f64 + 0.5) * (self.im1 - self.im0) / ny as f64,
        )
    }

    /// Column and row of the cell containing `tau`, if inside.
    pub fn cell_of(&self, tau: Complex64, nx: usize, ny: usize) -> Option<(usize, usize)> {
        let u = (tau.re - self.re0) / (self.re1 - self.re0);
        let v = (tau.im - self.im0) / (self.im1 - self.im0);
        if !(0.0..1.0).contains(&u) || !(0.0..1.0).contains(&v) {
            return None;
        }
        Some(((u * nx as f64) as usize, (v * ny as f64) as usize))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanCell {
    pub tau: Complex64,
    /// 3 or 5; `None` if classification failed.
    pub count: Option<usize>,
    pub extra_point: Option<LatticeCoords>,
    pub error: Option<String>,
    pub wall_clock: Duration,
}

/// An edge between two neighbouring cells whose counts differ.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryEdge {
    pub cells: [(usize, usize); 2],
    pub midpoint: Complex64,
    /// Index (1-based) of the half period whose Hessian is closest to
    /// singular at the midpoint.
    pub degenerate_half_period: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanReport {
    pub region: Region,
    pub nx: usize,
    pub ny: usize,
    /// Row-major: `cells[j * nx + i]`.
    pub cells: Vec<ScanCell>,
    pub boundary: Vec<BoundaryEdge>,
}

impl ScanReport {
    pub fn cell(&self, i: usize, j: usize) -> &ScanCell {
        &self.cells[j * self.nx + i]
    }
}

pub const MAX_SCAN_GRID: usize = 512;
pub const SCAN_TOL: f64 = 1e-10;

fn classify_cell(tau: Complex64, tol: f64) -> ScanCell {
    let start = Instant::now();
    let outcome = Torus::new(tau).and_then(|t| find_critical_points(&t, tol));
    let wall_clock = start.elapsed();
    match outcome {
        Ok(set) => ScanCell {
            tau,
            count: Some(set.total_count),
            extra_point: set.extra().map(|p| p.coords),
            error: None,
            wall_clock,
        },
        Err(e) => ScanCell {
            tau,
            count: None,
            extra_point: None,
            error: Some(e.to_string()),
            wall_clock,
        },
    }
}

fn most_degenerate_half_period(tau: Complex64) -> usize {
    let Ok(torus) = Torus::new(tau) else {
        return 0;
    };
    let mut best = (f64::INFINITY, 0);
    for (k, h) in torus.half_periods().iter().enumerate() {
        if let Ok(e) = green_eval(*h, &torus) {
            let d = e.det_hessian.abs();
            if d < best.0 {
                best = (d, k + 1);
            }
        }
    }
    best.1
}

/// Classifies every cell centre of an `nx x ny` grid over `region`.
///
/// Rows are processed in parallel on the current rayon pool; the output is
/// row-major and independent of scheduling.
pub fn scan(region: Region, nx: usize, ny: usize, tol: f64) -> Result<ScanReport> {
    if nx == 0 || ny == 0 || nx > MAX_SCAN_GRID || ny > MAX_SCAN_GRID {
        return Err(Error::InvalidArgument(format!(
            "scan grid {nx}x{ny} outside 1..={MAX_SCAN_GRID}"
        )));
    }
    let rows: Vec<Vec<ScanCell>> = (0..ny)
        .into_par_iter()
        .map(|j| {
            (0..nx)
                .map(|i| classify_cell(region.cell_center(i, j, nx, ny), tol))
                .collect()
        })
        .collect();
    let cells: Vec<ScanCell> = rows.into_iter().flatten().collect();
    let mut boundary = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            let here = &cells[j * nx + i];
            let mut neighbours = Vec::with_capacity(2);
            if i + 1 < nx {
                neighbours.push((i + 1, j));
            }
            if j + 1 < ny {
                neighbours.push((i, j + 1));
            }
            for (a, c) in neighbours {
                let there = &cells[c * nx + a];
                if let (Some(x), Some(y)) = (here.count, there.count) {
                    if x != y {
                        let midpoint = (here.tau + there.tau) / 2.0;
                        boundary.push(BoundaryEdge {
                            cells: [(i, j), (a, c)],
                            midpoint,
                            degenerate_half_period: most_degenerate_half_period(midpoint),
                        });
                    }
                }
            }
        }
    }
    Ok(ScanReport {
        region,
        nx,
        ny,
        cells,
        boundary,
    })
}

/// Runs `f` on a rayon pool sized by `TORUS_GREEN_THREADS` (0 or unset: auto).
pub fn with_scan_pool<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    let threads = std::env::var("TORUS_GREEN_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .unwrap_or(0);
    match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}
