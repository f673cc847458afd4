//! Critical points of the Green function.
//!
//! A point `z = t + s tau` is critical iff `zeta(z) = t eta_1 + s eta_2`. The
//! three half periods always are; any further critical points come as a pair
//! `±z_0`, so a torus has either three or five.

use std::cmp::Ordering;
use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::green::{green_eval, green_rel, GreenEval};
use crate::lattice::{wrap_point, LatticeCoords, Torus};
use crate::weier::Weierstrass;

/// Seeds closer than this to a lattice point are skipped.
pub const EXCLUSION_RADIUS: f64 = 0.05;
/// Two roots closer than this in `(t, s)` (mod the lattice and `z -> -z`) are one.
pub const DEDUP_TOL: f64 = 1e-8;
pub const COARSE_GRID: usize = 24;
pub const FINE_GRID: usize = 48;
/// Default relative threshold on `det D^2 G` (in units of `1/b^2`) for
/// calling a critical point degenerate.
pub const DEFAULT_DEGENERACY_EPS: f64 = 1e-8;

const MAX_NEWTON: usize = 100;
const MAX_HALVINGS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CriticalKind {
    HalfPeriod1,
    HalfPeriod2,
    HalfPeriod3,
    ExtraPair,
}

impl CriticalKind {
    pub fn name(&self) -> &'static str {
        match self {
            CriticalKind::HalfPeriod1 => "half_period_1",
            CriticalKind::HalfPeriod2 => "half_period_2",
            CriticalKind::HalfPeriod3 => "half_period_3",
            CriticalKind::ExtraPair => "extra_pair",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MorseClass {
    Min,
    Saddle,
    Degenerate,
}

impl MorseClass {
    pub fn name(&self) -> &'static str {
        match self {
            MorseClass::Min => "min",
            MorseClass::Saddle => "saddle",
            MorseClass::Degenerate => "degenerate",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalPoint {
    pub coords: LatticeCoords,
    pub z: Complex64,
    pub kind: CriticalKind,
    pub morse: MorseClass,
    pub hessian: [[f64; 2]; 2],
    pub det_hessian: f64,
    pub g_rel: f64,
    pub grad_norm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriticalSet {
    /// Half periods in order, then the extra representative if any.
    pub points: Vec<CriticalPoint>,
    /// Counting both members of the extra pair.
    pub total_count: usize,
    /// Seeds whose Newton run did not reach the tolerance.
    pub failed_seeds: usize,
    /// Seed grid size that produced the result (24 or 48).
    pub grid: usize,
}

impl CriticalSet {
    pub fn extra(&self) -> Option<&CriticalPoint> {
        self.points.iter().find(|p| p.kind == CriticalKind::ExtraPair)
    }

    pub fn half_period(&self, k: usize) -> &CriticalPoint {
        &self.points[k]
    }
}

fn grad_norm(e: &GreenEval) -> f64 {
    e.grad[0].hypot(e.grad[1])
}

/// Damped Newton on `grad G` starting at `z`. Returns the final point and
/// its evaluation, or `None` if the iteration hit a lattice point.
fn newton(z: Complex64, torus: &Torus) -> Option<(Complex64, GreenEval)> {
    let mut z = z;
    let mut e = green_eval(z, torus).ok()?;
    let mut gn = grad_norm(&e);
    let mut stalled = 0;
    // iterate to the rounding floor rather than to `tol`: near a degenerate
    // root a small gradient still leaves the position off by far more than
    // the dedup tolerance
    for _ in 0..MAX_NEWTON {
        if gn == 0.0 {
            break;
        }
        let [[a, b], [_, d]] = e.hessian;
        let det = a * d - b * b;
        if det == 0.0 || !det.is_finite() {
            return Some((z, e));
        }
        let dx = -(d * e.grad[0] - b * e.grad[1]) / det;
        let dy = -(a * e.grad[1] - b * e.grad[0]) / det;
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..=MAX_HALVINGS {
            let cand = z + Complex64::new(step * dx, step * dy);
            if let Ok(ce) = green_eval(cand, torus) {
                let cn = grad_norm(&ce);
                if cn < gn {
                    accepted = Some((cand, ce, cn));
                    break;
                }
            }
            step *= 0.5;
        }
        match accepted {
            Some((cand, ce, cn)) => {
                let moved = (cand - z).norm();
                z = cand;
                e = ce;
                gn = cn;
                if moved < 1e-15 * (1.0 + z.norm()) {
                    stalled += 1;
                    if stalled > 2 {
                        break;
                    }
                }
            }
            None => break,
        }
    }
    Some((z, e))
}

/// Canonical representative of `±coords`: `s > 0`, or `t > 0` when `s = 0`
/// (both taken after wrapping into `[-1/2, 1/2)`).
fn sign_representative(c: LatticeCoords) -> LatticeCoords {
    let w = c.wrapped();
    let n = LatticeCoords::new(-w.t, -w.s).wrapped();
    let key = |p: &LatticeCoords| (p.s > DEDUP_TOL, p.s.abs() <= DEDUP_TOL && p.t > 0.0);
    let (kw, kn) = (key(&w), key(&n));
    if kw.0 || (!kn.0 && kw.1) {
        w
    } else if kn.0 || kn.1 {
        n
    } else {
        w
    }
}

fn half_period_coords() -> [LatticeCoords; 3] {
    [
        LatticeCoords::new(0.5, 0.0),
        LatticeCoords::new(0.0, 0.5),
        LatticeCoords::new(0.5, 0.5),
    ]
}

fn half_period_kind(k: usize) -> CriticalKind {
    [
        CriticalKind::HalfPeriod1,
        CriticalKind::HalfPeriod2,
        CriticalKind::HalfPeriod3,
    ][k]
}

/// Morse class from the Hessian, with `eps` scaled by `1/b^2`.
pub fn classify(point: &CriticalPoint, degeneracy_eps: f64, torus: &Torus) -> MorseClass {
    morse_from(point.hessian, point.det_hessian, degeneracy_eps, torus.b())
}

fn morse_from(h: [[f64; 2]; 2], det: f64, eps: f64, b: f64) -> MorseClass {
    let scale = eps / (b * b);
    if det > scale && h[0][0] > 0.0 {
        MorseClass::Min
    } else if det < -scale {
        MorseClass::Saddle
    } else {
        MorseClass::Degenerate
    }
}

fn make_point(
    z: Complex64,
    e: &GreenEval,
    kind: CriticalKind,
    coords: LatticeCoords,
    torus: &Torus,
) -> CriticalPoint {
    CriticalPoint {
        coords,
        z,
        kind,
        morse: morse_from(e.hessian, e.det_hessian, DEFAULT_DEGENERACY_EPS, torus.b()),
        hessian: e.hessian,
        det_hessian: e.det_hessian,
        g_rel: e.value_rel,
        grad_norm: grad_norm(e),
    }
}

/// Smallest absolute eigenvalue of a symmetric 2x2 matrix.
fn min_abs_eigenvalue(h: &[[f64; 2]; 2]) -> f64 {
    let (a, b, d) = (h[0][0], h[0][1], h[1][1]);
    let mid = 0.5 * (a + d);
    let rad = (0.25 * (a - d) * (a - d) + b * b).sqrt();
    (mid - rad).abs().min((mid + rad).abs())
}

/// Whether two Newton limits are the same root (mod the lattice and sign).
///
/// Besides the fixed `(t, s)` tolerance, points are merged when they lie
/// within the distance a gradient at the rounding floor can move a root of
/// the Hessian at `a`. Near a degenerate half period this radius grows
/// like `1/lambda_min`, while a genuine pair split off from it sits at a
/// distance of order `sqrt(lambda_min)`.
fn same_root(
    a: &LatticeCoords,
    ea: &GreenEval,
    b: &LatticeCoords,
    eb: &GreenEval,
    torus: &Torus,
) -> bool {
    if a.distance_mod_sign(b) < DEDUP_TOL {
        return true;
    }
    let floor = 10.0 * grad_norm(ea).max(grad_norm(eb)).max(1e-14);
    let radius = floor / min_abs_eigenvalue(&ea.hessian).max(1e-300);
    let dist = |o: LatticeCoords| {
        let d = LatticeCoords::new(a.t - o.t, a.s - o.s).wrapped();
        d.to_point(torus).norm()
    };
    let d = dist(*b).min(dist(LatticeCoords::new(-b.t, -b.s)));
    d < radius.min(1e-3)
}

struct Sweep {
    /// Distinct roots, sorted, as canonical sign representatives.
    roots: Vec<(LatticeCoords, Complex64, GreenEval)>,
    failed: usize,
}

fn sweep(torus: &Torus, tol: f64, n: usize, exclusion: f64) -> Sweep {
    let seeds: Vec<Complex64> = (0..n * n)
        .map(|k| {
            let (i, j) = (k / n, k % n);
            let t = (j as f64 + 0.5) / n as f64 - 0.5;
            let s = (i as f64 + 0.5) / n as f64 - 0.5;
            torus.point(t, s)
        })
        .filter(|&z| torus.distance_to_lattice(z) >= exclusion)
        .collect();
    let results: Vec<Option<(Complex64, GreenEval)>> = seeds
        .par_iter()
        .map(|&z| newton(z, torus).filter(|(_, e)| grad_norm(e) < tol))
        .collect();
    let failed = results.iter().filter(|r| r.is_none()).count();
    let mut found: Vec<(LatticeCoords, Complex64, GreenEval)> = results
        .into_iter()
        .flatten()
        .map(|(z, e)| {
            let c = sign_representative(wrap_point(z, torus));
            (c, c.to_point(torus), e)
        })
        .collect();
    found.sort_by(|a, b| {
        (a.0.t, a.0.s)
            .partial_cmp(&(b.0.t, b.0.s))
            .unwrap_or(Ordering::Equal)
    });
    let mut roots: Vec<(LatticeCoords, Complex64, GreenEval)> = Vec::new();
    for f in found {
        if !roots
            .iter()
            .any(|r| same_root(&r.0, &r.2, &f.0, &f.2, torus))
        {
            roots.push(f);
        }
    }
    Sweep { roots, failed }
}

fn assemble(torus: &Torus, sw: &Sweep, grid: usize) -> Result<CriticalSet> {
    let hp = half_period_coords();
    let mut points = Vec::with_capacity(4);
    for (k, c) in hp.iter().enumerate() {
        let z = c.to_point(torus);
        let e = green_eval(z, torus)?;
        points.push(make_point(z, &e, half_period_kind(k), *c, torus));
    }
    let extras: Vec<_> = sw
        .roots
        .iter()
        .filter(|r| {
            hp.iter().zip(&points).all(|(h, p)| {
                let e = GreenEval {
                    value_rel: p.g_rel,
                    grad: [p.grad_norm, 0.0],
                    hessian: p.hessian,
                    det_hessian: p.det_hessian,
                };
                !same_root(h, &e, &r.0, &r.2, torus)
            })
        })
        .collect();
    if extras.len() > 1 {
        return Err(Error::CountViolation {
            found: 3 + 2 * extras.len(),
        });
    }
    if let Some((c, _, _)) = extras.first() {
        let z = c.to_point(torus);
        let e = green_eval(z, torus)?;
        points.push(make_point(z, &e, CriticalKind::ExtraPair, *c, torus));
    }
    let total_count = 3 + 2 * extras.len();
    Ok(CriticalSet {
        points,
        total_count,
        failed_seeds: sw.failed,
        grid,
    })
}

/// All critical points of `G` by multi-start Newton.
pub fn find_critical_points(torus: &Torus, tol: f64) -> Result<CriticalSet> {
    find_critical_points_with(torus, tol, EXCLUSION_RADIUS)
}

/// As [`find_critical_points`], seeding only outside a disk of radius
/// `exclusion` around the lattice.
pub fn find_critical_points_with(torus: &Torus, tol: f64, exclusion: f64) -> Result<CriticalSet> {
    if !(1e-14..=1e-6).contains(&tol) {
        return Err(Error::InvalidArgument(format!(
            "tolerance {tol:e} outside [1e-14, 1e-6]"
        )));
    }
    if !(exclusion > 0.0 && exclusion < 0.25) {
        return Err(Error::InvalidArgument(format!(
            "exclusion radius {exclusion} outside (0, 0.25)"
        )));
    }
    let coarse = sweep(torus, tol, COARSE_GRID, exclusion);
    let set = assemble(torus, &coarse, COARSE_GRID)?;
    if coarse.failed == 0 {
        return Ok(set);
    }
    let fine = sweep(torus, tol, FINE_GRID, exclusion);
    let fine_set = assemble(torus, &fine, FINE_GRID)?;
    if fine_set.total_count != set.total_count {
        return Err(Error::NoConvergence {
            coarse: set.total_count,
            fine: fine_set.total_count,
        });
    }
    Ok(fine_set)
}

/// Order relation between two critical values, with ties.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Less,
    Tie,
    Greater,
}

impl Relation {
    fn of(diff: f64, tie_tol: f64) -> Self {
        if diff.abs() <= tie_tol {
            Relation::Tie
        } else if diff < 0.0 {
            Relation::Less
        } else {
            Relation::Greater
        }
    }

    pub fn symbol(&self) -> &'static str {
        match self {
            Relation::Less => "<",
            Relation::Tie => "=",
            Relation::Greater => ">",
        }
    }
}

/// Half-period comparison computed three ways. Index pairs are
/// `(1,2), (1,3), (2,3)` for the half periods `1/2, tau/2, (1+tau)/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfPeriodComparison {
    /// `G - C(tau)` at the three half periods.
    pub g_rel: [f64; 3],
    /// `|e_1|, |e_2|, |e_3|`.
    pub wp_abs: [f64; 3],
    /// `G(h_i) - G(h_j)` directly.
    pub direct: [f64; 3],
    /// The same differences from `(1/8 pi) log |(e_i - e_k)/(e_j - e_k)|`.
    pub log_ratio: [f64; 3],
    pub relations: [Relation; 3],
    /// Half-period indices (0-based) sorted by increasing `G`.
    pub order: [usize; 3],
    pub tie_tol: f64,
}

pub const PAIRS: [(usize, usize); 3] = [(0, 1), (0, 2), (1, 2)];
pub const TIE_TOL: f64 = 1e-9;

/// Compares `G` at the half periods directly, through the `e_i` log-ratio
/// formulas and through `|wp|`, and checks the three agree.
pub fn compare_half_periods(torus: &Torus) -> Result<HalfPeriodComparison> {
    compare_half_periods_with_tol(torus, TIE_TOL)
}

pub fn compare_half_periods_with_tol(torus: &Torus, tie_tol: f64) -> Result<HalfPeriodComparison> {
    let w = Weierstrass::new(torus);
    let inv = w.invariants();
    let e = [inv.e1, inv.e2, inv.e3];
    let mut g_rel = [0.0; 3];
    for (k, h) in torus.half_periods().iter().enumerate() {
        g_rel[k] = green_rel(*h, torus)?;
    }
    let wp_abs = e.map(|x| x.norm());
    let mut direct = [0.0; 3];
    let mut log_ratio = [0.0; 3];
    let mut relations = [Relation::Tie; 3];
    for (p, &(i, j)) in PAIRS.iter().enumerate() {
        let k = 3 - i - j;
        direct[p] = g_rel[i] - g_rel[j];
        log_ratio[p] = ((e[i] - e[k]) / (e[j] - e[k])).norm().ln() / (8.0 * PI);
        let r_direct = Relation::of(direct[p], tie_tol);
        let r_ratio = Relation::of(log_ratio[p], tie_tol);
        let scale = wp_abs[i].max(wp_abs[j]).max(1.0);
        let r_wp = Relation::of(wp_abs[i] - wp_abs[j], tie_tol * scale);
        // a tie in one method against a strict sign in another is accepted
        // only when the strict difference is itself within the margin
        let margin = 10.0 * tie_tol;
        let agree = |a: Relation, b: Relation, db: f64| {
            a == b || (a == Relation::Tie && db.abs() <= margin * scale)
        };
        if (direct[p] - log_ratio[p]).abs() > 1e-9 * (1.0 + direct[p].abs()) {
            return Err(Error::InconsistentComparison(format!(
                "pair {}-{}: direct {:e} vs log-ratio {:e}",
                i + 1,
                j + 1,
                direct[p],
                log_ratio[p]
            )));
        }
        let wp_diff = (wp_abs[i] - wp_abs[j]) / scale;
        let consistent = (agree(r_direct, r_wp, wp_diff) || agree(r_wp, r_direct, direct[p]))
            && (agree(r_direct, r_ratio, log_ratio[p]) || agree(r_ratio, r_direct, direct[p]));
        if !consistent {
            return Err(Error::InconsistentComparison(format!(
                "pair {}-{}: direct {}, log-ratio {}, |wp| {}",
                i + 1,
                j + 1,
                r_direct.symbol(),
                r_ratio.symbol(),
                r_wp.symbol()
            )));
        }
        relations[p] = r_direct;
    }
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| g_rel[a].partial_cmp(&g_rel[b]).unwrap_or(Ordering::Equal));
    Ok(HalfPeriodComparison {
        g_rel,
        wp_abs,
        direct,
        log_ratio,
        relations,
        order,
        tie_tol,
    })
}

/// The extra critical point on `tau = 1/2 + i b`.
///
/// For `b > b_1` it lies on `Re z = 1/2` and is found by a bracketed 1-D
/// Newton on `G_y`; for `b < b_0` the real axis `0 < x < 1/2` is searched
/// the same way on `G_x`. Which regime holds is read off the Hessian at
/// `1/2`, which is a saddle exactly outside `[b_0, b_1]`.
pub fn locate_z0_on_rhombus_line(b: f64, tol: f64) -> Result<CriticalPoint> {
    let torus = Torus::rhombic(b)?;
    let at_half = green_eval(Complex64::new(0.5, 0.0), &torus)?;
    if at_half.det_hessian >= 0.0 {
        return Err(Error::NotInExtraRegime { b });
    }
    let vertical = at_half.hessian[1][1] < 0.0;
    // the line and the component of the gradient that is not zero by symmetry
    let (param, comp, len): (Box<dyn Fn(f64) -> Complex64>, usize, f64) = if vertical {
        (Box::new(|y| Complex64::new(0.5, y)), 1, b)
    } else {
        (Box::new(|x| Complex64::new(x, 0.0)), 0, 0.5)
    };
    let f = |u: f64| -> Result<(f64, f64)> {
        let e = green_eval(param(u), &torus)?;
        Ok((e.grad[comp], e.hessian[comp][comp]))
    };
    // scan from the half period end towards the pole for the first sign change
    let samples = 256;
    let mut lo = None;
    let mut prev: Option<(f64, f64)> = None;
    for k in 1..samples {
        let u = if vertical {
            len * k as f64 / samples as f64
        } else {
            len - len * k as f64 / samples as f64
        };
        let (g, _) = f(u)?;
        if let Some((pu, pg)) = prev {
            if pg.signum() != g.signum() {
                lo = Some((pu, u));
                break;
            }
        }
        prev = Some((u, g));
    }
    let (mut a, mut c) = lo.ok_or(Error::BracketFailure { lo: 0.0, hi: len })?;
    let (mut fa, _) = f(a)?;
    let mut u = 0.5 * (a + c);
    for _ in 0..200 {
        let (g, dg) = f(u)?;
        if g.abs() < 0.01 * tol {
            break;
        }
        if g.signum() == fa.signum() {
            a = u;
            fa = g;
        } else {
            c = u;
        }
        let newton = u - g / dg;
        let (l, h) = if a < c { (a, c) } else { (c, a) };
        u = if newton > l && newton < h && dg != 0.0 {
            newton
        } else {
            0.5 * (a + c)
        };
        if (h - l).abs() < 1e-16 {
            break;
        }
    }
    let (z, _) = newton(param(u), &torus).ok_or(Error::PoleAtLattice)?;
    let coords = sign_representative(wrap_point(z, &torus));
    let z = coords.to_point(&torus);
    let e = green_eval(z, &torus)?;
    Ok(make_point(z, &e, CriticalKind::ExtraPair, coords, &torus))
}
