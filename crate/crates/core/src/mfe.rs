//! Explicit solutions of the mean field equation `Delta u + rho e^u = rho delta_0`.
//!
//! Every solution here has the Liouville form
//! `u = c1 + log(e^{2 lambda} |f'|^2 / (1 + e^{2 lambda} |f|^2)^2)` with
//! `c1 = log(8 / rho)` and a developing map `f`:
//!
//! * `rho = 8 pi`: `f(z) = e^{2 zeta(z0) z} sigma(z0 - z) / sigma(z0 + z)` for an
//!   extra critical point `z0` of `G`,
//! * `rho = 4 pi`: `f = exp int g` with
//!   `g = -zeta''(z - a) + zeta''(z - b) + kappa` on the doubled torus
//!   `C / (Z + 2 tau Z)`, `a = -1/2`, `b = 1/2 + tau`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::critical::find_critical_points;
use crate::error::{Error, Result};
use crate::green::{critical_residual, period_integrals_with};
use crate::lattice::{split_point, Torus};
use crate::quad::adaptive_path_integral;
use crate::theta::LogComplex;
use crate::weier::Weierstrass;

pub const RHO_4PI: f64 = 4.0 * PI;
pub const RHO_8PI: f64 = 8.0 * PI;

/// Relative threshold on `critical_residual` for accepting a branch point.
pub const CRITICAL_TOL: f64 = 1e-8;
/// Tolerance on `int_0^1 g dz = ±pi i` for the `4 pi` construction.
pub const PERIOD_TOL: f64 = 1e-8;

/// Distance below which an evaluation point is moved off a zero or pole of `f`.
const NUDGE: f64 = 1e-9;

#[derive(Debug, Clone, Copy)]
enum Map {
    /// `rho = 8 pi`, branch point `z0` and `zeta(z0)`.
    Eight { z0: Complex64, zeta_z0: Complex64 },
    /// `rho = 4 pi` on the doubled torus, with `kappa` and `log f(0)`.
    Four { kappa: Complex64, log_f0: f64 },
}

/// A developing map `f` with its logarithmic derivative.
#[derive(Debug, Clone, Copy)]
pub struct DevelopingMap {
    weier: Weierstrass,
    map: Map,
}

impl DevelopingMap {
    pub fn weierstrass(&self) -> &Weierstrass {
        &self.weier
    }

    /// `f(z)` in log space.
    pub fn f(&self, z: Complex64) -> LogComplex {
        match self.map {
            Map::Eight { z0, zeta_z0 } => {
                LogComplex::exp(2.0 * zeta_z0 * z) * self.weier.sigma(z0 - z)
                    / self.weier.sigma(z0 + z)
            }
            Map::Four { kappa, log_f0 } => {
                let (a, b) = four_pi_poles(self.tau_single());
                LogComplex::exp(Complex64::new(log_f0, 0.0) + kappa * z)
                    * self.weier.sigma(z - b)
                    * self.weier.sigma(-a)
                    / (self.weier.sigma(z - a) * self.weier.sigma(-b))
            }
        }
    }

    /// `f'(z) / f(z)`.
    pub fn log_derivative(&self, z: Complex64) -> Result<Complex64> {
        match self.map {
            Map::Eight { z0, zeta_z0 } => {
                Ok(2.0 * zeta_z0 - self.weier.zeta(z0 - z)? - self.weier.zeta(z0 + z)?)
            }
            Map::Four { kappa, .. } => {
                let (a, b) = four_pi_poles(self.tau_single());
                Ok(-self.weier.zeta(z - a)? + self.weier.zeta(z - b)? + kappa)
            }
        }
    }

    /// `f'(z)` in log space.
    pub fn f_prime(&self, z: Complex64) -> Result<LogComplex> {
        Ok(self.f(z) * LogComplex::from_complex(self.log_derivative(z)?))
    }

    /// Modulus `tau` of the torus the solution lives on.
    fn tau_single(&self) -> Complex64 {
        match self.map {
            Map::Eight { .. } => self.weier.torus().tau(),
            Map::Four { .. } => self.weier.torus().tau() / 2.0,
        }
    }
}

fn four_pi_poles(tau: Complex64) -> (Complex64, Complex64) {
    (Complex64::new(-0.5, 0.0), Complex64::new(0.5, 0.0) + tau)
}

/// The `rho = 8 pi` developing map branched at the critical point `z0`.
pub fn developing_map_8pi(torus: &Torus, z0: Complex64) -> Result<DevelopingMap> {
    let weier = Weierstrass::new(torus);
    let (t, s) = torus.coords(z0);
    let res = critical_residual(t, s, torus)?;
    let zeta_z0 = weier.zeta(z0)?;
    if res.norm() > CRITICAL_TOL * (1.0 + zeta_z0.norm()) {
        return Err(Error::NotACriticalPoint {
            residual: res.norm(),
        });
    }
    let [p, p1, _] = weier.wp_all(z0)?;
    if p1.norm() < 1e-8 * (1.0 + p.norm().powf(1.5)) {
        return Err(Error::HalfPeriodBranch);
    }
    Ok(DevelopingMap {
        weier,
        map: Map::Eight { z0, zeta_z0 },
    })
}

/// An explicit solution `u` of the mean field equation.
#[derive(Debug, Clone, Copy)]
pub struct MfeSolution {
    pub rho: f64,
    pub torus: Torus,
    /// Branch point `z0` (`rho = 8 pi` only).
    pub branch: Option<Complex64>,
    pub lambda: f64,
    pub c1: f64,
    map: DevelopingMap,
}

fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

impl MfeSolution {
    pub fn developing_map(&self) -> &DevelopingMap {
        &self.map
    }

    /// `ln |f|` and `ln |f'|`, with the point moved by `NUDGE` when it sits on
    /// a zero or pole of `f`.
    fn log_moduli(&self, z: Complex64) -> Result<(f64, f64)> {
        let eval = |w: Complex64| -> Result<(f64, f64)> {
            let lf = self.map.f(w);
            let r = self.map.log_derivative(w)?;
            Ok((lf.log_mag, lf.log_mag + r.norm().ln()))
        };
        match eval(z) {
            Ok((a, b)) if a.is_finite() && b.is_finite() => Ok((a, b)),
            Err(Error::PoleAtLattice) | Ok(_) => {
                let w = z + Complex64::new(NUDGE, NUDGE);
                match eval(w) {
                    Ok((a, b)) if a.is_finite() && b.is_finite() => Ok((a, b)),
                    Ok(_) => Err(Error::PoleAtLattice),
                    Err(e) => Err(e),
                }
            }
            Err(e) => Err(e),
        }
    }

    /// `u(z)`; `-inf` at lattice points.
    pub fn u(&self, z: Complex64) -> Result<f64> {
        if self.torus.distance_to_lattice(z) < 1e-300 {
            return Ok(f64::NEG_INFINITY);
        }
        let (lf, lfp) = match self.log_moduli(z) {
            Ok(v) => v,
            Err(Error::PoleAtLattice) if self.torus.distance_to_lattice(z) < 1e-12 => {
                return Ok(f64::NEG_INFINITY)
            }
            Err(e) => return Err(e),
        };
        let l2 = 2.0 * self.lambda;
        Ok(self.c1 + l2 + 2.0 * lfp - 2.0 * softplus(l2 + 2.0 * lf))
    }

    /// `e^{2 i theta_j} = f(z + omega_j) / f(z)` for `j = 1, 2` (`rho = 8 pi`).
    pub fn monodromies(&self) -> Option<[Complex64; 2]> {
        let z0 = self.branch?;
        let (f1, f2) = period_integrals_with(&self.map.weier, z0).ok()?;
        Some([f1.exp(), f2.exp()])
    }
}

/// `u_lambda` from the extra critical point `z0`.
pub fn solution_8pi(torus: &Torus, z0: Complex64, lambda: f64) -> Result<MfeSolution> {
    let map = developing_map_8pi(torus, z0)?;
    Ok(MfeSolution {
        rho: RHO_8PI,
        torus: *torus,
        branch: Some(z0),
        lambda,
        c1: (8.0 / RHO_8PI).ln(),
        map,
    })
}

/// `u_lambda` built on the torus's own extra critical point, if it has one.
pub fn solution_8pi_from_torus(torus: &Torus, lambda: f64, tol: f64) -> Result<MfeSolution> {
    let set = find_critical_points(torus, tol)?;
    let extra = set.extra().ok_or(Error::NoExtraCriticalPoint)?;
    solution_8pi(torus, extra.z, lambda)
}

/// Diagnostics of the `rho = 4 pi` construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourPiCheck {
    /// `int_0^1 g dz` along a path passing above the pole at `1/2`.
    pub period_integral: Complex64,
    /// Quadrature error estimate of `period_integral`.
    pub period_integral_error: f64,
    /// `c' = f(1) / f(0)`.
    pub c_prime: Complex64,
    /// `c = f(tau) f(0)`.
    pub c: Complex64,
    /// `g(0)`, zero by the choice of `kappa`.
    pub g0: Complex64,
}

/// The unique `rho = 4 pi` solution, with its construction checks.
pub fn solution_4pi(torus: &Torus) -> Result<(MfeSolution, FourPiCheck)> {
    let tau = torus.tau();
    let doubled = Torus::new(2.0 * tau)?;
    let weier = Weierstrass::new(&doubled);
    let (a, b) = four_pi_poles(tau);
    // g(0) = 0
    let kappa = weier.zeta(-a)? + weier.zeta(b)?;
    let mut map = DevelopingMap {
        weier,
        map: Map::Four { kappa, log_f0: 0.0 },
    };
    // |f(0)| fixed by |f(tau) f(0)| = 1
    let q_tau = map.f(tau);
    let log_f0 = -0.5 * q_tau.log_mag;
    map.map = Map::Four { kappa, log_f0 };

    let g0 = map.log_derivative(Complex64::new(0.0, 0.0))?;
    let h = 0.5 * torus.b();
    let (period_integral, period_integral_error) = adaptive_path_integral(
        |s| Complex64::new(s, h * (PI * s).sin()),
        |s| Complex64::new(1.0, h * PI * (PI * s).cos()),
        |z| map.log_derivative(z).unwrap_or(Complex64::new(f64::NAN, f64::NAN)),
        1e-13,
    );
    let f0 = map.f(Complex64::new(0.0, 0.0));
    let c_prime = (map.f(Complex64::new(1.0, 0.0)) / f0).to_complex_unchecked();
    let c = (map.f(tau) * f0).to_complex_unchecked();
    let pi_i = Complex64::new(0.0, PI);
    let dev = (period_integral - pi_i)
        .norm()
        .min((period_integral + pi_i).norm());
    if !(dev <= PERIOD_TOL) {
        return Err(Error::ConstructionInconsistent(format!(
            "int_0^1 g dz = {period_integral} is not ±pi i"
        )));
    }
    if !((c_prime + 1.0).norm() <= 1e-8) || !((c.norm() - 1.0).abs() <= 1e-8) {
        return Err(Error::ConstructionInconsistent(format!(
            "monodromy c' = {c_prime}, |c| = {}",
            c.norm()
        )));
    }
    let sol = MfeSolution {
        rho: RHO_4PI,
        torus: *torus,
        branch: None,
        lambda: 0.0,
        c1: (8.0 / RHO_4PI).ln(),
        map,
    };
    Ok((
        sol,
        FourPiCheck {
            period_integral,
            period_integral_error,
            c_prime,
            c,
            g0,
        },
    ))
}

/// Residual and periodicity report of [`verify_solution`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerificationReport {
    pub grid_n: usize,
    pub h: f64,
    pub excl_radius: f64,
    /// Points of the grid that were checked.
    pub points: usize,
    /// Max residual with the Richardson-combined Laplacian.
    pub max_residual: f64,
    /// Max residual with the plain five-point Laplacian at step `h`.
    pub max_residual_plain: f64,
    pub mean_residual: f64,
    /// `max |u(z + 1) - u(z)|`.
    pub periodicity_1: f64,
    /// `max |u(z + tau) - u(z)|`.
    pub periodicity_tau: f64,
}

/// Stencil step used by [`verify_solution`]; `1e-3` at `grid_n = 64`.
pub fn stencil_step(grid_n: usize) -> f64 {
    0.064 / grid_n as f64
}

/// Checks `Delta u + rho e^u = 0` on a `grid_n x grid_n` grid of the cell,
/// skipping disks of radius `excl_radius` around lattice points.
///
/// The Laplacian is the five-point stencil at `h` and `2h` combined as
/// `(4 L_h - L_2h) / 3`, which cancels the `h^2` term. Next to the pole of
/// `f` the plain stencil at `h = 1e-3` is off by a few `1e-4`.
///
/// The harmonic term `(rho / 2 pi) log|z - omega|` of the nearest lattice
/// point is removed before differencing; it does not change `Delta u` off the
/// lattice but otherwise dominates the stencil error near the exclusion disk.
pub fn verify_solution(sol: &MfeSolution, grid_n: usize, excl_radius: f64) -> Result<VerificationReport> {
    if grid_n < 32 {
        return Err(Error::InvalidArgument(format!("grid_n = {grid_n} below 32")));
    }
    if !(excl_radius >= 0.02) {
        return Err(Error::InvalidArgument(format!(
            "exclusion radius {excl_radius} below 0.02"
        )));
    }
    let torus = &sol.torus;
    let h = stencil_step(grid_n);
    let k = sol.rho / (2.0 * PI);
    let rows: Vec<Result<Vec<(f64, f64, f64, f64)>>> = (0..grid_n)
        .into_par_iter()
        .map(|j| {
            let mut out = Vec::with_capacity(grid_n);
            for i in 0..grid_n {
                let t = (i as f64 + 0.5) / grid_n as f64 - 0.5;
                let s = (j as f64 + 0.5) / grid_n as f64 - 0.5;
                let z = torus.point(t, s);
                if torus.distance_to_lattice(z) < excl_radius {
                    continue;
                }
                let sp = split_point(z, torus);
                let omega = z - sp.w;
                let v = |w: Complex64| -> Result<f64> {
                    Ok(sol.u(w)? - k * (w - omega).norm().ln())
                };
                let c = v(z)?;
                let five = |d: f64| -> Result<f64> {
                    Ok((v(z + d)? + v(z - d)? + v(z + Complex64::new(0.0, d))?
                        + v(z - Complex64::new(0.0, d))?
                        - 4.0 * c)
                        / (d * d))
                };
                let lap_h = five(h)?;
                let lap = (4.0 * lap_h - five(2.0 * h)?) / 3.0;
                let u = sol.u(z)?;
                let src = sol.rho * u.exp();
                let res = (lap + src).abs();
                let plain = (lap_h + src).abs();
                let p1 = (sol.u(z + 1.0)? - u).abs();
                let p2 = (sol.u(z + torus.tau())? - u).abs();
                out.push((res, plain, p1, p2));
            }
            Ok(out)
        })
        .collect();
    let mut max_residual: f64 = 0.0;
    let mut max_residual_plain: f64 = 0.0;
    let mut sum = 0.0;
    let mut points = 0;
    let mut periodicity_1: f64 = 0.0;
    let mut periodicity_tau: f64 = 0.0;
    for row in rows {
        for (r, plain, p1, p2) in row? {
            max_residual = max_residual.max(r);
            max_residual_plain = max_residual_plain.max(plain);
            sum += r;
            points += 1;
            periodicity_1 = periodicity_1.max(p1);
            periodicity_tau = periodicity_tau.max(p2);
        }
    }
    Ok(VerificationReport {
        grid_n,
        h,
        excl_radius,
        points,
        max_residual,
        max_residual_plain,
        mean_residual: if points > 0 { sum / points as f64 } else { 0.0 },
        periodicity_1,
        periodicity_tau,
    })
}

/// `int_T rho e^u dA` by the periodic trapezoid rule on an `n x n` grid.
pub fn total_mass(sol: &MfeSolution, n: usize) -> Result<f64> {
    let torus = &sol.torus;
    let rows: Vec<Result<f64>> = (0..n)
        .into_par_iter()
        .map(|j| {
            let mut acc = 0.0;
            for i in 0..n {
                let t = i as f64 / n as f64 - 0.5;
                let s = j as f64 / n as f64 - 0.5;
                acc += sol.u(torus.point(t, s))?.exp();
            }
            Ok(acc)
        })
        .collect();
    let mut acc = 0.0;
    for r in rows {
        acc += r?;
    }
    Ok(sol.rho * acc * torus.area() / (n * n) as f64)
}

/// `f(z)` for the `8 pi` map by integrating `wp'(z0) / (wp(xi) - wp(z0))`
/// from 0 to `z` along a polyline kept away from `±z0`.
///
/// The residues are `±1`, so the exponential does not depend on the path.
pub fn developing_map_by_quadrature(map: &DevelopingMap, z: Complex64, tol: f64) -> Result<Complex64> {
    let Map::Eight { z0, .. } = map.map else {
        return Err(Error::InvalidArgument(
            "quadrature oracle is defined for the 8 pi map".into(),
        ));
    };
    let w = &map.weier;
    let torus = *w.torus();
    let wp0 = w.wp(z0, 0)?;
    let wp1 = w.wp(z0, 1)?;
    let integrand = |xi: Complex64| -> Complex64 {
        if torus.distance_to_lattice(xi) < 1e-8 {
            return Complex64::new(0.0, 0.0);
        }
        match w.wp(xi, 0) {
            Ok(p) => wp1 / (p - wp0),
            Err(_) => Complex64::new(0.0, 0.0),
        }
    };
    let pole_distance = |p: Complex64| -> f64 {
        torus
            .distance_to_lattice(p - z0)
            .min(torus.distance_to_lattice(p + z0))
    };
    let segment_clearance = |a: Complex64, b: Complex64| -> f64 {
        (0..=64)
            .map(|k| pole_distance(a + (b - a) * (k as f64 / 64.0)))
            .fold(f64::INFINITY, f64::min)
    };
    // choose a waypoint that keeps both legs clear of the poles
    let mid = z / 2.0;
    let normal = if z.norm() > 0.0 {
        Complex64::new(0.0, 1.0) * z / z.norm()
    } else {
        Complex64::new(0.0, 1.0)
    };
    let mut best = (segment_clearance(Complex64::new(0.0, 0.0), z), mid);
    for k in [-4, -3, -2, -1, 1, 2, 3, 4] {
        let p = mid + normal * (0.08 * k as f64);
        let c = segment_clearance(Complex64::new(0.0, 0.0), p).min(segment_clearance(p, z));
        if c > best.0 + 1e-12 {
            best = (c, p);
        }
    }
    let p = best.1;
    let path = move |s: f64| {
        if s < 0.5 {
            p * (2.0 * s)
        } else {
            p + (z - p) * (2.0 * s - 1.0)
        }
    };
    let dpath = move |s: f64| if s < 0.5 { 2.0 * p } else { 2.0 * (z - p) };
    // split at the corner so each leg is smooth
    let (i1, _) = adaptive_path_integral(|s| path(0.5 * s), |s| 0.5 * dpath(0.5 * s), integrand, tol);
    let (i2, _) = adaptive_path_integral(
        |s| path(0.5 + 0.5 * s),
        |s| 0.5 * dpath(0.5 + 0.5 * s),
        integrand,
        tol,
    );
    Ok((i1 + i2).exp())
}
