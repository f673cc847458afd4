//! The Green function of the torus,
//! `G(z) = -(1/2pi) log|theta_1(z)| + y^2/(2b) + C(tau)`,
//! normalized by `int_T G dA = 0`.
//!
//! `y` is taken from the canonical cell representative of `z`, which makes
//! every quantity here exactly doubly periodic. Derivatives come from
//! `(log theta_1)_z` and `(log theta_1)_zz`:
//!
//! ```text
//! G_x  = -Re (log th)_z / 2pi        G_y  = Im (log th)_z / 2pi + y/b
//! G_xx = -Re (log th)_zz / 2pi       G_xy = Im (log th)_zz / 2pi
//! G_yy =  Re (log th)_zz / 2pi + 1/b
//! ```

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::{split_point, Torus};
use crate::quad::GaussLegendre;
use crate::theta::{theta1_jet, Theta1Jet};
use crate::weier::{Weierstrass, POLE_RADIUS};

/// Value, gradient and Hessian of `G - C(tau)` at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreenEval {
    pub value_rel: f64,
    pub grad: [f64; 2],
    pub hessian: [[f64; 2]; 2],
    pub det_hessian: f64,
}

struct CellJet {
    jet: Theta1Jet,
    y: f64,
}

fn cell_jet(z: Complex64, torus: &Torus) -> Result<CellJet> {
    let sp = split_point(z, torus);
    if sp.w.norm() < POLE_RADIUS {
        return Err(Error::PoleAtLattice);
    }
    let jet = theta1_jet(sp.w, torus.tau());
    if jet.is_zero() {
        return Err(Error::PoleAtLattice);
    }
    Ok(CellJet { jet, y: sp.w.im })
}

fn hessian_from(l2: Complex64, b: f64) -> ([[f64; 2]; 2], f64) {
    let gxx = -l2.re / (2.0 * PI);
    let gxy = l2.im / (2.0 * PI);
    let gyy = l2.re / (2.0 * PI) + 1.0 / b;
    let pb = PI / b;
    let det = -((l2 + pb).norm_sqr() - pb * pb) / (4.0 * PI * PI);
    ([[gxx, gxy], [gxy, gyy]], det)
}

/// `G(z) - C(tau)`.
pub fn green_rel(z: Complex64, torus: &Torus) -> Result<f64> {
    let cj = cell_jet(z, torus)?;
    Ok(-cj.jet.value.log_mag / (2.0 * PI) + cj.y * cj.y / (2.0 * torus.b()))
}

/// `(G_x, G_y)`.
pub fn green_grad(z: Complex64, torus: &Torus) -> Result<[f64; 2]> {
    let cj = cell_jet(z, torus)?;
    let l1 = cj.jet.logd[0];
    Ok([-l1.re / (2.0 * PI), l1.im / (2.0 * PI) + cj.y / torus.b()])
}

/// Hessian of `G` and its determinant (closed form
/// `-(|(log th)_zz + pi/b|^2 - (pi/b)^2) / 4pi^2`).
pub fn green_hessian(z: Complex64, torus: &Torus) -> Result<([[f64; 2]; 2], f64)> {
    let cj = cell_jet(z, torus)?;
    Ok(hessian_from(cj.jet.logd[1], torus.b()))
}

/// Everything at once from a single theta evaluation.
pub fn green_eval(z: Complex64, torus: &Torus) -> Result<GreenEval> {
    let cj = cell_jet(z, torus)?;
    let b = torus.b();
    let l1 = cj.jet.logd[0];
    let (hessian, det_hessian) = hessian_from(cj.jet.logd[1], b);
    Ok(GreenEval {
        value_rel: -cj.jet.value.log_mag / (2.0 * PI) + cj.y * cj.y / (2.0 * b),
        grad: [-l1.re / (2.0 * PI), l1.im / (2.0 * PI) + cj.y / b],
        hessian,
        det_hessian,
    })
}

/// `zeta(t + s tau) - t eta_1 - s eta_2`; vanishes exactly at critical points.
pub fn critical_residual(t: f64, s: f64, torus: &Torus) -> Result<Complex64> {
    let z = torus.point(t, s);
    if torus.distance_to_lattice(z) < POLE_RADIUS {
        return Err(Error::PoleAtLattice);
    }
    let jet = theta1_jet(z, torus.tau());
    if jet.is_zero() {
        return Err(Error::PoleAtLattice);
    }
    // zeta(z) - t eta1 - s eta2 = (log th)_z + s (eta1 tau - eta2) = (log th)_z + 2 pi i s
    Ok(jet.logd[0] + Complex64::new(0.0, 2.0 * PI * s))
}

/// `F_1 = 2(zeta(z) - eta_1 z)` and `F_2 = 2(tau zeta(z) - eta_2 z)`.
pub fn period_integrals(z: Complex64, torus: &Torus) -> Result<(Complex64, Complex64)> {
    let w = Weierstrass::new(torus);
    period_integrals_with(&w, z)
}

pub(crate) fn period_integrals_with(
    w: &Weierstrass,
    z: Complex64,
) -> Result<(Complex64, Complex64)> {
    let zeta = w.zeta(z)?;
    let inv = w.invariants();
    let tau = w.torus().tau();
    Ok((2.0 * (zeta - inv.eta1 * z), 2.0 * (tau * zeta - inv.eta2 * z)))
}

/// `C(tau)` with its quadrature error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreenConstant {
    pub value: f64,
    pub error_estimate: f64,
}

const QUAD_COARSE: usize = 128;
const QUAD_FINE: usize = 256;

/// Tolerance on the mean of `G` over the cell, relative to the cell area.
pub const CONSTANT_TOL: f64 = 1e-8;

/// `C(tau)` fixed by `int_cell (green_rel + C) dA = 0`.
///
/// The logarithmic singularity is removed with a smooth cutoff
/// `S = -(1/2pi) log|z| chi(|z|)` whose disk integral is done in polar form;
/// the smooth remainder is integrated with tensor Gauss–Legendre at 128^2 and
/// checked at 256^2.
pub fn green_constant(torus: &Torus) -> Result<GreenConstant> {
    let b = torus.b();
    let tau = torus.tau();
    let inradius = 0.5 * b * (1.0f64).min(1.0 / tau.norm());
    let r0 = 0.9 * inradius;
    let disk = cutoff_disk_integral(r0);

    let remainder = |n: usize| -> Result<f64> {
        let gl = GaussLegendre::new(n);
        let mut acc = 0.0;
        for (t, wt) in gl.mapped(-0.5, 0.5) {
            for (s, ws) in gl.mapped(-0.5, 0.5) {
                let z = torus.point(t, s);
                let r = z.norm();
                let g = green_rel(z, torus)?;
                let sing = if r < r0 {
                    -r.ln() / (2.0 * PI) * cutoff(r / r0)
                } else {
                    0.0
                };
                acc += wt * ws * (g - sing);
            }
        }
        Ok(acc * b)
    };
    let coarse = remainder(QUAD_COARSE)? + disk;
    let fine = remainder(QUAD_FINE)? + disk;
    let error_estimate = (fine - coarse).abs() / b;
    if error_estimate > CONSTANT_TOL {
        return Err(Error::QuadratureNotConverged {
            estimate: error_estimate,
        });
    }
    Ok(GreenConstant {
        value: -fine / b,
        error_estimate,
    })
}

/// Smooth cutoff: 1 on `[0, 1/2]`, 0 on `[1, inf)`, C-infinity in between.
fn cutoff(x: f64) -> f64 {
    if x <= 0.5 {
        1.0
    } else if x >= 1.0 {
        0.0
    } else {
        let u = 2.0 * x - 1.0;
        let f = |v: f64| if v > 0.0 { (-1.0 / v).exp() } else { 0.0 };
        f(1.0 - u) / (f(1.0 - u) + f(u))
    }
}

/// `int_{|z|<r0} -(1/2pi) log|z| chi(|z|/r0) dA = -int_0^r0 rho log(rho) chi drho`.
fn cutoff_disk_integral(r0: f64) -> f64 {
    // exact on [0, r0/2] where chi = 1
    let a = 0.5 * r0;
    let inner = a * a * 0.5 * a.ln() - a * a * 0.25;
    let gl = GaussLegendre::new(64);
    let mut outer = 0.0;
    for k in 0..8 {
        let lo = a + (r0 - a) * k as f64 / 8.0;
        let hi = a + (r0 - a) * (k + 1) as f64 / 8.0;
        outer += gl.integrate(lo, hi, |rho| rho * rho.ln() * cutoff(rho / r0));
    }
    -(inner + outer)
}

/// A torus with its Weierstrass data and a lazily computed `C(tau)`.
#[derive(Debug)]
pub struct GreenFunction {
    weier: Weierstrass,
    constant: OnceLock<Result<GreenConstant>>,
}

impl GreenFunction {
    pub fn new(torus: &Torus) -> Self {
        GreenFunction {
            weier: Weierstrass::new(torus),
            constant: OnceLock::new(),
        }
    }

    pub fn torus(&self) -> &Torus {
        self.weier.torus()
    }

    pub fn weierstrass(&self) -> &Weierstrass {
        &self.weier
    }

    pub fn constant(&self) -> Result<GreenConstant> {
        self.constant
            .get_or_init(|| green_constant(self.weier.torus()))
            .clone()
    }

    /// The mean-zero Green function `G(z)`.
    pub fn value(&self, z: Complex64) -> Result<f64> {
        Ok(green_rel(z, self.torus())? + self.constant()?.value)
    }

    pub fn eval(&self, z: Complex64) -> Result<GreenEval> {
        green_eval(z, self.torus())
    }

    /// Gradient via `2pi G_x = Re(eta_1 t + eta_2 s - zeta)`,
    /// `-2pi G_y = Im(eta_1 t + eta_2 s - zeta)`.
    pub fn grad_via_zeta(&self, z: Complex64) -> Result<[f64; 2]> {
        let sp = split_point(z, self.torus());
        let (t, s) = (sp.coords.t, sp.coords.s);
        let inv = self.weier.invariants();
        let v = inv.eta1 * t + inv.eta2 * s - self.weier.zeta(sp.w)?;
        Ok([v.re / (2.0 * PI), -v.im / (2.0 * PI)])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn pole_at_origin() {
        let t = Torus::new(c(0.0, 1.0)).unwrap();
        assert_eq!(green_rel(c(0.0, 0.0), &t), Err(Error::PoleAtLattice));
        assert_eq!(green_grad(t.tau(), &t), Err(Error::PoleAtLattice));
        assert_eq!(critical_residual(1.0, 0.0, &t), Err(Error::PoleAtLattice));
    }

    #[test]
    fn half_periods_are_critical() {
        for tau in [c(0.0, 1.0), c(0.3, 0.7), c(-0.4, 1.9), c(0.5, 0.4)] {
            let t = Torus::new(tau).unwrap();
            for h in t.half_periods() {
                let g = green_grad(h, &t).unwrap();
                assert!(g[0].abs() < 1e-12 && g[1].abs() < 1e-12, "{tau} {h}: {g:?}");
            }
            assert!(critical_residual(0.5, 0.0, &t).unwrap().norm() < 1e-12);
        }
    }

    #[test]
    fn square_torus_half_period_tie() {
        let t = Torus::new(c(0.0, 1.0)).unwrap();
        let a = green_rel(c(0.5, 0.0), &t).unwrap();
        let b = green_rel(c(0.0, 0.5), &t).unwrap();
        assert!((a - b).abs() < 1e-13);
    }

    #[test]
    fn rhombic_torus_tie() {
        let t = Torus::rhombic(0.83).unwrap();
        let a = green_rel(t.tau() / 2.0, &t).unwrap();
        let b = green_rel((1.0 + t.tau()) / 2.0, &t).unwrap();
        assert!((a - b).abs() < 1e-13);
    }

    #[test]
    fn cutoff_is_smooth_partition() {
        assert_eq!(cutoff(0.2), 1.0);
        assert_eq!(cutoff(1.2), 0.0);
        assert!((cutoff(0.75) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn disk_integral_without_cutoff_matches_closed_form() {
        // sanity on the polar reduction: chi = 1 everywhere gives -(r^2/2)(log r - 1/2)
        let r: f64 = 0.1;
        let gl = GaussLegendre::new(64);
        let num = -gl.integrate(0.0, r, |rho| rho * rho.ln());
        let exact = -(r * r / 2.0) * (r.ln() - 0.5);
        assert!((num - exact).abs() < 1e-8);
    }

    #[test]
    fn square_torus_constant() {
        // C(i) = -0.041964713335388770768, from an adaptive mpmath cubature of
        // green_rel over the cell (and equal to log|eta(i)|/2pi)
        let t = Torus::new(c(0.0, 1.0)).unwrap();
        let k = green_constant(&t).unwrap();
        assert!((k.value - (-0.041964713335388770768)).abs() < 1e-10, "{k:?}");
        assert!(k.error_estimate < 1e-9);
    }
}
