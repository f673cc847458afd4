//! Weierstrass functions built on `theta_1`.
//!
//! With `eta_1 = -theta_1'''(0) / (3 theta_1'(0))`:
//!
//! * `zeta(z) = (log theta_1)_z + eta_1 z`
//! * `wp(z) = -(log theta_1)_zz - eta_1`
//! * `sigma(z) = e^{eta_1 z^2 / 2} theta_1(z) / theta_1'(0)`
//!
//! The modular lambda follows the convention `lambda = (e_3 - e_2)/(e_1 - e_2)`,
//! under which `lambda(i) = 1/2`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::Torus;
use crate::theta::{theta1_jet, theta1_prime0, theta1_r3, LogComplex, Theta1Jet};

const TWO_PI_I: Complex64 = Complex64 {
    re: 0.0,
    im: 2.0 * PI,
};

/// Distance to the lattice below which Weierstrass functions report a pole.
pub const POLE_RADIUS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipticInvariants {
    pub e1: Complex64,
    pub e2: Complex64,
    pub e3: Complex64,
    pub eta1: Complex64,
    pub eta2: Complex64,
    pub g2: Complex64,
    pub g3: Complex64,
    pub lambda: Complex64,
}

/// Weierstrass functions of one torus, with the invariants computed once.
#[derive(Debug, Clone, Copy)]
pub struct Weierstrass {
    torus: Torus,
    inv: EllipticInvariants,
    th1p0: LogComplex,
}

impl Weierstrass {
    pub fn new(torus: &Torus) -> Self {
        let tau = torus.tau();
        let eta1 = -theta1_r3(tau) / 3.0;
        let eta2 = eta1 * tau - TWO_PI_I;
        let e = torus
            .half_periods()
            .map(|h| -theta1_jet(h, tau).logd[1] - eta1);
        let [e1, e2, e3] = e;
        let inv = EllipticInvariants {
            e1,
            e2,
            e3,
            eta1,
            eta2,
            g2: -4.0 * (e1 * e2 + e2 * e3 + e3 * e1),
            g3: 4.0 * e1 * e2 * e3,
            lambda: (e3 - e2) / (e1 - e2),
        };
        Weierstrass {
            torus: *torus,
            inv,
            th1p0: theta1_prime0(tau),
        }
    }

    pub fn torus(&self) -> &Torus {
        &self.torus
    }

    pub fn invariants(&self) -> &EllipticInvariants {
        &self.inv
    }

    fn jet(&self, z: Complex64) -> Result<Theta1Jet> {
        if self.torus.distance_to_lattice(z) < POLE_RADIUS {
            return Err(Error::PoleAtLattice);
        }
        let j = theta1_jet(z, self.torus.tau());
        if j.is_zero() {
            return Err(Error::PoleAtLattice);
        }
        Ok(j)
    }

    pub fn zeta(&self, z: Complex64) -> Result<Complex64> {
        Ok(self.jet(z)?.logd[0] + self.inv.eta1 * z)
    }

    /// `wp` (order 0), `wp'` (order 1) or `wp''` (order 2).
    pub fn wp(&self, z: Complex64, order: u8) -> Result<Complex64> {
        let j = self.jet(z)?;
        match order {
            0 => Ok(-j.logd[1] - self.inv.eta1),
            1 => Ok(-j.logd[2]),
            2 => {
                let p = -j.logd[1] - self.inv.eta1;
                Ok(6.0 * p * p - self.inv.g2 / 2.0)
            }
            _ => Err(Error::InvalidArgument(format!(
                "wp derivative order must be 0, 1 or 2, got {order}"
            ))),
        }
    }

    /// `wp`, `wp'` and `(log theta_1)`-based `wp''` from one theta evaluation.
    pub fn wp_all(&self, z: Complex64) -> Result<[Complex64; 3]> {
        let j = self.jet(z)?;
        let p = -j.logd[1] - self.inv.eta1;
        Ok([p, -j.logd[2], -j.logd[3]])
    }

    /// `sigma(z)` in log space; zero at lattice points.
    pub fn sigma(&self, z: Complex64) -> LogComplex {
        let th = theta1_jet(z, self.torus.tau()).value;
        LogComplex::exp(self.inv.eta1 * z * z * 0.5) * th / self.th1p0
    }

    /// `|zeta(2z) - 2 zeta(z) - wp''(z) / (2 wp'(z))|`.
    pub fn addition_zeta_residual(&self, z: Complex64) -> Result<f64> {
        let [p, p1, _] = self.wp_all(z)?;
        if p1.norm() < 1e-8 * (1.0 + p.norm().powf(1.5)) {
            return Err(Error::HalfPeriodInput);
        }
        let p2 = self.wp(z, 2)?;
        let lhs = self.zeta(2.0 * z)?;
        let rhs = 2.0 * self.zeta(z)? + p2 / (2.0 * p1);
        Ok((lhs - rhs).norm())
    }
}

pub fn invariants(torus: &Torus) -> EllipticInvariants {
    *Weierstrass::new(torus).invariants()
}

pub fn zeta(z: Complex64, torus: &Torus) -> Result<Complex64> {
    Weierstrass::new(torus).zeta(z)
}

pub fn wp(z: Complex64, torus: &Torus, order: u8) -> Result<Complex64> {
    Weierstrass::new(torus).wp(z, order)
}

pub fn sigma(z: Complex64, torus: &Torus) -> LogComplex {
    Weierstrass::new(torus).sigma(z)
}

pub fn addition_zeta_residual(z: Complex64, torus: &Torus) -> Result<f64> {
    Weierstrass::new(torus).addition_zeta_residual(z)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn hexagonal() -> Torus {
        Torus::new(c(0.5, 3f64.sqrt() / 2.0)).unwrap()
    }

    #[test]
    fn square_lattice_symmetry() {
        let inv = invariants(&Torus::new(c(0.0, 1.0)).unwrap());
        assert!(inv.e3.norm() < 1e-12);
        assert!((inv.e2 + inv.e1).norm() < 1e-12);
        assert!(inv.e1.re > 0.0 && inv.e1.im.abs() < 1e-12);
        assert!((inv.eta1 - c(PI, 0.0)).norm() < 1e-13);
        // regression: lambda(i) = 1/2 under this convention (lattice-sum oracle in tests/)
        assert!((inv.lambda - c(0.5, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn hexagonal_g2_vanishes() {
        let inv = invariants(&hexagonal());
        assert!(inv.g2.norm() < 1e-10);
    }

    #[test]
    fn lambda_on_rhombic_line() {
        for b in [0.3, 0.8, 1.7] {
            let inv = invariants(&Torus::rhombic(b).unwrap());
            assert!(((inv.lambda - 1.0).norm() - 1.0).abs() < 1e-11, "b = {b}");
        }
    }

    #[test]
    fn zeta_at_half_period() {
        let t = Torus::new(c(0.2, 0.9)).unwrap();
        let w = Weierstrass::new(&t);
        let z = w.zeta(c(0.5, 0.0)).unwrap();
        assert!((z - w.invariants().eta1 / 2.0).norm() < 1e-12);
    }

    #[test]
    fn hexagonal_third_point() {
        let t = hexagonal();
        let w = Weierstrass::new(&t);
        let z0 = (1.0 + t.tau()) / 3.0;
        let inv = w.invariants();
        assert!((w.zeta(z0).unwrap() - (inv.eta1 + inv.eta2) / 3.0).norm() < 1e-10);
        assert!(w.wp(z0, 0).unwrap().norm() < 1e-10);
        assert!(w.wp(z0, 2).unwrap().norm() < 1e-10);
        assert!(w.wp_all(z0).unwrap()[2].norm() < 1e-9);
        assert!(w.addition_zeta_residual(z0).unwrap() < 1e-10);
    }

    #[test]
    fn half_period_rejected_by_addition_residual() {
        let t = Torus::new(c(0.0, 1.0)).unwrap();
        assert_eq!(
            addition_zeta_residual(c(0.5, 0.0), &t),
            Err(Error::HalfPeriodInput)
        );
    }

    #[test]
    fn poles() {
        let t = Torus::new(c(0.1, 1.3)).unwrap();
        assert_eq!(zeta(c(0.0, 0.0), &t), Err(Error::PoleAtLattice));
        assert_eq!(wp(t.lattice_vector(1, 1), &t, 0), Err(Error::PoleAtLattice));
        assert!(sigma(c(0.0, 0.0), &t).is_zero());
    }

    #[test]
    fn sigma_normalized_at_origin() {
        let t = Torus::new(c(0.3, 0.8)).unwrap();
        let z = c(1e-4, 0.0);
        let s = sigma(z, &t).to_complex().unwrap();
        assert!((s / z - 1.0).norm() < 1e-7);
    }
}
