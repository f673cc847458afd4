//! Moduli and points on the lattice `Z + Z tau`.
//!
//! Points are reduced to the half-open cell `[-1/2, 1/2)^2` in lattice
//! coordinates, so `z = 1/2 + tau/2` wraps to `(-1/2, -1/2)`.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// A flat torus `C / (Z + Z tau)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Torus {
    tau: Complex64,
}

impl Torus {
    pub fn new(tau: Complex64) -> Result<Self> {
        if !(tau.im > 0.0) || !tau.re.is_finite() || !tau.im.is_finite() {
            return Err(Error::NonPositiveImaginaryPart(tau.im));
        }
        Ok(Torus { tau })
    }

    /// The rhombic torus `tau = 1/2 + i b`.
    pub fn rhombic(b: f64) -> Result<Self> {
        Torus::new(Complex64::new(0.5, b))
    }

    #[inline]
    pub fn tau(&self) -> Complex64 {
        self.tau
    }

    #[inline]
    pub fn b(&self) -> f64 {
        self.tau.im
    }

    /// Euclidean area of the cell spanned by `1` and `tau`.
    #[inline]
    pub fn area(&self) -> f64 {
        self.tau.im
    }

    #[inline]
    pub fn point(&self, t: f64, s: f64) -> Complex64 {
        Complex64::new(t + s * self.tau.re, s * self.tau.im)
    }

    #[inline]
    pub fn lattice_vector(&self, m: i64, n: i64) -> Complex64 {
        self.point(m as f64, n as f64)
    }

    /// The half periods `1/2`, `tau/2`, `(1 + tau)/2`.
    pub fn half_periods(&self) -> [Complex64; 3] {
        [
            self.point(0.5, 0.0),
            self.point(0.0, 0.5),
            self.point(0.5, 0.5),
        ]
    }

    /// Real lattice coordinates `(t, s)` with `z = t + s tau`, not reduced.
    #[inline]
    pub fn coords(&self, z: Complex64) -> (f64, f64) {
        let s = z.im / self.tau.im;
        (z.re - s * self.tau.re, s)
    }

    /// Euclidean distance from `z` to the nearest lattice point.
    pub fn distance_to_lattice(&self, z: Complex64) -> f64 {
        let split = split_point(z, self);
        let w = self.point(split.coords.t, split.coords.s);
        let mut best = f64::INFINITY;
        for m in -1..=1 {
            for n in -1..=1 {
                best = best.min((w - self.lattice_vector(m, n)).norm());
            }
        }
        best
    }
}

pub fn make_torus(tau: Complex64) -> Result<Torus> {
    Torus::new(tau)
}

/// Lattice coordinates of a point: `z = t + s tau`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeCoords {
    pub t: f64,
    pub s: f64,
}

impl LatticeCoords {
    pub fn new(t: f64, s: f64) -> Self {
        LatticeCoords { t, s }
    }

    pub fn to_point(&self, torus: &Torus) -> Complex64 {
        torus.point(self.t, self.s)
    }

    /// Representative in `[-1/2, 1/2)^2`.
    pub fn wrapped(&self) -> Self {
        LatticeCoords {
            t: wrap_unit(self.t),
            s: wrap_unit(self.s),
        }
    }

    /// Sup-norm distance on the torus `R^2 / Z^2`.
    pub fn torus_distance(&self, other: &LatticeCoords) -> f64 {
        let dt = wrap_unit(self.t - other.t).abs();
        let ds = wrap_unit(self.s - other.s).abs();
        dt.max(ds)
    }

    /// Distance on the torus modulo the involution `z -> -z`.
    pub fn distance_mod_sign(&self, other: &LatticeCoords) -> f64 {
        let neg = LatticeCoords::new(-other.t, -other.s);
        self.torus_distance(other).min(self.torus_distance(&neg))
    }
}

/// Reduce `x` into `[-1/2, 1/2)`.
#[inline]
pub(crate) fn wrap_unit(x: f64) -> f64 {
    let r = x - (x + 0.5).floor();
    // rounding can push r to exactly 1/2
    if r >= 0.5 {
        r - 1.0
    } else {
        r
    }
}

/// Result of splitting `z = w + m + n tau` with `w` in the canonical cell.
#[derive(Debug, Clone, Copy)]
pub(crate) struct SplitPoint {
    pub coords: LatticeCoords,
    pub w: Complex64,
    pub m: i64,
    pub n: i64,
}

pub(crate) fn split_point(z: Complex64, torus: &Torus) -> SplitPoint {
    let (t, s) = torus.coords(z);
    let n = (s + 0.5).floor();
    let mut s_r = s - n;
    let mut n = n as i64;
    if s_r >= 0.5 {
        s_r -= 1.0;
        n += 1;
    }
    let m = (t + 0.5).floor();
    let mut t_r = t - m;
    let mut m = m as i64;
    if t_r >= 0.5 {
        t_r -= 1.0;
        m += 1;
    }
    SplitPoint {
        coords: LatticeCoords { t: t_r, s: s_r },
        w: z - torus.lattice_vector(m, n),
        m,
        n,
    }
}

/// Canonical lattice coordinates of `z` in `[-1/2, 1/2)^2`.
pub fn wrap_point(z: Complex64, torus: &Torus) -> LatticeCoords {
    split_point(z, torus).coords
}

/// An element of `SL(2, Z)` acting by `tau -> (a tau + b) / (c tau + d)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Sl2z {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub d: i64,
}

impl Sl2z {
    pub const IDENTITY: Sl2z = Sl2z { a: 1, b: 0, c: 0, d: 1 };
    pub const S: Sl2z = Sl2z { a: 0, b: -1, c: 1, d: 0 };

    pub fn translation(k: i64) -> Sl2z {
        Sl2z { a: 1, b: k, c: 0, d: 1 }
    }

    pub fn det(&self) -> i64 {
        self.a * self.d - self.b * self.c
    }

    /// Matrix product `self * rhs` (apply `rhs` first).
    pub fn compose(&self, rhs: &Sl2z) -> Sl2z {
        Sl2z {
            a: self.a * rhs.a + self.b * rhs.c,
            b: self.a * rhs.b + self.b * rhs.d,
            c: self.c * rhs.a + self.d * rhs.c,
            d: self.c * rhs.b + self.d * rhs.d,
        }
    }

    pub fn apply(&self, tau: Complex64) -> Complex64 {
        let num = tau * self.a as f64 + self.b as f64;
        let den = tau * self.c as f64 + self.d as f64;
        num / den
    }
}

const BOUNDARY_EPS: f64 = 1e-14;

/// Reduce `tau` into the closed standard fundamental domain
/// `|Re tau| <= 1/2, |tau| >= 1`, returning the reduced modulus and the
/// matrix that maps `tau` onto it.
///
/// On the boundary the representative with `Re tau` in `[0, 1/2]` is chosen.
pub fn reduce_modulus(tau: Complex64) -> Result<(Complex64, Sl2z)> {
    if !(tau.im > 0.0) {
        return Err(Error::NonPositiveImaginaryPart(tau.im));
    }
    let mut m = Sl2z::IDENTITY;
    let mut cur = tau;
    for _ in 0..1000 {
        let k = (cur.re + 0.5).floor() as i64;
        if k != 0 {
            m = Sl2z::translation(-k).compose(&m);
            cur = m.apply(tau);
        }
        if cur.norm_sqr() < 1.0 - BOUNDARY_EPS {
            m = Sl2z::S.compose(&m);
            cur = m.apply(tau);
        } else {
            break;
        }
    }
    // ties on the boundary go to Re tau >= 0
    if cur.re < -0.5 + BOUNDARY_EPS {
        m = Sl2z::translation(1).compose(&m);
        cur = m.apply(tau);
    }
    if cur.re < 0.0 && (cur.norm_sqr() - 1.0).abs() <= BOUNDARY_EPS {
        m = Sl2z::S.compose(&m);
        cur = m.apply(tau);
    }
    Ok((cur, m))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn make_torus_caches_b() {
        let t = make_torus(c(0.0, 1.0)).unwrap();
        assert_eq!(t.b(), 1.0);
        assert_eq!(t.area(), 1.0);
        let t = make_torus(c(0.5, 0.6)).unwrap();
        assert_eq!(t.b(), 0.6);
        assert_eq!(
            make_torus(c(0.5, -0.1)),
            Err(Error::NonPositiveImaginaryPart(-0.1))
        );
        assert!(make_torus(c(0.5, 0.0)).is_err());
    }

    #[test]
    fn reduce_square_is_identity() {
        let (r, m) = reduce_modulus(c(0.0, 1.0)).unwrap();
        assert_eq!(r, c(0.0, 1.0));
        assert_eq!(m, Sl2z::IDENTITY);
    }

    #[test]
    fn reduce_one_plus_i() {
        // 1 + i = 1/(1 - tau0) with tau0 = (1 + i)/2
        let tau0 = c(0.5, 0.5);
        let tau = Complex64::new(1.0, 0.0) / (Complex64::new(1.0, 0.0) - tau0);
        assert!((tau - c(1.0, 1.0)).norm() < 1e-15);
        let (r, m) = reduce_modulus(tau).unwrap();
        assert!((r - c(0.0, 1.0)).norm() < 1e-14);
        assert_eq!(m.det(), 1);
        // tau0 itself lands on i as well
        let (r0, m0) = reduce_modulus(tau0).unwrap();
        assert!((r0 - c(0.0, 1.0)).norm() < 1e-14);
        assert_eq!(m0.det(), 1);
    }

    #[test]
    fn reduce_low_point() {
        let tau = c(0.5, 0.1);
        let (r, m) = reduce_modulus(tau).unwrap();
        assert!(r.im >= 3f64.sqrt() / 2.0 - 1e-14);
        assert!(r.re.abs() <= 0.5 + 1e-14);
        assert!(r.norm() >= 1.0 - 1e-14);
        assert_eq!(m.det(), 1);
        assert!((m.apply(tau) - r).norm() < 1e-14 * r.norm());
    }

    #[test]
    fn reduce_boundary_ties() {
        let (r, _) = reduce_modulus(c(-0.5, 2.0)).unwrap();
        assert_eq!(r.re, 0.5);
        let w = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0);
        let (r, m) = reduce_modulus(w).unwrap();
        assert!(r.re >= 0.0);
        assert!((m.apply(w) - r).norm() < 1e-14);
        let w = Complex64::from_polar(1.0, 1.7);
        let (r, _) = reduce_modulus(w).unwrap();
        assert!(r.re >= 0.0 && (r.norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn wrap_lattice_point_and_boundary() {
        let t = make_torus(c(0.3, 0.7)).unwrap();
        let p = wrap_point(Complex64::new(1.0, 0.0) + t.tau(), &t);
        assert!(p.t.abs() < 1e-15 && p.s.abs() < 1e-15);
        let p = wrap_point(t.point(0.5, 0.5), &t);
        assert_eq!((p.t, p.s), (-0.5, -0.5));
    }

    #[test]
    fn wrap_solves_linear_system() {
        let t = make_torus(c(0.5, 0.6)).unwrap();
        let z = c(1.25, 0.6 * 1.25);
        // 1.25 + 0.75 i = t + s (0.5 + 0.6 i): s = 1.25, t = 0.625
        let p = wrap_point(z, &t);
        assert!((p.s - 0.25).abs() < 1e-14);
        assert!((p.t - (-0.375)).abs() < 1e-14);
        let back = p.to_point(&t);
        let diff = z - back;
        let (dt, ds) = t.coords(diff);
        assert!((dt - dt.round()).abs() < 1e-14 && (ds - ds.round()).abs() < 1e-14);
    }

    #[test]
    fn wrap_unit_half_open() {
        assert_eq!(wrap_unit(0.5), -0.5);
        assert_eq!(wrap_unit(-0.5), -0.5);
        assert_eq!(wrap_unit(1.25), 0.25);
        assert!(wrap_unit(0.49999999999999994) < 0.5);
        assert!(wrap_unit(-1e-18) < 0.5);
    }

    #[test]
    fn distance_mod_sign_identifies_negatives() {
        let a = LatticeCoords::new(1.0 / 3.0, 1.0 / 3.0);
        let b = LatticeCoords::new(-1.0 / 3.0, 2.0 / 3.0);
        assert!(a.distance_mod_sign(&b) < 1e-15);
    }
}
