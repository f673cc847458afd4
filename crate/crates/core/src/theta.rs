//! Jacobi theta functions with quasi-period and modular reduction.
//!
//! `theta_1(z; tau) = -i sum_n (-1)^n q^{(n+1/2)^2} e^{(2n+1) pi i z}`, `q = e^{pi i tau}`.
//!
//! The point is first reduced into the cell `|Im z| <= b/2`, the
//! quasi-period factor `(-1)^{m+n} q^{-n^2} e^{-2 pi i n w}` is carried in log
//! space, and the series is summed with every term scaled by the dominant
//! `n = 0` magnitude. Moduli with `Im tau < 1/2` are first pushed up the
//! modular tower with `tau -> tau - k` and `tau -> -1/tau`.

use std::f64::consts::{LN_2, PI};
use std::ops::{Div, Mul, Neg};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::{split_point, Torus};

/// Below this imaginary part the direct series is replaced by the modular
/// transformation.
pub const DIRECT_SERIES_MIN_B: f64 = 0.5;

/// Smallest `b` accepted by the `b`-derivative evaluators.
pub const B_FLOOR: f64 = 1e-2;

const MAX_TERMS: usize = 64;
const MAX_MODULAR_DEPTH: usize = 48;
const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// A complex number stored as `exp(log_mag + i arg)`.
///
/// Zero is represented by `log_mag = -inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogComplex {
    pub log_mag: f64,
    pub arg: f64,
}

impl LogComplex {
    pub const ZERO: LogComplex = LogComplex {
        log_mag: f64::NEG_INFINITY,
        arg: 0.0,
    };
    pub const ONE: LogComplex = LogComplex {
        log_mag: 0.0,
        arg: 0.0,
    };

    /// `e^w`.
    pub fn exp(w: Complex64) -> Self {
        LogComplex {
            log_mag: w.re,
            arg: normalize_arg(w.im),
        }
    }

    pub fn from_complex(c: Complex64) -> Self {
        if c.re == 0.0 && c.im == 0.0 {
            LogComplex::ZERO
        } else {
            LogComplex {
                log_mag: c.norm().ln(),
                arg: c.arg(),
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.log_mag == f64::NEG_INFINITY
    }

    /// The principal logarithm `log_mag + i arg`.
    pub fn ln(&self) -> Complex64 {
        Complex64::new(self.log_mag, self.arg)
    }

    /// The raw complex value, when its magnitude is representable with margin.
    pub fn to_complex(&self) -> Option<Complex64> {
        if self.is_zero() {
            Some(Complex64::new(0.0, 0.0))
        } else if self.log_mag.abs() < 300.0 {
            Some(self.to_complex_unchecked())
        } else {
            None
        }
    }

    pub fn to_complex_unchecked(&self) -> Complex64 {
        Complex64::from_polar(self.log_mag.exp(), self.arg)
    }

    pub fn powi(&self, k: i32) -> Self {
        LogComplex {
            log_mag: self.log_mag * k as f64,
            arg: normalize_arg(self.arg * k as f64),
        }
    }
}

impl Mul for LogComplex {
    type Output = LogComplex;
    fn mul(self, rhs: LogComplex) -> LogComplex {
        if self.is_zero() || rhs.is_zero() {
            return LogComplex::ZERO;
        }
        LogComplex {
            log_mag: self.log_mag + rhs.log_mag,
            arg: normalize_arg(self.arg + rhs.arg),
        }
    }
}

impl Div for LogComplex {
    type Output = LogComplex;
    fn div(self, rhs: LogComplex) -> LogComplex {
        if self.is_zero() {
            return LogComplex::ZERO;
        }
        LogComplex {
            log_mag: self.log_mag - rhs.log_mag,
            arg: normalize_arg(self.arg - rhs.arg),
        }
    }
}

impl Neg for LogComplex {
    type Output = LogComplex;
    fn neg(self) -> LogComplex {
        if self.is_zero() {
            return self;
        }
        LogComplex {
            log_mag: self.log_mag,
            arg: normalize_arg(self.arg + PI),
        }
    }
}

/// Map an angle into `(-pi, pi]`.
fn normalize_arg(a: f64) -> f64 {
    if a > -PI && a <= PI {
        return a;
    }
    let two_pi = 2.0 * PI;
    let r = a - two_pi * ((a + PI) / two_pi).floor();
    if r <= -PI {
        r + two_pi
    } else if r > PI {
        r - two_pi
    } else {
        r
    }
}

/// Value of `theta_1` together with the first four `z`-derivatives of its
/// logarithm. The derivatives are infinite at zeros.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Theta1Jet {
    pub value: LogComplex,
    /// `(log theta_1)^{(k)}` for `k = 1..=4`.
    pub logd: [Complex64; 4],
}

impl Theta1Jet {
    fn zero() -> Self {
        let inf = Complex64::new(f64::INFINITY, 0.0);
        Theta1Jet {
            value: LogComplex::ZERO,
            logd: [inf; 4],
        }
    }

    pub fn is_zero(&self) -> bool {
        self.value.is_zero()
    }

    /// `theta^{(k)} / theta` for `k = 1..=4`, from the log-derivatives.
    pub fn ratios(&self) -> [Complex64; 4] {
        let [l1, l2, l3, l4] = self.logd;
        let p1 = l1;
        let p2 = l2 + l1 * l1;
        let p3 = l3 + 3.0 * l1 * l2 + l1 * l1 * l1;
        let p4 = l4 + 4.0 * l1 * l3 + 3.0 * l2 * l2 + 6.0 * l1 * l1 * l2 + l1 * l1 * l1 * l1;
        [p1, p2, p3, p4]
    }
}

/// `(sin x, cos x) * e^{-|Im x|}`, finite for any `x`.
#[inline]
fn scaled_sin_cos(x: Complex64) -> (Complex64, Complex64) {
    let (sa, ca) = x.re.sin_cos();
    let y = x.im;
    let e = (-2.0 * y.abs()).exp();
    let ch = 0.5 * (1.0 + e);
    let sh = -0.5 * (-2.0 * y.abs()).exp_m1() * y.signum();
    (
        Complex64::new(sa * ch, ca * sh),
        Complex64::new(ca * ch, -sa * sh),
    )
}

/// Direct series on a point already inside the canonical cell.
fn series_jet(w: Complex64, tau: Complex64) -> Theta1Jet {
    if w.re == 0.0 && w.im == 0.0 {
        return Theta1Jet::zero();
    }
    let a = tau.re;
    let b = tau.im;
    let y = w.im.abs();
    let l0 = -PI * b * 0.25 + PI * y;
    let mut s = [Complex64::new(0.0, 0.0); 5];
    for n in 0..MAX_TERMS {
        let nf = n as f64;
        let half = nf + 0.5;
        let k = (2.0 * nf + 1.0) * PI;
        let ln_mag = -PI * b * half * half + (2.0 * nf + 1.0) * PI * y - l0;
        let mag = ln_mag.exp();
        let phase = PI * nf + PI * a * half * half;
        let coef = Complex64::from_polar(mag, phase);
        let (ss, cc) = scaled_sin_cos(w * k);
        let k2 = k * k;
        s[0] += coef * ss;
        s[1] += coef * cc * k;
        s[2] -= coef * ss * k2;
        s[3] -= coef * cc * (k2 * k);
        s[4] += coef * ss * (k2 * k2);
        if n >= 1 {
            let bound = mag * k2 * k2;
            let scale = s[0].norm().max(1e-300);
            if bound < 1e-17 * scale && bound < 1e-17 * s[4].norm().max(1e-300) {
                break;
            }
        }
    }
    if s[0].re == 0.0 && s[0].im == 0.0 {
        return Theta1Jet::zero();
    }
    let lv = LogComplex::from_complex(s[0]);
    let value = LogComplex {
        log_mag: LN_2 + l0 + lv.log_mag,
        arg: lv.arg,
    };
    let p1 = s[1] / s[0];
    let p2 = s[2] / s[0];
    let p3 = s[3] / s[0];
    let p4 = s[4] / s[0];
    let l1 = p1;
    let l2 = p2 - p1 * p1;
    let l3 = p3 - 3.0 * p1 * p2 + 2.0 * p1 * p1 * p1;
    let l4 = p4 - 4.0 * p1 * p3 - 3.0 * p2 * p2 + 12.0 * p1 * p1 * p2 - 6.0 * p1 * p1 * p1 * p1;
    Theta1Jet {
        value,
        logd: [l1, l2, l3, l4],
    }
}

/// `theta_1(z; tau)` and its log-derivatives for any `z` and `Im tau > 0`.
pub(crate) fn theta1_jet(z: Complex64, tau: Complex64) -> Theta1Jet {
    jet_rec(z, tau, 0)
}

fn jet_rec(z: Complex64, tau: Complex64, depth: usize) -> Theta1Jet {
    // quasi-period reduction: theta(w + m + n tau) = (-1)^{m+n} q^{-n^2} e^{-2 pi i n w} theta(w)
    let torus = Torus::new(tau).expect("modulus in upper half plane");
    let sp = split_point(z, &torus);
    let (w, m, n) = (sp.w, sp.m, sp.n);
    let nf = n as f64;
    let factor = I * PI * ((m + n) as f64) - I * PI * tau * (nf * nf) - 2.0 * PI * I * nf * w;
    let shift = Complex64::new(0.0, -2.0 * PI * nf);

    let inner = if tau.im >= DIRECT_SERIES_MIN_B || depth >= MAX_MODULAR_DEPTH {
        series_jet(w, tau)
    } else {
        modular_jet(w, tau, depth)
    };
    if inner.is_zero() {
        return inner;
    }
    let mut logd = inner.logd;
    logd[0] += shift;
    Theta1Jet {
        value: inner.value * LogComplex::exp(factor),
        logd,
    }
}

/// One step up the modular tower: translate, then invert.
fn modular_jet(w: Complex64, tau: Complex64, depth: usize) -> Theta1Jet {
    let k = tau.re.round();
    let tau0 = tau - k;
    // theta(z; tau) = e^{pi i k / 4} theta(z; tau - k)
    let translate = LogComplex::exp(I * (PI * k / 4.0));
    let tp = -1.0 / tau0;
    let inner = jet_rec(w * tp, tp, depth + 1);
    if inner.is_zero() {
        return inner;
    }
    let pref = inversion_prefactor(w, tp);
    let [m1, m2, m3, m4] = inner.logd;
    let logd = [
        2.0 * PI * I * tp * w + tp * m1,
        2.0 * PI * I * tp + tp * tp * m2,
        tp * tp * tp * m3,
        tp * tp * tp * tp * m4,
    ];
    Theta1Jet {
        value: translate * pref * inner.value,
        logd,
    }
}

/// `-i (-i tau')^{1/2} e^{pi i tau' z^2}` in log space.
fn inversion_prefactor(z: Complex64, tp: Complex64) -> LogComplex {
    let root = (-I * tp).ln() * 0.5;
    LogComplex::exp(-I * (PI / 2.0) + root + I * PI * tp * z * z)
}

/// `theta_1(z; tau)`; a lattice point yields [`LogComplex::ZERO`].
pub fn theta1(z: Complex64, torus: &Torus) -> LogComplex {
    theta1_jet(z, torus.tau()).value
}

/// `(log theta_1)_z` (order 1) or `(log theta_1)_zz` (order 2).
pub fn theta1_logderiv_z(z: Complex64, torus: &Torus, order: u8) -> Result<Complex64> {
    if !(1..=2).contains(&order) {
        return Err(Error::InvalidArgument(format!(
            "logarithmic derivative order must be 1 or 2, got {order}"
        )));
    }
    let jet = theta1_jet(z, torus.tau());
    if jet.is_zero() {
        return Err(Error::PoleAtLattice);
    }
    Ok(jet.logd[order as usize - 1])
}

/// `theta_1(z; tau)` evaluated through `tau' = -1/tau`:
/// `theta_1(z; tau) = -i (-i tau')^{1/2} e^{pi i tau' z^2} theta_1(z tau'; tau')`.
pub fn jacobi_imaginary(z: Complex64, tau: Complex64) -> Result<LogComplex> {
    if !(tau.im > 0.0) {
        return Err(Error::NonPositiveImaginaryPart(tau.im));
    }
    let tp = -1.0 / tau;
    let inner = theta1_jet(z * tp, tp).value;
    Ok(inversion_prefactor(z, tp) * inner)
}

/// Null values of the theta functions for one modulus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaSpecials {
    pub th2_0: Complex64,
    pub th3_0: Complex64,
    pub th4_0: Complex64,
    pub th1p_0: Complex64,
    pub th1ppp_0: Complex64,
}

/// Null values `theta_2(0), theta_3(0), theta_4(0), theta_1'(0), theta_1'''(0)`.
pub fn theta_specials(torus: &Torus) -> ThetaSpecials {
    let tau = torus.tau();
    let th1p = theta1_prime0(tau).to_complex_unchecked();
    let r3 = theta1_r3(tau);
    if tau.im >= DIRECT_SERIES_MIN_B {
        let (th2, th3, th4) = null_series(tau);
        ThetaSpecials {
            th2_0: th2,
            th3_0: th3,
            th4_0: th4,
            th1p_0: th1p,
            th1ppp_0: th1p * r3,
        }
    } else {
        // theta_2(0) = theta_1(1/2), theta_3(0) = e^{pi i tau/4} theta_1((1-tau)/2),
        // theta_4(0) = i e^{pi i tau/4} theta_1(-tau/2)
        let q4 = LogComplex::exp(I * PI * tau / 4.0);
        let half = Complex64::new(0.5, 0.0);
        let th2 = theta1_jet(half, tau).value;
        let th3 = q4 * theta1_jet((1.0 - tau) / 2.0, tau).value;
        let th4 = LogComplex::exp(I * PI / 2.0) * q4 * theta1_jet(-tau / 2.0, tau).value;
        ThetaSpecials {
            th2_0: th2.to_complex_unchecked(),
            th3_0: th3.to_complex_unchecked(),
            th4_0: th4.to_complex_unchecked(),
            th1p_0: th1p,
            th1ppp_0: th1p * r3,
        }
    }
}

fn null_series(tau: Complex64) -> (Complex64, Complex64, Complex64) {
    let mut th2 = Complex64::new(0.0, 0.0);
    let mut th3 = Complex64::new(1.0, 0.0);
    let mut th4 = Complex64::new(1.0, 0.0);
    for n in 0..MAX_TERMS {
        let nf = n as f64;
        let h = (I * PI * tau * (nf + 0.5) * (nf + 0.5)).exp();
        th2 += 2.0 * h;
        if n >= 1 {
            let qn = (I * PI * tau * nf * nf).exp();
            th3 += 2.0 * qn;
            th4 += if n % 2 == 1 { -2.0 * qn } else { 2.0 * qn };
        }
        if h.norm() < 1e-18 && n >= 1 {
            break;
        }
    }
    (th2, th3, th4)
}

/// `theta_1'(0; tau)`.
pub(crate) fn theta1_prime0(tau: Complex64) -> LogComplex {
    prime0_rec(tau, 0)
}

fn prime0_rec(tau: Complex64, depth: usize) -> LogComplex {
    if tau.im >= DIRECT_SERIES_MIN_B || depth >= MAX_MODULAR_DEPTH {
        let (p1, _) = derivative_series_at_zero(tau);
        return p1;
    }
    let k = tau.re.round();
    let tau0 = tau - k;
    let tp = -1.0 / tau0;
    let translate = LogComplex::exp(I * (PI * k / 4.0));
    let pref = inversion_prefactor(Complex64::new(0.0, 0.0), tp);
    translate * pref * LogComplex::from_complex(tp) * prime0_rec(tp, depth + 1)
}

/// `theta_1'''(0) / theta_1'(0)`.
pub(crate) fn theta1_r3(tau: Complex64) -> Complex64 {
    r3_rec(tau, 0)
}

fn r3_rec(tau: Complex64, depth: usize) -> Complex64 {
    if tau.im >= DIRECT_SERIES_MIN_B || depth >= MAX_MODULAR_DEPTH {
        let (_, r3) = derivative_series_at_zero(tau);
        return r3;
    }
    let tau0 = tau - tau.re.round();
    let tp = -1.0 / tau0;
    tp * tp * r3_rec(tp, depth + 1) + 6.0 * PI * I * tp
}

/// `theta_1'(0)` in log form and the ratio `theta_1'''(0)/theta_1'(0)`.
fn derivative_series_at_zero(tau: Complex64) -> (LogComplex, Complex64) {
    // factor out q^{1/4}: terms (-1)^n (2n+1)^{1,3} q^{n(n+1)}
    let mut s1 = Complex64::new(0.0, 0.0);
    let mut s3 = Complex64::new(0.0, 0.0);
    for n in 0..MAX_TERMS {
        let nf = n as f64;
        let k = 2.0 * nf + 1.0;
        let qn = (I * PI * tau * (nf * (nf + 1.0))).exp();
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        s1 += sign * k * qn;
        s3 += sign * k * k * k * qn;
        if n >= 1 && qn.norm() * k * k * k < 1e-18 {
            break;
        }
    }
    let p1 = LogComplex::exp(I * PI * tau / 4.0) * LogComplex::from_complex(2.0 * PI * s1);
    (p1, -PI * PI * s3 / s1)
}

/// Derivatives in `b` of `log|theta_1(z; 1/2 + i b)|` for real `z`.
///
/// At `z = 1/2` with `b >= 1/2` the termwise-differentiated series in
/// `r = e^{-2 pi b}` is used; elsewhere the heat equation turns the
/// `tau`-derivatives into `z`-derivatives of the (modularly reduced) jet.
pub fn log_theta1_b_derivs(z: f64, b: f64) -> Result<(f64, f64)> {
    if !(b > 0.0) {
        return Err(Error::NonPositiveImaginaryPart(b));
    }
    if b < B_FLOOR {
        return Err(Error::Unconverged(format!(
            "b = {b} is below the working floor {B_FLOOR}"
        )));
    }
    let frac = z - z.floor();
    if (frac - 0.5).abs() < 1e-15 && b >= DIRECT_SERIES_MIN_B {
        return Ok(half_point_b_series(b));
    }
    Ok(b_derivs_via_heat(z, b))
}

/// `d/db` and `d^2/db^2` of `log|theta_1(1/2; 1/2 + i b)|` via
/// `|theta_1| = 2 h sum (-1)^{A_n} r^{A_n}`, `A_n = n(n+1)/2`, `h = e^{-pi b/4}`.
pub(crate) fn half_point_b_series(b: f64) -> (f64, f64) {
    let r = (-2.0 * PI * b).exp();
    let mut terms: Vec<(f64, f64)> = Vec::new();
    for n in 0..MAX_TERMS {
        let a_n = (n * (n + 1) / 2) as f64;
        let sign = if (n * (n + 1) / 2) % 2 == 0 { 1.0 } else { -1.0 };
        let t = sign * r.powf(a_n);
        terms.push((a_n, t));
        if n >= 1 && t.abs() * (2 * n + 1).pow(4) as f64 * a_n * a_n < 1e-20 {
            break;
        }
    }
    let base: f64 = terms.iter().map(|&(_, t)| t).sum();
    let d1_num: f64 = terms
        .iter()
        .map(|&(a, t)| (8.0 * a + 1.0) * t)
        .sum();
    let d1 = -(PI / 4.0) * d1_num / base;
    let mut cross = 0.0;
    for (i, &(an, tn)) in terms.iter().enumerate() {
        for &(am, tm) in &terms[..i] {
            cross += (an - am) * (an - am) * tn * tm;
        }
    }
    let d2 = 4.0 * PI * PI * cross / (base * base);
    (d1, d2)
}

fn b_derivs_via_heat(z: f64, b: f64) -> (f64, f64) {
    let tau = Complex64::new(0.5, b);
    let jet = theta1_jet(Complex64::new(z, 0.0), tau);
    let [_, p2, _, p4] = jet.ratios();
    // theta_tau = theta_zz / (4 pi i),  d/db = i d/dtau
    let d1 = p2 / (4.0 * PI);
    let d2 = (p4 - p2 * p2) / (16.0 * PI * PI);
    (d1.re, d2.re)
}

/// `(log|theta_3(0)|)_b` and `(log|theta_3(0)|)_bb` on `Re tau = 1/2`, from
/// `theta_3(0) = sum_{n even} r^{n^2} + i sum_{m odd} r^{m^2}`, `r = e^{-pi b}`.
pub fn log_theta3_null_b_derivs(b: f64) -> Result<(f64, f64)> {
    if !(b > 0.0) {
        return Err(Error::NonPositiveImaginaryPart(b));
    }
    if b < B_FLOOR {
        return Err(Error::Unconverged(format!(
            "b = {b} is below the working floor {B_FLOOR}"
        )));
    }
    // u = Re, v = Im, each with first and second b-derivatives
    let mut u = [0.0f64; 3];
    let mut v = [0.0f64; 3];
    let mut n = 0i64;
    loop {
        let k = (n * n) as f64;
        let t = (-PI * b * k).exp();
        let mult = if n == 0 { 1.0 } else { 2.0 };
        let vals = [mult * t, -mult * PI * k * t, mult * PI * PI * k * k * t];
        let dst = if n % 2 == 0 { &mut u } else { &mut v };
        for j in 0..3 {
            dst[j] += vals[j];
        }
        if n >= 2 && vals[2].abs() < 1e-18 * u[0] && t < 1e-18 {
            break;
        }
        n += 1;
        if n > 4000 {
            return Err(Error::Unconverged("theta_3 null series".into()));
        }
    }
    // N = |theta_3|^2 = u^2 + v^2
    let nn = u[0] * u[0] + v[0] * v[0];
    let n1 = 2.0 * (u[0] * u[1] + v[0] * v[1]);
    let n2 = 2.0 * (u[1] * u[1] + u[0] * u[2] + v[1] * v[1] + v[0] * v[2]);
    let d1 = 0.5 * n1 / nn;
    let d2 = 0.5 * (n2 / nn - (n1 / nn) * (n1 / nn));
    Ok((d1, d2))
}
