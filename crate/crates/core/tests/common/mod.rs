//! Shared helpers and independent oracles for the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use num_complex::Complex64;
pub use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use torus_green::{LogComplex, Torus};

pub const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn hexagonal() -> Torus {
    Torus::new(c(0.5, 3f64.sqrt() / 2.0)).unwrap()
}

/// Random torus with `|Re tau| <= 1/2` and `Im tau` in `[b_lo, b_hi]`.
pub fn random_torus<R: Rng>(r: &mut R, b_lo: f64, b_hi: f64) -> Torus {
    Torus::new(c(r.gen_range(-0.5..0.5), r.gen_range(b_lo..b_hi))).unwrap()
}

/// Random point `t + s tau` with `t, s` in `[-span, span]`, at least `min_dist`
/// away from every lattice point.
pub fn random_point<R: Rng>(r: &mut R, torus: &Torus, span: f64, min_dist: f64) -> Complex64 {
    loop {
        let z = torus.point(r.gen_range(-span..span), r.gen_range(-span..span));
        if torus.distance_to_lattice(z) > min_dist {
            return z;
        }
    }
}

/// `|a / b - 1|`.
pub fn rel_log(a: LogComplex, b: LogComplex) -> f64 {
    ((a / b).to_complex_unchecked() - 1.0).norm()
}

pub fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}

/// `theta_1` by the plain series `-i sum (-1)^n q^{(n+1/2)^2} e^{(2n+1) pi i z}`
/// over `|n| <= n_max`, with no reduction of `z` or `tau`.
pub fn theta1_series(z: Complex64, tau: Complex64, n_max: i64) -> Complex64 {
    let mut s = Complex64::new(0.0, 0.0);
    for n in -n_max..=n_max {
        let k = n as f64 + 0.5;
        let term = (I * PI * tau * k * k + I * PI * (2.0 * k) * z).exp();
        s += if n % 2 == 0 { term } else { -term };
    }
    -I * s
}

/// `theta_1` by the Jacobi triple product
/// `2 q^{1/4} sin(pi z) prod (1 - q^{2n})(1 - q^{2n} e^{2 pi i z})(1 - q^{2n} e^{-2 pi i z})`.
pub fn theta1_product(z: Complex64, tau: Complex64, terms: usize) -> Complex64 {
    let q4 = (I * PI * tau / 4.0).exp();
    let q2 = (I * 2.0 * PI * tau).exp();
    let e = (I * 2.0 * PI * z).exp();
    let mut p = 2.0 * q4 * (PI * z).sin();
    let mut q2n = Complex64::new(1.0, 0.0);
    for _ in 0..terms {
        q2n *= q2;
        p *= (1.0 - q2n) * (1.0 - q2n * e) * (1.0 - q2n / e);
    }
    p
}

/// `wp(z)` from the lattice sum over `|n| <= rows`, each row summed in
/// closed form: `sum_m (z - m - n tau)^{-2} = pi^2 / sin^2(pi (z - n tau))`.
pub fn wp_lattice_sum(z: Complex64, tau: Complex64, rows: i64) -> Complex64 {
    let csc2 = |w: Complex64| {
        let s = (PI * w).sin();
        PI * PI / (s * s)
    };
    let mut sum = csc2(z) - PI * PI / 3.0;
    for n in 1..=rows {
        let nt = tau * n as f64;
        sum += csc2(z - nt) + csc2(z + nt) - 2.0 * csc2(nt);
    }
    sum
}

/// `eta_1 = (pi^2 / 3) E_2(tau)` with `E_2 = 1 - 24 sum sigma_1(n) q^{2n}`.
pub fn eta1_eisenstein(tau: Complex64) -> Complex64 {
    let q2 = (I * 2.0 * PI * tau).exp();
    let mut e2 = Complex64::new(1.0, 0.0);
    let mut qn = Complex64::new(1.0, 0.0);
    for n in 1..2000u64 {
        qn *= q2;
        let sigma1: u64 = (1..=n).filter(|d| n % d == 0).sum();
        e2 -= 24.0 * sigma1 as f64 * qn;
        if qn.norm() * ((n * n) as f64) < 1e-20 {
            break;
        }
    }
    PI * PI / 3.0 * e2
}
