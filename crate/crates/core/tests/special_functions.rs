mod common;

use std::f64::consts::PI;

use common::*;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;
use torus_green::theta::{jacobi_imaginary, theta1, theta1_logderiv_z, theta_specials};
use torus_green::weier::Weierstrass;
use torus_green::{Error, LogComplex, Torus};

#[test]
fn theta1_matches_plain_series() {
    let mut r = rng(1);
    for _ in 0..100 {
        let t = random_torus(&mut r, 0.3, 3.0);
        let z = random_point(&mut r, &t, 0.5, 1e-3);
        let got = theta1(z, &t);
        let want = theta1_series(z, t.tau(), 60);
        assert!(rel_log(got, LogComplex::from_complex(want)) < 1e-11, "{z} {}", t.tau());
    }
}

#[test]
fn theta1_at_half_on_rhombic_line() {
    let t = Torus::new(c(0.5, 1.0)).unwrap();
    let v = theta1(c(0.5, 0.0), &t).to_complex_unchecked();
    let want = c(0.84089055026634234585783005194, 0.34830827039169381267770761416);
    assert!((v - want).norm() < 1e-14, "{v}");
    // e^{-i pi/8} theta_1(1/2) is real and positive
    let twisted = v * (-I * PI / 8.0).exp();
    assert!(twisted.re > 0.0 && twisted.im.abs() < 1e-15);
}

#[test]
fn theta1_quasi_periodicity() {
    let mut r = rng(2);
    for _ in 0..200 {
        let t = random_torus(&mut r, 0.2, 4.0);
        let z = random_point(&mut r, &t, 2.0, 1e-3);
        let tau = t.tau();
        let th = theta1(z, &t);
        let th1 = theta1(z + 1.0, &t);
        assert!(rel_log(-th1, th) < 1e-12);
        // theta_1(z + tau) q e^{2 pi i z} = -theta_1(z), q = e^{pi i tau}
        let shifted = theta1(z + tau, &t) * LogComplex::exp(I * PI * tau + 2.0 * PI * I * z);
        assert!(rel_log(-shifted, th) < 1e-12, "{z} {tau}");
    }
}

#[test]
fn theta1_odd() {
    let mut r = rng(3);
    for _ in 0..50 {
        let t = random_torus(&mut r, 0.2, 3.0);
        let z = random_point(&mut r, &t, 1.0, 1e-3);
        assert!(rel_log(-theta1(-z, &t), theta1(z, &t)) < 1e-13);
    }
}

#[test]
fn theta1_zero_sentinel() {
    let t = Torus::new(c(0.2, 0.9)).unwrap();
    assert!(theta1(c(0.0, 0.0), &t).is_zero());
    assert_eq!(theta1_logderiv_z(t.tau() + 1.0, &t, 1), Err(Error::PoleAtLattice));
}

#[test]
fn triple_product() {
    let mut r = rng(4);
    for _ in 0..100 {
        let b = r.gen_range(0.2..10.0);
        let t = Torus::new(c(r.gen_range(-0.5..0.5), b)).unwrap();
        // keep |Im z| <= b/2 so the product stays well conditioned
        let z = t.point(r.gen_range(-0.5..0.5), r.gen_range(-0.5..0.5));
        if t.distance_to_lattice(z) < 1e-2 {
            continue;
        }
        let got = theta1(z, &t);
        let want = theta1_product(z, t.tau(), 400);
        assert!(rel_log(got, LogComplex::from_complex(want)) < 1e-12, "{z} {}", t.tau());
    }
}

#[test]
fn theta_prime_triple_product() {
    for b in [0.2, 0.35, 0.5, 0.8, 1.0, 2.5, 10.0] {
        for a in [0.0, 0.25, 0.5] {
            let t = Torus::new(c(a, b)).unwrap();
            let sp = theta_specials(&t);
            let prod = PI * sp.th2_0 * sp.th3_0 * sp.th4_0;
            assert!(rel(sp.th1p_0, prod) < 1e-12, "tau = {}", t.tau());
        }
    }
}

#[test]
fn theta_nulls_on_rhombic_line() {
    for b in [0.3, 0.6, 1.0, 1.7] {
        let t = Torus::rhombic(b).unwrap();
        let sp = theta_specials(&t);
        assert!((sp.th4_0 - sp.th3_0.conj()).norm() < 1e-13, "b = {b}");
        // theta_3(0) = sum_{n even} r^{n^2} + i sum_{m odd} r^{m^2}, r = e^{-pi b}
        let rr = (-PI * b).exp();
        let (mut re, mut im) = (0.0, 0.0);
        for n in -30i32..=30 {
            let v = rr.powi(n * n);
            if n % 2 == 0 {
                re += v;
            } else {
                im += v;
            }
        }
        assert!((sp.th3_0 - c(re, im)).norm() < 1e-13, "b = {b}");
    }
    let far = theta_specials(&Torus::new(c(0.1, 12.0)).unwrap());
    assert!((far.th3_0 - 1.0).norm() < 1e-15 && (far.th4_0 - 1.0).norm() < 1e-15);
}

#[test]
fn heat_equation() {
    let mut r = rng(5);
    let h = 1e-5;
    for _ in 0..100 {
        let t = random_torus(&mut r, 0.3, 2.0);
        let z = random_point(&mut r, &t, 0.5, 0.05);
        let tau = t.tau();
        let l1 = theta1_logderiv_z(z, &t, 1).unwrap();
        let l2 = theta1_logderiv_z(z, &t, 2).unwrap();
        let lhs = l2 + l1 * l1;
        let th = theta1(z, &t);
        let up = theta1(z, &Torus::new(tau + h).unwrap()) / th;
        let dn = theta1(z, &Torus::new(tau - h).unwrap()) / th;
        let dtau = (up.to_complex_unchecked() - dn.to_complex_unchecked()) / (2.0 * h);
        let rhs = 4.0 * PI * I * dtau;
        assert!((lhs - rhs).norm() < 1e-7 * lhs.norm().max(1.0), "{z} {tau}: {lhs} vs {rhs}");
    }
}

#[test]
fn logderiv_matches_finite_difference() {
    let t = Torus::new(I).unwrap();
    let z = c(0.3, 0.2);
    let h = 1e-5;
    let fd = ((theta1(z + h, &t) / theta1(z - h, &t)).ln()) / (2.0 * h);
    let l1 = theta1_logderiv_z(z, &t, 1).unwrap();
    assert!((fd - l1).norm() < 1e-8);
    let l1_shift = theta1_logderiv_z(z + 1.0, &t, 1).unwrap();
    assert!((l1_shift - l1).norm() < 1e-12);
}

#[test]
fn jacobi_imaginary_cross_path() {
    let mut r = rng(6);
    for _ in 0..100 {
        let t = random_torus(&mut r, 0.15, 3.0);
        let z = random_point(&mut r, &t, 0.5, 1e-3);
        let a = jacobi_imaginary(z, t.tau()).unwrap();
        let b = theta1(z, &t);
        assert!(rel_log(a, b) < 1e-10, "{z} {}", t.tau());
    }
    let sq = Torus::new(I).unwrap();
    let z = c(0.3, 0.0);
    assert!(rel_log(jacobi_imaginary(z, I).unwrap(), theta1(z, &sq)) < 1e-12);
    let thin = Torus::new(c(0.5, 0.1)).unwrap();
    let half = c(0.5, 0.0);
    let direct = theta1_series(half, thin.tau(), 200);
    let a = jacobi_imaginary(half, thin.tau()).unwrap();
    assert!(rel_log(a, LogComplex::from_complex(direct)) < 1e-10);
    assert!(rel_log(theta1(half, &thin), a) < 1e-10);
    assert!(jacobi_imaginary(half, c(0.1, -1.0)).is_err());
}

#[test]
fn wp_matches_lattice_sum() {
    let mut r = rng(7);
    for _ in 0..5 {
        let t = random_torus(&mut r, 0.6, 2.0);
        let w = Weierstrass::new(&t);
        for _ in 0..20 {
            let z = random_point(&mut r, &t, 0.5, 0.05);
            let oracle = wp_lattice_sum(z, t.tau(), 40);
            let got = w.wp(z, 0).unwrap();
            assert!(rel(got, oracle) < 1e-8, "{z} {}: {got} vs {oracle}", t.tau());
        }
    }
}

#[test]
fn square_lattice_rotation_and_lambda() {
    let t = Torus::new(I).unwrap();
    let w = Weierstrass::new(&t);
    let mut r = rng(8);
    for _ in 0..20 {
        let z = random_point(&mut r, &t, 0.5, 0.05);
        let a = w.wp(I * z, 0).unwrap();
        let b = wp_lattice_sum(z, I, 40);
        assert!((a + b).norm() < 1e-8 * b.norm().max(1.0));
    }
    let e = [c(0.5, 0.0), c(0.0, 0.5), c(0.5, 0.5)].map(|h| wp_lattice_sum(h, I, 40));
    let lambda = (e[2] - e[1]) / (e[0] - e[1]);
    assert!((lambda - 0.5).norm() < 1e-12);
    assert!((w.invariants().lambda - lambda).norm() < 1e-10);
}

#[test]
fn invariant_relations() {
    let mut r = rng(9);
    for _ in 0..200 {
        let t = random_torus(&mut r, 0.2, 3.0);
        let inv = *Weierstrass::new(&t).invariants();
        let scale = inv.e1.norm() + inv.e2.norm() + inv.e3.norm();
        assert!((inv.e1 + inv.e2 + inv.e3).norm() < 1e-11 * scale.max(1.0));
        let legendre = inv.eta1 * t.tau() - inv.eta2;
        assert!((legendre - 2.0 * PI * I).norm() < 1e-12 * inv.eta1.norm().max(1.0));
        let g2 = -4.0 * (inv.e1 * inv.e2 + inv.e2 * inv.e3 + inv.e3 * inv.e1);
        assert!(rel(inv.g2, g2) < 1e-10 || inv.g2.norm() < 1e-10);
        assert!(rel(inv.g3, 4.0 * inv.e1 * inv.e2 * inv.e3) < 1e-10 || inv.g3.norm() < 1e-10);
    }
}

#[test]
fn eta1_matches_eisenstein_series() {
    let mut r = rng(10);
    for _ in 0..30 {
        let t = random_torus(&mut r, 0.4, 3.0);
        let inv = *Weierstrass::new(&t).invariants();
        assert!(rel(inv.eta1, eta1_eisenstein(t.tau())) < 1e-11, "{}", t.tau());
    }
}

#[test]
fn zeta_quasi_periods() {
    let mut r = rng(11);
    for _ in 0..100 {
        let t = random_torus(&mut r, 0.25, 2.5);
        let w = Weierstrass::new(&t);
        let inv = *w.invariants();
        let z = random_point(&mut r, &t, 1.5, 1e-2);
        let zt = w.zeta(z).unwrap();
        assert!((w.zeta(z + 1.0).unwrap() - zt - inv.eta1).norm() < 1e-10 * zt.norm().max(1.0));
        assert!((w.zeta(z + t.tau()).unwrap() - zt - inv.eta2).norm() < 1e-10 * zt.norm().max(1.0));
        assert!((w.zeta(-z).unwrap() + zt).norm() < 1e-11 * zt.norm().max(1.0));
        let h1 = w.zeta(c(0.5, 0.0)).unwrap();
        let h2 = w.zeta(t.tau() / 2.0).unwrap();
        assert!((2.0 * h1 - inv.eta1).norm() < 1e-11 * inv.eta1.norm().max(1.0));
        assert!((2.0 * h2 - inv.eta2).norm() < 1e-11 * inv.eta2.norm().max(1.0));
    }
}

#[test]
fn zeta_derivative_is_minus_wp() {
    let mut r = rng(12);
    let h = 1e-4;
    for _ in 0..50 {
        let t = random_torus(&mut r, 0.3, 2.0);
        let w = Weierstrass::new(&t);
        let z = random_point(&mut r, &t, 0.5, 0.1);
        let fd = (-w.zeta(z + 2.0 * h).unwrap() + 8.0 * w.zeta(z + h).unwrap()
            - 8.0 * w.zeta(z - h).unwrap()
            + w.zeta(z - 2.0 * h).unwrap())
            / (12.0 * h);
        let p = w.wp(z, 0).unwrap();
        assert!((fd + p).norm() < 1e-7 * p.norm().max(1.0));
    }
}

#[test]
fn wp_differential_equation() {
    let mut r = rng(13);
    for _ in 0..200 {
        let t = random_torus(&mut r, 0.2, 3.0);
        let w = Weierstrass::new(&t);
        let inv = *w.invariants();
        let z = random_point(&mut r, &t, 1.0, 1e-2);
        let [p, p1, p2] = w.wp_all(z).unwrap();
        let rhs = 4.0 * (p - inv.e1) * (p - inv.e2) * (p - inv.e3);
        let cubic = 4.0 * p * p * p - inv.g2 * p - inv.g3;
        let scale = (4.0 * p * p * p).norm().max(p1.norm_sqr()).max(1.0);
        assert!((p1 * p1 - rhs).norm() < 1e-9 * scale);
        assert!((p1 * p1 - cubic).norm() < 1e-9 * scale);
        let p2_alg = w.wp(z, 2).unwrap();
        assert!((p2 - p2_alg).norm() < 1e-9 * (6.0 * p * p).norm().max(1.0));
    }
}

#[test]
fn zeta_addition_formula() {
    let mut r = rng(14);
    for _ in 0..200 {
        let t = random_torus(&mut r, 0.2, 3.0);
        let w = Weierstrass::new(&t);
        let z = random_point(&mut r, &t, 0.5, 0.02);
        if t.distance_to_lattice(2.0 * z) < 0.02 {
            continue;
        }
        match w.addition_zeta_residual(z) {
            Ok(res) => {
                let scale = w.zeta(2.0 * z).unwrap().norm().max(1.0);
                assert!(res < 1e-10 * scale, "{z} {}: {res}", t.tau());
            }
            Err(Error::HalfPeriodInput) => {}
            Err(e) => panic!("{e}"),
        }
        // general addition theorem with an independent second point
        let v = random_point(&mut r, &t, 0.5, 0.02);
        let [pu, pu1, _] = w.wp_all(z).unwrap();
        let [pv, pv1, _] = w.wp_all(v).unwrap();
        if (pu - pv).norm() < 1e-2 || t.distance_to_lattice(z + v) < 0.02 {
            continue;
        }
        let lhs = w.zeta(z + v).unwrap() - w.zeta(z).unwrap() - w.zeta(v).unwrap();
        let rhs = 0.5 * (pu1 - pv1) / (pu - pv);
        assert!((lhs - rhs).norm() < 1e-9 * rhs.norm().max(1.0));
    }
}

#[test]
fn hexagonal_addition_at_third_point() {
    let t = hexagonal();
    let w = Weierstrass::new(&t);
    let z = (1.0 + t.tau()) / 3.0;
    assert!(w.addition_zeta_residual(z).unwrap() < 1e-10);
    assert_eq!(w.addition_zeta_residual(c(0.5, 0.0)), Err(Error::HalfPeriodInput));
}

#[test]
fn sigma_properties() {
    let mut r = rng(15);
    for _ in 0..100 {
        let t = random_torus(&mut r, 0.3, 2.0);
        let w = Weierstrass::new(&t);
        let inv = *w.invariants();
        let z = random_point(&mut r, &t, 1.0, 1e-2);
        let s = w.sigma(z);
        let s1 = w.sigma(z + 1.0);
        let want1 = -(LogComplex::exp(inv.eta1 * (z + 0.5)) * s);
        assert!(rel_log(s1, want1) < 1e-11);
        let tau = t.tau();
        let st = w.sigma(z + tau);
        let want2 = -(LogComplex::exp(inv.eta2 * (z + tau / 2.0)) * s);
        assert!(rel_log(st, want2) < 1e-11, "{z} {tau}");
        assert!(rel_log(w.sigma(-z), -s) < 1e-13);
    }
    let t = Torus::new(c(0.3, 1.1)).unwrap();
    let z = c(1e-4, 0.0);
    let ratio = Weierstrass::new(&t).sigma(z).to_complex_unchecked() / z;
    assert!((ratio - 1.0).norm() < 1e-7);
}

#[test]
fn rhombic_line_bridge_and_reality() {
    for b in [0.2, 0.35, 0.5, 0.7, 1.0, 1.5, 3.0] {
        let t = Torus::rhombic(b).unwrap();
        let inv = *Weierstrass::new(&t).invariants();
        assert!(inv.e1.im.abs() < 1e-12 * inv.e1.norm().max(1.0));
        assert!(inv.eta1.im.abs() < 1e-12 * inv.eta1.norm().max(1.0));
        assert!((inv.e2 - inv.e3.conj()).norm() < 1e-11 * inv.e2.norm().max(1.0));
        assert!(((inv.lambda - 1.0).norm() - 1.0).abs() < 1e-11);
        // at b = 1/2 the torus is square, lambda = 2 and the bridge is 0/0
        if (inv.lambda - 2.0).norm() > 1e-6 {
            let bridge = (inv.lambda + 1.0) / (inv.lambda - 2.0);
            assert!((inv.e2 / inv.e1 - bridge).norm() < 1e-10 * bridge.norm().max(1.0), "b = {b}");
        }
    }
}

fn arb_torus() -> impl Strategy<Value = Torus> {
    (-0.5f64..0.5, 0.25f64..3.0).prop_map(|(a, b)| Torus::new(Complex64::new(a, b)).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn prop_wp_even_and_periodic(t in arb_torus(), u in -0.5f64..0.5, v in -0.5f64..0.5) {
        let z = t.point(u, v);
        prop_assume!(t.distance_to_lattice(z) > 0.05);
        let w = Weierstrass::new(&t);
        let p = w.wp(z, 0).unwrap();
        let tol = 1e-10 * p.norm().max(1.0);
        prop_assert!((w.wp(-z, 0).unwrap() - p).norm() < tol);
        prop_assert!((w.wp(z + 1.0, 0).unwrap() - p).norm() < tol);
        prop_assert!((w.wp(z + t.tau(), 0).unwrap() - p).norm() < tol);
        prop_assert!((w.wp(z - t.tau() + 2.0, 0).unwrap() - p).norm() < tol);
    }

    #[test]
    fn prop_wp_is_minus_logderiv2(t in arb_torus(), u in -0.5f64..0.5, v in -0.5f64..0.5) {
        let z = t.point(u, v);
        prop_assume!(t.distance_to_lattice(z) > 0.05);
        let w = Weierstrass::new(&t);
        let l2 = theta1_logderiv_z(z, &t, 2).unwrap();
        let eta1 = w.invariants().eta1;
        prop_assert!((w.wp(z, 0).unwrap() + l2 + eta1).norm() < 1e-12 * l2.norm().max(1.0));
    }
}
