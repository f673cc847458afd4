//! Invariant suites over a fixed, seed-free set of tori and points.

use std::f64::consts::PI;

use serde_json::{json, Value};
use torus_green::critical::{compare_half_periods, find_critical_points, Relation};
use torus_green::green::green_eval;
use torus_green::mfe::{solution_4pi, solution_8pi_from_torus, verify_solution};
use torus_green::moduli::{functional_equation_residual, thresholds, verify_fundamental_inequalities};
use torus_green::theta::{jacobi_imaginary, theta1, theta1_logderiv_z, theta_specials};
use torus_green::weier::Weierstrass;
use torus_green::{reduce_modulus, wrap_point, Complex64, Result, Torus};

use crate::Outcome;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

struct Check {
    module: &'static str,
    name: &'static str,
    tol: f64,
    eval: fn() -> Result<f64>,
}

fn tori() -> Vec<Torus> {
    [
        Complex64::new(0.0, 1.0),
        Complex64::new(0.5, 3f64.sqrt() / 2.0),
        Complex64::new(0.5, 0.4),
        Complex64::new(0.2, 0.7),
        Complex64::new(-0.3, 1.8),
        Complex64::new(0.45, 0.25),
    ]
    .into_iter()
    .map(|t| Torus::new(t).expect("fixed moduli are valid"))
    .collect()
}

fn points(t: &Torus) -> Vec<Complex64> {
    [(0.17, 0.23), (-0.31, 0.12), (0.41, -0.37), (0.05, 0.44), (-0.22, -0.19)]
        .into_iter()
        .map(|(a, b)| t.point(a, b))
        .collect()
}

fn worst(f: impl Fn(&Torus, Complex64) -> Result<f64>) -> Result<f64> {
    let mut m = 0.0f64;
    for t in tori() {
        for z in points(&t) {
            m = m.max(f(&t, z)?);
        }
    }
    Ok(m)
}

fn checks() -> Vec<Check> {
    vec![
        Check { module: "lattice", name: "reduce_modulus lands in the fundamental domain", tol: 1e-13, eval: || {
            let mut m = 0.0f64;
            for tau in [Complex64::new(3.7, 0.05), Complex64::new(-2.2, 0.3), Complex64::new(0.9, 2.0)] {
                let (r, g) = reduce_modulus(tau)?;
                m = m.max((g.apply(tau) - r).norm() / r.norm());
                m = m.max((r.re.abs() - 0.5).max(0.0)).max((1.0 - r.norm()).max(0.0));
                m = m.max((g.det() - 1).abs() as f64);
            }
            Ok(m)
        }},
        Check { module: "lattice", name: "wrap_point round trip", tol: 1e-12, eval: || worst(|t, z| {
            let w = z + t.lattice_vector(3, -2);
            let (m, n) = t.coords(w - wrap_point(w, t).to_point(t));
            Ok((m - m.round()).abs().max((n - n.round()).abs()))
        })},
        Check { module: "theta", name: "theta1 quasi-periodicity", tol: 1e-12, eval: || worst(|t, z| {
            let th = theta1(z, t);
            let q = theta1(z + t.tau(), t) / th;
            let want = -(-I * PI * (t.tau() + 2.0 * z)).exp();
            Ok((q.to_complex_unchecked() - want).norm() / want.norm())
        })},
        Check { module: "theta", name: "heat equation", tol: 1e-7, eval: || worst(|t, z| {
            let h = 1e-5;
            let l1 = theta1_logderiv_z(z, t, 1)?;
            let l2 = theta1_logderiv_z(z, t, 2)?;
            let lhs = l2 + l1 * l1;
            let th = theta1(z, t);
            let up = theta1(z, &Torus::new(t.tau() + h)?) / th;
            let dn = theta1(z, &Torus::new(t.tau() - h)?) / th;
            let rhs = 4.0 * PI * I * (up.to_complex_unchecked() - dn.to_complex_unchecked()) / (2.0 * h);
            Ok((lhs - rhs).norm() / lhs.norm().max(1.0))
        })},
        Check { module: "theta", name: "Jacobi triple product for theta1'(0)", tol: 1e-12, eval: || {
            let mut m = 0.0f64;
            for t in tori() {
                let q = (I * PI * t.tau()).exp();
                let mut prod = 2.0 * PI * (I * PI * t.tau() / 4.0).exp();
                for n in 1..400 {
                    let f = 1.0 - q.powi(2 * n);
                    prod *= f * f * f;
                }
                let sp = theta_specials(&t);
                m = m.max((sp.th1p_0 - prod).norm() / prod.norm());
            }
            Ok(m)
        }},
        Check { module: "theta", name: "Jacobi imaginary transformation", tol: 1e-10, eval: || worst(|t, z| {
            let a = jacobi_imaginary(z, t.tau())?;
            let b = theta1(z, t);
            Ok(((a / b).to_complex_unchecked() - 1.0).norm())
        })},
        Check { module: "weier", name: "e1 + e2 + e3 = 0 and Legendre relation", tol: 1e-11, eval: || {
            let mut m = 0.0f64;
            for t in tori() {
                let inv = *Weierstrass::new(&t).invariants();
                let scale = (inv.e1.norm() + inv.e2.norm() + inv.e3.norm()).max(1.0);
                m = m.max((inv.e1 + inv.e2 + inv.e3).norm() / scale);
                let leg = inv.eta1 * t.tau() - inv.eta2 - 2.0 * PI * I;
                m = m.max(leg.norm() / inv.eta1.norm().max(1.0));
            }
            Ok(m)
        }},
        Check { module: "weier", name: "wp'^2 = 4 wp^3 - g2 wp - g3", tol: 1e-9, eval: || worst(|t, z| {
            let w = Weierstrass::new(t);
            let inv = *w.invariants();
            let [p, p1, _] = w.wp_all(z)?;
            let scale = (4.0 * p * p * p).norm().max(p1.norm_sqr()).max(1.0);
            Ok((p1 * p1 - (4.0 * p * p * p - inv.g2 * p - inv.g3)).norm() / scale)
        })},
        Check { module: "weier", name: "zeta addition formula", tol: 1e-10, eval: || worst(|t, z| {
            let w = Weierstrass::new(t);
            let scale = w.zeta(2.0 * z)?.norm().max(1.0);
            Ok(w.addition_zeta_residual(z)? / scale)
        })},
        Check { module: "green", name: "G is even and doubly periodic", tol: 1e-11, eval: || worst(|t, z| {
            let g = green_eval(z, t)?.value_rel;
            let d1 = (green_eval(-z, t)?.value_rel - g).abs();
            let d2 = (green_eval(z + 1.0 - t.tau(), t)?.value_rel - g).abs();
            Ok(d1.max(d2) / g.abs().max(1.0))
        })},
        Check { module: "green", name: "trace of the Hessian is 1/b", tol: 1e-10, eval: || worst(|t, z| {
            let h = green_eval(z, t)?.hessian;
            Ok((h[0][0] + h[1][1] - 1.0 / t.b()).abs() * t.b())
        })},
        Check { module: "critical", name: "square torus has 3 critical points", tol: 0.0, eval: || {
            let n = find_critical_points(&Torus::new(I)?, 1e-10)?.total_count;
            Ok((n as f64 - 3.0).abs())
        }},
        Check { module: "critical", name: "hexagonal torus has 5 with extra at (1/3, 1/3)", tol: 1e-8, eval: || {
            let set = find_critical_points(&Torus::new(Complex64::new(0.5, 3f64.sqrt() / 2.0))?, 1e-10)?;
            let Some(x) = set.extra() else { return Ok(f64::INFINITY) };
            let d = (x.coords.t - 1.0 / 3.0).abs().max((x.coords.s - 1.0 / 3.0).abs());
            Ok(d + (set.total_count as f64 - 5.0).abs())
        }},
        Check { module: "critical", name: "half-period comparison agrees across methods", tol: 1e-9, eval: || {
            let mut m = 0.0f64;
            for t in tori() {
                let cmp = compare_half_periods(&t)?;
                for p in 0..3 {
                    m = m.max((cmp.direct[p] - cmp.log_ratio[p]).abs() / (1.0 + cmp.direct[p].abs()));
                }
            }
            let sq = compare_half_periods(&Torus::new(I)?)?;
            if sq.relations[0] != Relation::Tie {
                return Ok(f64::INFINITY);
            }
            Ok(m)
        }},
        Check { module: "moduli", name: "thresholds satisfy b0 b1 = 1/4", tol: 1e-10, eval: || {
            let r = thresholds(1e-12)?;
            Ok((r.b0 * r.b1 - 0.25).abs().max(r.residual_b0).max(r.residual_b1))
        }},
        Check { module: "moduli", name: "functional equation", tol: 1e-9, eval: || {
            let mut m = 0.0f64;
            for k in 1..=20 {
                m = m.max(functional_equation_residual(0.1 * k as f64)?);
            }
            Ok(m)
        }},
        Check { module: "moduli", name: "theta inequalities on a coarse grid", tol: 0.0, eval: || {
            let grid: Vec<f64> = (1..=15).map(|k| 0.2 * k as f64).collect();
            Ok(verify_fundamental_inequalities(&grid)?.violations.len() as f64)
        }},
        Check { module: "mfe", name: "8pi PDE residual on the hexagonal torus", tol: 1e-4, eval: || {
            let t = Torus::new(Complex64::new(0.5, 3f64.sqrt() / 2.0))?;
            Ok(verify_solution(&solution_8pi_from_torus(&t, 0.0, 1e-12)?, 64, 0.05)?.max_residual)
        }},
        Check { module: "mfe", name: "8pi solution is doubly periodic", tol: 1e-9, eval: || {
            let t = Torus::new(Complex64::new(0.5, 3f64.sqrt() / 2.0))?;
            let rep = verify_solution(&solution_8pi_from_torus(&t, 0.0, 1e-12)?, 32, 0.05)?;
            Ok(rep.periodicity_1.max(rep.periodicity_tau))
        }},
        Check { module: "mfe", name: "4pi solution on the square torus", tol: 1e-9, eval: || {
            let (_, chk) = solution_4pi(&Torus::new(I)?)?;
            let pi_i = Complex64::new(0.0, PI);
            let d = (chk.period_integral - pi_i).norm().min((chk.period_integral + pi_i).norm());
            Ok(d.max((chk.c_prime + 1.0).norm()))
        }},
    ]
}

pub fn run_all() -> Outcome {
    let mut rows: Vec<Value> = Vec::new();
    let mut failed = Vec::new();
    for c in checks() {
        let (value, error) = match (c.eval)() {
            Ok(v) => (v, None),
            Err(e) => (f64::NAN, Some(e.to_string())),
        };
        let passed = error.is_none() && value <= c.tol;
        if !passed {
            failed.push(format!("{}: {}", c.module, c.name));
        }
        rows.push(json!({
            "module": c.module,
            "name": c.name,
            "value": value,
            "tolerance": c.tol,
            "passed": passed,
            "error": error,
        }));
    }
    let results = json!({ "checks": rows, "passed": rows.len() - failed.len(), "failed": failed.len() });
    let mut out = Outcome::ok(results, json!({}));
    if !failed.is_empty() {
        out.violation = Some(format!("selftest failed: {}", failed.join(", ")));
    }
    out
}
