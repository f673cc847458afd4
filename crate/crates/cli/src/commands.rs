//! One function per subcommand, each returning results and diagnostics as
//! JSON values.

use serde_json::{json, Value};
use torus_green::critical::{
    compare_half_periods_with_tol, find_critical_points_with, CriticalPoint, DEDUP_TOL, PAIRS,
};
use torus_green::green::{critical_residual, GreenFunction, CONSTANT_TOL};
use torus_green::mfe::{
    solution_4pi, solution_8pi_from_torus, total_mass, verify_solution, MfeSolution, PERIOD_TOL,
    RHO_4PI, RHO_8PI,
};
use torus_green::moduli::{
    functional_equation_residual, half_point_log_derivative, scan, thresholds,
    verify_fundamental_inequalities, with_scan_pool, Region, BRACKET, BRIDGE1_TOL, BRIDGE2_TOL,
};
use torus_green::theta::theta1;
use torus_green::weier::{EllipticInvariants, POLE_RADIUS};
use torus_green::{reduce_modulus, wrap_point, Complex64, Torus};

use crate::config::{CommandKind, OutputFormat, Rho, RunConfig};
use crate::output::{csv_row, cx, CSV_HEADER};
use crate::{Failure, Outcome};

/// PDE residual bound on the 64 x 64 grid; it scales with `h^2`.
pub const MFE_RESIDUAL_TOL: f64 = 1e-4;
pub const MFE_PERIODICITY_TOL: f64 = 1e-9;
pub const MASS_GRID: usize = 256;
pub const MASS_TOL: f64 = 1e-3;

pub fn default_b_grid() -> Vec<f64> {
    (2..=60).map(|k| k as f64 * 0.05).collect()
}

pub fn dispatch(cfg: &RunConfig) -> Result<Outcome, Failure> {
    match cfg.command {
        CommandKind::Eval => eval(cfg),
        CommandKind::Critical => critical(cfg),
        CommandKind::Scan => scan_cmd(cfg),
        CommandKind::Thresholds => thresholds_cmd(cfg),
        CommandKind::Inequalities => inequalities(cfg),
        CommandKind::Mfe => mfe(cfg),
        CommandKind::Selftest => Ok(crate::selftest::run_all()),
    }
}

fn need<T: Copy>(v: Option<T>, flag: &str) -> Result<T, Failure> {
    v.ok_or_else(|| Failure::Usage(format!("missing --{flag}")))
}

fn torus_of(cfg: &RunConfig) -> Result<Torus, Failure> {
    let tau: Complex64 = need(cfg.tau, "tau")?.into();
    Ok(Torus::new(tau)?)
}

fn torus_json(t: &Torus) -> Result<Value, Failure> {
    let (red, m) = reduce_modulus(t.tau())?;
    Ok(json!({
        "tau": cx(t.tau()),
        "area": t.area(),
        "reduced_tau": cx(red),
        "reduction": [m.a, m.b, m.c, m.d],
    }))
}

fn invariants_json(inv: &EllipticInvariants) -> Value {
    json!({
        "e1": cx(inv.e1), "e2": cx(inv.e2), "e3": cx(inv.e3),
        "eta1": cx(inv.eta1), "eta2": cx(inv.eta2),
        "g2": cx(inv.g2), "g3": cx(inv.g3),
        "lambda": cx(inv.lambda),
    })
}

fn eval(cfg: &RunConfig) -> Result<Outcome, Failure> {
    let torus = torus_of(cfg)?;
    let gf = GreenFunction::new(&torus);
    let w = gf.weierstrass();
    let constant = gf.constant()?;
    let mut results = json!({
        "torus": torus_json(&torus)?,
        "invariants": invariants_json(w.invariants()),
        "green_constant": { "value": constant.value, "error_estimate": constant.error_estimate },
    });
    if let Some(z) = cfg.z {
        let z: Complex64 = z.into();
        let e = gf.eval(z)?;
        let [p, p1, p2] = w.wp_all(z)?;
        let lc = wrap_point(z, &torus);
        let th = theta1(z, &torus);
        results["point"] = json!({
            "z": cx(z),
            "wrapped": { "t": lc.t, "s": lc.s },
            "green": e.value_rel + constant.value,
            "green_rel": e.value_rel,
            "grad": e.grad,
            "hessian": e.hessian,
            "det_hessian": e.det_hessian,
            "critical_residual": cx(critical_residual(lc.t, lc.s, &torus)?),
            "theta1": { "log_mag": th.log_mag, "arg": th.arg },
            "zeta": cx(w.zeta(z)?),
            "wp": cx(p),
            "wp_prime": cx(p1),
            "wp_second": cx(p2),
        });
    }
    let diagnostics = json!({
        "tolerances": { "green_constant": CONSTANT_TOL, "pole_radius": POLE_RADIUS },
    });
    Ok(Outcome::ok(results, diagnostics))
}

fn point_json(p: &CriticalPoint) -> Value {
    json!({
        "kind": p.kind.name(),
        "morse": p.morse.name(),
        "t": p.coords.t,
        "s": p.coords.s,
        "z": cx(p.z),
        "g_rel": p.g_rel,
        "grad_norm": p.grad_norm,
        "hessian": p.hessian,
        "det_hessian": p.det_hessian,
    })
}

fn critical(cfg: &RunConfig) -> Result<Outcome, Failure> {
    let torus = torus_of(cfg)?;
    let tol = need(cfg.tolerances.solver, "tol")?;
    let excl = need(cfg.exclusion_radius, "exclusion-radius")?;
    let tie = need(cfg.tolerances.tie, "tie")?;
    let set = find_critical_points_with(&torus, tol, excl)?;
    let cmp = compare_half_periods_with_tol(&torus, tie)?;
    let pairs: Vec<[usize; 2]> = PAIRS.iter().map(|&(a, b)| [a, b]).collect();
    let results = json!({
        "torus": torus_json(&torus)?,
        "count": set.total_count,
        "points": set.points.iter().map(point_json).collect::<Vec<_>>(),
        "extra": set.extra().map(|x| json!({ "t": x.coords.t, "s": x.coords.s })),
        "half_period_comparison": {
            "pairs": pairs,
            "g_rel": cmp.g_rel,
            "wp_abs": cmp.wp_abs,
            "direct": cmp.direct,
            "log_ratio": cmp.log_ratio,
            "relations": cmp.relations.iter().map(|r| r.symbol()).collect::<Vec<_>>(),
            "order": cmp.order,
        },
    });
    let diagnostics = json!({
        "failed_seeds": set.failed_seeds,
        "seed_grid": set.grid,
        "tolerances": {
            "solver": tol,
            "tie": cmp.tie_tol,
            "degeneracy": cfg.tolerances.degeneracy,
            "dedup": DEDUP_TOL,
            "exclusion_radius": excl,
        },
    });
    let mut out = Outcome::ok(results, diagnostics);
    if set.total_count != 3 && set.total_count != 5 {
        out.violation = Some(format!("{} critical points found", set.total_count));
    }
    Ok(out)
}

fn scan_cmd(cfg: &RunConfig) -> Result<Outcome, Failure> {
    let [re0, im0, re1, im1] = need(cfg.region, "region")?;
    let (nx, ny) = need(cfg.grid, "grid")?;
    let tol = need(cfg.tolerances.solver, "tol")?;
    let region = Region::new(re0, im0, re1, im1)?;
    let rep = with_scan_pool(|| scan(region, nx, ny, tol))?;
    let mut cells = Vec::with_capacity(rep.cells.len());
    let mut csv = String::from(CSV_HEADER);
    csv.push('\n');
    let (mut three, mut five, mut bad) = (0usize, 0usize, Vec::new());
    for (k, cell) in rep.cells.iter().enumerate() {
        match cell.count {
            Some(3) => three += 1,
            Some(5) => five += 1,
            other => bad.push(format!(
                "cell ({}, {}) at tau = {}: {}",
                k % nx,
                k / nx,
                cell.tau,
                cell.error.clone().unwrap_or_else(|| format!("count {other:?}"))
            )),
        }
        let extra = cell.extra_point.map(|p| (p.t, p.s));
        cells.push(json!({
            "i": k % nx,
            "j": k / nx,
            "tau": cx(cell.tau),
            "count": cell.count,
            "extra": extra.map(|(t, s)| json!({ "t": t, "s": s })),
            "error": cell.error,
        }));
        csv.push_str(&csv_row(cell.tau, cell.count, extra));
    }
    let boundary: Vec<Value> = rep
        .boundary
        .iter()
        .map(|e| {
            json!({
                "cells": [[e.cells[0].0, e.cells[0].1], [e.cells[1].0, e.cells[1].1]],
                "midpoint": cx(e.midpoint),
                "degenerate_half_period": e.degenerate_half_period,
            })
        })
        .collect();
    let results = json!({
        "nx": nx,
        "ny": ny,
        "cells": cells,
        "boundary": boundary,
        "summary": { "count_3": three, "count_5": five, "failed": bad.len() },
    });
    let diagnostics = json!({ "tolerances": { "solver": tol } });
    let mut out = Outcome::ok(results, diagnostics);
    if cfg.output_format == OutputFormat::Csv {
        out.csv = Some(csv);
    }
    if !bad.is_empty() {
        out.violation = Some(format!("{} cells failed; first: {}", bad.len(), bad[0]));
    }
    Ok(out)
}

fn thresholds_cmd(cfg: &RunConfig) -> Result<Outcome, Failure> {
    let tol = need(cfg.tolerances.solver, "tol")?;
    let rep = thresholds(tol)?;
    let results = json!({
        "b0": rep.b0,
        "b1": rep.b1,
        "b0_times_b1": rep.b0 * rep.b1,
        "residual_b0": rep.residual_b0,
        "residual_b1": rep.residual_b1,
        "e2_over_e1_sq_at_b1": rep.e2_over_e1_sq_at_b1,
    });
    let diagnostics = json!({
        "bracket": [BRACKET.0, BRACKET.1],
        "bracket_width": rep.bracket_width,
        "tolerances": { "solver": rep.tol },
    });
    Ok(Outcome::ok(results, diagnostics))
}

fn inequalities(cfg: &RunConfig) -> Result<Outcome, Failure> {
    let rep = verify_fundamental_inequalities(&cfg.b)?;
    let rows: Vec<Value> = rep
        .rows
        .iter()
        .map(|r| {
            json!({
                "b": r.b,
                "theta2_term": r.theta2_term,
                "de1_eta1_db": r.de1_eta1_db,
                "theta3_b": r.theta3_b,
                "theta3_bb": r.theta3_bb,
                "half_e1_minus_eta1": r.half_e1_minus_eta1,
                "hessian_signs_at_half": [r.sign_pattern.0, r.sign_pattern.1],
            })
        })
        .collect();
    let mut fe_max = 0.0f64;
    let mut fe_rows = Vec::with_capacity(cfg.b.len());
    for &b in &cfg.b {
        let res = functional_equation_residual(b)?;
        fe_max = fe_max.max(res);
        fe_rows.push(json!({ "b": b, "residual": res }));
    }
    let f_half = half_point_log_derivative(0.5)?;
    let results = json!({
        "rows": rows,
        "violations": rep.violations.iter().map(|(b, m)| json!({ "b": b, "message": m })).collect::<Vec<_>>(),
        "functional_equation": { "rows": fe_rows, "max_residual": fe_max, "f_half": f_half },
    });
    let diagnostics = json!({
        "tolerances": { "bridge_theta2": rep.bridge1_tol, "bridge_theta3": rep.bridge2_tol },
    });
    debug_assert_eq!((rep.bridge1_tol, rep.bridge2_tol), (BRIDGE1_TOL, BRIDGE2_TOL));
    let mut out = Outcome::ok(results, diagnostics);
    if let Some((b, m)) = rep.violations.first() {
        out.violation = Some(format!("{} inequality violations; first at b = {b}: {m}", rep.violations.len()));
    }
    Ok(out)
}

fn solution_json(sol: &MfeSolution) -> Value {
    json!({
        "rho": sol.rho,
        "lambda": sol.lambda,
        "c1": sol.c1,
        "branch_point": sol.branch.map(cx),
        "monodromies": sol.monodromies().map(|m| vec![cx(m[0]), cx(m[1])]),
    })
}

fn mfe(cfg: &RunConfig) -> Result<Outcome, Failure> {
    let torus = torus_of(cfg)?;
    let rho = need(cfg.rho, "rho")?;
    let tol = need(cfg.tolerances.solver, "tol")?;
    let (nx, ny) = need(cfg.grid, "grid")?;
    let excl = need(cfg.exclusion_radius, "exclusion-radius")?;
    if nx != ny {
        return Err(Failure::Usage(format!("mfe verification grid must be square, got {nx}x{ny}")));
    }
    let (sol, four_pi, expected_mass) = match rho {
        Rho::EightPi => {
            let lambda = need(cfg.lambda, "lambda")?;
            (solution_8pi_from_torus(&torus, lambda, tol)?, None, RHO_8PI)
        }
        Rho::FourPi => {
            let (sol, chk) = solution_4pi(&torus)?;
            let chk = json!({
                "period_integral": cx(chk.period_integral),
                "period_integral_error": chk.period_integral_error,
                "c_prime": cx(chk.c_prime),
                "c": cx(chk.c),
                "g0": cx(chk.g0),
            });
            (sol, Some(chk), RHO_4PI)
        }
    };
    let rep = verify_solution(&sol, nx, excl)?;
    let mass = total_mass(&sol, MASS_GRID)?;
    let residual_tol = MFE_RESIDUAL_TOL * (64.0 / nx as f64).powi(2);
    let results = json!({
        "torus": torus_json(&torus)?,
        "solution": solution_json(&sol),
        "four_pi": four_pi,
        "verification": {
            "grid_n": rep.grid_n,
            "h": rep.h,
            "points": rep.points,
            "max_residual": rep.max_residual,
            "max_residual_plain": rep.max_residual_plain,
            "mean_residual": rep.mean_residual,
            "periodicity_1": rep.periodicity_1,
            "periodicity_tau": rep.periodicity_tau,
        },
        "total_mass": mass,
        "expected_mass": expected_mass,
    });
    let diagnostics = json!({
        "mass_grid": MASS_GRID,
        "tolerances": {
            "solver": tol,
            "period": PERIOD_TOL,
            "residual": residual_tol,
            "periodicity": MFE_PERIODICITY_TOL,
            "mass": MASS_TOL,
            "exclusion_radius": rep.excl_radius,
        },
    });
    let mut out = Outcome::ok(results, diagnostics);
    let mut fails = Vec::new();
    if !(rep.max_residual <= residual_tol) {
        fails.push(format!("PDE residual {:e} > {residual_tol:e}", rep.max_residual));
    }
    if !(rep.periodicity_1.max(rep.periodicity_tau) <= MFE_PERIODICITY_TOL) {
        fails.push(format!(
            "periodicity defect {:e}",
            rep.periodicity_1.max(rep.periodicity_tau)
        ));
    }
    if !((mass - expected_mass).abs() <= MASS_TOL) {
        fails.push(format!("total mass {mass} differs from {expected_mass}"));
    }
    if !fails.is_empty() {
        out.violation = Some(fails.join("; "));
    }
    Ok(out)
}
