//! Acceptance criteria, one PASS/FAIL line each. Runs without the libtest harness so the
//! lines are always printed; exits non-zero when any criterion fails.

use std::path::PathBuf;
use std::time::Instant;

use kepler_qbh::dynamics::{convergence_orders, drift, integrate, Integrator};
use kepler_qbh::inventory::{inventory, MismatchCategory, MismatchEntry};
use kepler_qbh::observables::{func_a, func_b, func_ma, func_mb, hamiltonian, invariant_j34, invariant_k34, lambda_factor, momenta};
use kepler_qbh::{ModelParams64, PhasePoint64};
use kepler_qbh_cli::reduce::cmd_reduce_kepler;
use kepler_qbh_cli::report::SuiteResult;
use kepler_qbh_cli::suites::*;
use kepler_qbh_cli::verify::{cmd_verify, INVENTORY_TOL};
use kepler_qbh_cli::RunConfig;
use num_complex::Complex;

const SEED: u64 = 1;
const POINTS: usize = 1000;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn generic() -> ModelParams64 {
    ModelParams64::new(1.0, 0.3, -0.2)
}

fn kepler() -> ModelParams64 {
    ModelParams64::new(1.0, 0.0, 0.0)
}

fn suite_line(s: &SuiteResult) -> String {
    format!("{}: max_residual={:.2e} (tol {:.0e}){}", s.name, s.max_residual, s.tol, if s.pass { "" } else { " FAILED" })
}

fn constants_near(s: &SuiteResult, expected: &[(&str, f64)], magnitude: bool) -> (bool, String) {
    let mut ok = true;
    let mut text = Vec::new();
    for (name, want) in expected {
        let c = &s.fitted_constants[*name];
        let got = if magnitude { c.mean.abs() } else { c.mean };
        ok &= c.point_independent && (got - want).abs() < 1e-9;
        text.push(format!("{name}={:.12}", c.mean));
    }
    (ok, text.join(" "))
}

fn ac1() -> Outcome {
    let mut pass = true;
    let mut detail = Vec::new();
    for k in [kepler(), generic()] {
        let s = bracket_scalings(&sample_points(SEED, POINTS), &k, None).unwrap();
        let (ok, consts) = constants_near(&s, &[("c_A", 2.0), ("c_B", 2.0), ("c_M_a", 1.0), ("c_M_b", 1.0)], false);
        pass &= s.pass && ok;
        detail.push(format!("k=({},{},{}) {} {consts}", k.k1, k.k2, k.k3, suite_line(&s)));
    }
    outcome(pass, detail.join("; "))
}

fn ac2() -> Outcome {
    let s = conservation(&sample_points(SEED, POINTS), &generic(), None).unwrap();
    let p0 = PhasePoint64::new(1.0, 0.0, 0.0, 1.0).unwrap();
    let k = generic();
    let run = |h: f64| {
        let t = integrate(&p0, &k, 50.0, h, Integrator::Midpoint).unwrap();
        assert!(t.is_complete());
        drift(&t).unwrap()
    };
    let coarse = run(1e-3);
    let fine = run(5e-4);
    let worst = coarse.max_relative();
    let drift_ok = worst < 1e-8;
    let orders = convergence_orders(&coarse, &fine);
    let order_ok = orders.iter().all(|o| (1.8..=2.2).contains(o));
    let drifts = coarse.invariants.iter().map(|d| format!("{}={:.2e}", d.name, d.relative_drift)).collect::<Vec<_>>().join(" ");
    let ords = orders.iter().map(|o| format!("{o:.3}")).collect::<Vec<_>>().join(",");
    outcome(
        s.pass && drift_ok && order_ok,
        format!(
            "{}; orbit dt=1e-3 t=50 relative drift {drifts} (< 1e-8: {}); drift order under halving [{ords}] (in [1.8,2.2]: {})",
            suite_line(&s),
            if drift_ok { "yes" } else { "NO" },
            if order_ok { "yes" } else { "NO" }
        ),
    )
}

fn ac3() -> Outcome {
    let p = PhasePoint64::new(1.0, 0.0, 0.0, 1.0).unwrap();
    let k = kepler();
    let c = |re: f64, im: f64| Complex::new(re, im);
    let (j, _, _) = momenta(&p).unwrap();
    let a = func_a(&p).unwrap().value;
    let b = func_b(&p, &k).unwrap().value;
    let ma = func_ma(&p, &k).unwrap().value;
    let mb = func_mb(&p, &k).unwrap().value;
    let j34 = invariant_j34(&p, &k).unwrap();
    let checks: Vec<(&str, f64)> = vec![
        ("H", (hamiltonian(&p, &k).unwrap() - 1.5).abs()),
        ("J", (j - 1.0).abs()),
        ("lambda", (lambda_factor(&p).unwrap() - 1.0).abs()),
        ("A", (a - c(1.0, 0.0)).norm()),
        ("B", (b - c(2.0, 0.0)).norm()),
        ("J34", (j34 - c(2.0, 0.0)).norm()),
        ("M_a", (ma - c(0.0, -3.0)).norm()),
        ("M_b", (mb - c(1.0, 0.0)).norm()),
        ("K34", (invariant_k34(&p, &k).unwrap() - c(0.0, -3.0)).norm()),
        ("|B|^2", (b.norm_sqr() - 4.0).abs()),
        ("|M_a|^2-|M_b|^2", (ma.norm_sqr() - mb.norm_sqr() - 8.0).abs()),
        ("4k1J3", (4.0 * k.k1 * j34.re - 8.0).abs()),
    ];
    let worst = checks.iter().fold(0.0f64, |m, c| m.max(c.1));
    let failed: Vec<&str> = checks.iter().filter(|c| !(c.1 < 1e-12)).map(|c| c.0).collect();
    outcome(failed.is_empty(), format!("{} values at (1,0,0,1), k=(1,0,0), max error {worst:.1e}{}", checks.len(), if failed.is_empty() { String::new() } else { format!(", failing {failed:?}") }))
}

fn ac4() -> Outcome {
    let mut pass = true;
    let mut detail = Vec::new();
    for k in [kepler(), generic()] {
        let s = contraction(&sample_points(SEED, POINTS), &k, None).unwrap();
        let (ok, consts) = constants_near(
            &s,
            &[("c_Omega1_dJ4", 2.0), ("c_Omega2_dJ3", 2.0), ("c_OmegaM1_dK4", 1.0), ("c_OmegaM2_dK3", 1.0)],
            true,
        );
        pass &= s.pass && ok;
        detail.push(format!("k=({},{},{}) {} {consts}", k.k1, k.k2, k.k3, suite_line(&s)));
    }
    outcome(pass, detail.join("; "))
}

fn simple(f: fn(&[PhasePoint64], &ModelParams64, Option<f64>) -> kepler_qbh_cli::Result<SuiteResult>, n: usize) -> Outcome {
    let mut pass = true;
    let mut detail = Vec::new();
    for k in [kepler(), generic()] {
        let s = f(&sample_points(SEED, n), &k, None).unwrap();
        pass &= s.pass;
        detail.push(format!("k=({},{},{}) {}", k.k1, k.k2, k.k3, suite_line(&s)));
    }
    outcome(pass, detail.join("; "))
}

fn ac5() -> Outcome {
    simple(degeneracy_suite, POINTS)
}

fn ac6() -> Outcome {
    simple(recursion, POINTS)
}

fn ac7() -> Outcome {
    simple(kernel, 100)
}

fn ac8() -> Outcome {
    simple(orthogonality_suite, POINTS)
}

fn ac9() -> Outcome {
    let mut pass = true;
    let mut detail = Vec::new();
    for k in [kepler(), generic()] {
        let s = torsion(&sample_points(SEED, POINTS), &k).unwrap();
        let frac = s.metrics["R1_fraction_above_threshold"];
        pass &= frac >= 0.95;
        detail.push(format!("k=({},{},{}) R1 torsion > 1e-6 at {:.1}% of points", k.k1, k.k2, k.k3, 100.0 * frac));
    }
    outcome(pass, detail.join("; "))
}

fn ac10() -> Outcome {
    let config = RunConfig::default();
    let first = cmd_reduce_kepler(&config).unwrap();
    let a = first.to_json().unwrap();
    let b = cmd_reduce_kepler(&config).unwrap().to_json().unwrap();
    let golden = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden/reduce_kepler.json");
    let golden_ok = std::fs::read_to_string(&golden).map(|g| g == a).unwrap_or(false);
    let vanish = first.suites.iter().find(|s| s.name == "k2_k3_terms_vanish").unwrap();
    let chart = chart_oracle(&sample_chart_points(SEED, POINTS), &generic(), None).unwrap();
    let pass = a == b && golden_ok && first.pass() && chart.pass;
    outcome(
        pass,
        format!(
            "stable across runs: {}; golden byte-identical: {}; {}; all reduction suites pass: {}; {}",
            a == b,
            golden_ok,
            suite_line(vanish),
            first.pass(),
            suite_line(&chart)
        ),
    )
}

fn ac11() -> Outcome {
    let k = generic();
    let points = sample_points(SEED, 200);
    let inv = inventory(&points, &k, INVENTORY_TOL).unwrap();
    let find = |item: &str| inv.iter().find(|e| e.item == item).cloned();
    let fitted = |e: &Option<MismatchEntry>, want: Option<f64>| e.as_ref().is_some_and(|e| e.flagged && e.resolved && (want.is_none() || e.fitted_constant == want));
    let alpha = find("alpha23 at (1,0,0,1), k=(1,0,0)");
    let (j4, k4, x12) = (find("J4"), find("K4"), find("X12"));
    let checks = [
        ("alpha23 sign at reference point", fitted(&alpha, Some(-1.0))),
        ("J4 global sign", fitted(&j4, Some(-1.0))),
        ("K4 global sign", fitted(&k4, Some(-1.0))),
        ("X12 kernel generator", fitted(&x12, None) && x12.as_ref().is_some_and(|e| e.category == MismatchCategory::KernelGenerator)),
    ];
    // Asserted suites are built from autodiff quantities only; they must pass even though printed formulas are flagged.
    let report = cmd_verify(&RunConfig { points: 200, ..Default::default() }).unwrap();
    let independent = report.pass() && report.mismatches.iter().any(|m| m.flagged);
    let unresolved: Vec<&str> = inv.iter().filter(|e| e.flagged && !e.resolved).map(|e| e.item.as_str()).collect();
    let pass = checks.iter().all(|c| c.1) && independent && unresolved.is_empty();
    let summary = checks.iter().map(|(n, ok)| format!("{n}: {}", if *ok { "flagged+fitted" } else { "MISSING" })).collect::<Vec<_>>().join("; ");
    outcome(
        pass,
        format!(
            "{summary}; {} of {} printed items flagged, unresolved {unresolved:?}; asserted suites pass independently of printed formulas: {independent}",
            inv.iter().filter(|e| e.flagged).count(),
            inv.len()
        ),
    )
}

fn main() {
    // Accept and ignore libtest-style arguments such as `--nocapture` or filters.
    let criteria: [(&str, &str, fn() -> Outcome); 11] = [
        ("AC1", "bracket scalings", ac1),
        ("AC2", "conservation and orbit drift", ac2),
        ("AC3", "reference-point ground truths", ac3),
        ("AC4", "contraction identities", ac4),
        ("AC5", "degeneracy", ac5),
        ("AC6", "recursion operators", ac6),
        ("AC7", "kernel involutivity", ac7),
        ("AC8", "orthogonality", ac8),
        ("AC9", "Nijenhuis torsion", ac9),
        ("AC10", "Kepler reduction", ac10),
        ("AC11", "printed-formula inventory", ac11),
    ];
    let mut failed = 0;
    for (id, title, f) in criteria {
        let start = Instant::now();
        let o = f();
        if !o.pass {
            failed += 1;
        }
        println!("{} {id} {title} [{:.2}s]: {}", if o.pass { "PASS" } else { "FAIL" }, start.elapsed().as_secs_f64(), o.detail);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
