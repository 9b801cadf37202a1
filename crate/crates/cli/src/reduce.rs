//! The `k2 = k3 = 0` reduction to the Kepler problem.

use std::path::Path;

use kepler_qbh::fit::{fit_sign, relative, ConstantSummary};
use kepler_qbh::forms::{corrected_table, table_target, PrintedTable};
use kepler_qbh::observables::{func_b, func_ma, func_mb, hamiltonian, invariant_i2, invariant_j34, invariant_k34, momenta};
use kepler_qbh::{ModelParams64, PhasePoint64};
use rayon::prelude::*;

use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::report::{SuiteResult, VerificationReport};
use crate::suites::{chart_oracle, sample_chart_points, sample_points};

pub const SCHEMA: &str = "kepler-qbh/reduce-kepler/v1";
pub const REDUCTION_TOL: f64 = 1e-12;

/// Per-point quantities of the reduced system.
struct Reduced {
    /// Residuals of `J3, J4, K3, K4, I2` against their Kepler closed forms.
    invariants: [f64; 5],
    tables: f64,
    /// `(2J²H, Im K34)`.
    k4_pair: (f64, f64),
    b_modulus: f64,
    m_difference: f64,
    j34_free: f64,
}

fn rel(lhs: f64, rhs: f64) -> f64 {
    relative(lhs - rhs, lhs.abs().max(rhs.abs()))
}

fn reduced_at(p: &PhasePoint64, k: &ModelParams64) -> kepler_qbh::Result<Reduced> {
    let (a, b) = (p.a, p.b);
    let s = p.radius_sq();
    let (j, p1, p2) = momenta(p)?;
    let h = hamiltonian(p, k)?;
    let k1 = k.k1;
    let j34 = invariant_j34(p, k)?;
    let k34 = invariant_k34(p, k)?;
    let rx = j * p2 + k1 * (a * a - b * b) / s;
    let ry = j * p1 - 2.0 * k1 * a * b / s;
    let two_j2h = 2.0 * j * j * h;
    let invariants = [
        rel(j34.re, rx),
        rel(j34.im, -ry),
        rel(k34.re, -2.0 * ry),
        rel(k34.im, -two_j2h),
        rel(invariant_i2(p, k)?, rx),
    ];
    let mut tables = 0.0f64;
    for t in PrintedTable::ALL {
        let (c, target) = (corrected_table(t, p, k), table_target(t, p, k)?);
        for (x, y) in c.iter().zip(target) {
            tables = tables.max(rel(*x, y));
        }
    }
    let bb = func_b(p, k)?.value.norm_sqr();
    let (ma, mb) = (func_ma(p, k)?.value.norm_sqr(), func_mb(p, k)?.value.norm_sqr());
    let free = ModelParams64::new(0.0, 0.0, 0.0);
    let j34_free = invariant_j34(p, &free)?.norm_sqr();
    let (jf, _, _) = momenta(p)?;
    let hf = hamiltonian(p, &free)?;
    Ok(Reduced {
        invariants,
        tables,
        k4_pair: (two_j2h, k34.im),
        b_modulus: rel(bb, two_j2h + k1 * k1),
        m_difference: relative(ma - mb - 4.0 * k1 * j34.re, ma.max(mb)),
        j34_free: rel(j34_free, 2.0 * jf * jf * hf),
    })
}

pub fn cmd_reduce_kepler(config: &RunConfig) -> Result<VerificationReport> {
    let config = RunConfig { k2: 0.0, k3: 0.0, ..config.clone() };
    let k = config.params();
    k.validate()?;
    let tol = config.tol.unwrap_or(REDUCTION_TOL);
    let points = sample_points(config.seed, config.points);
    let rows: Vec<Reduced> = points.par_iter().map(|p| reduced_at(p, &k)).collect::<kepler_qbh::Result<_>>()?;
    let n = points.len();

    let mut vanish = SuiteResult::new(
        "k2_k3_terms_vanish",
        "with k2 = k3 = 0 the invariants and form coefficients reduce to their Kepler expressions",
        n,
        tol,
    );
    for (i, name) in ["J3", "J4", "K3", "K4", "I2"].iter().enumerate() {
        let w = rows.iter().fold(0.0f64, |m, r| m.max(r.invariants[i]));
        vanish.metric(name, w);
        vanish.residual(w);
    }
    let tables = rows.iter().fold(0.0f64, |m, r| m.max(r.tables));
    vanish.metric("form_tables", tables);
    vanish.residual(tables);

    let mut k4 = SuiteResult::new("k4_reduction", "K4 reduces to 2 J^2 H up to a global sign", n, tol);
    let pairs: Vec<(f64, f64)> = rows.iter().map(|r| r.k4_pair).collect();
    let fit = fit_sign(&pairs, tol);
    k4.residual(fit.residual_best);
    let mut sign = ConstantSummary::default();
    if let Some(s) = fit.sign {
        sign.push(s);
    }
    k4.constant("sign", sign);

    let single = |name: &str, claim: &str, f: fn(&Reduced) -> f64| {
        let mut s = SuiteResult::new(name, claim, n, tol);
        s.residual(rows.iter().map(f).fold(0.0f64, f64::max));
        s.finish(true)
    };
    let suites = vec![
        vanish.finish(true),
        k4.finish(fit.sign.is_some()),
        single("b_modulus_reduction", "|B|^2 = 2 J^2 H + k1^2", |r| r.b_modulus),
        single("m_difference_bridge", "M_a M_a* - M_b M_b* = 4 k1 J3", |r| r.m_difference),
        single("free_j34_modulus", "with k1 = k2 = k3 = 0, |J34|^2 = 2 J^2 H", |r| r.j34_free),
        chart_oracle(&sample_chart_points(config.seed, config.points), &k, Some(tol))?,
    ];
    Ok(VerificationReport { schema: SCHEMA, config, suites, mismatches: Vec::new() })
}

/// `None` when `actual` equals the golden file byte for byte, otherwise a line diff.
pub fn compare_golden(actual: &str, golden: &Path) -> Result<Option<String>> {
    let expected = std::fs::read_to_string(golden).map_err(|e| CliError::io(golden, e))?;
    if expected == actual {
        return Ok(None);
    }
    let mut diff = format!("--- {}\n+++ generated\n", golden.display());
    let (el, al): (Vec<&str>, Vec<&str>) = (expected.lines().collect(), actual.lines().collect());
    for i in 0..el.len().max(al.len()) {
        let (e, a) = (el.get(i), al.get(i));
        if e != a {
            if let Some(e) = e {
                diff.push_str(&format!("{:>5}- {e}\n", i + 1));
            }
            if let Some(a) = a {
                diff.push_str(&format!("{:>5}+ {a}\n", i + 1));
            }
        }
    }
    Ok(Some(diff))
}
