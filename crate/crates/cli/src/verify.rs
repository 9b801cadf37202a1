use kepler_qbh::inventory::inventory;

use crate::config::RunConfig;
use crate::error::Result;
use crate::report::VerificationReport;
use crate::suites::*;

pub const SCHEMA: &str = "kepler-qbh/verify/v1";
/// Points used for the printed-formula inventory (a prefix of the suite sample).
pub const INVENTORY_POINTS: usize = 200;
/// Tolerance separating printed formulas that hold from those that do not.
pub const INVENTORY_TOL: f64 = 1e-9;

pub fn cmd_verify(config: &RunConfig) -> Result<VerificationReport> {
    let k = config.params();
    k.validate()?;
    let points = sample_points(config.seed, config.points);
    let chart = sample_chart_points(config.seed, config.points);
    let tol = config.tol;
    let suites = vec![
        bracket_scalings(&points, &k, tol)?,
        conservation(&points, &k, tol)?,
        modulus(&points, &k, tol)?,
        field_brackets(&points, &k, tol)?,
        contraction(&points, &k, tol)?,
        degeneracy_suite(&points, &k, tol)?,
        recursion(&points, &k, tol)?,
        kernel(&points, &k, tol)?,
        orthogonality_suite(&points, &k, tol)?,
        torsion(&points, &k)?,
        chart_oracle(&chart, &k, tol)?,
    ];
    let mismatches = inventory(&points[..points.len().min(INVENTORY_POINTS)], &k, INVENTORY_TOL)?;
    Ok(VerificationReport { schema: SCHEMA, config: config.clone(), suites, mismatches })
}
