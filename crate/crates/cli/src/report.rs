//! Machine-readable verification reports.

use std::collections::BTreeMap;

use kepler_qbh::fit::ConstantSummary;
use kepler_qbh::inventory::MismatchEntry;
use serde::Serialize;

use crate::config::RunConfig;

/// Relative spread below which a fitted constant counts as point-independent.
pub const CONSTANT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FittedConstant {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    pub samples: usize,
    pub point_independent: bool,
}

impl From<ConstantSummary> for FittedConstant {
    fn from(s: ConstantSummary) -> Self {
        Self { mean: s.mean, min: s.min, max: s.max, samples: s.count, point_independent: s.is_constant(CONSTANT_TOL) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteResult {
    pub name: String,
    /// The claim the suite checks.
    pub paper_ref: String,
    pub points: usize,
    pub max_residual: f64,
    pub tol: f64,
    pub fitted_constants: BTreeMap<String, FittedConstant>,
    /// Additional measured quantities (reported, not asserted unless stated in `pass`).
    pub metrics: BTreeMap<String, f64>,
    pub pass: bool,
}

impl SuiteResult {
    pub fn new(name: &str, claim: &str, points: usize, tol: f64) -> Self {
        Self {
            name: name.into(),
            paper_ref: claim.into(),
            points,
            max_residual: 0.0,
            tol,
            fitted_constants: BTreeMap::new(),
            metrics: BTreeMap::new(),
            pass: false,
        }
    }

    pub fn residual(&mut self, r: f64) {
        // NaN must not hide behind `max`.
        self.max_residual = if r.is_nan() || self.max_residual.is_nan() { f64::NAN } else { self.max_residual.max(r) };
    }

    pub fn constant(&mut self, name: &str, s: ConstantSummary) {
        self.fitted_constants.insert(name.into(), s.into());
    }

    pub fn metric(&mut self, name: &str, v: f64) {
        self.metrics.insert(name.into(), v);
    }

    /// `max_residual < tol`, every fitted constant point-independent, and `extra`.
    pub fn finish(mut self, extra: bool) -> Self {
        self.pass = self.max_residual < self.tol && self.fitted_constants.values().all(|c| c.point_independent) && extra;
        self
    }

    pub fn status_line(&self) -> String {
        format!(
            "{} {:<24} points={:<5} max_residual={:.3e} tol={:.1e}",
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            self.points,
            self.max_residual,
            self.tol
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub schema: &'static str,
    pub config: RunConfig,
    pub suites: Vec<SuiteResult>,
    pub mismatches: Vec<MismatchEntry>,
}

impl VerificationReport {
    pub fn pass(&self) -> bool {
        self.suites.iter().all(|s| s.pass)
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}
