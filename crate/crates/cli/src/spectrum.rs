use std::collections::BTreeMap;

use kepler_qbh::dynamics::{integrate, TrajectoryStatus};
use kepler_qbh::forms::{rank_of_singular_values, recursion_operator, singular_values_of_columns, FormKind, RecursionOperator};
use kepler_qbh::{ModelParams64, PhasePoint64};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::Result;
use crate::output::round_sig;
use crate::suites::{sample_points, RECURSION_TOL};

pub const SCHEMA: &str = "kepler-qbh/spectrum/v1";
/// Upper bound on the number of orbit samples at which `τ` is recorded.
pub const ORBIT_SAMPLES: usize = 200;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OperatorSpectrum {
    pub operator: &'static str,
    /// `[re, im]`, sorted by modulus.
    pub eigenvalues: [[f64; 2]; 4],
    pub det: f64,
    pub relative_det: f64,
    pub rank: usize,
    pub tau: f64,
    pub zero_pair: f64,
    pub pair_split: f64,
}

impl OperatorSpectrum {
    fn new(r: &RecursionOperator) -> Self {
        let cols: [[f64; 4]; 4] = std::array::from_fn(|j| std::array::from_fn(|i| r.r[i][j]));
        Self {
            operator: operator_name(r.form),
            eigenvalues: r.eigenvalues.map(|z| [round_sig(z.re), round_sig(z.im)]),
            det: round_sig(r.det),
            relative_det: round_sig(r.relative_det()),
            rank: rank_of_singular_values(&singular_values_of_columns(&cols)),
            tau: round_sig(r.tau),
            zero_pair: round_sig(r.zero_pair),
            pair_split: round_sig(r.pair_split),
        }
    }
}

fn operator_name(f: FormKind) -> &'static str {
    match f {
        FormKind::Omega1 => "R1",
        FormKind::Omega2 => "R2",
        FormKind::OmegaM1 => "RM1",
        FormKind::OmegaM2 => "RM2",
        FormKind::Omega0 => "identity",
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointSpectrum {
    pub point: [f64; 4],
    pub operators: Vec<OperatorSpectrum>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrbitSpectrum {
    pub status: &'static str,
    pub times: Vec<f64>,
    pub tau: BTreeMap<&'static str, Vec<f64>>,
    /// `(max τ − min τ) / (1 + |τ(0)|)` along the orbit; reported, not asserted.
    pub tau_relative_drift: BTreeMap<&'static str, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumSummary {
    pub max_relative_det: f64,
    pub max_zero_pair: f64,
    pub max_pair_split: f64,
    pub rank_two: usize,
    pub pattern_points: usize,
    pub total: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumReport {
    pub schema: &'static str,
    pub config: RunConfig,
    pub summary: SpectrumSummary,
    pub points: Vec<PointSpectrum>,
    pub orbit: OrbitSpectrum,
}

fn spectra(p: &PhasePoint64, k: &ModelParams64) -> kepler_qbh::Result<Vec<RecursionOperator>> {
    FormKind::DEGENERATE.iter().map(|&f| recursion_operator(f, p, k)).collect()
}

pub fn cmd_spectrum(config: &RunConfig) -> Result<SpectrumReport> {
    let k = config.params();
    k.validate()?;
    let pts = sample_points(config.seed, config.points);
    let ops: Vec<Vec<RecursionOperator>> = pts.par_iter().map(|p| spectra(p, &k)).collect::<kepler_qbh::Result<_>>()?;
    let mut summary = SpectrumSummary { max_relative_det: 0.0, max_zero_pair: 0.0, max_pair_split: 0.0, rank_two: 0, pattern_points: 0, total: 0 };
    let points: Vec<PointSpectrum> = pts
        .iter()
        .zip(&ops)
        .map(|(p, rs)| {
            let operators: Vec<OperatorSpectrum> = rs.iter().map(OperatorSpectrum::new).collect();
            for (r, o) in rs.iter().zip(&operators) {
                summary.max_relative_det = summary.max_relative_det.max(r.relative_det());
                summary.max_zero_pair = summary.max_zero_pair.max(r.zero_pair);
                summary.max_pair_split = summary.max_pair_split.max(r.pair_split);
                summary.rank_two += usize::from(o.rank == 2);
                summary.pattern_points += usize::from(r.has_pattern(RECURSION_TOL, RECURSION_TOL));
                summary.total += 1;
            }
            PointSpectrum { point: p.to_array().map(round_sig), operators }
        })
        .collect();
    summary.max_relative_det = round_sig(summary.max_relative_det);
    summary.max_zero_pair = round_sig(summary.max_zero_pair);
    summary.max_pair_split = round_sig(summary.max_pair_split);

    let p0 = config.initial_point()?;
    let traj = integrate(&p0, &k, config.t_max, config.dt, config.integrator)?;
    let stride = traj.states.len().div_ceil(ORBIT_SAMPLES).max(1);
    let mut times = Vec::new();
    let mut tau: BTreeMap<&'static str, Vec<f64>> = BTreeMap::new();
    for (t, s) in traj.times.iter().zip(&traj.states).step_by(stride) {
        times.push(round_sig(*t));
        for r in spectra(s, &k)? {
            tau.entry(operator_name(r.form)).or_default().push(r.tau);
        }
    }
    let tau_relative_drift = tau
        .iter()
        .map(|(name, v)| {
            let (lo, hi) = v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(*x), b.max(*x)));
            (*name, round_sig((hi - lo) / (1.0 + v[0].abs())))
        })
        .collect();
    let tau = tau.into_iter().map(|(n, v)| (n, v.into_iter().map(round_sig).collect())).collect();
    let status = match traj.status {
        TrajectoryStatus::Complete => "complete",
        TrajectoryStatus::Truncated { .. } => "truncated",
    };
    Ok(SpectrumReport {
        schema: SCHEMA,
        config: config.clone(),
        summary,
        points,
        orbit: OrbitSpectrum { status, times, tau, tau_relative_drift },
    })
}
