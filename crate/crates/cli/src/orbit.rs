use std::fmt::Write;

use kepler_qbh::dynamics::{drift, integrate, Integrator, Trajectory, TrajectoryStatus};
use kepler_qbh::{DriftReport64, InvariantSet};
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::Result;
use crate::output::fmt_sig;

pub const SCHEMA: &str = "kepler-qbh/orbit/v1";
pub const CSV_HEADER: &str = "t,a,b,pa,pb,H,J3,J4,K3,K4,I2";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub integrator: Integrator,
    pub status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truncated_at: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    pub states: usize,
    pub drift: DriftReport64,
}

impl RunSummary {
    fn new(traj: &Trajectory<f64>) -> Result<Self> {
        let (status, truncated_at, reason) = match &traj.status {
            TrajectoryStatus::Complete => ("complete", None, None),
            TrajectoryStatus::Truncated { t, reason } => ("truncated", Some(*t), Some(reason.clone())),
        };
        Ok(Self { integrator: traj.integrator, status, truncated_at, reason, states: traj.states.len(), drift: drift(traj)? })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrbitReport {
    pub schema: &'static str,
    pub config: RunConfig,
    #[serde(flatten)]
    pub run: RunSummary,
    /// The same orbit under the other integrator.
    pub comparison: RunSummary,
}

pub struct OrbitOutput {
    pub csv: String,
    pub report: OrbitReport,
}

pub fn trajectory_csv(traj: &Trajectory<f64>) -> Result<String> {
    let mut out = String::with_capacity(200 * traj.states.len() + 64);
    out.push_str(CSV_HEADER);
    out.push('\n');
    for (t, s) in traj.times.iter().zip(&traj.states) {
        let inv = InvariantSet::at(s, &traj.params)?.tracked();
        let row = [*t, s.a, s.b, s.p_a, s.p_b].into_iter().chain(inv).map(fmt_sig).collect::<Vec<_>>().join(",");
        writeln!(out, "{row}").expect("writing to a String cannot fail");
    }
    Ok(out)
}

pub fn cmd_orbit(config: &RunConfig) -> Result<OrbitOutput> {
    let k = config.params();
    let p0 = config.initial_point()?;
    let traj = integrate(&p0, &k, config.t_max, config.dt, config.integrator)?;
    let other = match config.integrator {
        Integrator::Midpoint => Integrator::Rk4,
        Integrator::Rk4 => Integrator::Midpoint,
    };
    let cmp = integrate(&p0, &k, config.t_max, config.dt, other)?;
    Ok(OrbitOutput {
        csv: trajectory_csv(&traj)?,
        report: OrbitReport { schema: SCHEMA, config: config.clone(), run: RunSummary::new(&traj)?, comparison: RunSummary::new(&cmp)? },
    })
}
