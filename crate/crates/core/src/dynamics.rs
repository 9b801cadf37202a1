//! Time evolution under `H`: the dynamical field, implicit midpoint and RK4 steps,
//! fixed-step trajectories and conservation drift of the six tracked invariants.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::autodiff::{PhaseFunction, DIM};
use crate::brackets::{hamiltonian_vf_from_grad, GammaField, VectorField, VectorFieldValue};
use crate::error::{Error, Result};
use crate::observables::{InvariantSet, Observable};
use crate::phase::{ModelParams, PhasePoint};
use crate::scalar::Scalar;

/// Absolute Newton tolerance on the midpoint residual.
pub const NEWTON_TOL: f64 = 1e-13;
pub const NEWTON_MAX_ITER: usize = 25;
/// Maximum number of step halvings before a trajectory is truncated.
pub const MAX_HALVINGS: u32 = 8;
/// A step moving the state by more than this fraction of `1 + |z|∞` is treated as failed;
/// this catches steps that jump across the origin singularity.
pub const MAX_RELATIVE_JUMP: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Integrator {
    Midpoint,
    Rk4,
}

impl fmt::Display for Integrator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Integrator::Midpoint => "midpoint",
            Integrator::Rk4 => "rk4",
        })
    }
}

impl FromStr for Integrator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "midpoint" => Ok(Integrator::Midpoint),
            "rk4" => Ok(Integrator::Rk4),
            other => Err(Error::InvalidParameter(format!("unknown integrator '{other}' (midpoint | rk4)"))),
        }
    }
}

/// `Γ = (∂H/∂p_a, ∂H/∂p_b, −∂H/∂a, −∂H/∂b)` from the autodiff gradient of `H`.
pub fn derivative<T: Scalar>(p: &PhasePoint<T>, k: &ModelParams<T>) -> Result<VectorFieldValue<T>> {
    k.check_point(p)?;
    Ok(VectorFieldValue::from_real(hamiltonian_vf_from_grad(&Observable::H.with(*k).grad_at(p)?.grad)))
}

fn field<T: Scalar>(z: &[T; DIM], k: &ModelParams<T>) -> Result<[T; DIM]> {
    GammaField { params: *k }.eval(z)
}

fn axpy<T: Scalar>(z: &[T; DIM], h: T, v: &[T; DIM]) -> [T; DIM] {
    std::array::from_fn(|i| z[i] + h * v[i])
}

fn point<T: Scalar>(z: [T; DIM], k: &ModelParams<T>) -> Result<PhasePoint<T>> {
    PhasePoint::with_origin_eps(z[0], z[1], z[2], z[3], k.origin_eps)
}

/// Gaussian elimination with partial pivoting on a 4×4 system.
fn solve4<T: Scalar>(mut a: [[T; DIM]; DIM], mut b: [T; DIM]) -> Option<[T; DIM]> {
    for col in 0..DIM {
        let piv = (col..DIM).max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())?;
        if !(a[piv][col].abs() > T::zero()) {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..DIM {
            let f = a[row][col] / a[col][col];
            for c in col..DIM {
                let v = a[col][c];
                a[row][c] -= f * v;
            }
            let v = b[col];
            b[row] -= f * v;
        }
    }
    let mut x = [T::zero(); DIM];
    for row in (0..DIM).rev() {
        let mut acc = b[row];
        for c in row + 1..DIM {
            acc -= a[row][c] * x[c];
        }
        x[row] = acc / a[row][row];
    }
    Some(x)
}

/// One implicit-midpoint step `z' = z + h·Γ((z + z')/2)`, solved by Newton from an explicit Euler predictor.
pub fn step_midpoint<T: Scalar>(p: &PhasePoint<T>, k: &ModelParams<T>, h: T) -> Result<PhasePoint<T>> {
    let z = p.to_array();
    let gamma = GammaField { params: *k };
    let half = T::lit(0.5);
    let tol = T::lit(NEWTON_TOL).max(T::lit(8.0) * T::epsilon() * (T::one() + crate::fit::max_abs(&z)));
    let mut x = axpy(&z, h, &field(&z, k)?);
    let mut residual = T::infinity();
    for _ in 0..NEWTON_MAX_ITER {
        let mid: [T; DIM] = std::array::from_fn(|i| half * (z[i] + x[i]));
        let jet = gamma.jet_at(&point(mid, k)?)?;
        let f: [T; DIM] = std::array::from_fn(|i| x[i] - z[i] - h * jet.value[i]);
        residual = crate::fit::max_abs(&f);
        if residual < tol {
            return point(x, k);
        }
        let jac = std::array::from_fn(|i| {
            std::array::from_fn(|j| if i == j { T::one() } else { T::zero() } - h * half * jet.jac[i][j])
        });
        let dx = solve4(jac, f).ok_or(Error::StepFailure { residual: residual.as_f64(), iterations: 0 })?;
        for i in 0..DIM {
            x[i] -= dx[i];
        }
        if !x.iter().all(|v| v.is_finite()) {
            break;
        }
    }
    Err(Error::StepFailure { residual: residual.as_f64(), iterations: NEWTON_MAX_ITER })
}

/// One classical fourth-order Runge–Kutta step; every stage must stay inside the chart.
pub fn step_rk4<T: Scalar>(p: &PhasePoint<T>, k: &ModelParams<T>, h: T) -> Result<PhasePoint<T>> {
    let z = p.to_array();
    let half = T::lit(0.5) * h;
    let stage = |y: [T; DIM]| -> Result<[T; DIM]> { field(&point(y, k)?.to_array(), k) };
    let k1 = stage(z)?;
    let k2 = stage(axpy(&z, half, &k1))?;
    let k3 = stage(axpy(&z, half, &k2))?;
    let k4 = stage(axpy(&z, h, &k3))?;
    let sixth = h / T::lit(6.0);
    let two = T::lit(2.0);
    point(std::array::from_fn(|i| z[i] + sixth * (k1[i] + two * k2[i] + two * k3[i] + k4[i])), k)
}

pub fn step<T: Scalar>(method: Integrator, p: &PhasePoint<T>, k: &ModelParams<T>, h: T) -> Result<PhasePoint<T>> {
    match method {
        Integrator::Midpoint => step_midpoint(p, k, h),
        Integrator::Rk4 => step_rk4(p, k, h),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum TrajectoryStatus {
    Complete,
    Truncated { t: f64, reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory<T> {
    pub times: Vec<T>,
    pub states: Vec<PhasePoint<T>>,
    pub params: ModelParams<T>,
    pub integrator: Integrator,
    pub step_size: T,
    pub status: TrajectoryStatus,
}

impl<T: Scalar> Trajectory<T> {
    pub fn is_complete(&self) -> bool {
        self.status == TrajectoryStatus::Complete
    }

    pub fn last(&self) -> &PhasePoint<T> {
        self.states.last().expect("trajectory holds at least the initial state")
    }
}

/// Smallest `a² + b²` on the straight segment joining two states in the `(a, b)` plane.
fn segment_radius_sq<T: Scalar>(p: &PhasePoint<T>, q: &PhasePoint<T>) -> T {
    let (da, db) = (q.a - p.a, q.b - p.b);
    let len = da * da + db * db;
    let t = if len > T::zero() { (-(p.a * da + p.b * db) / len).max(T::zero()).min(T::one()) } else { T::zero() };
    let (a, b) = (p.a + t * da, p.b + t * db);
    a * a + b * b
}

/// Advances by `h`, splitting into halves (recursively) when a step fails.
fn robust_step<T: Scalar>(method: Integrator, p: &PhasePoint<T>, k: &ModelParams<T>, h: T, depth: u32) -> Result<PhasePoint<T>> {
    let attempt = step(method, p, k, h).and_then(|q| {
        let (z, w) = (p.to_array(), q.to_array());
        let jump = crate::fit::max_abs(&std::array::from_fn::<T, DIM, _>(|i| w[i] - z[i]));
        if jump > T::lit(MAX_RELATIVE_JUMP) * (T::one() + crate::fit::max_abs(&z)) {
            Err(Error::Domain(format!("step of size {h} moved the state by {jump}")))
        } else {
            Ok(q)
        }
    });
    match attempt {
        Ok(q) => Ok(q),
        Err(Error::StepFailure { .. } | Error::Domain(_)) if depth < MAX_HALVINGS => {
            let half = T::lit(0.5) * h;
            let mid = robust_step(method, p, k, half, depth + 1)?;
            robust_step(method, &mid, k, half, depth + 1)
        }
        Err(e) => Err(e),
    }
}

/// Fixed-step propagation to `t_max`; the last step is shortened if `h` does not divide `t_max`.
/// A failed step is retried as two half steps, recursively up to [`MAX_HALVINGS`] times.
/// The orbit is truncated with a status flag when that does not help or when it comes within
/// `a² + b² < 100·ε_origin` of the singularity.
pub fn integrate<T: Scalar>(p0: &PhasePoint<T>, k: &ModelParams<T>, t_max: T, h: T, method: Integrator) -> Result<Trajectory<T>> {
    k.validate()?;
    k.check_point(p0)?;
    if !(h > T::zero()) || !h.is_finite() {
        return Err(Error::InvalidParameter(format!("step size must be > 0, got {h}")));
    }
    if !(t_max >= T::zero()) || !t_max.is_finite() {
        return Err(Error::InvalidParameter(format!("t_max must be >= 0, got {t_max}")));
    }
    let ratio = t_max / h;
    let n_full = ratio.round();
    let n = if (ratio - n_full).abs() <= T::lit(1e-9) * ratio.max(T::one()) { n_full } else { ratio.ceil() };
    let n_steps = n.to_usize().unwrap_or(0);
    let mut times = Vec::with_capacity(n_steps + 1);
    let mut states = Vec::with_capacity(n_steps + 1);
    times.push(T::zero());
    states.push(*p0);
    let guard = T::lit(100.0) * k.origin_eps;
    let mut status = TrajectoryStatus::Complete;
    for i in 1..=n_steps {
        let t_prev = times[i - 1];
        let t_next = if i == n_steps { t_max } else { T::from_usize(i).unwrap() * h };
        let current = states[i - 1];
        match robust_step(method, &current, k, t_next - t_prev, 0) {
            Ok(next) if segment_radius_sq(&current, &next) >= guard => {
                times.push(t_next);
                states.push(next);
            }
            Ok(_) => {
                status = TrajectoryStatus::Truncated { t: t_prev.as_f64(), reason: "approached the origin singularity".into() };
                break;
            }
            Err(e) => {
                status = TrajectoryStatus::Truncated { t: t_prev.as_f64(), reason: e.to_string() };
                break;
            }
        }
    }
    Ok(Trajectory { times, states, params: *k, integrator: method, step_size: h, status })
}

/// Deviation statistics of one invariant along a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InvariantDrift<T> {
    pub name: &'static str,
    pub initial: T,
    pub max_abs_deviation: T,
    pub rms_deviation: T,
    /// `max_abs_deviation / (1 + |initial|)`.
    pub relative_drift: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DriftReport<T> {
    pub states: usize,
    /// Ordered as `H, J3, J4, K3, K4, I2`.
    pub invariants: [InvariantDrift<T>; 6],
}

impl<T: Scalar> DriftReport<T> {
    pub fn max_relative(&self) -> T {
        self.invariants.iter().fold(T::zero(), |m, d| m.max(d.relative_drift))
    }

    pub fn get(&self, name: &str) -> Option<&InvariantDrift<T>> {
        self.invariants.iter().find(|d| d.name == name)
    }
}

pub fn drift<T: Scalar>(traj: &Trajectory<T>) -> Result<DriftReport<T>> {
    let values: Vec<[T; 6]> = traj
        .states
        .iter()
        .map(|s| InvariantSet::at(s, &traj.params).map(|v| v.tracked()))
        .collect::<Result<_>>()?;
    let first = values[0];
    let n = T::from_usize(values.len()).unwrap();
    let invariants = std::array::from_fn(|c| {
        let mut max_abs = T::zero();
        let mut sq = T::zero();
        for v in &values {
            let d = (v[c] - first[c]).abs();
            max_abs = max_abs.max(d);
            sq += d * d;
        }
        InvariantDrift {
            name: Observable::INVARIANTS[c].name(),
            initial: first[c],
            max_abs_deviation: max_abs,
            rms_deviation: (sq / n).sqrt(),
            relative_drift: max_abs / (T::one() + first[c].abs()),
        }
    });
    Ok(DriftReport { states: values.len(), invariants })
}

/// Observed order `log2(drift(h) / drift(h/2))` per invariant.
pub fn convergence_orders<T: Scalar>(coarse: &DriftReport<T>, fine: &DriftReport<T>) -> [T; 6] {
    std::array::from_fn(|i| (coarse.invariants[i].max_abs_deviation / fine.invariants[i].max_abs_deviation).log2())
}
