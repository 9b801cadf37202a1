//! Identity suites evaluated over seeded random phase points.
//!
//! Each point is evaluated independently (in parallel); results are folded in point order,
//! so reports do not depend on scheduling.

use kepler_qbh::brackets::{obstruction, poisson, scaling_check, y34_residual};
use kepler_qbh::fit::{relative, ConstantSummary};
use kepler_qbh::forms::{
    contraction_identities, degeneracy, kernel_and_involutivity, nijenhuis_torsion, orthogonality, recursion_operator, FormKind,
};
use kepler_qbh::observables::{cartesian_hamiltonian, hamiltonian, modulus_identities, momenta};
use kepler_qbh::{to_cartesian, ModelParams64, Observable, PhaseFunction, PhasePoint64, PointSampler};
use rayon::prelude::*;

use crate::error::Result;
use crate::report::SuiteResult;

pub const SCALING_TOL: f64 = 1e-9;
pub const CONSERVATION_TOL: f64 = 1e-10;
pub const MODULUS_TOL: f64 = 1e-9;
pub const FIELD_BRACKET_TOL: f64 = 1e-9;
pub const CONTRACTION_TOL: f64 = 1e-9;
pub const DEGENERACY_TOL: f64 = 1e-9;
pub const RECURSION_TOL: f64 = 1e-9;
pub const KERNEL_TOL: f64 = 1e-10;
pub const ORTHOGONALITY_TOL: f64 = 1e-9;
pub const TORSION_THRESHOLD: f64 = 1e-6;
/// Largest tolerated fraction of points with torsion below [`TORSION_THRESHOLD`].
pub const TORSION_MAX_SMALL_FRACTION: f64 = 0.05;
pub const CHART_TOL: f64 = 1e-12;
/// Points closer than this to `J = 0` are not drawn.
pub const MIN_ABS_J: f64 = 1e-3;
/// Offset applied to the seed for the upper-half-plane chart sample.
const CHART_SEED_OFFSET: u64 = 0x9e37_79b9;

pub fn sample_points(seed: u64, n: usize) -> Vec<PhasePoint64> {
    PointSampler::new(seed).min_abs_j(MIN_ABS_J).take(n)
}

pub fn sample_chart_points(seed: u64, n: usize) -> Vec<PhasePoint64> {
    PointSampler::new(seed.wrapping_add(CHART_SEED_OFFSET)).upper_half_plane().take(n)
}

fn per_point<R, F>(points: &[PhasePoint64], f: F) -> Result<Vec<R>>
where
    R: Send,
    F: Fn(&PhasePoint64) -> kepler_qbh::Result<R> + Sync + Send,
{
    Ok(points.par_iter().map(f).collect::<kepler_qbh::Result<Vec<R>>>()?)
}

fn tol_or(over: Option<f64>, default: f64) -> f64 {
    over.unwrap_or(default)
}

const SCALED: [&str; 4] = ["A", "B", "M_a", "M_b"];

pub fn bracket_scalings(points: &[PhasePoint64], k: &ModelParams64, tol: Option<f64>) -> Result<SuiteResult> {
    let rows = per_point(points, |p| scaling_check(p, k))?;
    let mut s = SuiteResult::new("bracket_scalings", "{F,H} = c i lambda F for F = A, B, M_a, M_b", points.len(), tol_or(tol, SCALING_TOL));
    let mut fits = [ConstantSummary::default(); 4];
    let mut imag = 0.0f64;
    for row in &rows {
        for (i, e) in row.iter().enumerate() {
            s.residual(e.residual);
            if let Some(c) = e.fitted_factor {
                fits[i].push(c.re);
                imag = imag.max(c.im.abs());
            }
        }
    }
    for (name, f) in SCALED.iter().zip(fits) {
        s.constant(&format!("c_{name}"), f);
    }
    s.metric("max_imaginary_part_of_fitted_factors", imag);
    Ok(s.finish(true))
}

pub fn conservation(points: &[PhasePoint64], k: &ModelParams64, tol: Option<f64>) -> Result<SuiteResult> {
    let tracked = [Observable::J3, Observable::J4, Observable::K3, Observable::K4, Observable::I2];
    let h = Observable::H.with(*k);
    let rows = per_point(points, |p| {
        let gh = h.grad_at(p)?.grad;
        let nh = gh.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        tracked
            .iter()
            .map(|obs| {
                let f = obs.with(*k);
                let gf = f.grad_at(p)?.grad;
                let nf = gf.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                Ok(relative(poisson(&f, &h, p)?, nf * nh))
            })
            .collect::<kepler_qbh::Result<Vec<f64>>>()
    })?;
    let mut s = SuiteResult::new("conservation", "{I,H} = 0 for I = J3, J4, K3, K4, I2", points.len(), tol_or(tol, CONSERVATION_TOL));
    for (i, obs) in tracked.iter().enumerate() {
        let worst = rows.iter().fold(0.0f64, |m, r| m.max(r[i]));
        s.metric(&format!("max_bracket_{}", obs.name()), worst);
        s.residual(worst);
    }
    Ok(s.finish(true))
}

pub fn modulus(points: &[PhasePoint64], k: &ModelParams64, tol: Option<f64>) -> Result<SuiteResult> {
    let rows = per_point(points, |p| modulus_identities(p, k))?;
    let mut s = SuiteResult::new(
        "modulus_identities",
        "|B|^2 = 2J^2H + 2J(k3 pa - k2 pb) + k1^2 + (k2 b - k3 a)^2; |M_a|^2 - |M_b|^2 = 4 k1 J3; |M_a|^2, |M_b|^2 expansions",
        points.len(),
        tol_or(tol, MODULUS_TOL),
    );
    let pick: [(&str, fn(&kepler_qbh::observables::ModulusResiduals<f64>) -> f64); 4] = [
        ("b_modulus", |r| r.b_modulus),
        ("m_difference", |r| r.m_difference),
        ("ma_modulus", |r| r.ma_squared),
        ("mb_modulus", |r| r.mb_squared),
    ];
    for (name, f) in pick {
        let worst = rows.iter().map(f).fold(0.0f64, f64::max);
        s.metric(name, worst);
        s.residual(worst);
    }
    Ok(s.finish(true))
}

pub fn field_brackets(points: &[PhasePoint64], k: &ModelParams64, tol: Option<f64>) -> Result<SuiteResult> {
    let rows = per_point(points, |p| Ok((y34_residual(p, k)?, obstruction(p, k)?)))?;
    let mut s = SuiteResult::new(
        "field_brackets",
        "B* Y_A + A Y_B* = X_J34; [Gamma, B* Y_A] = c i J34 X_lambda",
        points.len(),
        tol_or(tol, FIELD_BRACKET_TOL),
    );
    let mut factor = ConstantSummary::default();
    let (mut y34, mut obs, mut imag) = (0.0f64, 0.0f64, 0.0f64);
    for (r, o) in &rows {
        y34 = y34.max(*r);
        obs = obs.max(o.residual);
        factor.push(o.factor.re);
        imag = imag.max(o.factor.im.abs());
    }
    s.residual(y34);
    s.residual(obs);
    s.metric("y34_residual", y34);
    s.metric("obstruction_residual", obs);
    s.metric("obstruction_factor_imaginary_part", imag);
    s.constant("c_obstruction", factor);
    Ok(s.finish(true))
}

pub fn contraction(points: &[PhasePoint64], k: &ModelParams64, tol: Option<f64>) -> Result<SuiteResult> {
    let rows = per_point(points, |p| contraction_identities(p, k))?;
    let mut s = SuiteResult::new(
        "contraction_identities",
        "i(Gamma)Omega = 2 i lambda d(A B*); i(Gamma)Omega_M = i lambda d(M_a M_b*)",
        points.len(),
        tol_or(tol, CONTRACTION_TOL),
    );
    let names = ["c_Omega1_dJ4", "c_Omega2_dJ3", "c_OmegaM1_dK4", "c_OmegaM2_dK3"];
    let mut fits = [ConstantSummary::default(); 4];
    let (mut cx, mut cm) = (0.0f64, 0.0f64);
    for r in &rows {
        for (i, e) in r.entries.iter().enumerate() {
            s.residual(e.residual);
            fits[i].push(e.factor);
        }
        cx = cx.max(r.complex_residual);
        cm = cm.max(r.complex_residual_m);
    }
    s.residual(cx);
    s.residual(cm);
    s.metric("complex_residual_omega", cx);
    s.metric("complex_residual_omega_m", cm);
    for (n, f) in names.iter().zip(fits) {
        s.constant(n, f);
    }
    Ok(s.finish(true))
}

pub fn degeneracy_suite(points: &[PhasePoint64], k: &ModelParams64, tol: Option<f64>) -> Result<SuiteResult> {
    let rows = per_point(points, |p| degeneracy(p, k))?;
    let mut s = SuiteResult::new(
        "degeneracy",
        "Omega1, Omega2, Omega_M1, Omega_M2 are degenerate (rank 2); mixed wedges vanish",
        points.len(),
        tol_or(tol, DEGENERACY_TOL),
    );
    let (mut pf, mut mixed, mut bad_rank) = (0.0f64, 0.0f64, 0usize);
    for r in &rows {
        pf = pf.max(r.max_pfaffian());
        mixed = mixed.max(r.max_mixed());
        bad_rank += r.rank.iter().filter(|&&x| x != 2).count();
    }
    s.residual(pf);
    s.residual(mixed);
    s.metric("max_relative_pfaffian", pf);
    s.metric("max_relative_mixed_wedge", mixed);
    s.metric("rank_not_two", bad_rank as f64);
    Ok(s.finish(bad_rank == 0))
}

pub fn recursion(points: &[PhasePoint64], k: &ModelParams64, tol: Option<f64>) -> Result<SuiteResult> {
    let rows = per_point(points, |p| FormKind::DEGENERATE.iter().map(|&f| recursion_operator(f, p, k)).collect::<kepler_qbh::Result<Vec<_>>>())?;
    let tol = tol_or(tol, RECURSION_TOL);
    let mut s = SuiteResult::new(
        "recursion_operators",
        "det R = 0; eigenvalues {0, 0, tau, tau} (two doubly degenerate eigenvalues)",
        points.len(),
        tol,
    );
    let (mut det, mut zero, mut split, mut taum, mut def) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let mut pattern_failures = 0usize;
    for ops in &rows {
        for r in ops {
            det = det.max(r.relative_det());
            zero = zero.max(r.zero_pair);
            split = split.max(r.pair_split);
            taum = taum.max(r.tau_mismatch());
            def = def.max(r.defining_residual);
            if !r.has_pattern(tol, tol) {
                pattern_failures += 1;
            }
        }
    }
    for v in [det, zero, split, taum, def] {
        s.residual(v);
    }
    s.metric("max_relative_det", det);
    s.metric("max_zero_pair", zero);
    s.metric("max_pair_split", split);
    s.metric("max_tau_mismatch", taum);
    s.metric("max_defining_residual", def);
    s.metric("pattern_failures", pattern_failures as f64);
    Ok(s.finish(pattern_failures == 0))
}

pub fn kernel(points: &[PhasePoint64], k: &ModelParams64, tol: Option<f64>) -> Result<SuiteResult> {
    let rows = per_point(points, |p| FormKind::DEGENERATE.iter().map(|&f| kernel_and_involutivity(f, p, k)).collect::<kepler_qbh::Result<Vec<_>>>())?;
    let mut s = SuiteResult::new(
        "kernel_involutivity",
        "kernel distributions of the degenerate forms are integrable",
        points.len(),
        tol_or(tol, KERNEL_TOL),
    );
    let (mut ann, mut field, mut bracket, mut sigma) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let mut failures = 0usize;
    for reps in &rows {
        for r in reps {
            ann = ann.max(r.annihilation);
            match &r.involutivity {
                Some(c) => {
                    field = field.max(c.field_annihilation);
                    bracket = bracket.max(c.bracket_annihilation);
                    sigma = sigma.max(c.sigma_ratio);
                    if !c.passes() {
                        failures += 1;
                    }
                }
                None => failures += 1,
            }
        }
    }
    for v in [ann, field, bracket] {
        s.residual(v);
    }
    s.metric("max_basis_annihilation", ann);
    s.metric("max_field_annihilation", field);
    s.metric("max_bracket_annihilation", bracket);
    s.metric("max_sigma3_over_sigma1", sigma);
    s.metric("involutivity_failures", failures as f64);
    Ok(s.finish(failures == 0))
}

pub fn orthogonality_suite(points: &[PhasePoint64], k: &ModelParams64, tol: Option<f64>) -> Result<SuiteResult> {
    let rows = per_point(points, |p| orthogonality(p, k))?;
    let mut s = SuiteResult::new(
        "orthogonality",
        "Omega1(Y4, Gamma) = Omega2(Y3, Gamma) = Omega_M1(Z4, Gamma) = Omega_M2(Z3, Gamma) = 0",
        points.len(),
        tol_or(tol, ORTHOGONALITY_TOL),
    );
    let names = ["Omega1_Y4", "Omega2_Y3", "OmegaM1_Z4", "OmegaM2_Z3"];
    for (i, n) in names.iter().enumerate() {
        let worst = rows.iter().fold(0.0f64, |m, r| m.max(r[i]));
        s.metric(n, worst);
        s.residual(worst);
    }
    Ok(s.finish(true))
}

pub fn torsion(points: &[PhasePoint64], k: &ModelParams64) -> Result<SuiteResult> {
    let rows = per_point(points, |p| FormKind::DEGENERATE.iter().map(|&f| nijenhuis_torsion(f, p, k)).collect::<kepler_qbh::Result<Vec<_>>>())?;
    let mut s = SuiteResult::new(
        "nijenhuis_torsion",
        "the recursion operators are not Nijenhuis (weak structures)",
        points.len(),
        TORSION_MAX_SMALL_FRACTION,
    );
    let labels = ["R1", "R2", "RM1", "RM2"];
    let n = rows.len().max(1) as f64;
    for (i, l) in labels.iter().enumerate() {
        let small = rows.iter().filter(|r| !(r[i] > TORSION_THRESHOLD)).count() as f64;
        let min = rows.iter().fold(f64::INFINITY, |m, r| m.min(r[i]));
        s.metric(&format!("{l}_fraction_above_threshold"), 1.0 - small / n);
        s.metric(&format!("{l}_min_torsion"), min);
        if i == 0 {
            s.residual(small / n);
        }
    }
    s.metric("threshold", TORSION_THRESHOLD);
    Ok(s.finish(true))
}

/// `H(a, b, pa, pb; k) = H_cartesian(x, y, px, py; k/2)` and `L = J/2` on the chart.
pub fn chart_oracle(points: &[PhasePoint64], k: &ModelParams64, tol: Option<f64>) -> Result<SuiteResult> {
    let half = [k.k1 / 2.0, k.k2 / 2.0, k.k3 / 2.0];
    let rows = per_point(points, |p| {
        let c = to_cartesian(p)?;
        let hp = hamiltonian(p, k)?;
        let hc = cartesian_hamiltonian(&c, half)?;
        let (j, _, _) = momenta(p)?;
        Ok((relative(hp - hc, hp.abs().max(hc.abs())), relative(c.angular_momentum() - j / 2.0, j / 2.0)))
    })?;
    let mut s = SuiteResult::new(
        "chart_oracle",
        "parabolic H equals the Cartesian Hamiltonian with couplings k_i/2 on the chart",
        points.len(),
        tol_or(tol, CHART_TOL),
    );
    let he = rows.iter().fold(0.0f64, |m, r| m.max(r.0));
    let le = rows.iter().fold(0.0f64, |m, r| m.max(r.1));
    s.residual(he);
    s.residual(le);
    s.metric("hamiltonian", he);
    s.metric("angular_momentum", le);
    Ok(s.finish(true))
}
