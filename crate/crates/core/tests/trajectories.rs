use kepler_qbh::dynamics::{derivative, drift, integrate, step_rk4, Integrator};
use kepler_qbh::observables::{cartesian_hamiltonian, momenta};
use kepler_qbh::{to_cartesian, ModelParams, PhasePoint};

#[test]
fn rk4_difference_quotient_approaches_field() {
    let p = PhasePoint::new(0.8, 0.7, -0.4, 0.9).unwrap();
    let k = ModelParams::new(1.0, 0.3, -0.2);
    let g: [f64; 4] = derivative(&p, &k).unwrap().real_parts();
    let err = |h: f64| {
        let q = step_rk4(&p, &k, h).unwrap().to_array();
        let z = p.to_array();
        (0..4).map(|i| ((q[i] - z[i]) / h - g[i]).abs()).fold(0.0, f64::max)
    };
    let ratio = err(1e-3) / err(5e-4);
    assert!((1.8..2.2).contains(&ratio), "{ratio}");
}

#[test]
fn midpoint_energy_error_stays_bounded_while_rk4_grows() {
    // Bound eccentric Kepler orbit.
    let p = PhasePoint::new(1.0, 0.0, 0.0, 1.2).unwrap();
    let k = ModelParams::new(-2.0, 0.0, 0.0);
    let h_dev = |t: f64, m: Integrator| {
        let traj = integrate(&p, &k, t, 0.05, m).unwrap();
        assert!(traj.is_complete());
        drift(&traj).unwrap().get("H").unwrap().max_abs_deviation
    };
    let (mid_short, mid_long) = (h_dev(50.0, Integrator::Midpoint), h_dev(400.0, Integrator::Midpoint));
    assert!(mid_long < 1.5 * mid_short, "{mid_long} vs {mid_short}");
    let (rk_short, rk_long) = (h_dev(50.0, Integrator::Rk4), h_dev(400.0, Integrator::Rk4));
    assert!(rk_long > 4.0 * rk_short, "{rk_long} vs {rk_short}");
}

#[test]
fn circular_orbit_keeps_constant_radius() {
    // Cartesian circle of radius r0 under V = c1/r with c1 = k1/2 < 0 (attractive).
    let k = ModelParams::new(-2.0, 0.0, 0.0);
    let r0 = 1.0f64;
    let v = (1.0f64 / r0).sqrt();
    let c = kepler_qbh::CartesianPoint::new(r0, 0.0, 0.0, v).unwrap();
    let p = kepler_qbh::from_cartesian(&c).unwrap();
    let traj = integrate(&p, &k, 100.0, 1e-2, Integrator::Midpoint).unwrap();
    assert!(traj.is_complete());
    for s in &traj.states {
        let r = s.radius_sq() / 2.0;
        assert!((r - r0).abs() < 1e-3, "r = {r}");
    }
}

#[test]
fn trajectory_conserves_cartesian_energy_and_angular_momentum() {
    let k = ModelParams::new(-2.0, 0.0, 0.0);
    let p: PhasePoint<f64> = PhasePoint::new(1.1, 0.4, 0.2, 0.9).unwrap();
    let traj = integrate(&p, &k, 10.0, 1e-3, Integrator::Midpoint).unwrap();
    let h_drift = drift(&traj).unwrap().get("H").unwrap().max_abs_deviation;
    assert!(h_drift < 1e-4);
    let e0 = cartesian_hamiltonian(&to_cartesian(&p).unwrap(), [-1.0, 0.0, 0.0]).unwrap();
    let l0 = to_cartesian(&p).unwrap().angular_momentum();
    for s in traj.states.iter().filter(|s| s.a > 0.0) {
        let c = to_cartesian(s).unwrap();
        assert!((cartesian_hamiltonian(&c, [-1.0, 0.0, 0.0]).unwrap() - e0).abs() <= h_drift + 1e-12);
        assert!((c.angular_momentum() - l0).abs() < 1e-9);
        let (j, _, _) = momenta(s).unwrap();
        assert!((c.angular_momentum() - j / 2.0).abs() < 1e-12);
    }
}

#[test]
fn approach_to_origin_truncates() {
    // Radial infall: zero angular momentum aimed at the origin.
    let k = ModelParams::new(-2.0, 0.0, 0.0);
    let p = PhasePoint::new(1.0, 0.0, -1.0, 0.0).unwrap();
    for method in [Integrator::Rk4, Integrator::Midpoint] {
        let traj = integrate(&p, &k, 5.0, 1e-3, method).unwrap();
        assert!(!traj.is_complete(), "{method}");
        assert!(traj.states.iter().all(|s| s.radius_sq() >= 100.0 * k.origin_eps && s.a > 0.0));
        assert!(traj.times.windows(2).all(|w| w[1] > w[0]));
    }
}

