use kepler_qbh::brackets::{jacobiator, poisson, GammaField, PolynomialField, VectorField};
use kepler_qbh::dynamics::step_midpoint;
use kepler_qbh::observables::{cartesian_hamiltonian, hamiltonian};
use kepler_qbh::{from_cartesian, to_cartesian, InvariantSet, ModelParams, Observable, PhaseFunction, PhasePoint};
use proptest::prelude::*;

fn magnitude() -> impl Strategy<Value = f64> {
    0.2f64..2.0
}

fn point() -> impl Strategy<Value = PhasePoint<f64>> {
    (magnitude(), magnitude(), any::<bool>(), -2.0f64..2.0, -2.0f64..2.0)
        .prop_map(|(a, b, flip, pa, pb)| PhasePoint::new(a, if flip { -b } else { b }, pa, pb).unwrap())
}

fn upper_point() -> impl Strategy<Value = PhasePoint<f64>> {
    (magnitude(), magnitude(), -2.0f64..2.0, -2.0f64..2.0).prop_map(|(a, b, pa, pb)| PhasePoint::new(a, b, pa, pb).unwrap())
}

fn params() -> impl Strategy<Value = ModelParams<f64>> {
    (-2.0f64..2.0, -1.0f64..1.0, -1.0f64..1.0).prop_map(|(k1, k2, k3)| ModelParams::new(k1, k2, k3))
}

fn poly() -> impl Strategy<Value = PolynomialField<f64>> {
    (prop::array::uniform4(-1.0f64..1.0), prop::array::uniform4(prop::array::uniform4(-1.0f64..1.0)), prop::array::uniform4(prop::array::uniform4(-1.0f64..1.0)))
        .prop_map(|(constant, linear, quadratic)| PolynomialField { constant, linear, quadratic })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn chart_round_trip(p in point()) {
        let q = from_cartesian(&to_cartesian(&p).unwrap()).unwrap();
        prop_assert!(p.relative_distance(&q) < 1e-12);
    }

    #[test]
    fn hamiltonian_agrees_across_charts(p in upper_point(), k in params()) {
        let c = to_cartesian(&p).unwrap();
        let hc = cartesian_hamiltonian(&c, [k.k1 / 2.0, k.k2 / 2.0, k.k3 / 2.0]).unwrap();
        let hp = hamiltonian(&p, &k).unwrap();
        prop_assert!((hc - hp).abs() / (1.0 + hp.abs()) < 1e-12);
        let (j, _, _) = kepler_qbh::observables::momenta(&p).unwrap();
        prop_assert!((c.angular_momentum() - j / 2.0).abs() < 1e-12);
    }

    #[test]
    fn poisson_bracket_is_antisymmetric(p in point(), k in params()) {
        for (f, g) in [(Observable::H, Observable::J), (Observable::P1, Observable::Lambda), (Observable::A1, Observable::Mb2)] {
            let fg = poisson(&f.with(k), &g.with(k), &p).unwrap();
            let gf = poisson(&g.with(k), &f.with(k), &p).unwrap();
            prop_assert!((fg + gf).abs() < 1e-12 * (1.0 + fg.abs()));
        }
    }

    #[test]
    fn tracked_integrals_commute_with_h(p in point(), k in params()) {
        let h = Observable::H.with(k);
        for obs in Observable::INVARIANTS {
            let f = obs.with(k);
            let scale = 1.0 + f.value_at(&p).unwrap().abs() + h.value_at(&p).unwrap().abs();
            prop_assert!(poisson(&f, &h, &p).unwrap().abs() / scale < 1e-10, "{}", obs.name());
        }
    }

    #[test]
    fn lie_bracket_satisfies_jacobi(p in point(), k in params(), x in poly(), y in poly()) {
        let g = GammaField { params: k }.jet2_at(&p).unwrap();
        let x = x.jet2_at(&p).unwrap();
        let y = y.jet2_at(&p).unwrap();
        let j = jacobiator(&g, &x, &y);
        let scale = 1.0 + g.value.iter().chain(g.jac.iter().flatten()).fold(0.0f64, |m, v| m.max(v.abs()));
        prop_assert!(j.iter().all(|v| v.abs() < 1e-9 * scale * scale), "{j:?}");
    }

    #[test]
    fn midpoint_is_self_adjoint(p in point(), k in params(), h in 1e-3f64..2e-2) {
        let fwd = step_midpoint(&p, &k, h).unwrap();
        let back = step_midpoint(&fwd, &k, -h).unwrap();
        prop_assert!(p.relative_distance(&back) < 1e-11);
    }

    #[test]
    fn single_precision_tracks_double(p in point(), k in params()) {
        let p32 = PhasePoint::<f32>::new(p.a as f32, p.b as f32, p.p_a as f32, p.p_b as f32).unwrap();
        let k32 = ModelParams::<f32>::new(k.k1 as f32, k.k2 as f32, k.k3 as f32);
        let a = InvariantSet::at(&p, &k).unwrap().tracked();
        let b = InvariantSet::at(&p32, &k32).unwrap().tracked();
        for (x, y) in a.iter().zip(b) {
            prop_assert!((x - y as f64).abs() / (1.0 + x.abs()) < 1e-3);
        }
    }
}
