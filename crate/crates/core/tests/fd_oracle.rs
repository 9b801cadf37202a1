use kepler_qbh::{ComplexFunction, ComplexPhaseFunction, ModelParams, Observable, PhaseFunction, PhasePoint, PointSampler};

const H: f64 = 1e-5;

fn shifted(p: &PhasePoint<f64>, i: usize, d: f64) -> PhasePoint<f64> {
    let mut z = p.to_array();
    z[i] += d;
    PhasePoint::from_array(z).unwrap()
}

fn central<F: Fn(&PhasePoint<f64>) -> f64>(f: F, p: &PhasePoint<f64>, i: usize) -> f64 {
    (f(&shifted(p, i, H)) - f(&shifted(p, i, -H))) / (2.0 * H)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / (1.0 + a.abs().max(b.abs()))
}

#[test]
fn real_observables_match_finite_differences() {
    let k = ModelParams::new(1.0, 0.3, -0.2);
    for p in PointSampler::new(3).take::<f64>(50) {
        for obs in Observable::ALL {
            let f = obs.with(k);
            let hess = f.hess_at(&p).unwrap();
            for i in 0..4 {
                let fd = central(|q| f.value_at(q).unwrap(), &p, i);
                assert!(rel(hess.grad[i], fd) < 1e-6, "{} d{i}: {} vs {fd}", obs.name(), hess.grad[i]);
                for j in 0..4 {
                    let fd2 = central(|q| f.grad_at(q).unwrap().grad[j], &p, i);
                    assert!(rel(hess.hess[i][j], fd2) < 1e-5, "{} d{i}d{j}", obs.name());
                    assert!(rel(hess.hess[i][j], hess.hess[j][i]) < 1e-12);
                }
            }
        }
    }
}

#[test]
fn complex_observables_match_finite_differences() {
    let k = ModelParams::new(0.7, -0.4, 0.9);
    for p in PointSampler::new(4).take::<f64>(50) {
        for func in ComplexFunction::ALL {
            let f = func.with(k);
            let obs = f.observable_at(&p).unwrap();
            for i in 0..4 {
                let re = central(|q| f.value_at(q).unwrap().re, &p, i);
                let im = central(|q| f.value_at(q).unwrap().im, &p, i);
                assert!(rel(obs.grad[i].re, re) < 1e-6, "{} re d{i}", func.name());
                assert!(rel(obs.grad[i].im, im) < 1e-6, "{} im d{i}", func.name());
            }
        }
    }
}
