//! Seeded random phase points away from the chart singularity.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::phase::PhasePoint;
use crate::scalar::Scalar;

/// Draws phase points with `a ∈ [0.2, 2]`, `|b| ∈ [0.2, 2]` and momenta in `[-2, 2]`.
///
/// `J = a·p_b − b·p_a` is kept away from zero when `min_abs_j` is set, which keeps
/// `λ = J/(a²+b²)²` nonzero for identities that divide by it.
#[derive(Debug, Clone)]
pub struct PointSampler {
    rng: ChaCha8Rng,
    min_abs_j: Option<f64>,
    upper_half_plane: bool,
}

impl PointSampler {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            min_abs_j: None,
            upper_half_plane: false,
        }
    }

    pub fn min_abs_j(mut self, j: f64) -> Self {
        self.min_abs_j = Some(j);
        self
    }

    /// Restrict to `b > 0`, i.e. the Cartesian half-plane `y > 0`.
    pub fn upper_half_plane(mut self) -> Self {
        self.upper_half_plane = true;
        self
    }

    fn magnitude(&mut self) -> f64 {
        self.rng.random_range(0.2..=2.0)
    }

    pub fn sample<T: Scalar>(&mut self) -> PhasePoint<T> {
        loop {
            let a = self.magnitude();
            let mut b = self.magnitude();
            if !self.upper_half_plane && self.rng.random_bool(0.5) {
                b = -b;
            }
            let p_a = self.rng.random_range(-2.0..=2.0);
            let p_b = self.rng.random_range(-2.0..=2.0);
            if let Some(jmin) = self.min_abs_j {
                if (a * p_b - b * p_a).abs() < jmin {
                    continue;
                }
            }
            return PhasePoint::new(T::lit(a), T::lit(b), T::lit(p_a), T::lit(p_b))
                .expect("sampled point is away from the origin");
        }
    }

    pub fn take<T: Scalar>(&mut self, n: usize) -> Vec<PhasePoint<T>> {
        (0..n).map(|_| self.sample()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_in_range() {
        let a: Vec<PhasePoint<f64>> = PointSampler::new(7).min_abs_j(1e-3).take(200);
        let b: Vec<PhasePoint<f64>> = PointSampler::new(7).min_abs_j(1e-3).take(200);
        assert_eq!(a, b);
        for p in &a {
            assert!((0.2..=2.0).contains(&p.a));
            assert!((0.2..=2.0).contains(&p.b.abs()));
            assert!(p.p_a.abs() <= 2.0 && p.p_b.abs() <= 2.0);
            assert!((p.a * p.p_b - p.b * p.p_a).abs() >= 1e-3);
        }
        assert!(a.iter().any(|p| p.b < 0.0));
    }

    #[test]
    fn upper_half_plane_only() {
        let pts: Vec<PhasePoint<f64>> = PointSampler::new(1).upper_half_plane().take(100);
        assert!(pts.iter().all(|p| p.b > 0.0));
    }
}
