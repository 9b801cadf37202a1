//! Phase-space points, the parabolic chart and coupling parameters.
//!
//! Chart convention: `x = (a² − b²)/2`, `y = a·b`, restricted to the `a > 0` branch.
//! Momenta follow by cotangent lift, so `p_a = a·p_x + b·p_y` and `p_b = −b·p_x + a·p_y`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Default lower bound on `a² + b²` (and on `r` for Cartesian points).
pub const DEFAULT_ORIGIN_EPS: f64 = 1e-12;

/// A point `(a, b, p_a, p_b)` of the four-dimensional phase space in the parabolic chart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhasePoint<T> {
    pub a: T,
    pub b: T,
    pub p_a: T,
    pub p_b: T,
}

impl<T: Scalar> PhasePoint<T> {
    /// Validated constructor using [`DEFAULT_ORIGIN_EPS`].
    pub fn new(a: T, b: T, p_a: T, p_b: T) -> Result<Self> {
        Self::with_origin_eps(a, b, p_a, p_b, T::lit(DEFAULT_ORIGIN_EPS))
    }

    pub fn with_origin_eps(a: T, b: T, p_a: T, p_b: T, eps: T) -> Result<Self> {
        let p = Self { a, b, p_a, p_b };
        if !p.to_array().iter().all(|x| x.is_finite()) {
            return Err(Error::Domain(format!("non-finite phase point {p:?}")));
        }
        if !(p.radius_sq() > eps) {
            return Err(Error::Domain(format!(
                "a^2 + b^2 = {} is inside the origin singularity (eps {eps})",
                p.radius_sq()
            )));
        }
        Ok(p)
    }

    pub fn from_array(z: [T; 4]) -> Result<Self> {
        Self::new(z[0], z[1], z[2], z[3])
    }

    #[inline]
    pub fn to_array(&self) -> [T; 4] {
        [self.a, self.b, self.p_a, self.p_b]
    }

    /// `a² + b²`, which equals twice the Cartesian radius.
    #[inline]
    pub fn radius_sq(&self) -> T {
        self.a * self.a + self.b * self.b
    }

    /// Componentwise `|self - other| / max(1, |other|)`.
    pub fn relative_distance(&self, other: &Self) -> T {
        self.to_array()
            .iter()
            .zip(other.to_array())
            .map(|(x, y)| (*x - y).abs() / T::one().max(y.abs()))
            .fold(T::zero(), T::max)
    }
}

/// A point `(x, y, p_x, p_y)` of the Cartesian chart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CartesianPoint<T> {
    pub x: T,
    pub y: T,
    pub p_x: T,
    pub p_y: T,
}

impl<T: Scalar> CartesianPoint<T> {
    pub fn new(x: T, y: T, p_x: T, p_y: T) -> Result<Self> {
        let c = Self { x, y, p_x, p_y };
        if ![x, y, p_x, p_y].iter().all(|v| v.is_finite()) {
            return Err(Error::Domain(format!("non-finite Cartesian point {c:?}")));
        }
        if !(c.radius() > T::lit(DEFAULT_ORIGIN_EPS)) {
            return Err(Error::Domain("Cartesian point at the origin".into()));
        }
        Ok(c)
    }

    #[inline]
    pub fn radius(&self) -> T {
        self.x.hypot(self.y)
    }

    #[inline]
    pub fn angular_momentum(&self) -> T {
        self.x * self.p_y - self.y * self.p_x
    }

    pub fn relative_distance(&self, other: &Self) -> T {
        [
            (self.x, other.x),
            (self.y, other.y),
            (self.p_x, other.p_x),
            (self.p_y, other.p_y),
        ]
        .iter()
        .map(|(u, v)| (*u - *v).abs() / T::one().max(v.abs()))
        .fold(T::zero(), T::max)
    }
}

/// Maps a chart point (`a > 0`) to Cartesian positions and momenta.
pub fn to_cartesian<T: Scalar>(p: &PhasePoint<T>) -> Result<CartesianPoint<T>> {
    if !(p.a > T::zero()) {
        return Err(Error::Domain(format!("chart requires a > 0, got a = {}", p.a)));
    }
    let s = p.radius_sq();
    let half = T::lit(0.5);
    Ok(CartesianPoint {
        x: half * (p.a * p.a - p.b * p.b),
        y: p.a * p.b,
        p_x: (p.a * p.p_a - p.b * p.p_b) / s,
        p_y: (p.b * p.p_a + p.a * p.p_b) / s,
    })
}

/// Inverse chart, selecting the `a > 0` branch.
///
/// Uses `a = sqrt(r + x)` on the right half-plane and `b = sign(y)·sqrt(r − x)` on the left,
/// so neither branch subtracts nearly equal numbers. The negative `x` axis (`a = 0`) is rejected.
pub fn from_cartesian<T: Scalar>(c: &CartesianPoint<T>) -> Result<PhasePoint<T>> {
    let r = c.radius();
    if !(r > T::lit(DEFAULT_ORIGIN_EPS)) {
        return Err(Error::Domain(format!("origin: r = {r}")));
    }
    let (a, b) = if c.x >= T::zero() {
        let a = (r + c.x).sqrt();
        (a, c.y / a)
    } else {
        if c.y == T::zero() {
            return Err(Error::Domain("negative x axis is outside the a > 0 chart".into()));
        }
        let b = (r - c.x).sqrt().copysign(c.y);
        (c.y / b, b)
    };
    let p_a = a * c.p_x + b * c.p_y;
    let p_b = -b * c.p_x + a * c.p_y;
    PhasePoint::new(a, b, p_a, p_b)
}

/// Couplings `(k1, k2, k3)` of the Hamiltonian plus numeric tolerances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelParams<T> {
    pub k1: T,
    pub k2: T,
    pub k3: T,
    /// Relative tolerance for identity residuals.
    pub tol_identity: T,
    /// Relative tolerance for finite-difference comparisons.
    pub tol_fd: T,
    pub origin_eps: T,
}

impl<T: Scalar> ModelParams<T> {
    pub fn new(k1: T, k2: T, k3: T) -> Self {
        Self {
            k1,
            k2,
            k3,
            tol_identity: T::lit(1e-9),
            tol_fd: T::lit(1e-6),
            origin_eps: T::lit(DEFAULT_ORIGIN_EPS),
        }
    }

    pub fn with_tolerances(mut self, tol_identity: T, tol_fd: T) -> Result<Self> {
        self.tol_identity = tol_identity;
        self.tol_fd = tol_fd;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if ![self.k1, self.k2, self.k3].iter().all(|k| k.is_finite()) {
            return Err(Error::InvalidParameter("couplings must be finite".into()));
        }
        for (name, t) in [
            ("tol_identity", self.tol_identity),
            ("tol_fd", self.tol_fd),
            ("origin_eps", self.origin_eps),
        ] {
            if !(t > T::zero()) {
                return Err(Error::InvalidParameter(format!("{name} must be > 0, got {t}")));
            }
        }
        Ok(())
    }

    /// The same couplings with `k2 = k3 = 0`.
    pub fn kepler_reduced(&self) -> Self {
        Self {
            k2: T::zero(),
            k3: T::zero(),
            ..*self
        }
    }

    pub fn check_point(&self, p: &PhasePoint<T>) -> Result<()> {
        if p.radius_sq() > self.origin_eps {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "a^2 + b^2 = {} below origin eps {}",
                p.radius_sq(),
                self.origin_eps
            )))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_point_maps_to_half_x() {
        let c = to_cartesian(&PhasePoint::new(1.0, 0.0, 0.0, 1.0).unwrap()).unwrap();
        assert_eq!((c.x, c.y, c.p_x, c.p_y), (0.5, 0.0, 0.0, 1.0));
    }

    #[test]
    fn zero_momenta_stay_zero() {
        let c = to_cartesian(&PhasePoint::new(1.0, 1.0, 0.0, 0.0).unwrap()).unwrap();
        assert_eq!((c.x, c.y, c.p_x, c.p_y), (0.0, 1.0, 0.0, 0.0));
    }

    #[test]
    fn inverse_examples() {
        let p = from_cartesian(&CartesianPoint::new(0.5, 0.0, 0.0, 1.0).unwrap()).unwrap();
        assert_eq!(p.to_array(), [1.0, 0.0, 0.0, 1.0]);
        let q = from_cartesian(&CartesianPoint::new(0.0, 1.0, 0.0, 0.0).unwrap()).unwrap();
        assert_eq!((q.a, q.b), (1.0, 1.0));
    }

    #[test]
    fn left_half_plane_branch() {
        let c = CartesianPoint::new(-1.5, -0.25, 0.3, -0.7).unwrap();
        let p = from_cartesian(&c).unwrap();
        assert!(p.a > 0.0 && p.b < 0.0);
        assert!(to_cartesian(&p).unwrap().relative_distance(&c) < 1e-14);
    }

    #[test]
    fn chart_domain_errors() {
        assert!(matches!(
            to_cartesian(&PhasePoint::new(-0.5, 1.0, 0.0, 0.0).unwrap()),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            from_cartesian(&CartesianPoint { x: 0.0, y: 0.0, p_x: 1.0, p_y: 0.0 }),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            from_cartesian(&CartesianPoint { x: -1.0, y: 0.0, p_x: 1.0, p_y: 0.0 }),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn point_validation() {
        assert!(PhasePoint::new(0.0, 0.0, 1.0, 1.0).is_err());
        assert!(PhasePoint::new(f64::NAN, 1.0, 1.0, 1.0).is_err());
        assert!(PhasePoint::new(1e-7, 0.0, 1.0, 1.0).is_err());
        assert!(PhasePoint::new(1e-5, 0.0, 1.0, 1.0).is_ok());
    }

    #[test]
    fn params_validation() {
        let k = ModelParams::new(1.0, 0.0, 0.0);
        assert!(k.validate().is_ok());
        assert!(k.with_tolerances(0.0, 1e-6).is_err());
        assert!(ModelParams::new(f64::INFINITY, 0.0, 0.0).validate().is_err());
        let r = ModelParams::new(1.0, 2.0, 3.0).kepler_reduced();
        assert_eq!((r.k1, r.k2, r.k3), (1.0, 0.0, 0.0));
    }
}
