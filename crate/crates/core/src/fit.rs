//! Residual normalisation and fitting of signs and scalar factors.

use num_complex::Complex;
use serde::Serialize;

use crate::scalar::Scalar;

/// `|residual| / (1 + |scale|)`.
#[inline]
pub fn relative<T: Scalar>(residual: T, scale: T) -> T {
    residual.abs() / (T::one() + scale.abs())
}

/// Largest absolute component.
pub fn max_abs<T: Scalar>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |m, x| m.max(x.abs()))
}

pub fn max_abs_complex<T: Scalar>(v: &[Complex<T>]) -> T {
    v.iter().fold(T::zero(), |m, x| m.max(x.norm()))
}

/// Outcome of comparing a printed value with its computed counterpart up to a global sign.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SignFit {
    /// `+1` or `−1` when one sign reproduces the computed value, otherwise `None`.
    pub sign: Option<f64>,
    /// Relative residual with the as-printed sign.
    pub residual_as_printed: f64,
    /// Relative residual with the better of the two signs.
    pub residual_best: f64,
}

impl SignFit {
    pub fn matches_as_printed(&self) -> bool {
        self.sign == Some(1.0)
    }
}

/// Fits `computed ≈ s · printed` with `s ∈ {+1, −1}`, jointly over all samples.
pub fn fit_sign(pairs: &[(f64, f64)], tol: f64) -> SignFit {
    let mut plus = 0.0f64;
    let mut minus = 0.0f64;
    for &(printed, computed) in pairs {
        let scale = printed.abs().max(computed.abs());
        plus = plus.max(relative(computed - printed, scale));
        minus = minus.max(relative(computed + printed, scale));
    }
    let sign = if plus < tol {
        Some(1.0)
    } else if minus < tol {
        Some(-1.0)
    } else {
        None
    };
    SignFit { sign, residual_as_printed: plus, residual_best: plus.min(minus) }
}

/// Least-squares `c` in `y ≈ c·x` and the relative residual it leaves.
pub fn fit_real_factor<T: Scalar>(x: &[T], y: &[T]) -> (T, T) {
    let xx: T = x.iter().map(|v| *v * *v).sum();
    let xy: T = x.iter().zip(y).map(|(a, b)| *a * *b).sum();
    let c = if xx > T::zero() { xy / xx } else { T::zero() };
    let scale = max_abs(x).max(max_abs(y));
    let res = x.iter().zip(y).fold(T::zero(), |m, (a, b)| m.max((*b - c * *a).abs()));
    (c, relative(res, scale))
}

/// Least-squares complex `c` in `y ≈ c·x`.
pub fn fit_complex_factor<T: Scalar>(x: &[Complex<T>], y: &[Complex<T>]) -> (Complex<T>, T) {
    let xx: T = x.iter().map(|v| v.norm_sqr()).sum();
    let xy: Complex<T> = x.iter().zip(y).fold(Complex::new(T::zero(), T::zero()), |s, (a, b)| s + a.conj() * b);
    let c = if xx > T::zero() { xy.unscale(xx) } else { Complex::new(T::zero(), T::zero()) };
    let scale = max_abs_complex(x).max(max_abs_complex(y));
    let res = x.iter().zip(y).fold(T::zero(), |m, (a, b)| m.max((*b - c * *a).norm()));
    (c, relative(res, scale))
}

/// Running summary of a constant fitted independently at many points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConstantSummary {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Default for ConstantSummary {
    fn default() -> Self {
        Self { mean: 0.0, min: f64::INFINITY, max: f64::NEG_INFINITY, count: 0 }
    }
}

impl ConstantSummary {
    pub fn push(&mut self, v: f64) {
        self.count += 1;
        self.mean += (v - self.mean) / self.count as f64;
        self.min = self.min.min(v);
        self.max = self.max.max(v);
    }

    pub fn merge(&mut self, other: &Self) {
        if other.count == 0 {
            return;
        }
        let n = self.count + other.count;
        self.mean = (self.mean * self.count as f64 + other.mean * other.count as f64) / n as f64;
        self.count = n;
        self.min = self.min.min(other.min);
        self.max = self.max.max(other.max);
    }

    pub fn spread(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            self.max - self.min
        }
    }

    /// Point-independent within `tol` relative to the magnitude of the constant.
    pub fn is_constant(&self, tol: f64) -> bool {
        self.count > 0 && self.spread() <= tol * (1.0 + self.mean.abs())
    }

    /// The mean rounded to the nearest integer when it is one to within `tol`.
    pub fn nearest_integer(&self, tol: f64) -> Option<f64> {
        let r = self.mean.round();
        (self.count > 0 && (self.min - r).abs() <= tol && (self.max - r).abs() <= tol).then_some(r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sign_fit_detects_flip() {
        let f = fit_sign(&[(1.0, -1.0), (2.5, -2.5)], 1e-12);
        assert_eq!(f.sign, Some(-1.0));
        assert!(!f.matches_as_printed());
        let g = fit_sign(&[(1.0, 1.0)], 1e-12);
        assert!(g.matches_as_printed());
        let h = fit_sign(&[(1.0, 3.0)], 1e-12);
        assert_eq!(h.sign, None);
    }

    #[test]
    fn factor_fits() {
        let (c, r) = fit_real_factor(&[1.0, -2.0, 0.5], &[-2.0, 4.0, -1.0]);
        assert_eq!(c, -2.0);
        assert_eq!(r, 0.0);
        let x = [Complex::new(1.0, 1.0), Complex::new(0.0, 2.0)];
        let i2 = Complex::new(0.0, 2.0);
        let y = [x[0] * i2, x[1] * i2];
        let (c, r) = fit_complex_factor(&x, &y);
        assert!((c - i2).norm() < 1e-15 && r < 1e-15);
    }

    #[test]
    fn constant_summary() {
        let mut s = ConstantSummary::default();
        for v in [2.0, 2.0 + 1e-12, 2.0 - 1e-12] {
            s.push(v);
        }
        assert!(s.is_constant(1e-9));
        assert_eq!(s.nearest_integer(1e-9), Some(2.0));
        let mut t = ConstantSummary::default();
        t.push(1.0);
        s.merge(&t);
        assert!(!s.is_constant(1e-9));
        assert_eq!(s.count, 4);
    }
}
