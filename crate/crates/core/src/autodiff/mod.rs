//! Forward-mode automatic differentiation over the four phase-space coordinates.
//!
//! Every observable in the crate is written once, generically over a [`Jet`].
//! Evaluating it with plain scalars gives values, with [`Dual1`] gives exact
//! gradients, and with [`Dual2`] gives exact Hessians.

mod dual1;
mod dual2;

pub use dual1::Dual1;
pub use dual2::Dual2;

use std::fmt::Debug;
use std::ops::Neg;

use num_complex::Complex;
use num_traits::Num;

use crate::error::{Error, Result};
use crate::phase::PhasePoint;
use crate::scalar::Scalar;

/// Number of phase-space coordinates, ordered `(a, b, p_a, p_b)`.
pub const DIM: usize = 4;

/// Number types that carry derivative information with respect to the phase-space coordinates.
pub trait Jet<T: Scalar>: Copy + Debug + Num + Neg<Output = Self> {
    fn constant(x: T) -> Self;

    /// The coordinate function `z_index` evaluated at `x`.
    fn variable(index: usize, x: T) -> Self;

    fn value(&self) -> T;

    /// Applies a scalar function given its value and first two derivatives at `self.value()`.
    fn chain(&self, f0: T, f1: T, f2: T) -> Self;

    fn is_finite(&self) -> bool;

    #[inline]
    fn lit(x: f64) -> Self {
        Self::constant(T::lit(x))
    }

    #[inline]
    fn scale(&self, c: T) -> Self {
        *self * Self::constant(c)
    }

    #[inline]
    fn square(&self) -> Self {
        *self * *self
    }

    fn sqrt(&self) -> Self {
        let s = self.value().sqrt();
        let two = T::lit(2.0);
        self.chain(s, T::one() / (two * s), -T::one() / (T::lit(4.0) * s * s * s))
    }

    fn recip(&self) -> Self {
        let v = self.value();
        self.chain(T::one() / v, -T::one() / (v * v), T::lit(2.0) / (v * v * v))
    }

    fn powi(&self, n: i32) -> Self {
        let v = self.value();
        let nf = T::from_i32(n).unwrap();
        let f1 = if n == 0 { T::zero() } else { nf * v.powi(n - 1) };
        let f2 = if n == 0 || n == 1 {
            T::zero()
        } else {
            nf * (nf - T::one()) * v.powi(n - 2)
        };
        self.chain(v.powi(n), f1, f2)
    }

    /// Division that reports a zero or non-finite divisor instead of propagating NaN.
    fn checked_div(&self, rhs: &Self) -> Result<Self> {
        let d = rhs.value();
        if d == T::zero() || !d.is_finite() {
            return Err(Error::Eval {
                primitive: "div",
                detail: format!("divisor value {d}"),
            });
        }
        Ok(*self / *rhs)
    }

    /// Square root that rejects negative arguments and the non-differentiable point 0.
    fn checked_sqrt(&self) -> Result<Self> {
        let v = self.value();
        if !(v > T::zero()) {
            return Err(Error::Eval {
                primitive: "sqrt",
                detail: format!("argument value {v}"),
            });
        }
        Ok(self.sqrt())
    }
}

impl<T: Scalar> Jet<T> for T {
    #[inline]
    fn constant(x: T) -> Self {
        x
    }

    #[inline]
    fn variable(_index: usize, x: T) -> Self {
        x
    }

    #[inline]
    fn value(&self) -> T {
        *self
    }

    #[inline]
    fn chain(&self, f0: T, _f1: T, _f2: T) -> Self {
        f0
    }

    #[inline]
    fn is_finite(&self) -> bool {
        num_traits::Float::is_finite(*self)
    }

    #[inline]
    fn sqrt(&self) -> Self {
        num_traits::Float::sqrt(*self)
    }

    #[inline]
    fn recip(&self) -> Self {
        num_traits::Float::recip(*self)
    }

    #[inline]
    fn powi(&self, n: i32) -> Self {
        num_traits::Float::powi(*self, n)
    }
}

/// Seeds the four coordinate variables of `p` in the jet algebra `D`.
pub fn seed<T: Scalar, D: Jet<T>>(p: &PhasePoint<T>) -> [D; DIM] {
    let z = p.to_array();
    [
        D::variable(0, z[0]),
        D::variable(1, z[1]),
        D::variable(2, z[2]),
        D::variable(3, z[3]),
    ]
}

fn check_finite<T: Scalar, D: Jet<T>>(d: D) -> Result<D> {
    if d.is_finite() {
        Ok(d)
    } else {
        Err(Error::Eval {
            primitive: "result",
            detail: "non-finite value or derivative".into(),
        })
    }
}

/// Value and exact gradient of `f` at `p`.
pub fn eval_grad<T, F>(f: F, p: &PhasePoint<T>) -> Result<Dual1<T>>
where
    T: Scalar,
    F: Fn(&[Dual1<T>; DIM]) -> Result<Dual1<T>>,
{
    check_finite(f(&seed(p))?)
}

/// Value, gradient and exact Hessian of `f` at `p`.
pub fn eval_hess<T, F>(f: F, p: &PhasePoint<T>) -> Result<Dual2<T>>
where
    T: Scalar,
    F: Fn(&[Dual2<T>; DIM]) -> Result<Dual2<T>>,
{
    check_finite(f(&seed(p))?)
}

/// A real scalar field on phase space, written once for every jet type.
pub trait PhaseFunction<T: Scalar> {
    fn eval<D: Jet<T>>(&self, z: &[D; DIM]) -> Result<D>;

    fn value_at(&self, p: &PhasePoint<T>) -> Result<T> {
        self.eval(&p.to_array())
    }

    fn grad_at(&self, p: &PhasePoint<T>) -> Result<Dual1<T>> {
        eval_grad(|z| self.eval(z), p)
    }

    fn hess_at(&self, p: &PhasePoint<T>) -> Result<Dual2<T>> {
        eval_hess(|z| self.eval(z), p)
    }
}

/// Value and complex gradient of a complex phase-space function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexObservable<T> {
    pub value: Complex<T>,
    pub grad: [Complex<T>; DIM],
}

impl<T: Scalar> ComplexObservable<T> {
    pub fn from_parts(re: &Dual1<T>, im: &Dual1<T>) -> Self {
        let mut grad = [Complex::new(T::zero(), T::zero()); DIM];
        for (i, g) in grad.iter_mut().enumerate() {
            *g = Complex::new(re.grad[i], im.grad[i]);
        }
        Self {
            value: Complex::new(re.value, im.value),
            grad,
        }
    }
}

/// A complex scalar field on phase space, written once for every jet type.
pub trait ComplexPhaseFunction<T: Scalar> {
    fn eval<D: Jet<T>>(&self, z: &[D; DIM]) -> Result<Complex<D>>;

    fn value_at(&self, p: &PhasePoint<T>) -> Result<Complex<T>> {
        self.eval(&p.to_array())
    }

    fn observable_at(&self, p: &PhasePoint<T>) -> Result<ComplexObservable<T>> {
        let c = self.eval::<Dual1<T>>(&seed(p))?;
        if !(c.re.is_finite() && c.im.is_finite()) {
            return Err(Error::Eval {
                primitive: "result",
                detail: "non-finite complex value or derivative".into(),
            });
        }
        Ok(ComplexObservable::from_parts(&c.re, &c.im))
    }

    fn hess_at(&self, p: &PhasePoint<T>) -> Result<Complex<Dual2<T>>> {
        self.eval::<Dual2<T>>(&seed(p))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(a: f64, b: f64, pa: f64, pb: f64) -> PhasePoint<f64> {
        PhasePoint::new(a, b, pa, pb).unwrap()
    }

    #[test]
    fn polynomial_gradient() {
        let g = eval_grad(|z| Ok(z[0] * z[0] + z[1] * z[1]), &pt(1.0, 0.0, 0.0, 1.0)).unwrap();
        assert_eq!(g.value, 1.0);
        assert_eq!(g.grad, [2.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn constant_has_zero_gradient_and_hessian() {
        let h = eval_hess(|_| Ok(Dual2::lit(3.5)), &pt(0.7, -1.2, 0.3, 2.0)).unwrap();
        assert_eq!(h.value, 3.5);
        assert_eq!(h.grad, [0.0; 4]);
        assert_eq!(h.hess, [[0.0; 4]; 4]);
    }

    #[test]
    fn bilinear_hessian_has_single_pair() {
        // f = a * p_a
        let h = eval_hess(|z| Ok(z[0] * z[2]), &pt(0.4, 1.1, -0.9, 0.2)).unwrap();
        let mut expected = [[0.0; 4]; 4];
        expected[0][2] = 1.0;
        expected[2][0] = 1.0;
        assert_eq!(h.hess, expected);
    }

    #[test]
    fn linear_function_has_zero_hessian() {
        let h = eval_hess(
            |z| Ok(z[0].scale(2.0) - z[1] + z[3].scale(0.5) + Dual2::lit(1.0)),
            &pt(1.3, 0.2, -0.4, 0.8),
        )
        .unwrap();
        assert_eq!(h.hess, [[0.0; 4]; 4]);
        assert_eq!(h.grad, [2.0, -1.0, 0.0, 0.5]);
    }

    #[test]
    fn checked_division_names_primitive() {
        let err = eval_grad(|z| (z[0] - z[0]).checked_div(&(z[1] - z[1])).map(|x| x + z[0]), &pt(1.0, 1.0, 0.0, 0.0))
            .unwrap_err();
        match err {
            Error::Eval { primitive, .. } => assert_eq!(primitive, "div"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn checked_sqrt_rejects_negative() {
        let err = eval_hess(|z| (-(z[0] * z[0])).checked_sqrt(), &pt(1.0, 1.0, 0.0, 0.0)).unwrap_err();
        assert!(matches!(err, Error::Eval { primitive: "sqrt", .. }));
    }

    #[test]
    fn unchecked_nan_is_reported() {
        let err = eval_grad(|z| Ok((z[2] - z[2]).recip()), &pt(1.0, 1.0, 0.0, 0.0)).unwrap_err();
        assert!(matches!(err, Error::Eval { primitive: "result", .. }));
    }

    #[test]
    fn inverse_radius_hessian() {
        // f = 1/(a^2+b^2) at (1,0): d2f/da2 = 6, d2f/db2 = -2
        let h = eval_hess(|z| Ok((z[0] * z[0] + z[1] * z[1]).recip()), &pt(1.0, 0.0, 0.0, 1.0)).unwrap();
        assert!((h.hess[0][0] - 6.0).abs() < 1e-14);
        assert!((h.hess[1][1] + 2.0).abs() < 1e-14);
        assert_eq!(h.hess[0][1], 0.0);
    }

    #[test]
    fn powi_matches_repeated_product() {
        let p = pt(0.8, -0.3, 1.7, 0.4);
        let a = eval_hess(|z| Ok((z[0] + z[2]).powi(3)), &p).unwrap();
        let b = eval_hess(|z| Ok((z[0] + z[2]) * (z[0] + z[2]) * (z[0] + z[2])), &p).unwrap();
        assert!((a.value - b.value).abs() < 1e-13);
        for i in 0..4 {
            assert!((a.grad[i] - b.grad[i]).abs() < 1e-13);
            for j in 0..4 {
                assert!((a.hess[i][j] - b.hess[i][j]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn works_in_single_precision() {
        let p = PhasePoint::<f32>::new(1.0, 0.0, 0.0, 1.0).unwrap();
        let g = eval_grad(|z| Ok(z[0] * z[0] * z[3]), &p).unwrap();
        assert_eq!(g.grad, [2.0f32, 0.0, 0.0, 1.0]);
    }
}
