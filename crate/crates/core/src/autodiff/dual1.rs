use std::ops::{Add, Div, Mul, Neg, Rem, Sub};

use num_traits::{Num, One, Zero};

use super::{Jet, DIM};
use crate::scalar::Scalar;

/// First-order dual number: a value and its gradient with respect to `(a, b, p_a, p_b)`.
///
/// Equality compares values only, as required by `num_traits::Zero`/`One`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Dual1<T> {
    pub value: T,
    pub grad: [T; DIM],
}

impl<T: Scalar> Dual1<T> {
    pub fn new(value: T, grad: [T; DIM]) -> Self {
        Self { value, grad }
    }

    #[inline]
    fn map_grad(self, f: impl Fn(T) -> T) -> [T; DIM] {
        let mut g = self.grad;
        g.iter_mut().for_each(|x| *x = f(*x));
        g
    }
}

impl<T: Scalar> PartialEq for Dual1<T> {
    fn eq(&self, other: &Self) -> bool {
        self.value == other.value
    }
}

impl<T: Scalar> Add for Dual1<T> {
    type Output = Self;
    #[inline]
    fn add(self, rhs: Self) -> Self {
        let mut grad = self.grad;
        for (g, r) in grad.iter_mut().zip(rhs.grad) {
            *g += r;
        }
        Self::new(self.value + rhs.value, grad)
    }
}

impl<T: Scalar> Sub for Dual1<T> {
    type Output = Self;
    #[inline]
    fn sub(self, rhs: Self) -> Self {
        let mut grad = self.grad;
        for (g, r) in grad.iter_mut().zip(rhs.grad) {
            *g -= r;
        }
        Self::new(self.value - rhs.value, grad)
    }
}

impl<T: Scalar> Mul for Dual1<T> {
    type Output = Self;
    #[inline]
    fn mul(self, rhs: Self) -> Self {
        let mut grad = [T::zero(); DIM];
        for (i, g) in grad.iter_mut().enumerate() {
            *g = self.grad[i] * rhs.value + self.value * rhs.grad[i];
        }
        Self::new(self.value * rhs.value, grad)
    }
}

impl<T: Scalar> Div for Dual1<T> {
    type Output = Self;
    #[inline]
    fn div(self, rhs: Self) -> Self {
        let q = self.value / rhs.value;
        let mut grad = [T::zero(); DIM];
        for (i, g) in grad.iter_mut().enumerate() {
            *g = (self.grad[i] - q * rhs.grad[i]) / rhs.value;
        }
        Self::new(q, grad)
    }
}

impl<T: Scalar> Rem for Dual1<T> {
    type Output = Self;
    fn rem(self, rhs: Self) -> Self {
        let n = (self.value / rhs.value).trunc();
        self - rhs * Self::constant(n)
    }
}

impl<T: Scalar> Neg for Dual1<T> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self::new(-self.value, self.map_grad(|x| -x))
    }
}

impl<T: Scalar> Zero for Dual1<T> {
    fn zero() -> Self {
        Self::constant(T::zero())
    }
    fn is_zero(&self) -> bool {
        self.value.is_zero()
    }
}

impl<T: Scalar> One for Dual1<T> {
    fn one() -> Self {
        Self::constant(T::one())
    }
}

impl<T: Scalar> Num for Dual1<T> {
    type FromStrRadixErr = T::FromStrRadixErr;
    fn from_str_radix(s: &str, radix: u32) -> Result<Self, Self::FromStrRadixErr> {
        T::from_str_radix(s, radix).map(Self::constant)
    }
}

impl<T: Scalar> Jet<T> for Dual1<T> {
    #[inline]
    fn constant(x: T) -> Self {
        Self::new(x, [T::zero(); DIM])
    }

    #[inline]
    fn variable(index: usize, x: T) -> Self {
        let mut grad = [T::zero(); DIM];
        grad[index] = T::one();
        Self::new(x, grad)
    }

    #[inline]
    fn value(&self) -> T {
        self.value
    }

    #[inline]
    fn chain(&self, f0: T, f1: T, _f2: T) -> Self {
        Self::new(f0, self.map_grad(|x| f1 * x))
    }

    fn is_finite(&self) -> bool {
        self.value.is_finite() && self.grad.iter().all(|g| g.is_finite())
    }
}
