use std::ops::{Add, Div, Mul, Neg, Rem, Sub};

use num_traits::{Num, One, Zero};

use super::{Dual1, Jet, DIM};
use crate::scalar::Scalar;

/// Second-order dual number: value, gradient and full (symmetric) Hessian.
///
/// Equality compares values only.
#[derive(Debug, Clone, Copy, Default)]
pub struct Dual2<T> {
    pub value: T,
    pub grad: [T; DIM],
    pub hess: [[T; DIM]; DIM],
}

impl<T: Scalar> Dual2<T> {
    pub fn new(value: T, grad: [T; DIM], hess: [[T; DIM]; DIM]) -> Self {
        Self { value, grad, hess }
    }

    /// Drops the second-order part.
    pub fn first_order(&self) -> Dual1<T> {
        Dual1::new(self.value, self.grad)
    }

    /// Largest `|H[i][j] - H[j][i]|`.
    pub fn asymmetry(&self) -> T {
        let mut worst = T::zero();
        for i in 0..DIM {
            for j in 0..DIM {
                worst = worst.max((self.hess[i][j] - self.hess[j][i]).abs());
            }
        }
        worst
    }
}

impl<T: Scalar> PartialEq for Dual2<T> {
    fn eq(&self, other: &Self) -> bool {
        self.value == other.value
    }
}

impl<T: Scalar> Add for Dual2<T> {
    type Output = Self;
    #[inline]
    fn add(self, rhs: Self) -> Self {
        let mut out = self;
        out.value += rhs.value;
        for i in 0..DIM {
            out.grad[i] += rhs.grad[i];
            for j in 0..DIM {
                out.hess[i][j] += rhs.hess[i][j];
            }
        }
        out
    }
}

impl<T: Scalar> Sub for Dual2<T> {
    type Output = Self;
    #[inline]
    fn sub(self, rhs: Self) -> Self {
        let mut out = self;
        out.value -= rhs.value;
        for i in 0..DIM {
            out.grad[i] -= rhs.grad[i];
            for j in 0..DIM {
                out.hess[i][j] -= rhs.hess[i][j];
            }
        }
        out
    }
}

impl<T: Scalar> Mul for Dual2<T> {
    type Output = Self;
    #[inline]
    fn mul(self, rhs: Self) -> Self {
        let (u, v) = (self.value, rhs.value);
        let mut grad = [T::zero(); DIM];
        let mut hess = [[T::zero(); DIM]; DIM];
        for i in 0..DIM {
            grad[i] = self.grad[i] * v + u * rhs.grad[i];
            for j in 0..DIM {
                hess[i][j] = self.hess[i][j] * v
                    + self.grad[i] * rhs.grad[j]
                    + self.grad[j] * rhs.grad[i]
                    + u * rhs.hess[i][j];
            }
        }
        Self::new(u * v, grad, hess)
    }
}

impl<T: Scalar> Div for Dual2<T> {
    type Output = Self;
    #[inline]
    fn div(self, rhs: Self) -> Self {
        self * rhs.recip()
    }
}

impl<T: Scalar> Rem for Dual2<T> {
    type Output = Self;
    fn rem(self, rhs: Self) -> Self {
        let n = (self.value / rhs.value).trunc();
        self - rhs * Self::constant(n)
    }
}

impl<T: Scalar> Neg for Dual2<T> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        let mut out = self;
        out.value = -out.value;
        for i in 0..DIM {
            out.grad[i] = -out.grad[i];
            for j in 0..DIM {
                out.hess[i][j] = -out.hess[i][j];
            }
        }
        out
    }
}

impl<T: Scalar> Zero for Dual2<T> {
    fn zero() -> Self {
        Self::constant(T::zero())
    }
    fn is_zero(&self) -> bool {
        self.value.is_zero()
    }
}

impl<T: Scalar> One for Dual2<T> {
    fn one() -> Self {
        Self::constant(T::one())
    }
}

impl<T: Scalar> Num for Dual2<T> {
    type FromStrRadixErr = T::FromStrRadixErr;
    fn from_str_radix(s: &str, radix: u32) -> Result<Self, Self::FromStrRadixErr> {
        T::from_str_radix(s, radix).map(Self::constant)
    }
}

impl<T: Scalar> Jet<T> for Dual2<T> {
    #[inline]
    fn constant(x: T) -> Self {
        Self::new(x, [T::zero(); DIM], [[T::zero(); DIM]; DIM])
    }

    #[inline]
    fn variable(index: usize, x: T) -> Self {
        let mut grad = [T::zero(); DIM];
        grad[index] = T::one();
        Self::new(x, grad, [[T::zero(); DIM]; DIM])
    }

    #[inline]
    fn value(&self) -> T {
        self.value
    }

    fn chain(&self, f0: T, f1: T, f2: T) -> Self {
        let mut grad = [T::zero(); DIM];
        let mut hess = [[T::zero(); DIM]; DIM];
        for i in 0..DIM {
            grad[i] = f1 * self.grad[i];
            for j in 0..DIM {
                hess[i][j] = f1 * self.hess[i][j] + f2 * self.grad[i] * self.grad[j];
            }
        }
        Self::new(f0, grad, hess)
    }

    fn is_finite(&self) -> bool {
        self.value.is_finite()
            && self.grad.iter().all(|g| g.is_finite())
            && self.hess.iter().flatten().all(|h| h.is_finite())
    }
}
