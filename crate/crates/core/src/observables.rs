//! Scalar and complex phase-space functions of the Hamiltonian family.
//!
//! Formulas are written once over any [`Jet`], so the same code yields values,
//! exact gradients and exact Hessians. The complex invariants are defined as
//! `J34 = A·B*` and `K34 = M_a·M_b*`; their real and imaginary parts are the
//! canonical `J3, J4, K3, K4`. Expanded closed forms are kept separately in
//! [`printed`] as cross-checks only.

use num_complex::Complex;
use serde::Serialize;

use crate::autodiff::{ComplexObservable, ComplexPhaseFunction, Jet, PhaseFunction, DIM};
use crate::error::{Error, Result};
use crate::phase::{CartesianPoint, ModelParams, PhasePoint, DEFAULT_ORIGIN_EPS};
use crate::scalar::Scalar;

/// `a² + b²`, rejecting the origin singularity.
pub fn radius_sq<T: Scalar, D: Jet<T>>(z: &[D; DIM]) -> Result<D> {
    let s = z[0] * z[0] + z[1] * z[1];
    if s.value() > T::lit(DEFAULT_ORIGIN_EPS) {
        Ok(s)
    } else {
        Err(Error::Domain(format!("a^2 + b^2 = {} at the origin singularity", s.value())))
    }
}

#[inline]
fn k<T: Scalar, D: Jet<T>>(x: T) -> D {
    D::constant(x)
}

pub fn hamiltonian_jet<T: Scalar, D: Jet<T>>(z: &[D; DIM], p: &ModelParams<T>) -> Result<D> {
    let [a, b, pa, pb] = *z;
    let s = radius_sq(z)?;
    let kinetic = (pa * pa + pb * pb) / (D::lit(2.0) * s);
    let potential = (k::<T, D>(p.k1) + a.scale(p.k2) + b.scale(p.k3)) / s;
    Ok(kinetic + potential)
}

/// `J = a·p_b − b·p_a`, twice the Cartesian angular momentum.
#[inline]
pub fn angular_momentum_jet<T: Scalar, D: Jet<T>>(z: &[D; DIM]) -> D {
    z[0] * z[3] - z[1] * z[2]
}

pub fn linear_momenta_jet<T: Scalar, D: Jet<T>>(z: &[D; DIM]) -> Result<(D, D)> {
    let [a, b, pa, pb] = *z;
    let s = radius_sq(z)?;
    Ok(((a * pa - b * pb) / s, (a * pb + b * pa) / s))
}

/// `λ = J / (a²+b²)²`, the common rate in the bracket scaling relations.
pub fn lambda_jet<T: Scalar, D: Jet<T>>(z: &[D; DIM]) -> Result<D> {
    let s = radius_sq(z)?;
    Ok(angular_momentum_jet(z) / (s * s))
}

/// `(k2·b − k3·a)`, recurring in the M functions and the modulus identities.
#[inline]
fn shear<T: Scalar, D: Jet<T>>(z: &[D; DIM], p: &ModelParams<T>) -> D {
    z[1].scale(p.k2) - z[0].scale(p.k3)
}

pub fn func_a_jet<T: Scalar, D: Jet<T>>(z: &[D; DIM]) -> Result<Complex<D>> {
    let [a, b, ..] = *z;
    let s = radius_sq(z)?;
    Ok(Complex::new((a * a - b * b) / s, D::lit(2.0) * a * b / s))
}

pub fn func_b_jet<T: Scalar, D: Jet<T>>(z: &[D; DIM], p: &ModelParams<T>) -> Result<Complex<D>> {
    let [a, b, pa, pb] = *z;
    let s = radius_sq(z)?;
    let j = angular_momentum_jet(z);
    let re = j * j / s + k(p.k1);
    let im = j * (a * pa + b * pb) / s + a.scale(p.k3) - b.scale(p.k2);
    Ok(Complex::new(re, im))
}

pub fn func_ma_jet<T: Scalar, D: Jet<T>>(z: &[D; DIM], p: &ModelParams<T>) -> Result<Complex<D>> {
    let [a, b, pa, pb] = *z;
    let r = radius_sq(z)?.checked_sqrt()?;
    let j = angular_momentum_jet(z);
    let c = shear(z, p);
    let re = (j * pa - c * a) / r;
    let im = (-(j * pb) - a.scale(T::lit(2.0) * p.k1) + c * b) / r;
    Ok(Complex::new(re, im))
}

pub fn func_mb_jet<T: Scalar, D: Jet<T>>(z: &[D; DIM], p: &ModelParams<T>) -> Result<Complex<D>> {
    let [a, b, pa, pb] = *z;
    let r = radius_sq(z)?.checked_sqrt()?;
    let j = angular_momentum_jet(z);
    let c = shear(z, p);
    let re = (j * pb - c * b) / r;
    let im = (j * pa - b.scale(T::lit(2.0) * p.k1) - c * a) / r;
    Ok(Complex::new(re, im))
}

pub fn j34_jet<T: Scalar, D: Jet<T>>(z: &[D; DIM], p: &ModelParams<T>) -> Result<Complex<D>> {
    Ok(func_a_jet(z)? * func_b_jet(z, p)?.conj())
}

pub fn k34_jet<T: Scalar, D: Jet<T>>(z: &[D; DIM], p: &ModelParams<T>) -> Result<Complex<D>> {
    Ok(func_ma_jet(z, p)? * func_mb_jet(z, p)?.conj())
}

/// Parabolic-separability integral with the symmetric split `F(a) = k1/2 + k2·a`, `G(b) = k1/2 + k3·b`.
pub fn i2_jet<T: Scalar, D: Jet<T>>(z: &[D; DIM], p: &ModelParams<T>) -> Result<D> {
    let [a, b, ..] = *z;
    let s = radius_sq(z)?;
    let (_, p2) = linear_momenta_jet(z)?;
    let half_k1 = T::lit(0.5) * p.k1;
    let f = k::<T, D>(half_k1) + a.scale(p.k2);
    let g = k::<T, D>(half_k1) + b.scale(p.k3);
    Ok(angular_momentum_jet(z) * p2 + D::lit(2.0) * (a * a * g - b * b * f) / s)
}

/// `W = i (a + i b)² (p_a − i p_b)²`, the momentum-dependent factor inside `Y_B`.
pub fn func_w_jet<T: Scalar, D: Jet<T>>(z: &[D; DIM]) -> Complex<D> {
    let [a, b, pa, pb] = *z;
    let q = Complex::new(a, b);
    let m = Complex::new(pa, -pb);
    Complex::new(D::zero(), D::one()) * q * q * m * m
}

/// Real observables available to brackets, forms and drift reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Observable {
    H,
    J,
    P1,
    P2,
    Lambda,
    A1,
    A2,
    B1,
    B2,
    Ma1,
    Ma2,
    Mb1,
    Mb2,
    J3,
    J4,
    K3,
    K4,
    I2,
}

impl Observable {
    pub const ALL: [Observable; 18] = [
        Observable::H,
        Observable::J,
        Observable::P1,
        Observable::P2,
        Observable::Lambda,
        Observable::A1,
        Observable::A2,
        Observable::B1,
        Observable::B2,
        Observable::Ma1,
        Observable::Ma2,
        Observable::Mb1,
        Observable::Mb2,
        Observable::J3,
        Observable::J4,
        Observable::K3,
        Observable::K4,
        Observable::I2,
    ];

    /// The six first integrals tracked along trajectories.
    pub const INVARIANTS: [Observable; 6] = [
        Observable::H,
        Observable::J3,
        Observable::J4,
        Observable::K3,
        Observable::K4,
        Observable::I2,
    ];

    pub fn with<T: Scalar>(self, params: ModelParams<T>) -> RealField<T> {
        RealField { obs: self, params }
    }

    pub fn name(self) -> &'static str {
        match self {
            Observable::H => "H",
            Observable::J => "J",
            Observable::P1 => "P1",
            Observable::P2 => "P2",
            Observable::Lambda => "lambda",
            Observable::A1 => "A1",
            Observable::A2 => "A2",
            Observable::B1 => "B1",
            Observable::B2 => "B2",
            Observable::Ma1 => "Ma1",
            Observable::Ma2 => "Ma2",
            Observable::Mb1 => "Mb1",
            Observable::Mb2 => "Mb2",
            Observable::J3 => "J3",
            Observable::J4 => "J4",
            Observable::K3 => "K3",
            Observable::K4 => "K4",
            Observable::I2 => "I2",
        }
    }
}

/// An [`Observable`] bound to coupling parameters.
#[derive(Debug, Clone, Copy)]
pub struct RealField<T> {
    pub obs: Observable,
    pub params: ModelParams<T>,
}

impl<T: Scalar> PhaseFunction<T> for RealField<T> {
    fn eval<D: Jet<T>>(&self, z: &[D; DIM]) -> Result<D> {
        let p = &self.params;
        Ok(match self.obs {
            Observable::H => hamiltonian_jet(z, p)?,
            Observable::J => angular_momentum_jet(z),
            Observable::P1 => linear_momenta_jet(z)?.0,
            Observable::P2 => linear_momenta_jet(z)?.1,
            Observable::Lambda => lambda_jet(z)?,
            Observable::A1 => func_a_jet(z)?.re,
            Observable::A2 => func_a_jet(z)?.im,
            Observable::B1 => func_b_jet(z, p)?.re,
            Observable::B2 => func_b_jet(z, p)?.im,
            Observable::Ma1 => func_ma_jet(z, p)?.re,
            Observable::Ma2 => func_ma_jet(z, p)?.im,
            Observable::Mb1 => func_mb_jet(z, p)?.re,
            Observable::Mb2 => func_mb_jet(z, p)?.im,
            Observable::J3 => j34_jet(z, p)?.re,
            Observable::J4 => j34_jet(z, p)?.im,
            Observable::K3 => k34_jet(z, p)?.re,
            Observable::K4 => k34_jet(z, p)?.im,
            Observable::I2 => i2_jet(z, p)?,
        })
    }
}

/// Complex functions whose Hamiltonian vector fields and wedge products are studied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum ComplexFunction {
    A,
    B,
    Ma,
    Mb,
    J34,
    K34,
    W,
}

impl ComplexFunction {
    pub const ALL: [ComplexFunction; 7] = [
        ComplexFunction::A,
        ComplexFunction::B,
        ComplexFunction::Ma,
        ComplexFunction::Mb,
        ComplexFunction::J34,
        ComplexFunction::K34,
        ComplexFunction::W,
    ];

    pub fn with<T: Scalar>(self, params: ModelParams<T>) -> ComplexField<T> {
        ComplexField { func: self, params }
    }

    pub fn name(self) -> &'static str {
        match self {
            ComplexFunction::A => "A",
            ComplexFunction::B => "B",
            ComplexFunction::Ma => "M_a",
            ComplexFunction::Mb => "M_b",
            ComplexFunction::J34 => "J34",
            ComplexFunction::K34 => "K34",
            ComplexFunction::W => "W",
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ComplexField<T> {
    pub func: ComplexFunction,
    pub params: ModelParams<T>,
}

impl<T: Scalar> ComplexPhaseFunction<T> for ComplexField<T> {
    fn eval<D: Jet<T>>(&self, z: &[D; DIM]) -> Result<Complex<D>> {
        let p = &self.params;
        match self.func {
            ComplexFunction::A => func_a_jet(z),
            ComplexFunction::B => func_b_jet(z, p),
            ComplexFunction::Ma => func_ma_jet(z, p),
            ComplexFunction::Mb => func_mb_jet(z, p),
            ComplexFunction::J34 => j34_jet(z, p),
            ComplexFunction::K34 => k34_jet(z, p),
            ComplexFunction::W => {
                radius_sq(z)?;
                Ok(func_w_jet(z))
            }
        }
    }
}

pub fn hamiltonian<T: Scalar>(p: &PhasePoint<T>, k: &ModelParams<T>) -> Result<T> {
    k.check_point(p)?;
    hamiltonian_jet(&p.to_array(), k)
}

/// `(J, P1, P2)`.
pub fn momenta<T: Scalar>(p: &PhasePoint<T>) -> Result<(T, T, T)> {
    let z = p.to_array();
    let (p1, p2) = linear_momenta_jet(&z)?;
    Ok((angular_momentum_jet(&z), p1, p2))
}

pub fn lambda_factor<T: Scalar>(p: &PhasePoint<T>) -> Result<T> {
    lambda_jet(&p.to_array())
}

pub fn func_a<T: Scalar>(p: &PhasePoint<T>) -> Result<ComplexObservable<T>> {
    ComplexFunction::A.with(ModelParams::new(T::zero(), T::zero(), T::zero())).observable_at(p)
}

pub fn func_b<T: Scalar>(p: &PhasePoint<T>, k: &ModelParams<T>) -> Result<ComplexObservable<T>> {
    ComplexFunction::B.with(*k).observable_at(p)
}

pub fn func_ma<T: Scalar>(p: &PhasePoint<T>, k: &ModelParams<T>) -> Result<ComplexObservable<T>> {
    ComplexFunction::Ma.with(*k).observable_at(p)
}

pub fn func_mb<T: Scalar>(p: &PhasePoint<T>, k: &ModelParams<T>) -> Result<ComplexObservable<T>> {
    ComplexFunction::Mb.with(*k).observable_at(p)
}

/// `J34 = A·B*`; `J3 = Re`, `J4 = Im`.
pub fn invariant_j34<T: Scalar>(p: &PhasePoint<T>, k: &ModelParams<T>) -> Result<Complex<T>> {
    j34_jet(&p.to_array(), k)
}

/// `K34 = M_a·M_b*`; `K3 = Re`, `K4 = Im`.
pub fn invariant_k34<T: Scalar>(p: &PhasePoint<T>, k: &ModelParams<T>) -> Result<Complex<T>> {
    k34_jet(&p.to_array(), k)
}

pub fn invariant_i2<T: Scalar>(p: &PhasePoint<T>, k: &ModelParams<T>) -> Result<T> {
    i2_jet(&p.to_array(), k)
}

/// Values of every tracked first integral at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InvariantSet<T> {
    pub h: T,
    pub j3: T,
    pub j4: T,
    pub k3: T,
    pub k4: T,
    pub i2: T,
    pub j: T,
}

impl<T: Scalar> InvariantSet<T> {
    pub fn at(p: &PhasePoint<T>, k: &ModelParams<T>) -> Result<Self> {
        let z = p.to_array();
        let j34 = j34_jet(&z, k)?;
        let k34 = k34_jet(&z, k)?;
        Ok(Self {
            h: hamiltonian_jet(&z, k)?,
            j3: j34.re,
            j4: j34.im,
            k3: k34.re,
            k4: k34.im,
            i2: i2_jet(&z, k)?,
            j: angular_momentum_jet(&z),
        })
    }

    /// Values ordered as [`Observable::INVARIANTS`].
    pub fn tracked(&self) -> [T; 6] {
        [self.h, self.j3, self.j4, self.k3, self.k4, self.i2]
    }
}

/// Cartesian Hamiltonian `(p_x² + p_y²)/2 + V` with the potential
/// `c1/r + c2·sqrt(r + x)/r + c3·sqrt(r − x)/r`.
pub fn cartesian_hamiltonian<T: Scalar>(c: &CartesianPoint<T>, couplings: [T; 3]) -> Result<T> {
    let r = c.radius();
    if !(r > T::lit(DEFAULT_ORIGIN_EPS)) {
        return Err(Error::Domain("Cartesian origin".into()));
    }
    let [c1, c2, c3] = couplings;
    let kinetic = T::lit(0.5) * (c.p_x * c.p_x + c.p_y * c.p_y);
    let rp = (r + c.x).max(T::zero()).sqrt();
    let rm = (r - c.x).max(T::zero()).sqrt();
    Ok(kinetic + (c1 + c2 * rp + c3 * rm) / r)
}

/// Closed-form expansions as printed in the source derivation, kept verbatim
/// (including their sign slips and typos) so that disagreements can be measured.
pub mod printed {
    use super::*;

    fn parts<T: Scalar>(p: &PhasePoint<T>) -> (T, T, T, T, T, T) {
        (p.a, p.b, p.p_a, p.p_b, p.radius_sq(), p.a * p.p_b - p.b * p.p_a)
    }

    pub fn j3<T: Scalar>(p: &PhasePoint<T>, k: &ModelParams<T>) -> Result<T> {
        let (a, b, _, _, s, j) = parts(p);
        let (_, _, p2) = momenta(p)?;
        let half = T::lit(0.5);
        Ok(j * p2 + T::lit(2.0) * (k.k1 * half * (a * a - b * b) / s - k.k2 * a * b * b / s + k.k3 * a * a * b / s))
    }

    pub fn j4<T: Scalar>(p: &PhasePoint<T>, k: &ModelParams<T>) -> Result<T> {
        let (a, b, _, _, s, j) = parts(p);
        let (_, p1, _) = momenta(p)?;
        let half = T::lit(0.5);
        Ok(j * p1
            - T::lit(2.0)
                * (k.k1 * a * b / s + half * k.k2 * b * (a * a - b * b) / s + half * k.k3 * a * (b * b - a * a) / s))
    }

    pub fn k3<T: Scalar>(p: &PhasePoint<T>, k: &ModelParams<T>) -> Result<T> {
        let (a, b, _, _, s, j) = parts(p);
        let (_, p1, _) = momenta(p)?;
        let c = k.k2 * b - k.k3 * a;
        Ok(j * p1 - (T::lit(2.0) * k.k1 * a * b / s + c * (a * a - b * b) / s))
    }

    pub fn k4<T: Scalar>(p: &PhasePoint<T>, k: &ModelParams<T>) -> Result<T> {
        let (a, b, pa, pb, _, j) = parts(p);
        let h = hamiltonian(p, k)?;
        let c = k.k2 * b - k.k3 * a;
        Ok(T::lit(2.0) * j * j * h + T::lit(2.0) * j * (k.k3 * pa - k.k2 * pb) + c * c)
    }

    /// `2J²H + 2J(k3·p_a − k2·p_b) + k1² + (k2·b − k3·a)²`.
    pub fn b_modulus_sq<T: Scalar>(p: &PhasePoint<T>, k: &ModelParams<T>) -> Result<T> {
        let (a, b, pa, pb, _, j) = parts(p);
        let h = hamiltonian(p, k)?;
        let c = k.k2 * b - k.k3 * a;
        Ok(T::lit(2.0) * j * j * h + T::lit(2.0) * j * (k.k3 * pa - k.k2 * pb) + k.k1 * k.k1 + c * c)
    }

    /// Form of the `(k2·b − k3·a)` term in the `|M_a|²`, `|M_b|²` expansions.
    #[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
    pub enum ShearTerm {
        /// As printed: the bare, unsquared term.
        Linear,
        /// The squared term, matching the `|B|²` identity.
        Squared,
    }

    /// `2(J²H ± k1·R_x + J(k3·p_a − k2·p_b)) + shear + 2k1²` with `R_x = J3`; `sign = +1` for `M_a`.
    pub fn m_modulus_sq<T: Scalar>(p: &PhasePoint<T>, k: &ModelParams<T>, sign: T, term: ShearTerm) -> Result<T> {
        let (a, b, pa, pb, _, j) = parts(p);
        let h = hamiltonian(p, k)?;
        let rx = invariant_j34(p, k)?.re;
        let c = k.k2 * b - k.k3 * a;
        let shear = match term {
            ShearTerm::Linear => c,
            ShearTerm::Squared => c * c,
        };
        Ok(T::lit(2.0) * (j * j * h + sign * k.k1 * rx + j * (k.k3 * pa - k.k2 * pb))
            + shear
            + T::lit(2.0) * k.k1 * k.k1)
    }
}

/// Residuals of the modulus identities, each normalised as `|r| / (1 + scale)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModulusResiduals<T> {
    /// `B·B* − (2J²H + 2J(k3 p_a − k2 p_b) + k1² + (k2 b − k3 a)²)`.
    pub b_modulus: T,
    /// `M_a·M_a* − M_b·M_b* − 4 k1 J3`.
    pub m_difference: T,
    pub ma_linear: T,
    pub ma_squared: T,
    pub mb_linear: T,
    pub mb_squared: T,
}

pub fn modulus_identities<T: Scalar>(p: &PhasePoint<T>, k: &ModelParams<T>) -> Result<ModulusResiduals<T>> {
    use crate::fit::relative;
    use printed::ShearTerm;
    let z = p.to_array();
    let b = func_b_jet(&z, k)?;
    let ma = func_ma_jet(&z, k)?;
    let mb = func_mb_jet(&z, k)?;
    let j3 = j34_jet(&z, k)?.re;
    let bb = b.norm_sqr();
    let bp = printed::b_modulus_sq(p, k)?;
    let (ma2, mb2) = (ma.norm_sqr(), mb.norm_sqr());
    let diff_rhs = T::lit(4.0) * k.k1 * j3;
    let mut variants = [T::zero(); 4];
    for (slot, (sign, term, lhs)) in variants.iter_mut().zip([
        (T::one(), ShearTerm::Linear, ma2),
        (T::one(), ShearTerm::Squared, ma2),
        (-T::one(), ShearTerm::Linear, mb2),
        (-T::one(), ShearTerm::Squared, mb2),
    ]) {
        let rhs = printed::m_modulus_sq(p, k, sign, term)?;
        *slot = relative(lhs - rhs, lhs.abs().max(rhs.abs()));
    }
    Ok(ModulusResiduals {
        b_modulus: relative(bb - bp, bb.abs().max(bp.abs())),
        m_difference: relative(ma2 - mb2 - diff_rhs, ma2.max(mb2).max(diff_rhs.abs())),
        ma_linear: variants[0],
        ma_squared: variants[1],
        mb_linear: variants[2],
        mb_squared: variants[3],
    })
}
