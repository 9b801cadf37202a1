//! Poisson brackets, Hamiltonian vector fields and Lie brackets.
//!
//! Conventions: `{f, g} = f_a g_pa − f_pa g_a + f_b g_pb − f_pb g_b` and
//! `X_f = (f_pa, f_pb, −f_a, −f_b)`, so that `i(X_f) ω0 = df` and `X_f(g) = {g, f}`.
//! The Lie bracket is `[X, Y] = DY·X − DX·Y`.

use std::ops::Neg;

use num_complex::Complex;
use num_traits::Num;
use serde::Serialize;

use crate::autodiff::{ComplexObservable, ComplexPhaseFunction, Dual1, Dual2, Jet, PhaseFunction, DIM};
use crate::error::Result;
use crate::fit::{max_abs_complex, relative};
use crate::observables::{ComplexFunction, Observable};
use crate::phase::{ModelParams, PhasePoint};
use crate::scalar::Scalar;

/// Ring of field coefficients: real or complex scalars.
pub trait Coeff: Copy + Num + Neg<Output = Self> {}
impl<S: Copy + Num + Neg<Output = S>> Coeff for S {}

/// `{f, g}` from the two gradients.
#[inline]
pub fn poisson_from_grads<S: Coeff>(f: &[S; DIM], g: &[S; DIM]) -> S {
    f[0] * g[2] - f[2] * g[0] + f[1] * g[3] - f[3] * g[1]
}

/// `X_f` from the gradient of `f`.
#[inline]
pub fn hamiltonian_vf_from_grad<S: Coeff>(g: &[S; DIM]) -> [S; DIM] {
    [g[2], g[3], -g[0], -g[1]]
}

pub fn poisson<T: Scalar, F: PhaseFunction<T>, G: PhaseFunction<T>>(f: &F, g: &G, p: &PhasePoint<T>) -> Result<T> {
    Ok(poisson_from_grads(&f.grad_at(p)?.grad, &g.grad_at(p)?.grad))
}

/// Bilinear extension of the bracket to complex functions.
pub fn poisson_complex<T: Scalar>(f: &ComplexObservable<T>, g: &ComplexObservable<T>) -> Complex<T> {
    poisson_from_grads(&f.grad, &g.grad)
}

/// Embeds a real gradient as a [`ComplexObservable`].
pub fn real_observable<T: Scalar>(d: &Dual1<T>) -> ComplexObservable<T> {
    ComplexObservable::from_parts(d, &Dual1::constant(T::zero()))
}

/// Components of a (possibly complex) vector field at a point, in the basis `(∂a, ∂b, ∂p_a, ∂p_b)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VectorFieldValue<T> {
    pub components: [Complex<T>; DIM],
}

impl<T: Scalar> VectorFieldValue<T> {
    pub fn new(components: [Complex<T>; DIM]) -> Self {
        Self { components }
    }

    pub fn from_real(v: [T; DIM]) -> Self {
        Self { components: v.map(|x| Complex::new(x, T::zero())) }
    }

    pub fn real_parts(&self) -> [T; DIM] {
        self.components.map(|c| c.re)
    }

    /// Largest imaginary component.
    pub fn imaginary_norm(&self) -> T {
        self.components.iter().fold(T::zero(), |m, c| m.max(c.im.abs()))
    }

    /// Max-norm.
    pub fn norm(&self) -> T {
        max_abs_complex(&self.components)
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut c = self.components;
        for (x, y) in c.iter_mut().zip(other.components) {
            *x = *x - y;
        }
        Self { components: c }
    }

    pub fn scale(&self, s: Complex<T>) -> Self {
        Self { components: self.components.map(|c| c * s) }
    }

    pub fn conj(&self) -> Self {
        Self { components: self.components.map(|c| c.conj()) }
    }

    /// `‖self − other‖ / (1 + max(‖self‖, ‖other‖))`.
    pub fn relative_mismatch(&self, other: &Self) -> T {
        relative(self.sub(other).norm(), self.norm().max(other.norm()))
    }
}

pub fn hamiltonian_vf<T: Scalar, F: PhaseFunction<T>>(f: &F, p: &PhasePoint<T>) -> Result<VectorFieldValue<T>> {
    Ok(VectorFieldValue::from_real(hamiltonian_vf_from_grad(&f.grad_at(p)?.grad)))
}

pub fn hamiltonian_vf_complex<T: Scalar, F: ComplexPhaseFunction<T>>(
    f: &F,
    p: &PhasePoint<T>,
) -> Result<VectorFieldValue<T>> {
    Ok(VectorFieldValue::new(hamiltonian_vf_from_grad(&f.observable_at(p)?.grad)))
}

/// A vector field together with its Jacobian `jac[i][j] = ∂_j v_i` at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldJet<S> {
    pub value: [S; DIM],
    pub jac: [[S; DIM]; DIM],
}

impl<S: Coeff> FieldJet<S> {
    pub fn zero() -> Self {
        Self { value: [S::zero(); DIM], jac: [[S::zero(); DIM]; DIM] }
    }

    /// Hamiltonian field of a function given its value, gradient and Hessian.
    pub fn hamiltonian(grad: &[S; DIM], hess: &[[S; DIM]; DIM]) -> Self {
        Self {
            value: hamiltonian_vf_from_grad(grad),
            jac: [hess[2], hess[3], hess[0].map(|x| -x), hess[1].map(|x| -x)],
        }
    }

    /// Product `s·V` with `ds` the gradient of the scalar factor.
    pub fn scaled(&self, s: S, ds: &[S; DIM]) -> Self {
        let mut out = *self;
        for i in 0..DIM {
            out.value[i] = self.value[i] * s;
            for j in 0..DIM {
                out.jac[i][j] = self.jac[i][j] * s + self.value[i] * ds[j];
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = *self;
        for i in 0..DIM {
            out.value[i] = out.value[i] + other.value[i];
            for j in 0..DIM {
                out.jac[i][j] = out.jac[i][j] + other.jac[i][j];
            }
        }
        out
    }

    /// Derivative of `g` along the field, from the gradient of `g`.
    pub fn apply(&self, grad: &[S; DIM]) -> S {
        (0..DIM).fold(S::zero(), |acc, i| acc + self.value[i] * grad[i])
    }
}

impl<T: Scalar> FieldJet<T> {
    pub fn hamiltonian_real(h: &Dual2<T>) -> Self {
        Self::hamiltonian(&h.grad, &h.hess)
    }

    pub fn to_complex(&self) -> FieldJet<Complex<T>> {
        let c = |x: T| Complex::new(x, T::zero());
        FieldJet { value: self.value.map(c), jac: self.jac.map(|r| r.map(c)) }
    }
}

impl<T: Scalar> FieldJet<Complex<T>> {
    pub fn hamiltonian_complex(h: &Complex<Dual2<T>>) -> Self {
        let grad: [Complex<T>; DIM] = std::array::from_fn(|i| Complex::new(h.re.grad[i], h.im.grad[i]));
        let hess = std::array::from_fn(|i| std::array::from_fn(|j| Complex::new(h.re.hess[i][j], h.im.hess[i][j])));
        Self::hamiltonian(&grad, &hess)
    }

    pub fn conj(&self) -> Self {
        Self { value: self.value.map(|c| c.conj()), jac: self.jac.map(|r| r.map(|c| c.conj())) }
    }

    pub fn field_value(&self) -> VectorFieldValue<T> {
        VectorFieldValue::new(self.value)
    }
}

/// `[X, Y]_i = Σ_j (∂_j Y_i) X_j − (∂_j X_i) Y_j`.
pub fn lie_bracket<S: Coeff>(x: &FieldJet<S>, y: &FieldJet<S>) -> [S; DIM] {
    std::array::from_fn(|i| {
        (0..DIM).fold(S::zero(), |acc, j| acc + y.jac[i][j] * x.value[j] - x.jac[i][j] * y.value[j])
    })
}

/// A vector field with value, Jacobian and second derivatives `hess[i][j][k] = ∂_j ∂_k v_i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldJet2<S> {
    pub value: [S; DIM],
    pub jac: [[S; DIM]; DIM],
    pub hess: [[[S; DIM]; DIM]; DIM],
}

impl<S: Coeff> FieldJet2<S> {
    pub fn first_order(&self) -> FieldJet<S> {
        FieldJet { value: self.value, jac: self.jac }
    }

    /// `[X, Y]` together with its Jacobian.
    pub fn bracket(x: &Self, y: &Self) -> FieldJet<S> {
        let value = lie_bracket(&x.first_order(), &y.first_order());
        let jac = std::array::from_fn(|i| {
            std::array::from_fn(|k| {
                (0..DIM).fold(S::zero(), |acc, j| {
                    acc + y.hess[i][j][k] * x.value[j] + y.jac[i][j] * x.jac[j][k]
                        - x.hess[i][j][k] * y.value[j]
                        - x.jac[i][j] * y.jac[j][k]
                })
            })
        });
        FieldJet { value, jac }
    }
}

/// A real vector field written once for every jet type.
pub trait VectorField<T: Scalar> {
    fn eval<D: Jet<T>>(&self, z: &[D; DIM]) -> Result<[D; DIM]>;

    fn value_at(&self, p: &PhasePoint<T>) -> Result<[T; DIM]> {
        self.eval(&p.to_array())
    }

    fn jet_at(&self, p: &PhasePoint<T>) -> Result<FieldJet<T>> {
        let v = self.eval::<Dual1<T>>(&crate::autodiff::seed(p))?;
        Ok(FieldJet { value: v.map(|d| d.value), jac: v.map(|d| d.grad) })
    }

    fn jet2_at(&self, p: &PhasePoint<T>) -> Result<FieldJet2<T>> {
        let v = self.eval::<Dual2<T>>(&crate::autodiff::seed(p))?;
        Ok(FieldJet2 { value: v.map(|d| d.value), jac: v.map(|d| d.grad), hess: v.map(|d| d.hess) })
    }
}

/// The dynamical field `Γ = X_H` in closed form.
#[derive(Debug, Clone, Copy)]
pub struct GammaField<T> {
    pub params: ModelParams<T>,
}

impl<T: Scalar> VectorField<T> for GammaField<T> {
    fn eval<D: Jet<T>>(&self, z: &[D; DIM]) -> Result<[D; DIM]> {
        let [a, b, pa, pb] = *z;
        let k = &self.params;
        let s = crate::observables::radius_sq(z)?;
        let s2 = s * s;
        let v = D::constant(k.k1) + a.scale(k.k2) + b.scale(k.k3);
        let e = (pa * pa + pb * pb) / (D::lit(2.0) * s2) + v / s2;
        Ok([
            pa / s,
            pb / s,
            D::lit(2.0) * a * e - D::constant(k.k2) / s,
            D::lit(2.0) * b * e - D::constant(k.k3) / s,
        ])
    }
}

/// A quadratic polynomial field `v_i = c_i + Σ_j L_ij z_j + Σ_j Q_ij z_j²`, used to exercise bracket identities.
#[derive(Debug, Clone, Copy)]
pub struct PolynomialField<T> {
    pub constant: [T; DIM],
    pub linear: [[T; DIM]; DIM],
    pub quadratic: [[T; DIM]; DIM],
}

impl<T: Scalar> VectorField<T> for PolynomialField<T> {
    fn eval<D: Jet<T>>(&self, z: &[D; DIM]) -> Result<[D; DIM]> {
        Ok(std::array::from_fn(|i| {
            (0..DIM).fold(D::constant(self.constant[i]), |acc, j| {
                acc + z[j].scale(self.linear[i][j]) + (z[j] * z[j]).scale(self.quadratic[i][j])
            })
        }))
    }
}

/// `[X,[Y,Z]] + [Y,[Z,X]] + [Z,[X,Y]]` at a point.
pub fn jacobiator<T: Scalar>(x: &FieldJet2<T>, y: &FieldJet2<T>, z: &FieldJet2<T>) -> [T; DIM] {
    let a = lie_bracket(&x.first_order(), &FieldJet2::bracket(y, z));
    let b = lie_bracket(&y.first_order(), &FieldJet2::bracket(z, x));
    let c = lie_bracket(&z.first_order(), &FieldJet2::bracket(x, y));
    std::array::from_fn(|i| a[i] + b[i] + c[i])
}

/// Second-order jet of `Γ = X_H` from the Hessian of `H`.
pub fn gamma_jet<T: Scalar>(p: &PhasePoint<T>, k: &ModelParams<T>) -> Result<FieldJet<T>> {
    Ok(FieldJet::hamiltonian_real(&Observable::H.with(*k).hess_at(p)?))
}

fn complex_jet<T: Scalar>(f: ComplexFunction, p: &PhasePoint<T>, k: &ModelParams<T>) -> Result<Complex<Dual2<T>>> {
    f.with(*k).hess_at(p)
}

fn complex_grad<T: Scalar>(h: &Complex<Dual2<T>>) -> ([Complex<T>; DIM], Complex<T>) {
    (std::array::from_fn(|i| Complex::new(h.re.grad[i], h.im.grad[i])), Complex::new(h.re.value, h.im.value))
}

/// One row of the bracket-scaling check `{F, H} = c·iλF`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalingEntry<T> {
    pub function: ComplexFunction,
    /// The factor `c` the identity is checked against.
    pub expected_factor: T,
    /// `|{F,H} − c·iλF| / (1 + scale)`.
    pub residual: T,
    /// `{F,H} / (iλF)`; `None` when `λF` is too small to divide by.
    pub fitted_factor: Option<Complex<T>>,
}

/// `{A,H} = 2iλA`, `{B,H} = 2iλB`, `{M_a,H} = iλM_a`, `{M_b,H} = iλM_b`.
pub fn scaling_check<T: Scalar>(p: &PhasePoint<T>, k: &ModelParams<T>) -> Result<[ScalingEntry<T>; 4]> {
    let h = real_observable(&Observable::H.with(*k).grad_at(p)?);
    let lambda = crate::observables::lambda_factor(p)?;
    let i = Complex::new(T::zero(), T::one());
    let mut out = Vec::with_capacity(4);
    for (f, c) in [
        (ComplexFunction::A, T::lit(2.0)),
        (ComplexFunction::B, T::lit(2.0)),
        (ComplexFunction::Ma, T::one()),
        (ComplexFunction::Mb, T::one()),
    ] {
        let obs = f.with(*k).observable_at(p)?;
        let lhs = poisson_complex(&obs, &h);
        let base = i * obs.value.scale(lambda);
        let rhs = base.scale(c);
        let residual = relative((lhs - rhs).norm(), lhs.norm().max(rhs.norm()));
        let fitted_factor = (lambda.abs() > T::lit(1e-10) && base.norm() > T::lit(1e-12)).then(|| lhs / base);
        out.push(ScalingEntry { function: f, expected_factor: c, residual, fitted_factor });
    }
    Ok([out[0], out[1], out[2], out[3]])
}

/// `[Γ, Y]` for `Y = B*·Y_A`, compared with `i·J34·X_λ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Obstruction<T> {
    pub bracket: VectorFieldValue<T>,
    /// `i·J34·X_λ`.
    pub reference: VectorFieldValue<T>,
    /// Least-squares `c` in `[Γ, Y] = c·i·J34·X_λ`.
    pub factor: Complex<T>,
    /// Relative residual left by the fitted factor.
    pub residual: T,
}

pub fn y_field_jet<T: Scalar>(p: &PhasePoint<T>, k: &ModelParams<T>) -> Result<FieldJet<Complex<T>>> {
    let a = complex_jet(ComplexFunction::A, p, k)?;
    let b = complex_jet(ComplexFunction::B, p, k)?;
    let (gb, vb) = complex_grad(&b);
    let ya = FieldJet::hamiltonian_complex(&a);
    Ok(ya.scaled(vb.conj(), &gb.map(|c| c.conj())))
}

pub fn obstruction<T: Scalar>(p: &PhasePoint<T>, k: &ModelParams<T>) -> Result<Obstruction<T>> {
    let gamma = gamma_jet(p, k)?.to_complex();
    let y = y_field_jet(p, k)?;
    let bracket = VectorFieldValue::new(lie_bracket(&gamma, &y));
    let x_lambda = hamiltonian_vf(&Observable::Lambda.with(*k), p)?;
    let j34 = crate::observables::invariant_j34(p, k)?;
    let reference = x_lambda.scale(Complex::new(T::zero(), T::one()) * j34);
    let (factor, residual) = crate::fit::fit_complex_factor(&reference.components, &bracket.components);
    Ok(Obstruction { bracket, reference, factor, residual })
}

/// Relative mismatch between `B*·Y_A + A·Y_B*` and `X_{J34}`.
pub fn y34_residual<T: Scalar>(p: &PhasePoint<T>, k: &ModelParams<T>) -> Result<T> {
    let a = ComplexFunction::A.with(*k).observable_at(p)?;
    let b = ComplexFunction::B.with(*k).observable_at(p)?;
    let ya = VectorFieldValue::new(hamiltonian_vf_from_grad(&a.grad));
    let yb_conj = VectorFieldValue::new(hamiltonian_vf_from_grad(&b.grad.map(|c| c.conj())));
    let lhs = VectorFieldValue::new(std::array::from_fn(|i| {
        b.value.conj() * ya.components[i] + a.value * yb_conj.components[i]
    }));
    let rhs = hamiltonian_vf_complex(&ComplexFunction::J34.with(*k), p)?;
    Ok(lhs.relative_mismatch(&rhs))
}

/// Closed-form vector fields as printed in the source derivation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum PrintedField {
    YA,
    YB,
    Za,
    Zb,
    /// `Z_a0 .. Z_a3`: coefficient of `1, k1, k2, k3` in `Z_a`.
    ZaPiece(u8),
    ZbPiece(u8),
}

impl PrintedField {
    pub fn name(&self) -> String {
        match self {
            PrintedField::YA => "Y_A".into(),
            PrintedField::YB => "Y_B".into(),
            PrintedField::Za => "Z_a".into(),
            PrintedField::Zb => "Z_b".into(),
            PrintedField::ZaPiece(i) => format!("Z_a{i}"),
            PrintedField::ZbPiece(i) => format!("Z_b{i}"),
        }
    }

    pub const ALL: [PrintedField; 12] = [
        PrintedField::YA,
        PrintedField::YB,
        PrintedField::Za,
        PrintedField::Zb,
        PrintedField::ZaPiece(0),
        PrintedField::ZaPiece(1),
        PrintedField::ZaPiece(2),
        PrintedField::ZaPiece(3),
        PrintedField::ZbPiece(0),
        PrintedField::ZbPiece(1),
        PrintedField::ZbPiece(2),
        PrintedField::ZbPiece(3),
    ];
}

/// Printed closed form against its autodiff counterpart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PrintedComparison<T> {
    pub printed: VectorFieldValue<T>,
    pub autodiff: VectorFieldValue<T>,
    pub mismatch: T,
}

pub mod printed {
    //! The printed component formulas, kept verbatim.
    use super::*;

    fn c<T: Scalar>(re: T, im: T) -> Complex<T> {
        Complex::new(re, im)
    }

    /// `(b ∂p_a − a ∂p_b)` scaled by `f`.
    fn rot<T: Scalar>(p: &PhasePoint<T>, f: Complex<T>) -> [Complex<T>; DIM] {
        let z = Complex::new(T::zero(), T::zero());
        [z, z, f.scale(p.b), f.scale(-p.a)]
    }

    fn add<T: Scalar>(u: [Complex<T>; DIM], v: [Complex<T>; DIM]) -> [Complex<T>; DIM] {
        std::array::from_fn(|i| u[i] + v[i])
    }

    pub fn y_a<T: Scalar>(p: &PhasePoint<T>) -> [Complex<T>; DIM] {
        let (a, b) = (p.a, p.b);
        let s = p.radius_sq();
        let two = T::lit(2.0);
        rot(p, c(-two * a * b, a * a - b * b).scale(two / (s * s)))
    }

    /// `W` in its expanded printed form.
    pub fn w_expanded<T: Scalar>(p: &PhasePoint<T>) -> Complex<T> {
        let (a, b, pa, pb) = (p.a, p.b, p.p_a, p.p_b);
        let two = T::lit(2.0);
        c(
            two * ((a * a - b * b) * pa * pb - a * b * (pa * pa - pb * pb)),
            (a * a - b * b) * (pa * pa - pb * pb) + T::lit(4.0) * a * b * pa * pb,
        )
    }

    /// `W = i (a + i b)² (p_a − i p_b)²`.
    pub fn w_product<T: Scalar>(p: &PhasePoint<T>) -> Complex<T> {
        crate::observables::func_w_jet(&p.to_array())
    }

    /// `Y_B = Y_Bh − Y_Bv`; `swap_vertical` exchanges `k2` and `k3` in the constant vertical term.
    pub fn y_b<T: Scalar>(p: &PhasePoint<T>, k: &ModelParams<T>, swap_vertical: bool) -> [Complex<T>; DIM] {
        let (a, b, pa, pb) = (p.a, p.b, p.p_a, p.p_b);
        let s = p.radius_sq();
        let j = a * pb - b * pa;
        let q = a * pa + b * pb;
        let two = T::lit(2.0);
        let zero = T::zero();
        let horizontal = [
            c(-two * j * b, j * a - q * b).unscale(s),
            c(two * j * a, j * b + q * a).unscale(s),
            c(zero, zero),
            c(zero, zero),
        ];
        let (v_pa, v_pb) = if swap_vertical { (k.k3, -k.k2) } else { (-k.k2, k.k3) };
        let vertical = add(
            rot(p, w_expanded(p).unscale(s * s)),
            [c(zero, zero), c(zero, zero), c(zero, v_pa), c(zero, v_pb)],
        );
        std::array::from_fn(|i| horizontal[i] - vertical[i])
    }

    pub fn z_a_piece<T: Scalar>(p: &PhasePoint<T>, index: u8) -> [Complex<T>; DIM] {
        let (a, b, pa, pb) = (p.a, p.b, p.p_a, p.p_b);
        let s = p.radius_sq();
        let r = s.sqrt();
        let r3 = s * r;
        let two = T::lit(2.0);
        let zero = c(T::zero(), T::zero());
        match index {
            0 => {
                let q = a * pa + b * pb;
                let horizontal = [c(a * pb - two * b * pa, b * pb), c(a * pa, b * pa - two * a * pb), zero, zero];
                let vertical = rot(p, c(pa, -pb).scale(-q / s));
                add(horizontal, vertical).map(|x| x.unscale(r))
            }
            1 => rot(p, c(T::zero(), two * b / r3)),
            2 => [
                zero,
                zero,
                c(b * b * b, b * a * b).unscale(r3),
                c(a * a * a, -b * (two * a * a + b * b)).unscale(r3),
            ],
            _ => [
                zero,
                zero,
                c(-a * (a * a + two * b * b), b * b * b).unscale(r3),
                c(a * a * b, a * a * a).unscale(r3),
            ],
        }
    }

    pub fn z_b_piece<T: Scalar>(p: &PhasePoint<T>, index: u8) -> [Complex<T>; DIM] {
        let (a, b, pa, pb) = (p.a, p.b, p.p_a, p.p_b);
        let s = p.radius_sq();
        let r = s.sqrt();
        let r3 = s * r;
        let two = T::lit(2.0);
        let zero = c(T::zero(), T::zero());
        match index {
            0 => {
                let q = a * pa + b * pb;
                let horizontal = [c(-b * pb, a * pb - two * b * pa), c(two * a * pb - b * pa, a * pa), zero, zero];
                let vertical = rot(p, c(pb, pa).scale(-q / s));
                add(horizontal, vertical).map(|x| x.unscale(r))
            }
            1 => rot(p, c(T::zero(), -two * a / r3)),
            2 => [
                zero,
                zero,
                c(-a * b * b, b * b * b).unscale(r3),
                c(b * (two * a * a + b * b), a * a * a).unscale(r3),
            ],
            _ => [
                zero,
                zero,
                c(-b * b * b, -a * (a * a + two * b * b)).unscale(r3),
                c(-a * a * a, a * a * b).unscale(r3),
            ],
        }
    }

    pub fn z_a<T: Scalar>(p: &PhasePoint<T>, k: &ModelParams<T>) -> [Complex<T>; DIM] {
        combine(p, k, z_a_piece)
    }

    pub fn z_b<T: Scalar>(p: &PhasePoint<T>, k: &ModelParams<T>) -> [Complex<T>; DIM] {
        combine(p, k, z_b_piece)
    }

    fn combine<T: Scalar>(
        p: &PhasePoint<T>,
        k: &ModelParams<T>,
        piece: fn(&PhasePoint<T>, u8) -> [Complex<T>; DIM],
    ) -> [Complex<T>; DIM] {
        let mut out = piece(p, 0);
        for (i, ki) in [(1u8, k.k1), (2, k.k2), (3, k.k3)] {
            let v = piece(p, i);
            for (o, x) in out.iter_mut().zip(v) {
                *o = *o + x.scale(ki);
            }
        }
        out
    }
}

/// Coefficient of `k_index` (or the `k`-free part for index 0) in the autodiff field of `f`, which is affine in the couplings.
fn autodiff_piece<T: Scalar>(f: ComplexFunction, p: &PhasePoint<T>, index: u8) -> Result<VectorFieldValue<T>> {
    let zero = ModelParams::new(T::zero(), T::zero(), T::zero());
    let base = hamiltonian_vf_complex(&f.with(zero), p)?;
    if index == 0 {
        return Ok(base);
    }
    let mut unit = zero;
    match index {
        1 => unit.k1 = T::one(),
        2 => unit.k2 = T::one(),
        _ => unit.k3 = T::one(),
    }
    Ok(hamiltonian_vf_complex(&f.with(unit), p)?.sub(&base))
}

pub fn printed_vf<T: Scalar>(name: PrintedField, p: &PhasePoint<T>, k: &ModelParams<T>) -> Result<PrintedComparison<T>> {
    k.check_point(p)?;
    let (printed, autodiff) = match name {
        PrintedField::YA => (printed::y_a(p), hamiltonian_vf_complex(&ComplexFunction::A.with(*k), p)?),
        PrintedField::YB => (printed::y_b(p, k, false), hamiltonian_vf_complex(&ComplexFunction::B.with(*k), p)?),
        PrintedField::Za => (printed::z_a(p, k), hamiltonian_vf_complex(&ComplexFunction::Ma.with(*k), p)?),
        PrintedField::Zb => (printed::z_b(p, k), hamiltonian_vf_complex(&ComplexFunction::Mb.with(*k), p)?),
        PrintedField::ZaPiece(i) => (printed::z_a_piece(p, i), autodiff_piece(ComplexFunction::Ma, p, i)?),
        PrintedField::ZbPiece(i) => (printed::z_b_piece(p, i), autodiff_piece(ComplexFunction::Mb, p, i)?),
    };
    let printed = VectorFieldValue::new(printed);
    Ok(PrintedComparison { printed, autodiff, mismatch: printed.relative_mismatch(&autodiff) })
}

/// `Y_B` with `k2` and `k3` exchanged in its constant vertical term, against autodiff.
pub fn y_b_corrected<T: Scalar>(p: &PhasePoint<T>, k: &ModelParams<T>) -> Result<PrintedComparison<T>> {
    let printed = VectorFieldValue::new(printed::y_b(p, k, true));
    let autodiff = hamiltonian_vf_complex(&ComplexFunction::B.with(*k), p)?;
    Ok(PrintedComparison { printed, autodiff, mismatch: printed.relative_mismatch(&autodiff) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autodiff::eval_grad;
    use crate::sample::PointSampler;

    fn reference() -> (PhasePoint<f64>, ModelParams<f64>) {
        (PhasePoint::new(1.0, 0.0, 0.0, 1.0).unwrap(), ModelParams::new(1.0, 0.0, 0.0))
    }

    #[test]
    fn canonical_pair() {
        let p = PhasePoint::new(0.3, -1.2, 0.8, 0.1).unwrap();
        let fa = eval_grad(|z: &[Dual1<f64>; 4]| Ok(z[0]), &p).unwrap();
        let fpa = eval_grad(|z: &[Dual1<f64>; 4]| Ok(z[2]), &p).unwrap();
        assert_eq!(poisson_from_grads(&fa.grad, &fpa.grad), 1.0);
        assert_eq!(hamiltonian_vf_from_grad(&fpa.grad), [1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn h_with_itself_vanishes() {
        let (p, k) = reference();
        let h = Observable::H.with(k);
        assert_eq!(poisson(&h, &h, &p).unwrap(), 0.0);
    }

    #[test]
    fn a_bracket_at_reference() {
        let (p, k) = reference();
        let a = ComplexFunction::A.with(k).observable_at(&p).unwrap();
        let h = real_observable(&Observable::H.with(k).grad_at(&p).unwrap());
        assert_eq!(poisson_complex(&a, &h), Complex::new(0.0, 2.0));
    }

    #[test]
    fn gamma_at_reference() {
        let (p, k) = reference();
        let g = hamiltonian_vf(&Observable::H.with(k), &p).unwrap();
        assert_eq!(g.real_parts(), [0.0, 1.0, 3.0, 0.0]);
        assert_eq!(GammaField { params: k }.value_at(&p).unwrap(), [0.0, 1.0, 3.0, 0.0]);
    }

    #[test]
    fn constant_has_zero_field() {
        let p = PhasePoint::new(1.0, 2.0, 3.0, 4.0).unwrap();
        let c = eval_grad(|_: &[Dual1<f64>; 4]| Ok(Dual1::constant(7.0)), &p).unwrap();
        assert_eq!(hamiltonian_vf_from_grad(&c.grad), [0.0; 4]);
    }

    #[test]
    fn scaling_at_reference() {
        let (p, k) = reference();
        let s = scaling_check(&p, &k).unwrap();
        for e in &s {
            assert!(e.residual < 1e-15, "{e:?}");
        }
        assert_eq!(s[0].fitted_factor.unwrap(), Complex::new(2.0, 0.0));
        assert_eq!(s[3].fitted_factor.unwrap(), Complex::new(1.0, 0.0));
    }

    #[test]
    fn zero_j_gives_zero_a_bracket() {
        let p = PhasePoint::new(1.1, 0.4, 1.1, 0.4).unwrap();
        let k = ModelParams::new(0.7, -0.3, 1.9);
        let s = scaling_check(&p, &k).unwrap();
        assert!(s[0].fitted_factor.is_none());
        let a = ComplexFunction::A.with(k).observable_at(&p).unwrap();
        let h = real_observable(&Observable::H.with(k).grad_at(&p).unwrap());
        assert!(poisson_complex(&a, &h).norm() < 1e-15);
    }

    #[test]
    fn gamma_closed_form_matches_autodiff() {
        let k = ModelParams::new(1.0, 0.3, -0.2);
        for p in PointSampler::new(3).take::<f64>(50) {
            let auto = gamma_jet(&p, &k).unwrap();
            let closed = GammaField { params: k }.jet_at(&p).unwrap();
            for i in 0..DIM {
                assert!((auto.value[i] - closed.value[i]).abs() < 1e-12);
                for j in 0..DIM {
                    assert!((auto.jac[i][j] - closed.jac[i][j]).abs() < 1e-10 * (1.0 + auto.jac[i][j].abs()));
                }
            }
        }
    }

    #[test]
    fn bracket_is_antisymmetric_and_self_bracket_vanishes() {
        let k = ModelParams::new(1.0, 0.3, -0.2);
        let p = PhasePoint::new(0.7, 1.3, -0.4, 0.9).unwrap();
        let g = gamma_jet(&p, &k).unwrap();
        let l = FieldJet::hamiltonian_real(&Observable::Lambda.with(k).hess_at(&p).unwrap());
        let xy: [f64; 4] = lie_bracket(&g, &l);
        let yx = lie_bracket(&l, &g);
        for i in 0..DIM {
            assert!((xy[i] + yx[i]).abs() < 1e-13);
        }
        assert_eq!(lie_bracket(&g, &g), [0.0; 4]);
    }

    #[test]
    fn translations_commute() {
        let p = PhasePoint::new(0.7, 1.3, -0.4, 0.9).unwrap();
        let xa = FieldJet { value: [1.0, 0.0, 0.0, 0.0], jac: [[0.0; 4]; 4] };
        let xb = FieldJet { value: [0.0, 1.0, 0.0, 0.0], jac: [[0.0; 4]; 4] };
        let _ = p;
        assert_eq!(lie_bracket(&xa, &xb), [0.0; 4]);
    }

    #[test]
    fn y_is_not_a_symmetry() {
        let k = ModelParams::new(1.0, 0.3, -0.2);
        let p = PhasePoint::new(0.7, 1.3, -0.4, 0.9).unwrap();
        let o = obstruction(&p, &k).unwrap();
        assert!(o.bracket.norm() > 1e-3);
        assert!(o.residual < 1e-12, "{o:?}");
        assert!((o.factor - Complex::new(2.0, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn y_a_at_reference() {
        let (p, k) = reference();
        let c = printed_vf(PrintedField::YA, &p, &k).unwrap();
        let z = Complex::new(0.0, 0.0);
        assert_eq!(c.autodiff.components, [z, z, z, Complex::new(0.0, -2.0)]);
        assert_eq!(c.mismatch, 0.0);
    }

    #[test]
    fn w_forms_agree_at_reference() {
        let (p, _) = reference();
        assert_eq!(printed::w_product(&p), Complex::new(0.0, -1.0));
        assert_eq!(printed::w_expanded(&p), Complex::new(0.0, -1.0));
    }
}
