//! Two-forms on phase space: the canonical `ω0`, the real and imaginary parts of
//! `Ω = dA ∧ dB*` and `Ω_M = dM_a ∧ dM_b*`, and the identities they satisfy.
//!
//! A form is stored as an antisymmetric matrix `m` with `Ω(X, Y) = Xᵀ m Y` in the
//! basis `(a, b, p_a, p_b)`; the contraction `i(X)Ω` has components `Σ_i X_i m[i][j]`.

mod analysis;
mod tables;

pub use analysis::*;
pub use tables::*;

use num_complex::Complex;
use serde::Serialize;

use crate::autodiff::{ComplexPhaseFunction, Dual2, PhaseFunction, DIM};
use crate::brackets::hamiltonian_vf_from_grad;
use crate::error::Result;
use crate::fit::{fit_real_factor, max_abs, relative};
use crate::observables::{lambda_factor, ComplexFunction, Observable};
use crate::phase::{ModelParams, PhasePoint};
use crate::scalar::Scalar;

pub type Matrix4<T> = [[T; DIM]; DIM];

/// Real antisymmetric 4×4 matrix of a 2-form at a point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TwoFormMatrix<T> {
    pub m: Matrix4<T>,
}

impl<T: Scalar> TwoFormMatrix<T> {
    pub fn zero() -> Self {
        Self { m: [[T::zero(); DIM]; DIM] }
    }

    /// Builds from the six upper-triangular entries `(01, 02, 03, 12, 13, 23)`.
    pub fn from_upper(u: [T; 6]) -> Self {
        let mut m = [[T::zero(); DIM]; DIM];
        for (v, (i, j)) in u.into_iter().zip(UPPER) {
            m[i][j] = v;
            m[j][i] = -v;
        }
        Self { m }
    }

    pub fn upper(&self) -> [T; 6] {
        UPPER.map(|(i, j)| self.m[i][j])
    }

    /// `‖m + mᵀ‖_max`.
    pub fn antisymmetry(&self) -> T {
        let mut worst = T::zero();
        for i in 0..DIM {
            for j in 0..DIM {
                worst = worst.max((self.m[i][j] + self.m[j][i]).abs());
            }
        }
        worst
    }

    pub fn max_abs(&self) -> T {
        max_abs(&self.m.concat())
    }

    pub fn add(&self, o: &Self) -> Self {
        Self { m: std::array::from_fn(|i| std::array::from_fn(|j| self.m[i][j] + o.m[i][j])) }
    }

    pub fn scale(&self, c: T) -> Self {
        Self { m: self.m.map(|r| r.map(|x| x * c)) }
    }

    /// `i(X)Ω`.
    pub fn contract(&self, x: &[T; DIM]) -> [T; DIM] {
        std::array::from_fn(|j| (0..DIM).fold(T::zero(), |acc, i| acc + x[i] * self.m[i][j]))
    }

    /// `Ω(X, Y)`.
    pub fn pair(&self, x: &[T; DIM], y: &[T; DIM]) -> T {
        let c = self.contract(x);
        (0..DIM).fold(T::zero(), |acc, j| acc + c[j] * y[j])
    }

    /// Pfaffian relative to the Liouville volume `da ∧ dp_a ∧ db ∧ dp_b`, so `Pf(ω0) = 1`
    /// and `Ω ∧ Ω = 2 Pf · vol`.
    pub fn pfaffian(&self) -> T {
        let m = &self.m;
        m[0][2] * m[1][3] - m[0][1] * m[2][3] - m[0][3] * m[1][2]
    }

    /// Coefficient of the Liouville volume in `Ω ∧ Ω'` (polarised Pfaffian).
    pub fn mixed_wedge(&self, o: &Self) -> T {
        let (m1, m2) = (&self.m, &o.m);
        -(m1[0][1] * m2[2][3] - m1[0][2] * m2[1][3] + m1[0][3] * m2[1][2] + m2[0][1] * m1[2][3]
            - m2[0][2] * m1[1][3]
            + m2[0][3] * m1[1][2])
    }

    pub fn to_f64(&self) -> TwoFormMatrix<f64> {
        TwoFormMatrix { m: self.m.map(|r| r.map(|x| x.as_f64())) }
    }
}

/// Upper-triangular index pairs in the order `12, 13, 14, 23, 24, 34` (one-based labels).
pub const UPPER: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

/// A 2-form with its first derivatives `dm[i][j][k] = ∂_k m_ij`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FormJet<T> {
    pub m: Matrix4<T>,
    pub dm: [Matrix4<T>; DIM],
}

impl<T: Scalar> FormJet<T> {
    pub fn zero() -> Self {
        Self { m: [[T::zero(); DIM]; DIM], dm: [[[T::zero(); DIM]; DIM]; DIM] }
    }

    /// `df ∧ dg` with derivatives from second-order jets of `f`, `g`.
    pub fn wedge(f: &Dual2<T>, g: &Dual2<T>) -> Self {
        let mut out = Self::zero();
        for i in 0..DIM {
            for j in 0..DIM {
                out.m[i][j] = f.grad[i] * g.grad[j] - g.grad[i] * f.grad[j];
                for k in 0..DIM {
                    out.dm[i][j][k] = f.hess[i][k] * g.grad[j] + f.grad[i] * g.hess[j][k]
                        - g.hess[i][k] * f.grad[j]
                        - g.grad[i] * f.hess[j][k];
                }
            }
        }
        out
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut out = *self;
        for i in 0..DIM {
            for j in 0..DIM {
                out.m[i][j] += o.m[i][j];
                for k in 0..DIM {
                    out.dm[i][j][k] += o.dm[i][j][k];
                }
            }
        }
        out
    }

    pub fn neg(&self) -> Self {
        Self { m: self.m.map(|r| r.map(|x| -x)), dm: self.dm.map(|r| r.map(|c| c.map(|x| -x))) }
    }

    pub fn form(&self) -> TwoFormMatrix<T> {
        TwoFormMatrix { m: self.m }
    }
}

/// The five real 2-forms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum FormKind {
    Omega0,
    Omega1,
    Omega2,
    OmegaM1,
    OmegaM2,
}

impl FormKind {
    /// The four degenerate forms.
    pub const DEGENERATE: [FormKind; 4] = [FormKind::Omega1, FormKind::Omega2, FormKind::OmegaM1, FormKind::OmegaM2];

    pub fn name(self) -> &'static str {
        match self {
            FormKind::Omega0 => "omega0",
            FormKind::Omega1 => "Omega1",
            FormKind::Omega2 => "Omega2",
            FormKind::OmegaM1 => "Omega_M1",
            FormKind::OmegaM2 => "Omega_M2",
        }
    }

    /// Name of the recursion operator `ω0⁻¹ ∘ Ω`.
    pub fn operator_name(self) -> &'static str {
        match self {
            FormKind::Omega0 => "I",
            FormKind::Omega1 => "R1",
            FormKind::Omega2 => "R2",
            FormKind::OmegaM1 => "R'1",
            FormKind::OmegaM2 => "R'2",
        }
    }

    /// Complex factors `(F, G)` of `Ω = dF ∧ dG*`.
    fn factors(self) -> Option<(ComplexFunction, ComplexFunction)> {
        match self {
            FormKind::Omega0 => None,
            FormKind::Omega1 | FormKind::Omega2 => Some((ComplexFunction::A, ComplexFunction::B)),
            FormKind::OmegaM1 | FormKind::OmegaM2 => Some((ComplexFunction::Ma, ComplexFunction::Mb)),
        }
    }

    fn is_real_part(self) -> bool {
        matches!(self, FormKind::Omega1 | FormKind::OmegaM1)
    }
}

/// Canonical `ω0 = da ∧ dp_a + db ∧ dp_b`.
pub fn omega0<T: Scalar>() -> TwoFormMatrix<T> {
    let (o, z) = (T::one(), T::zero());
    TwoFormMatrix::from_upper([z, o, z, z, o, z])
}

/// `df ∧ dg`, i.e. `m = ∇f ∇gᵀ − ∇g ∇fᵀ`.
pub fn wedge_pair<T: Scalar, F: PhaseFunction<T>, G: PhaseFunction<T>>(
    f: &F,
    g: &G,
    p: &PhasePoint<T>,
) -> Result<TwoFormMatrix<T>> {
    let (gf, gg) = (f.grad_at(p)?.grad, g.grad_at(p)?.grad);
    Ok(TwoFormMatrix { m: std::array::from_fn(|i| std::array::from_fn(|j| gf[i] * gg[j] - gg[i] * gf[j])) })
}

/// `Re` and `Im` of `dF ∧ dG*` from second-order jets of `F = F1 + iF2`, `G = G1 + iG2`.
fn complex_wedge<T: Scalar>(f: &Complex<Dual2<T>>, g: &Complex<Dual2<T>>) -> (FormJet<T>, FormJet<T>) {
    let re = FormJet::wedge(&f.re, &g.re).add(&FormJet::wedge(&f.im, &g.im));
    let im = FormJet::wedge(&f.re, &g.im).neg().add(&FormJet::wedge(&f.im, &g.re));
    (re, im)
}

pub fn build_form_jet<T: Scalar>(which: FormKind, p: &PhasePoint<T>, k: &ModelParams<T>) -> Result<FormJet<T>> {
    k.check_point(p)?;
    match which.factors() {
        None => Ok(FormJet { m: omega0().m, dm: [[[T::zero(); DIM]; DIM]; DIM] }),
        Some((f, g)) => {
            let fj = f.with(*k).hess_at(p)?;
            let gj = g.with(*k).hess_at(p)?;
            let (re, im) = complex_wedge(&fj, &gj);
            Ok(if which.is_real_part() { re } else { im })
        }
    }
}

pub fn build_form<T: Scalar>(which: FormKind, p: &PhasePoint<T>, k: &ModelParams<T>) -> Result<TwoFormMatrix<T>> {
    k.check_point(p)?;
    match which.factors() {
        None => Ok(omega0()),
        Some((f, g)) => {
            let fo = f.with(*k).observable_at(p)?;
            let go = g.with(*k).observable_at(p)?;
            let m = std::array::from_fn(|i| {
                std::array::from_fn(|j| {
                    let w = fo.grad[i] * go.grad[j].conj() - go.grad[i].conj() * fo.grad[j];
                    if which.is_real_part() {
                        w.re
                    } else {
                        w.im
                    }
                })
            });
            Ok(TwoFormMatrix { m })
        }
    }
}

/// One quasi-Hamiltonian contraction `i(Γ)Ω = c·λ·dI`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContractionEntry<T> {
    pub form: FormKind,
    pub integral: Observable,
    pub contraction: [T; DIM],
    /// `λ·dI`.
    pub lambda_d_integral: [T; DIM],
    /// Least-squares `c`; meaningful only when `λ` is away from zero.
    pub factor: T,
    /// Relative residual left by the fitted `c`.
    pub residual: T,
}

/// Real and complex contraction identities at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContractionReport<T> {
    pub lambda: T,
    /// `Ω1/dJ4`, `Ω2/dJ3`, `Ω_M1/dK4`, `Ω_M2/dK3`.
    pub entries: [ContractionEntry<T>; 4],
    /// `|i(Γ)Ω − 2iλ·d(A B*)| / (1 + scale)`.
    pub complex_residual: T,
    /// `|i(Γ)Ω_M − iλ·d(M_a M_b*)| / (1 + scale)`.
    pub complex_residual_m: T,
}

/// `Γ = X_H` at a point.
pub fn gamma<T: Scalar>(p: &PhasePoint<T>, k: &ModelParams<T>) -> Result<[T; DIM]> {
    Ok(hamiltonian_vf_from_grad(&Observable::H.with(*k).grad_at(p)?.grad))
}

pub fn contraction_identities<T: Scalar>(p: &PhasePoint<T>, k: &ModelParams<T>) -> Result<ContractionReport<T>> {
    let g = gamma(p, k)?;
    let lambda = lambda_factor(p)?;
    let pairs = [
        (FormKind::Omega1, Observable::J4),
        (FormKind::Omega2, Observable::J3),
        (FormKind::OmegaM1, Observable::K4),
        (FormKind::OmegaM2, Observable::K3),
    ];
    let mut entries = Vec::with_capacity(4);
    let mut forms = Vec::with_capacity(4);
    for (form, integral) in pairs {
        let w = build_form(form, p, k)?;
        let contraction = w.contract(&g);
        let di = integral.with(*k).grad_at(p)?.grad;
        let lambda_d_integral = di.map(|x| x * lambda);
        let (factor, residual) = fit_real_factor(&lambda_d_integral, &contraction);
        entries.push(ContractionEntry { form, integral, contraction, lambda_d_integral, factor, residual });
        forms.push(w);
    }
    let complex_check = |re: &ContractionEntry<T>, im: &ContractionEntry<T>, f: ComplexFunction, c: T| -> Result<T> {
        let d = f.with(*k).observable_at(p)?.grad;
        let i_lambda = Complex::new(T::zero(), c * lambda);
        let mut worst = T::zero();
        let mut scale = T::zero();
        for j in 0..DIM {
            let lhs = Complex::new(re.contraction[j], im.contraction[j]);
            let rhs = i_lambda * d[j];
            worst = worst.max((lhs - rhs).norm());
            scale = scale.max(lhs.norm()).max(rhs.norm());
        }
        Ok(relative(worst, scale))
    };
    let complex_residual = complex_check(&entries[0], &entries[1], ComplexFunction::J34, T::lit(2.0))?;
    let complex_residual_m = complex_check(&entries[2], &entries[3], ComplexFunction::K34, T::one())?;
    Ok(ContractionReport {
        lambda,
        entries: [entries[0], entries[1], entries[2], entries[3]],
        complex_residual,
        complex_residual_m,
    })
}

/// Pfaffians, mixed wedges and ranks of the four degenerate forms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DegeneracyReport<T> {
    /// `|Pf| / max|m|²` for `Ω1, Ω2, Ω_M1, Ω_M2`.
    pub pfaffian: [T; 4],
    /// `Ω1 ∧ Ω2` and `Ω_M1 ∧ Ω_M2`, normalised like the Pfaffians.
    pub mixed: [T; 2],
    pub rank: [usize; 4],
}

impl<T: Scalar> DegeneracyReport<T> {
    pub fn max_pfaffian(&self) -> T {
        max_abs(&self.pfaffian)
    }

    pub fn max_mixed(&self) -> T {
        max_abs(&self.mixed)
    }
}

pub fn degeneracy<T: Scalar>(p: &PhasePoint<T>, k: &ModelParams<T>) -> Result<DegeneracyReport<T>> {
    let mut forms = [TwoFormMatrix::zero(); 4];
    for (slot, kind) in forms.iter_mut().zip(FormKind::DEGENERATE) {
        *slot = build_form(kind, p, k)?;
    }
    let norm = |a: &TwoFormMatrix<T>, b: &TwoFormMatrix<T>| {
        let s = a.max_abs() * b.max_abs();
        if s > T::zero() {
            s
        } else {
            T::one()
        }
    };
    Ok(DegeneracyReport {
        pfaffian: std::array::from_fn(|i| forms[i].pfaffian().abs() / norm(&forms[i], &forms[i])),
        mixed: [
            forms[0].mixed_wedge(&forms[1]).abs() / norm(&forms[0], &forms[1]),
            forms[2].mixed_wedge(&forms[3]).abs() / norm(&forms[2], &forms[3]),
        ],
        rank: std::array::from_fn(|i| analysis::rank(&forms[i].to_f64())),
    })
}

/// `Ω1(Y4, Γ)`, `Ω2(Y3, Γ)`, `Ω_M1(Z4, Γ)`, `Ω_M2(Z3, Γ)`, each divided by `|m|·|X|·|Γ|`.
pub fn orthogonality<T: Scalar>(p: &PhasePoint<T>, k: &ModelParams<T>) -> Result<[T; 4]> {
    let g = gamma(p, k)?;
    let mut out = [T::zero(); 4];
    for (slot, (form, integral)) in out.iter_mut().zip([
        (FormKind::Omega1, Observable::J4),
        (FormKind::Omega2, Observable::J3),
        (FormKind::OmegaM1, Observable::K4),
        (FormKind::OmegaM2, Observable::K3),
    ]) {
        let w = build_form(form, p, k)?;
        let y = hamiltonian_vf_from_grad(&integral.with(*k).grad_at(p)?.grad);
        let scale = w.max_abs() * max_abs(&y) * max_abs(&g);
        *slot = relative(w.pair(&y, &g), scale);
    }
    Ok(out)
}

/// `μ` with `i(μΓ)Ω1 = dJ4`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuasiFactor<T> {
    pub mu: T,
    /// The contraction factor `c1` used in `μ = 1/(c1·λ)`.
    pub c1: T,
    pub lambda: T,
    /// `|i(μΓ)Ω1 − dJ4| / (1 + scale)`.
    pub residual: T,
}

/// Returns `None` when `|λ|` is below `lambda_min`.
pub fn quasi_factor<T: Scalar>(p: &PhasePoint<T>, k: &ModelParams<T>, lambda_min: T) -> Result<Option<QuasiFactor<T>>> {
    let report = contraction_identities(p, k)?;
    let lambda = report.lambda;
    if !(lambda.abs() > lambda_min) {
        return Ok(None);
    }
    let c1 = report.entries[0].factor;
    let mu = T::one() / (c1 * lambda);
    let g = gamma(p, k)?.map(|x| x * mu);
    let lhs = build_form(FormKind::Omega1, p, k)?.contract(&g);
    let dj4 = Observable::J4.with(*k).grad_at(p)?.grad;
    let diff: Vec<T> = lhs.iter().zip(dj4).map(|(a, b)| *a - b).collect();
    let residual = relative(max_abs(&diff), max_abs(&lhs).max(max_abs(&dj4)));
    Ok(Some(QuasiFactor { mu, c1, lambda, residual }))
}
