//! Printed coefficient tables and kernel generators, kept verbatim for comparison
//! against the wedge construction.

use serde::Serialize;

use super::analysis::annihilation;
use super::{build_form, recursion_matrix, FormKind, Matrix4, TwoFormMatrix, UPPER};
use crate::autodiff::DIM;
use crate::error::Result;
use crate::fit::relative;
use crate::phase::{ModelParams, PhasePoint};
use crate::scalar::Scalar;

/// Printed coefficient tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum PrintedTable {
    /// `α_ij` of `Ω1`.
    Alpha,
    /// `β_ij` of `Ω2`.
    Beta,
    /// `(2/s²)·α_ijk1` against `Ω_M1` with `k2 = k3 = 0`.
    AlphaMK1,
    /// `(2/s²)·α_ijk` against the `k2, k3`-dependent part of `Ω_M1`.
    AlphaMK,
    /// `(2/s²)·(α_ijk1 + α_ijk)` against `Ω_M1`.
    AlphaM,
    /// `(2k1/s²)·β_ij` against `Ω_M2`.
    BetaM,
}

impl PrintedTable {
    pub const ALL: [PrintedTable; 6] = [
        PrintedTable::Alpha,
        PrintedTable::Beta,
        PrintedTable::AlphaMK1,
        PrintedTable::AlphaMK,
        PrintedTable::AlphaM,
        PrintedTable::BetaM,
    ];

    pub fn symbol(self) -> &'static str {
        match self {
            PrintedTable::Alpha => "alpha",
            PrintedTable::Beta => "beta",
            PrintedTable::AlphaMK1 => "alphaM_k1",
            PrintedTable::AlphaMK => "alphaM_k",
            PrintedTable::AlphaM => "alphaM",
            PrintedTable::BetaM => "betaM",
        }
    }
}

/// Entry label such as `alpha23` for the pair `(1, 2)`.
pub fn entry_label(table: PrintedTable, (i, j): (usize, usize)) -> String {
    format!("{}{}{}", table.symbol(), i + 1, j + 1)
}

struct Vars<T> {
    a: T,
    b: T,
    pa: T,
    pb: T,
    s: T,
    j: T,
    q: T,
    c: T,
}

fn vars<T: Scalar>(p: &PhasePoint<T>, k: &ModelParams<T>) -> Vars<T> {
    let (a, b, pa, pb) = (p.a, p.b, p.p_a, p.p_b);
    Vars { a, b, pa, pb, s: a * a + b * b, j: a * pb - b * pa, q: a * pa + b * pb, c: k.k2 * b - k.k3 * a }
}

/// Upper-triangular entries `(12, 13, 14, 23, 24, 34)` of a printed table, prefactors included.
pub fn printed_table<T: Scalar>(table: PrintedTable, p: &PhasePoint<T>, k: &ModelParams<T>) -> [T; 6] {
    let Vars { a, b, pa, pb, s, j, q, c } = vars(p, k);
    let (two, three, four) = (T::lit(2.0), T::lit(3.0), T::lit(4.0));
    let s2 = s * s;
    let zero = T::zero();
    match table {
        PrintedTable::Alpha => {
            let u = two * a * b * pa - s * pb;
            let v = two * a * b * pb - s * pa;
            [
                two * (a * a - b * b) * (b * k.k2 - a * k.k3) / s2,
                two * b * u / s2,
                two * b * v / s2,
                two * a * u / s2,
                two * a * v / s2,
                zero,
            ]
        }
        PrintedTable::Beta => [
            four * a * b * (a * k.k3 - b * k.k2) / s2,
            four * b * b * b * pa / s2,
            -(four * b * b * b * pb) / s2,
            -(four * b * b * b * pa) / s2,
            four * a * a * a * pb / s2,
            zero,
        ],
        PrintedTable::AlphaMK1 => {
            let k1 = k.k1;
            [
                zero,
                -j * (q * pb + two * k1 * b) * b,
                j * (q * pa + two * k1 * a) * b,
                j * (q * pb + two * k1 * b) * a,
                -j * (q * pa + two * k1 * a) * a,
                two * j * j * s,
            ]
            .map(|x| two * x / s2)
        }
        PrintedTable::AlphaMK => {
            let (k2, k3) = (k.k2, k.k3);
            let (a2, b2, a3, b3) = (a * a, b * b, a * a * a, b * b * b);
            [
                c * (c * s + j * q),
                k2 * b2 * (two * a * b * pa - a2 * pb + b2 * pb) + k3 * b * (two * b3 * pa - a3 * pb - three * a * b2 * pb),
                -k2 * b2 * (a2 * pa - b2 * pa + two * a * b * pb)
                    + k3 * a * (-a2 * b * pa - three * b3 * pa + two * a3 * pb + four * a * b2 * pb),
                k2 * b * (-four * a2 * b * pa - two * b3 * pa + three * a3 * pb + a * b2 * pb)
                    - k3 * a2 * (-two * a * b * pa + a2 * pb - b2 * pb),
                -k2 * a * (-three * a2 * b * pa - b3 * pa + two * a3 * pb) - k3 * a2 * (a2 * pa - b2 * pa + two * a * b * pb),
                zero,
            ]
            .map(|x| two * x / s2)
        }
        PrintedTable::AlphaM => {
            let x = printed_table(PrintedTable::AlphaMK1, p, k);
            let y = printed_table(PrintedTable::AlphaMK, p, k);
            std::array::from_fn(|i| x[i] + y[i])
        }
        PrintedTable::BetaM => {
            let w = a * a * pb + b * b;
            [
                -(a * a - b * b) * c,
                (w * pb - two * a * b * pa) * b,
                (w * pa - two * a * b * pb) * b,
                -(w * pb - two * a * b * pa) * a,
                -(w * pa - two * a * b * pb) * a,
                zero,
            ]
            .map(|x| two * k.k1 * x / s2)
        }
    }
}

/// Table entries with their known typos repaired: `b²b → a²b` / `b b² → a b²` in `β14`, `β23`,
/// `(a² p_b + b²) → (a² + b²)` in the `Ω_M2` table, and the sign slips in `α23`, `α24`, `β12`.
pub fn corrected_table<T: Scalar>(table: PrintedTable, p: &PhasePoint<T>, k: &ModelParams<T>) -> [T; 6] {
    let mut t = printed_table(table, p, k);
    let Vars { a, b, pa, pb, s, .. } = vars(p, k);
    let (two, four) = (T::lit(2.0), T::lit(4.0));
    match table {
        PrintedTable::Alpha => {
            t[3] = -t[3];
            t[4] = -t[4];
        }
        PrintedTable::Beta => {
            t[0] = -t[0];
            t[2] = -(four * a * a * b * pb) / (s * s);
            t[3] = -(four * a * b * b * pa) / (s * s);
        }
        PrintedTable::BetaM => {
            let f = two * k.k1 / (s * s);
            t[1] = f * (s * pb - two * a * b * pa) * b;
            t[2] = f * (s * pa - two * a * b * pb) * b;
            t[3] = -f * (s * pb - two * a * b * pa) * a;
            t[4] = -f * (s * pa - two * a * b * pb) * a;
        }
        _ => {}
    }
    t
}

/// The form entries each table is compared against.
pub fn table_target<T: Scalar>(table: PrintedTable, p: &PhasePoint<T>, k: &ModelParams<T>) -> Result<[T; 6]> {
    let reduced = ModelParams { k2: T::zero(), k3: T::zero(), ..*k };
    Ok(match table {
        PrintedTable::Alpha => build_form(FormKind::Omega1, p, k)?.upper(),
        PrintedTable::Beta => build_form(FormKind::Omega2, p, k)?.upper(),
        PrintedTable::AlphaMK1 => build_form(FormKind::OmegaM1, p, &reduced)?.upper(),
        PrintedTable::AlphaMK => {
            let full = build_form(FormKind::OmegaM1, p, k)?.upper();
            let base = build_form(FormKind::OmegaM1, p, &reduced)?.upper();
            std::array::from_fn(|i| full[i] - base[i])
        }
        PrintedTable::AlphaM => build_form(FormKind::OmegaM1, p, k)?.upper(),
        PrintedTable::BetaM => build_form(FormKind::OmegaM2, p, k)?.upper(),
    })
}

/// One printed coefficient at one point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableEntry<T> {
    pub label: String,
    pub index: (usize, usize),
    pub printed: T,
    pub computed: T,
    /// `|computed − printed| / (1 + scale)`.
    pub residual: T,
    /// `|computed + printed| / (1 + scale)`.
    pub residual_flipped: T,
}

impl<T: Scalar> TableEntry<T> {
    /// `Some(±1)` when one sign reproduces the computed entry to `tol`.
    pub fn fitted_sign(&self, tol: T) -> Option<f64> {
        if self.residual < tol {
            Some(1.0)
        } else if self.residual_flipped < tol {
            Some(-1.0)
        } else {
            None
        }
    }
}

pub fn printed_tables<T: Scalar>(table: PrintedTable, p: &PhasePoint<T>, k: &ModelParams<T>) -> Result<Vec<TableEntry<T>>> {
    k.check_point(p)?;
    let printed = printed_table(table, p, k);
    let computed = table_target(table, p, k)?;
    Ok(UPPER
        .iter()
        .enumerate()
        .map(|(n, &idx)| {
            let scale = printed[n].abs().max(computed[n].abs());
            TableEntry {
                label: entry_label(table, idx),
                index: idx,
                printed: printed[n],
                computed: computed[n],
                residual: relative(computed[n] - printed[n], scale),
                residual_flipped: relative(computed[n] + printed[n], scale),
            }
        })
        .collect())
}

/// The printed recursion-operator layout filled with the coefficients `c` (upper entries of the form):
/// columns `da ↦ (c13, c14, 0, −c12)`, `db ↦ (c23, c24, c12, 0)`, `dp_a ↦ (0, 0, c13, c23)`, `dp_b ↦ (0, 0, c14, c24)`.
pub fn printed_recursion_layout<T: Scalar>(c: &[T; 6]) -> Matrix4<T> {
    let [c12, c13, c14, c23, c24, _] = *c;
    let z = T::zero();
    [[c13, c23, z, z], [c14, c24, z, z], [z, c12, c13, c14], [-c12, z, c23, c24]]
}

/// Relative mismatch between the printed expansion of `R1` (`Omega1`) or `R2` (`Omega2`)
/// and the operator computed from the form, together with the mismatch of the layout
/// itself when filled with the computed coefficients.
pub fn printed_recursion_mismatch<T: Scalar>(which: FormKind, p: &PhasePoint<T>, k: &ModelParams<T>) -> Result<(T, T)> {
    let table = match which {
        FormKind::Omega2 => PrintedTable::Beta,
        _ => PrintedTable::Alpha,
    };
    let form = build_form(which, p, k)?;
    let r = recursion_matrix(&form.m);
    let scale = form.max_abs();
    let diff = |other: &Matrix4<T>| {
        let mut worst = T::zero();
        for i in 0..DIM {
            for j in 0..DIM {
                worst = worst.max((r[i][j] - other[i][j]).abs());
            }
        }
        relative(worst, scale)
    };
    let printed = printed_recursion_layout(&printed_table(table, p, k));
    let layout = printed_recursion_layout(&form.upper());
    Ok((diff(&printed), diff(&layout)))
}

/// Printed kernel generators of `Ω1` and `Ω2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum KernelGenerator {
    X11,
    X12,
    X21,
    X22,
}

impl KernelGenerator {
    pub const ALL: [KernelGenerator; 4] = [KernelGenerator::X11, KernelGenerator::X12, KernelGenerator::X21, KernelGenerator::X22];

    pub fn name(self) -> &'static str {
        match self {
            KernelGenerator::X11 => "X11",
            KernelGenerator::X12 => "X12",
            KernelGenerator::X21 => "X21",
            KernelGenerator::X22 => "X22",
        }
    }

    pub fn form(self) -> FormKind {
        match self {
            KernelGenerator::X11 | KernelGenerator::X12 => FormKind::Omega1,
            _ => FormKind::Omega2,
        }
    }

    /// Components as printed.
    pub fn printed<T: Scalar>(self, p: &PhasePoint<T>, k: &ModelParams<T>) -> [T; DIM] {
        let Vars { a, b, pa, pb, s, .. } = vars(p, k);
        let two = T::lit(2.0);
        let z = T::zero();
        let shear = a * k.k3 - b * k.k2;
        match self {
            KernelGenerator::X11 => {
                let u = two * a * b * pb - s * pa;
                [z, z, u, u]
            }
            KernelGenerator::X12 => [z, b, a, -(a * a - b * b) * shear / (s * pa - two * a * b * pa)],
            KernelGenerator::X21 => [z, z, a * a * pb, b * b * pa],
            KernelGenerator::X22 => [z, b, a, -b * shear / (a * pb)],
        }
    }

    /// Components after repairing the apparent typos: `∂p_a → ∂a` in the radial part of `X12`, `X22`,
    /// `2ab·p_a → 2ab·p_b` in the `X12` denominator, and the vertical field of `X11`.
    pub fn corrected<T: Scalar>(self, p: &PhasePoint<T>, k: &ModelParams<T>) -> [T; DIM] {
        let Vars { a, b, pa, pb, s, .. } = vars(p, k);
        let two = T::lit(2.0);
        let z = T::zero();
        let shear = a * k.k3 - b * k.k2;
        match self {
            KernelGenerator::X11 => [z, z, s * pa - two * a * b * pb, -(s * pb - two * a * b * pa)],
            KernelGenerator::X12 => [a, b, z, -(a * a - b * b) * shear / (s * pa - two * a * b * pb)],
            KernelGenerator::X21 => self.printed(p, k),
            KernelGenerator::X22 => [a, b, z, -b * shear / (a * pb)],
        }
    }
}

/// The `∂p_b` coefficient `γ` making `a ∂a + b ∂b + γ ∂p_b` a kernel vector, by least squares.
pub fn fit_radial_kernel_coefficient(form: &TwoFormMatrix<f64>, a: f64, b: f64) -> (f64, f64) {
    let base = form.contract(&[a, b, 0.0, 0.0]);
    let col = form.m[3];
    let num: f64 = base.iter().zip(col).map(|(x, y)| x * y).sum();
    let den: f64 = col.iter().map(|y| y * y).sum();
    let gamma = if den > 0.0 { -num / den } else { 0.0 };
    (gamma, annihilation(form, &[a, b, 0.0, gamma]))
}

/// Kernel membership of one printed generator at a point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelGeneratorCheck {
    pub generator: KernelGenerator,
    pub printed_annihilation: f64,
    pub corrected_annihilation: f64,
    /// Fitted `γ` of the radial reading `a ∂a + b ∂b + γ ∂p_b` (for `X12`, `X22`).
    pub fitted_gamma: Option<f64>,
    /// `γ` of the corrected closed form.
    pub corrected_gamma: Option<f64>,
}

pub fn kernel_generator_check<T: Scalar>(g: KernelGenerator, p: &PhasePoint<T>, k: &ModelParams<T>) -> Result<KernelGeneratorCheck> {
    let form = build_form(g.form(), p, k)?.to_f64();
    let f64s = |v: [T; DIM]| v.map(|x| x.as_f64());
    let printed = f64s(g.printed(p, k));
    let corrected = f64s(g.corrected(p, k));
    let radial = matches!(g, KernelGenerator::X12 | KernelGenerator::X22);
    Ok(KernelGeneratorCheck {
        generator: g,
        printed_annihilation: annihilation(&form, &printed),
        corrected_annihilation: annihilation(&form, &corrected),
        fitted_gamma: radial.then(|| fit_radial_kernel_coefficient(&form, p.a.as_f64(), p.b.as_f64()).0),
        corrected_gamma: radial.then_some(corrected[3]),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference() -> (PhasePoint<f64>, ModelParams<f64>) {
        (PhasePoint::new(1.0, 0.0, 0.0, 1.0).unwrap(), ModelParams::new(1.0, 0.0, 0.0))
    }

    #[test]
    fn alpha23_sign_slip_at_reference() {
        let (p, k) = reference();
        let t = printed_tables(PrintedTable::Alpha, &p, &k).unwrap();
        let e = &t[3];
        assert_eq!(e.label, "alpha23");
        assert_eq!(e.printed, -2.0);
        assert_eq!(e.computed, 2.0);
        assert_eq!(e.fitted_sign(1e-12), Some(-1.0));
        assert_eq!(t[5].fitted_sign(1e-12), Some(1.0));
    }

    #[test]
    fn beta_m34_is_zero() {
        let p = PhasePoint::new(0.7, -1.3, 0.4, 0.9).unwrap();
        let k = ModelParams::new(1.0, 0.3, -0.2);
        let t: Vec<TableEntry<f64>> = printed_tables(PrintedTable::BetaM, &p, &k).unwrap();
        assert_eq!(t[5].printed, 0.0);
        assert!(t[5].computed.abs() < 1e-14);
    }

    #[test]
    fn layout_reproduces_operator() {
        let p = PhasePoint::new(0.7, -1.3, 0.4, 0.9).unwrap();
        let k = ModelParams::new(1.0, 0.3, -0.2);
        let (_, layout) = printed_recursion_mismatch(FormKind::Omega1, &p, &k).unwrap();
        assert_eq!(layout, 0.0);
    }

    #[test]
    fn corrected_generators_annihilate() {
        let p = PhasePoint::new(0.7, -1.3, 0.4, 0.9).unwrap();
        let k = ModelParams::new(1.0, 0.3, -0.2);
        for g in KernelGenerator::ALL {
            let c = kernel_generator_check(g, &p, &k).unwrap();
            assert!(c.corrected_annihilation < 1e-13, "{c:?}");
        }
        let x12 = kernel_generator_check(KernelGenerator::X12, &p, &k).unwrap();
        assert!(x12.printed_annihilation > 1e-3);
        assert!((x12.fitted_gamma.unwrap() - x12.corrected_gamma.unwrap()).abs() < 1e-12);
    }
}
