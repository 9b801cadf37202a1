//! Rank, kernels, kernel involutivity, recursion operators and Nijenhuis torsion.
//!
//! Dense linear algebra runs in `f64` through `nalgebra`.

use nalgebra::{DMatrix, Matrix4 as NMatrix4};
use num_complex::Complex;
use serde::Serialize;

use super::{build_form_jet, FormJet, FormKind, Matrix4, TwoFormMatrix, UPPER};
use crate::autodiff::DIM;
use crate::brackets::{lie_bracket, FieldJet};
use crate::error::Result;
use crate::phase::{ModelParams, PhasePoint};
use crate::scalar::Scalar;

/// Singular values below `RANK_THRESHOLD · σ_max` count as zero.
pub const RANK_THRESHOLD: f64 = 1e-10;

fn to_nalgebra(m: &Matrix4<f64>) -> NMatrix4<f64> {
    NMatrix4::from_fn(|i, j| m[i][j])
}

/// Singular values of the `4 × n` matrix with the given columns, largest first.
pub fn singular_values_of_columns(cols: &[[f64; DIM]]) -> Vec<f64> {
    let m = DMatrix::from_fn(DIM, cols.len(), |i, j| cols[j][i]);
    let mut s: Vec<f64> = m.singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

pub fn rank_of_singular_values(s: &[f64]) -> usize {
    let top = s.first().copied().unwrap_or(0.0);
    if top == 0.0 {
        return 0;
    }
    s.iter().filter(|x| **x > RANK_THRESHOLD * top).count()
}

pub fn rank(form: &TwoFormMatrix<f64>) -> usize {
    let cols: Vec<[f64; DIM]> = (0..DIM).map(|j| std::array::from_fn(|i| form.m[i][j])).collect();
    rank_of_singular_values(&singular_values_of_columns(&cols))
}

/// Orthonormal basis of `{X : i(X)Ω = 0}` from the SVD, together with the sorted singular values.
pub fn kernel_basis(form: &TwoFormMatrix<f64>) -> (Vec<[f64; DIM]>, [f64; DIM]) {
    let svd = to_nalgebra(&form.m).transpose().svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let mut idx: Vec<usize> = (0..DIM).collect();
    idx.sort_by(|a, b| svd.singular_values[*b].total_cmp(&svd.singular_values[*a]));
    let sv: [f64; DIM] = std::array::from_fn(|i| svd.singular_values[idx[i]]);
    let r = rank_of_singular_values(&sv);
    let basis = idx[r..].iter().map(|&row| std::array::from_fn(|c| v_t[(row, c)])).collect();
    (basis, sv)
}

/// `‖i(X)Ω‖ / (‖m‖·‖X‖)`, max-norms.
pub fn annihilation(form: &TwoFormMatrix<f64>, x: &[f64; DIM]) -> f64 {
    let c = form.contract(x);
    let num = c.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let den = form.max_abs() * x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if den > 0.0 {
        num / den
    } else {
        num
    }
}

fn jet_to_f64<T: Scalar>(j: &FormJet<T>) -> FormJet<f64> {
    FormJet { m: j.m.map(|r| r.map(|x| x.as_f64())), dm: j.dm.map(|r| r.map(|c| c.map(|x| x.as_f64()))) }
}

/// Smooth kernel fields of a rank-2 form built by elimination on the largest entry `m_ij`:
/// `K_k = e_k + (m_jk/m_ij) e_i − (m_ik/m_ij) e_j` for the two remaining indices `k`.
pub fn kernel_fields(jet: &FormJet<f64>) -> ((usize, usize), [FieldJet<f64>; 2]) {
    let (mut pi, mut pj) = (0, 1);
    for (i, j) in UPPER {
        if jet.m[i][j].abs() > jet.m[pi][pj].abs() {
            (pi, pj) = (i, j);
        }
    }
    let free: Vec<usize> = (0..DIM).filter(|x| *x != pi && *x != pj).collect();
    let mij = jet.m[pi][pj];
    let ratio = |a: usize, b: usize| -> (f64, [f64; DIM]) {
        let v = jet.m[a][b] / mij;
        let d = std::array::from_fn(|l| (jet.dm[a][b][l] * mij - jet.m[a][b] * jet.dm[pi][pj][l]) / (mij * mij));
        (v, d)
    };
    let field = |k: usize| {
        let (r1, d1) = ratio(pj, k);
        let (r2, d2) = ratio(pi, k);
        let mut f = FieldJet::<f64>::zero();
        f.value[k] = 1.0;
        f.value[pi] = r1;
        f.value[pj] = -r2;
        f.jac[pi] = d1;
        f.jac[pj] = d2.map(|x| -x);
        f
    };
    ((pi, pj), [field(free[0]), field(free[1])])
}

/// Involutivity of the kernel distribution at one point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvolutivityCheck {
    pub pivot: (usize, usize),
    pub fields: [[f64; DIM]; 2],
    pub bracket: [f64; DIM],
    /// Largest annihilation residual of the two fields.
    pub field_annihilation: f64,
    /// `‖i([K1,K2])Ω‖ / (‖m‖·max(‖K1‖, ‖K2‖, ‖[K1,K2]‖))`.
    pub bracket_annihilation: f64,
    /// Rank of the `4 × 3` matrix `[K1, K2, [K1, K2]]`.
    pub augmented_rank: usize,
    /// `σ3 / σ1` of that matrix.
    pub sigma_ratio: f64,
}

impl InvolutivityCheck {
    pub fn passes(&self) -> bool {
        self.augmented_rank == 2
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelReport {
    pub form: FormKind,
    pub rank: usize,
    pub singular_values: [f64; DIM],
    /// Orthonormal SVD kernel basis.
    pub basis: Vec<[f64; DIM]>,
    /// Largest annihilation residual over the basis.
    pub annihilation: f64,
    /// `None` at degenerate points (rank ≠ 2).
    pub involutivity: Option<InvolutivityCheck>,
}

pub fn kernel_and_involutivity<T: Scalar>(which: FormKind, p: &PhasePoint<T>, k: &ModelParams<T>) -> Result<KernelReport> {
    let jet = jet_to_f64(&build_form_jet(which, p, k)?);
    let form = jet.form();
    let (basis, singular_values) = kernel_basis(&form);
    let rank = DIM - basis.len();
    let worst = basis.iter().map(|x| annihilation(&form, x)).fold(0.0, f64::max);
    let involutivity = (rank == 2).then(|| {
        let (pivot, [k1, k2]) = kernel_fields(&jet);
        let bracket = lie_bracket(&k1, &k2);
        let cols = [k1.value, k2.value, bracket];
        let s = singular_values_of_columns(&cols);
        let bnorm = bracket.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        InvolutivityCheck {
            pivot,
            fields: [k1.value, k2.value],
            bracket,
            field_annihilation: annihilation(&form, &k1.value).max(annihilation(&form, &k2.value)),
            bracket_annihilation: {
                let c = form.contract(&bracket);
                let num = c.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                let fnorm = [k1.value, k2.value].iter().flatten().fold(bnorm, |m, v| m.max(v.abs()));
                num / (form.max_abs() * fnorm)
            },
            augmented_rank: rank_of_singular_values(&s),
            sigma_ratio: s[2] / s[0],
        }
    });
    Ok(KernelReport { form: which, rank, singular_values, basis, annihilation: worst, involutivity })
}

/// `R = ω0⁻¹ ∘ Ω`, i.e. `Ω(X, Y) = ω0(R X, Y)`; in matrix form `R = −W0·M`.
pub fn recursion_matrix<T: Scalar>(m: &Matrix4<T>) -> Matrix4<T> {
    [m[2].map(|x| -x), m[3].map(|x| -x), m[0], m[1]]
}

/// Spectral data of a recursion operator at one point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecursionOperator {
    pub form: FormKind,
    pub r: Matrix4<f64>,
    /// Sorted by modulus, smallest first.
    pub eigenvalues: [Complex<f64>; DIM],
    pub det: f64,
    /// `max |R_ij|`.
    pub scale: f64,
    /// `m02 + m13 = tr(R)/2`, the nonzero double root of `Pf(M − t·W0)`.
    pub tau: f64,
    /// `max |Ω(e_i, e_j) − ω0(R e_i, e_j)| / (1 + max|m|)`.
    pub defining_residual: f64,
    /// Largest modulus in the zero pair, over `scale`.
    pub zero_pair: f64,
    /// `|τ1 − τ2| / |τ1|` for the nonzero pair.
    pub pair_split: f64,
}

impl RecursionOperator {
    pub fn from_form(which: FormKind, form: &TwoFormMatrix<f64>) -> Self {
        let r = recursion_matrix(&form.m);
        let nm = to_nalgebra(&r);
        let mut eig: Vec<Complex<f64>> = nm.complex_eigenvalues().iter().copied().collect();
        eig.sort_by(|a, b| a.norm().total_cmp(&b.norm()));
        let scale = r.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
        let w0 = super::omega0::<f64>();
        let mut defining = 0.0f64;
        for i in 0..DIM {
            let rei: [f64; DIM] = std::array::from_fn(|a| r[a][i]);
            for j in 0..DIM {
                let ej: [f64; DIM] = std::array::from_fn(|b| if b == j { 1.0 } else { 0.0 });
                defining = defining.max((form.m[i][j] - w0.pair(&rei, &ej)).abs());
            }
        }
        let s = if scale > 0.0 { scale } else { 1.0 };
        Self {
            form: which,
            r,
            eigenvalues: [eig[0], eig[1], eig[2], eig[3]],
            det: nm.determinant(),
            scale,
            tau: form.m[0][2] + form.m[1][3],
            defining_residual: defining / (1.0 + form.max_abs()),
            zero_pair: eig[1].norm() / s,
            pair_split: (eig[3] - eig[2]).norm() / eig[3].norm().max(f64::MIN_POSITIVE),
        }
    }

    /// `|det| / scale⁴`.
    pub fn relative_det(&self) -> f64 {
        let s = if self.scale > 0.0 { self.scale } else { 1.0 };
        self.det.abs() / s.powi(4)
    }

    /// Relative distance of the nonzero pair from `τ`.
    pub fn tau_mismatch(&self) -> f64 {
        let mean = (self.eigenvalues[2] + self.eigenvalues[3]) * 0.5;
        (mean - Complex::new(self.tau, 0.0)).norm() / (1.0 + self.tau.abs())
    }

    /// Zero pair below `zero_tol·scale`, nonzero pair split below `split_tol`.
    pub fn has_pattern(&self, zero_tol: f64, split_tol: f64) -> bool {
        self.zero_pair < zero_tol && self.pair_split < split_tol
    }
}

pub fn recursion_operator<T: Scalar>(which: FormKind, p: &PhasePoint<T>, k: &ModelParams<T>) -> Result<RecursionOperator> {
    let form = super::build_form(which, p, k)?.to_f64();
    Ok(RecursionOperator::from_form(which, &form))
}

/// Max norm of `N_R(e_i, e_j)` over the six coordinate pairs, for `R` with derivatives `dr[a][b][l] = ∂_l R_ab`.
///
/// On coordinate fields `N(e_i, e_j) = [r_i, r_j] + R ∂_j r_i − R ∂_i r_j` with `r_i` the `i`-th column.
pub fn nijenhuis_from_jet(r: &Matrix4<f64>, dr: &[Matrix4<f64>; DIM]) -> f64 {
    let column = |i: usize| FieldJet::<f64> {
        value: std::array::from_fn(|a| r[a][i]),
        jac: std::array::from_fn(|a| dr[a][i]),
    };
    let mut worst = 0.0f64;
    for (i, j) in UPPER {
        let (ri, rj) = (column(i), column(j));
        let br = lie_bracket(&ri, &rj);
        for a in 0..DIM {
            let corr = (0..DIM).fold(0.0, |acc, b| acc + r[a][b] * (ri.jac[b][j] - rj.jac[b][i]));
            worst = worst.max((br[a] + corr).abs());
        }
    }
    worst
}

/// Nijenhuis torsion of `ω0⁻¹ ∘ Ω` at a point.
pub fn nijenhuis_torsion<T: Scalar>(which: FormKind, p: &PhasePoint<T>, k: &ModelParams<T>) -> Result<f64> {
    let jet = jet_to_f64(&build_form_jet(which, p, k)?);
    let r = recursion_matrix(&jet.m);
    let neg = |m: &Matrix4<f64>| m.map(|row| row.map(|x| -x));
    let dr = [neg(&jet.dm[2]), neg(&jet.dm[3]), jet.dm[0], jet.dm[1]];
    Ok(nijenhuis_from_jet(&r, &dr))
}
