//! The Weyl operator on 2-forms and its split along `Λ² = Λ²₊ ⊕ Λ²₋`.

use serde::Serialize;

use crate::curvature::{weyl, CurvTensor};
use crate::error::{Error, Result};
use crate::lintensor::{jacobi_eigen, sd_change_of_basis, Mat3, Mat4, Mat6, TwoForm, PAIRS};

/// Default relative threshold for [`classify`].
pub const DEFAULT_TOL: f64 = 1e-8;

/// Symmetric operator on Λ² in the canonical basis `e¹², e¹³, e¹⁴, e²³, e²⁴, e³⁴`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Lambda2Operator(Mat6);

impl Lambda2Operator {
    pub fn matrix(&self) -> &Mat6 {
        &self.0
    }

    pub fn apply(&self, w: &TwoForm) -> TwoForm {
        TwoForm(self.0 * w.coeffs())
    }
}

/// `𝒲(e^{pq}) = ½ Σ_{i,j} W_{pqij} e^{ij} = Σ_{i<j} W_{pqij} e^{ij}`:
/// the column for `e^{pq}` holds `W_{pqij}` in row `e^{ij}`.
pub fn lambda2(w: &CurvTensor) -> Lambda2Operator {
    let m = Mat6::from_fn(|row, col| {
        let (i, j) = PAIRS[row];
        let (p, q) = PAIRS[col];
        w.get(p, q, i, j)
    });
    Lambda2Operator(m)
}

/// Blocks of a Λ² operator in the orthonormal basis `f±/√2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SdBlocks {
    pub plus: Mat3,
    pub minus: Mat3,
    /// Rows in Λ²₊, columns in Λ²₋.
    pub cross: Mat3,
}

pub fn sd_blocks(op: &Lambda2Operator) -> SdBlocks {
    let p = sd_change_of_basis();
    let b = p.transpose() * op.matrix() * p;
    SdBlocks {
        plus: b.fixed_view::<3, 3>(0, 0).into_owned(),
        minus: b.fixed_view::<3, 3>(3, 3).into_owned(),
        cross: b.fixed_view::<3, 3>(0, 3).into_owned(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum DualityClass {
    ConformallyFlat,
    SelfDual,
    AntiSelfDual,
    Neither,
}

impl DualityClass {
    /// Self-dual, anti-self-dual or conformally flat.
    pub fn is_half_flat(self) -> bool {
        !matches!(self, DualityClass::Neither)
    }
}

impl std::fmt::Display for DualityClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{self:?}")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DualityReport {
    pub class: DualityClass,
    pub norm_plus: f64,
    pub norm_minus: f64,
    pub norm_cross: f64,
    pub plus_eigenvalues: [f64; 3],
    pub minus_eigenvalues: [f64; 3],
}

fn sorted_eigenvalues(m: &Mat3) -> [f64; 3] {
    let e = jacobi_eigen(m);
    [e.values[0], e.values[1], e.values[2]]
}

/// Classifies the Weyl part of `r`. With `N = ‖W⁺‖ + ‖W⁻‖`, branches are
/// tested in order: conformally flat if `N ≤ tol·(1+‖R‖)`; self-dual if
/// `‖W⁻‖ ≤ tol·N < ‖W⁺‖`; anti-self-dual symmetrically; otherwise neither.
pub fn classify(r: &CurvTensor, tol: f64) -> Result<DualityReport> {
    if !(tol > 0.0 && tol < 0.5) {
        return Err(Error::BadParameters(format!("tolerance must lie in (0, 0.5), got {tol}")));
    }
    let w = weyl(r);
    let blocks = sd_blocks(&lambda2(w.tensor()));
    let norm_plus = blocks.plus.norm();
    let norm_minus = blocks.minus.norm();
    let norm_cross = blocks.cross.norm();
    let n = norm_plus + norm_minus;
    let class = if n <= tol * (1.0 + r.norm()) {
        DualityClass::ConformallyFlat
    } else if norm_minus <= tol * n && tol * n < norm_plus {
        DualityClass::SelfDual
    } else if norm_plus <= tol * n && tol * n < norm_minus {
        DualityClass::AntiSelfDual
    } else {
        DualityClass::Neither
    };
    Ok(DualityReport {
        class,
        norm_plus,
        norm_minus,
        norm_cross,
        plus_eigenvalues: sorted_eigenvalues(&blocks.plus),
        minus_eigenvalues: sorted_eigenvalues(&blocks.minus),
    })
}

/// Components of `r` in the orientation-reversed frame `(e₁, e₂, e₃, −e₄)`.
pub fn reverse_orientation(r: &CurvTensor) -> CurvTensor {
    r.in_basis(&Mat4::from_diagonal(&[1.0, 1.0, 1.0, -1.0].into()))
}
