//! Quaternionic curvature generators and the recovery of
//! `W = λ₁R_{Φ₁} + λ₂R_{Φ₂} + λ₃R_{Φ₃}` from a half-flat Weyl tensor.

use serde::Serialize;

use crate::curvature::{CurvTensor, WeylTensor};
use crate::duality::{classify, reverse_orientation, DualityClass};
use crate::error::{Error, Result};
use crate::lintensor::{hodge_star, Mat4, OrientedBasis, SkewEndo, Vec4};
use crate::osserman::adapted_basis;

const STRUCTURE_TOL: f64 = 1e-10;

/// `R_Φ(x,y)z = ⟨Φy,z⟩Φx − ⟨Φx,z⟩Φy − 2⟨Φx,y⟩Φz`; in components, with
/// `ω_{ij} = ⟨Φeᵢ, eⱼ⟩`, `R_{ijkl} = ω_{jk}ω_{il} − ω_{ik}ω_{jl} − 2ω_{ij}ω_{kl}`.
pub fn r_phi(phi: &SkewEndo) -> Result<CurvTensor> {
    let defect = phi.complex_structure_defect();
    if defect > STRUCTURE_TOL {
        return Err(Error::NotAComplexStructure(defect));
    }
    Ok(r_phi_raw(phi.matrix()))
}

fn r_phi_raw(phi: &Mat4) -> CurvTensor {
    let w = |i: usize, j: usize| phi[(j, i)];
    CurvTensor::from_fn(|i, j, k, l| w(j, k) * w(i, l) - w(i, k) * w(j, l) - 2.0 * w(i, j) * w(k, l))
}

/// Which sign convention to use for `Φ₂` on `e₂, e₄` in [`standard_triple`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub enum Phi2Table {
    /// `Φ₂: e₂ → −e₄, e₄ → e₂`; anticommutes with `Φ₁`.
    #[default]
    Corrected,
    /// `Φ₂: e₂ → e₄, e₄ → −e₂`; commutes with `Φ₁` on `e₁`. Kept only as a
    /// negative control for the verification battery.
    Uncorrected,
}

/// Largest violations of the unitary quaternion structure equations.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct StructureDefects {
    pub skew: f64,
    /// `max_{i,j} ‖ΦᵢΦⱼ + ΦⱼΦᵢ + 2δᵢⱼ id‖`
    pub anticommutation: f64,
    /// `‖Φ₃ − Φ₁Φ₂‖`
    pub product: f64,
    /// Distance of the Kähler forms from a common Hodge eigenspace.
    pub hodge_side: f64,
}

impl StructureDefects {
    pub fn max(&self) -> f64 {
        self.skew
            .max(self.anticommutation)
            .max(self.product)
            .max(self.hodge_side)
    }
}

fn max_abs(m: &Mat4) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

pub fn structure_defects(phi: &[Mat4; 3]) -> StructureDefects {
    let id = Mat4::identity();
    let skew = phi.iter().map(|p| max_abs(&(p + p.transpose()))).fold(0.0, f64::max);
    let mut anticommutation = 0.0_f64;
    for i in 0..3 {
        for j in 0..3 {
            let delta = if i == j { 2.0 } else { 0.0 };
            let m = phi[i] * phi[j] + phi[j] * phi[i] + id * delta;
            anticommutation = anticommutation.max(max_abs(&m));
        }
    }
    let product = max_abs(&(phi[2] - phi[0] * phi[1]));
    let forms: Vec<_> = phi
        .iter()
        .map(|p| SkewEndo::from_matrix_unchecked(*p).kahler_form())
        .collect();
    let side = |sign: f64| {
        forms
            .iter()
            .map(|f| (hodge_star(f) - *f * sign).norm())
            .fold(0.0, f64::max)
    };
    let hodge_side = side(1.0).min(side(-1.0));
    StructureDefects {
        skew,
        anticommutation,
        product,
        hodge_side,
    }
}

/// A unitary quaternion structure `Φ₁, Φ₂, Φ₃ = Φ₁Φ₂`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuaternionStructure {
    phi: [SkewEndo; 3],
}

impl QuaternionStructure {
    pub fn new(phi1: SkewEndo, phi2: SkewEndo, phi3: SkewEndo) -> Result<Self> {
        let mats = [*phi1.matrix(), *phi2.matrix(), *phi3.matrix()];
        let d = structure_defects(&mats);
        let problem = if d.skew > STRUCTURE_TOL {
            Some(format!("skew defect {:e}", d.skew))
        } else if d.anticommutation > STRUCTURE_TOL {
            Some(format!("anticommutation defect {:e}", d.anticommutation))
        } else if d.product > STRUCTURE_TOL {
            Some(format!("Phi3 != Phi1 Phi2 by {:e}", d.product))
        } else if d.hodge_side > STRUCTURE_TOL {
            Some(format!("Kähler forms split across Hodge eigenspaces ({:e})", d.hodge_side))
        } else {
            None
        };
        match problem {
            Some(msg) => Err(Error::NotAQuaternionStructure(msg)),
            None => Ok(QuaternionStructure {
                phi: [phi1, phi2, phi3],
            }),
        }
    }

    /// 0-based: `phi(0)` is `Φ₁`.
    pub fn phi(&self, i: usize) -> &SkewEndo {
        &self.phi[i]
    }

    pub fn matrices(&self) -> [Mat4; 3] {
        [*self.phi[0].matrix(), *self.phi[1].matrix(), *self.phi[2].matrix()]
    }

    /// `+1` if the Kähler forms are self-dual, `−1` if anti-self-dual.
    pub fn hodge_side(&self) -> i8 {
        let f = self.phi[0].kahler_form();
        if (hodge_star(&f) - f).norm() <= STRUCTURE_TOL {
            1
        } else {
            -1
        }
    }

    /// Conjugate every `Φᵢ` by the orthogonal matrix `o`: `Φᵢ ↦ o Φᵢ oᵀ`.
    pub fn conjugated(&self, o: &Mat4) -> Result<Self> {
        let c = |p: &SkewEndo| SkewEndo::new(o * p.matrix() * o.transpose());
        QuaternionStructure::new(c(&self.phi[0])?, c(&self.phi[1])?, c(&self.phi[2])?)
    }
}

/// The table-defined triple on `basis` without validation:
/// `Φ₁: e₁→e₂, e₂→−e₁, e₃→e₄, e₄→−e₃`, `Φ₂: e₁→e₃, e₃→−e₁` with `e₂, e₄`
/// per `table`, and `Φ₃ = Φ₁Φ₂`.
pub fn standard_triple(basis: &OrientedBasis, table: Phi2Table) -> [Mat4; 3] {
    let e = |i: usize| {
        let mut v = Vec4::zeros();
        v[i] = 1.0;
        v
    };
    let p1 = Mat4::from_columns(&[e(1), -e(0), e(3), -e(2)]);
    let p2 = match table {
        Phi2Table::Corrected => Mat4::from_columns(&[e(2), -e(3), -e(0), e(1)]),
        Phi2Table::Uncorrected => Mat4::from_columns(&[e(2), e(3), -e(0), -e(1)]),
    };
    let b = basis.matrix();
    let to_basis = |m: Mat4| b * m * b.transpose();
    [to_basis(p1), to_basis(p2), to_basis(p1 * p2)]
}

/// The standard unitary quaternion structure adapted to `basis`.
pub fn standard_structure(basis: &OrientedBasis) -> Result<QuaternionStructure> {
    let [p1, p2, p3] = standard_triple(basis, Phi2Table::Corrected);
    QuaternionStructure::new(SkewEndo::new(p1)?, SkewEndo::new(p2)?, SkewEndo::new(p3)?)
}

/// `Σ λᵢ R_{Φᵢ}` on raw matrices; used by the negative control.
pub fn synthesize_triple(phi: &[Mat4; 3], lambdas: [f64; 3]) -> CurvTensor {
    phi.iter()
        .zip(lambdas)
        .fold(CurvTensor::zero(), |acc, (p, l)| acc + r_phi_raw(p) * l)
}

/// `Σ λᵢ R_{Φᵢ}`.
pub fn synthesize(q: &QuaternionStructure, lambdas: [f64; 3]) -> CurvTensor {
    synthesize_triple(&q.matrices(), lambdas)
}

/// A recovered representation `W = Σ λᵢ R_{Φᵢ}`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuaternionDecomposition {
    pub structure: QuaternionStructure,
    /// Ascending, summing to zero.
    pub lambdas: [f64; 3],
    /// `‖W − Σ λᵢ R_{Φᵢ}‖`.
    pub residual: f64,
    /// Set when the input was anti-self-dual and recovery ran in the
    /// orientation-reversed frame.
    pub orientation_flipped: bool,
}

/// Recovers a quaternion structure and coefficients for a half-flat Weyl tensor.
///
/// For a self-dual `W`, diagonalise `𝒥_W(e₁)` on `e₁^⊥` to get an oriented
/// frame with eigenvalues `(a, b, c)`; the standard structure on that frame
/// with `λ = (a, b, c)/3` reproduces `W` (since `R_{Φ,1221} = 3`). Anti-self-dual
/// inputs are conjugated by `e₄ ↦ −e₄`, recovered, and conjugated back.
pub fn recover(w: &WeylTensor, tol: f64) -> Result<QuaternionDecomposition> {
    let report = classify(w.tensor(), tol)?;
    let flip = Mat4::from_diagonal(&Vec4::new(1.0, 1.0, 1.0, -1.0));
    let (target, flipped) = match report.class {
        DualityClass::Neither => return Err(Error::NotHalfFlat),
        DualityClass::AntiSelfDual => (WeylTensor::new(reverse_orientation(w.tensor()))?, true),
        DualityClass::SelfDual | DualityClass::ConformallyFlat => (w.clone(), false),
    };
    let e1 = Vec4::new(1.0, 0.0, 0.0, 0.0);
    let frame = adapted_basis(&target, &e1)?;
    let mut structure = standard_structure(&frame.basis)?;
    if flipped {
        structure = structure.conjugated(&flip)?;
    }
    let lambdas = frame.eigenvalues.map(|v| v / 3.0);
    let residual = (w.tensor() - &synthesize(&structure, lambdas)).norm();
    Ok(QuaternionDecomposition {
        structure,
        lambdas,
        residual,
        orientation_flipped: flipped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curvature::{r0, ricci, scalar, validate, weyl};
    use crate::duality::{lambda2, sd_blocks};
    use crate::lintensor::{random_orthonormal, sd_basis, TwoForm};
    use crate::osserman::jacobi_op;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn std_q() -> QuaternionStructure {
        standard_structure(&OrientedBasis::standard()).unwrap()
    }

    fn sorted(mut v: [f64; 3]) -> [f64; 3] {
        v.sort_by(f64::total_cmp);
        v
    }

    fn close3(a: [f64; 3], b: [f64; 3], tol: f64) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn r_phi_components() {
        let q = std_q();
        let r = r_phi(q.phi(0)).unwrap();
        assert_eq!(r.get(0, 1, 1, 0), 3.0);
        assert_eq!(r.get(0, 1, 2, 3), -2.0);
        assert!(validate(r.raw()).is_ok());
        assert_eq!(r_phi(&q.phi(0).neg()).unwrap(), r);
        assert_eq!(*ricci(&r).matrix(), Mat4::identity() * 3.0);
        assert_eq!(scalar(&r), 12.0);
    }

    #[test]
    fn r_phi_rejects_non_complex() {
        let m = SkewEndo::new(Mat4::zeros()).unwrap();
        assert!(matches!(r_phi(&m), Err(Error::NotAComplexStructure(_))));
    }

    #[test]
    fn weyl_of_r_phi() {
        let r = r_phi(std_q().phi(0)).unwrap();
        let w = weyl(&r);
        assert!(w.tensor().max_abs_diff(&(&r - &r0())) < 1e-14);
    }

    #[test]
    fn standard_structure_kahler_forms() {
        let q = std_q();
        let (plus, _) = sd_basis();
        for i in 0..3 {
            assert_eq!(q.phi(i).kahler_form(), plus[i]);
        }
        let e1 = Vec4::new(1.0, 0.0, 0.0, 0.0);
        let e4 = Vec4::new(0.0, 0.0, 0.0, 1.0);
        assert_eq!(q.phi(0).apply(&q.phi(1).apply(&e1)), e4);
        assert_eq!(q.phi(1).apply(&q.phi(0).apply(&e1)), -e4);
        assert_eq!(q.hodge_side(), 1);
    }

    #[test]
    fn reversed_basis_gives_anti_self_dual_forms() {
        let q = standard_structure(&OrientedBasis::standard().with_last_flipped()).unwrap();
        for i in 0..3 {
            let f: TwoForm = q.phi(i).kahler_form();
            assert_eq!(hodge_star(&f), -f);
        }
        assert_eq!(q.hodge_side(), -1);
    }

    #[test]
    fn uncorrected_table_fails_structure_equations() {
        let m = standard_triple(&OrientedBasis::standard(), Phi2Table::Uncorrected);
        let d = structure_defects(&m);
        assert!(d.anticommutation > 1.0);
        let e1 = Vec4::new(1.0, 0.0, 0.0, 0.0);
        assert_eq!(m[0] * m[1] * e1, m[1] * m[0] * e1);
        // Φ₁Φ₂ of commuting skew maps is not even skew
        assert!(matches!(SkewEndo::new(m[2]), Err(Error::NonSkew(_))));
        let q = QuaternionStructure::new(
            SkewEndo::new(m[0]).unwrap(),
            SkewEndo::new(m[1]).unwrap(),
            SkewEndo::new(m[0] * m[1] * 0.0).unwrap(),
        );
        assert!(matches!(q, Err(Error::NotAQuaternionStructure(_))));
    }

    #[test]
    fn random_frames_yield_valid_structures() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for i in 0..100 {
            let b = random_orthonormal(&mut rng, if i % 2 == 0 { 1 } else { -1 });
            let q = standard_structure(&b).unwrap();
            assert!(structure_defects(&q.matrices()).max() < 1e-12);
            assert_eq!(q.hodge_side(), b.orientation());
        }
    }

    #[test]
    fn synthesize_examples() {
        let q = std_q();
        assert_eq!(synthesize(&q, [0.0; 3]), CurvTensor::zero());

        let s = synthesize(&q, [1.0, 1.0, 1.0]);
        assert!((ricci(&s).matrix() - Mat4::identity() * 9.0).norm() < 1e-13);
        assert!((scalar(&s) - 36.0).abs() < 1e-12);

        let s = synthesize(&q, [1.0, -1.0, 0.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let x = random_orthonormal(&mut rng, 1).vector(0);
            let ev = jacobi_op(&s, &x).eigenvalues();
            assert!(close3([ev[0], ev[1], ev[3]], [-3.0, 0.0, 3.0], 1e-12));
            assert!(ev[2].abs() < 1e-12);
        }
        assert!(weyl(&s).tensor().max_abs_diff(&s) < 1e-13);
    }

    #[test]
    fn plus_block_eigenvalues_are_minus_six_lambda() {
        let q = std_q();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let l1 = rng.random_range(-3.0..3.0);
            let l2 = rng.random_range(-3.0..3.0);
            let l = [l1, l2, -l1 - l2];
            let b = sd_blocks(&lambda2(&synthesize(&q, l)));
            let ev = crate::lintensor::jacobi_eigen(&b.plus);
            let expected = sorted(l.map(|v| -6.0 * v));
            assert!(close3([ev.values[0], ev.values[1], ev.values[2]], expected, 1e-9));
        }
    }

    #[test]
    fn recover_examples() {
        let w = weyl(&r_phi(std_q().phi(0)).unwrap());
        let d = recover(&w, 1e-8).unwrap();
        assert!(close3(d.lambdas, [-1.0 / 3.0, -1.0 / 3.0, 2.0 / 3.0], 1e-12));
        assert!(d.residual < 1e-10);
        assert!(!d.orientation_flipped);

        let d = recover(&weyl(&CurvTensor::zero()), 1e-8).unwrap();
        assert_eq!(d.lambdas, [0.0; 3]);
        assert_eq!(d.residual, 0.0);

        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let q = standard_structure(&random_orthonormal(&mut rng, 1)).unwrap();
        let w = WeylTensor::new(synthesize(&q, [2.0, -5.0, 3.0])).unwrap();
        let d = recover(&w, 1e-8).unwrap();
        assert!(close3(d.lambdas, [-5.0, 2.0, 3.0], 1e-9));
        assert!(d.residual < 1e-8);
    }

    #[test]
    fn recover_anti_self_dual() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let q = standard_structure(&random_orthonormal(&mut rng, -1)).unwrap();
        let w = WeylTensor::new(synthesize(&q, [1.5, 0.5, -2.0])).unwrap();
        let d = recover(&w, 1e-8).unwrap();
        assert!(d.orientation_flipped);
        assert_eq!(d.structure.hodge_side(), -1);
        assert!(close3(d.lambdas, [-2.0, 0.5, 1.5], 1e-9));
        assert!(d.residual < 1e-8 * (1.0 + w.norm()));
    }

    #[test]
    fn recover_rejects_generic() {
        let w = weyl(&crate::curvature::random_act(7));
        assert!(matches!(recover(&w, 1e-8), Err(Error::NotHalfFlat)));
    }

    #[test]
    fn lambdas_match_jacobi_eigenvalues() {
        let mut rng = ChaCha8Rng::seed_from_u64(40);
        for _ in 0..50 {
            let q = standard_structure(&random_orthonormal(&mut rng, 1)).unwrap();
            let l1 = rng.random_range(-2.0..2.0);
            let l2 = rng.random_range(-2.0..2.0);
            let w = WeylTensor::new(synthesize(&q, [l1, l2, -l1 - l2])).unwrap();
            let d = recover(&w, 1e-8).unwrap();
            let ev = jacobi_op(w.tensor(), &Vec4::new(1.0, 0.0, 0.0, 0.0)).eigenvalues();
            // drop the kernel eigenvalue belonging to e₁ itself
            let mut rest: Vec<f64> = ev.to_vec();
            let k = rest
                .iter()
                .enumerate()
                .min_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
                .unwrap()
                .0;
            rest.remove(k);
            let mut want = [rest[0] / 3.0, rest[1] / 3.0, rest[2] / 3.0];
            want.sort_by(f64::total_cmp);
            assert!(close3(d.lambdas, want, 1e-9));
        }
    }
}
