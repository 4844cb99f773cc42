//! Dense 4- and 6-dimensional linear algebra: endomorphisms of ℝ⁴, oriented
//! orthonormal bases, a cyclic Jacobi eigensolver and the Hodge star on 2-forms.
//!
//! 2-forms are stored in the lexicographic basis
//! `e¹², e¹³, e¹⁴, e²³, e²⁴, e³⁴`; every 6×6 matrix in the crate uses that order.

use nalgebra::{Matrix3, Matrix4, Matrix6, SMatrix, SVector, Vector4, Vector6};
use rand::Rng;

use crate::error::{Error, Result};

pub type Vec4 = Vector4<f64>;
pub type Mat3 = Matrix3<f64>;
pub type Mat4 = Matrix4<f64>;
pub type Mat6 = Matrix6<f64>;

/// Index pairs `(i, j)`, `i < j`, of the canonical 2-form basis (0-based).
pub const PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

const SYMMETRY_TOL: f64 = 1e-12;
const ORTHONORMAL_TOL: f64 = 1e-10;

/// Position of `e^{ij}` in the canonical basis, with the sign picked up when
/// `i > j`. Returns `None` on the diagonal.
pub fn pair_index(i: usize, j: usize) -> Option<(usize, f64)> {
    if i == j {
        return None;
    }
    let (lo, hi, sign) = if i < j { (i, j, 1.0) } else { (j, i, -1.0) };
    let idx = PAIRS.iter().position(|&p| p == (lo, hi))?;
    Some((idx, sign))
}

fn max_abs(m: &Mat4) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

/// Symmetric endomorphism of ℝ⁴ (Ricci operators, Jacobi operators, Kulkarni–Nomizu inputs).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SymEndo(Mat4);

impl SymEndo {
    pub fn new(m: Mat4) -> Result<Self> {
        let defect = max_abs(&(m - m.transpose()));
        if defect > SYMMETRY_TOL * (1.0 + max_abs(&m)) {
            return Err(Error::NonSymmetric(defect));
        }
        Ok(SymEndo(m))
    }

    /// Symmetrises `m` by averaging with its transpose. Used for operators that
    /// are symmetric in exact arithmetic but assembled with rounding.
    pub fn symmetrized(m: Mat4) -> Self {
        SymEndo(0.5 * (m + m.transpose()))
    }

    pub fn zero() -> Self {
        SymEndo(Mat4::zeros())
    }

    pub fn identity() -> Self {
        SymEndo(Mat4::identity())
    }

    pub fn diagonal(d: [f64; 4]) -> Self {
        SymEndo(Mat4::from_diagonal(&Vec4::from(d)))
    }

    pub fn matrix(&self) -> &Mat4 {
        &self.0
    }

    pub fn into_matrix(self) -> Mat4 {
        self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    pub fn scaled(&self, s: f64) -> Self {
        SymEndo(self.0 * s)
    }

    pub fn apply(&self, v: &Vec4) -> Vec4 {
        self.0 * v
    }

    /// Eigenvalues ascending with a positively oriented orthonormal eigenbasis.
    pub fn eigen(&self) -> SymEigen<4> {
        jacobi_eigen(&self.0)
    }

    pub fn eigenvalues(&self) -> [f64; 4] {
        let e = self.eigen();
        [e.values[0], e.values[1], e.values[2], e.values[3]]
    }
}

/// Skew endomorphism of ℝ⁴; the complex structures Φᵢ live here.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SkewEndo(Mat4);

impl SkewEndo {
    pub fn new(m: Mat4) -> Result<Self> {
        let defect = max_abs(&(m + m.transpose()));
        if defect > SYMMETRY_TOL * (1.0 + max_abs(&m)) {
            return Err(Error::NonSkew(defect));
        }
        Ok(SkewEndo(m))
    }

    /// Builds the endomorphism sending `e_j` to `images[j]` (columns).
    pub fn from_images(images: [Vec4; 4]) -> Result<Self> {
        Self::new(Mat4::from_columns(&images))
    }

    pub fn matrix(&self) -> &Mat4 {
        &self.0
    }

    pub fn apply(&self, v: &Vec4) -> Vec4 {
        self.0 * v
    }

    pub fn neg(&self) -> Self {
        SkewEndo(-self.0)
    }

    /// `‖Φ² + id‖_max`, zero for a complex structure.
    pub fn complex_structure_defect(&self) -> f64 {
        max_abs(&(self.0 * self.0 + Mat4::identity()))
    }

    /// The Kähler 2-form `ω(x, y) = ⟨Φx, y⟩` in the canonical basis.
    pub fn kahler_form(&self) -> TwoForm {
        let mut c = [0.0; 6];
        for (idx, &(i, j)) in PAIRS.iter().enumerate() {
            // ⟨Φ e_i, e_j⟩ = Φ_{ji}
            c[idx] = self.0[(j, i)];
        }
        TwoForm::new(c)
    }

    pub(crate) fn from_matrix_unchecked(m: Mat4) -> Self {
        SkewEndo(m)
    }
}

/// Orthonormal basis of ℝ⁴ stored as matrix columns, with its orientation sign.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OrientedBasis {
    vectors: Mat4,
    orientation: i8,
}

impl OrientedBasis {
    pub fn new(vectors: Mat4) -> Result<Self> {
        let gram = vectors.transpose() * vectors;
        let defect = max_abs(&(gram - Mat4::identity()));
        if defect > ORTHONORMAL_TOL {
            return Err(Error::NotOrthonormal(defect));
        }
        let orientation = if vectors.determinant() > 0.0 { 1 } else { -1 };
        Ok(OrientedBasis { vectors, orientation })
    }

    pub fn from_vectors(v: [Vec4; 4]) -> Result<Self> {
        Self::new(Mat4::from_columns(&v))
    }

    pub fn standard() -> Self {
        OrientedBasis {
            vectors: Mat4::identity(),
            orientation: 1,
        }
    }

    /// Columns are the basis vectors.
    pub fn matrix(&self) -> &Mat4 {
        &self.vectors
    }

    pub fn vector(&self, i: usize) -> Vec4 {
        self.vectors.column(i).into_owned()
    }

    pub fn orientation(&self) -> i8 {
        self.orientation
    }

    /// Same basis with the last vector negated; reverses orientation.
    pub fn with_last_flipped(&self) -> Self {
        let mut v = self.vectors;
        v.column_mut(3).neg_mut();
        OrientedBasis {
            vectors: v,
            orientation: -self.orientation,
        }
    }
}

/// Output of the Jacobi eigensolver.
#[derive(Clone, Copy, Debug)]
pub struct SymEigen<const N: usize> {
    /// Ascending.
    pub values: SVector<f64, N>,
    /// Column `i` is the unit eigenvector for `values[i]`; determinant +1.
    pub vectors: SMatrix<f64, N, N>,
}

/// Cyclic Jacobi rotations on a symmetric matrix, run to machine precision.
///
/// Only the upper triangle is read. Eigenvectors of a degenerate cluster form an
/// arbitrary orthonormal basis of the cluster's eigenspace.
pub fn jacobi_eigen<const N: usize>(m: &SMatrix<f64, N, N>) -> SymEigen<N> {
    let mut a = *m;
    for i in 0..N {
        for j in 0..i {
            a[(i, j)] = a[(j, i)];
        }
    }
    let mut v = SMatrix::<f64, N, N>::identity();
    let scale = a.norm();

    for _sweep in 0..64 {
        let off: f64 = (0..N)
            .flat_map(|p| ((p + 1)..N).map(move |q| (p, q)))
            .map(|(p, q)| a[(p, q)] * a[(p, q)])
            .sum();
        if off == 0.0 || off.sqrt() <= 1e-3 * f64::EPSILON * scale {
            break;
        }
        for p in 0..N {
            for q in (p + 1)..N {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..N {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..N {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                for k in 0..N {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: [usize; N] = std::array::from_fn(|i| i);
    order.sort_by(|&i, &j| a[(i, i)].total_cmp(&a[(j, j)]));
    let values = SVector::<f64, N>::from_fn(|i, _| a[(order[i], order[i])]);
    let mut vectors = SMatrix::<f64, N, N>::from_fn(|r, c| v[(r, order[c])]);
    if N > 0 && determinant(&vectors) < 0.0 {
        vectors.column_mut(N - 1).neg_mut();
    }
    SymEigen { values, vectors }
}

/// Determinant by partial-pivot elimination, for any fixed size.
fn determinant<const N: usize>(m: &SMatrix<f64, N, N>) -> f64 {
    let mut a = *m;
    let mut det = 1.0;
    for col in 0..N {
        let pivot = (col..N)
            .max_by(|&x, &y| a[(x, col)].abs().total_cmp(&a[(y, col)].abs()))
            .unwrap_or(col);
        if a[(pivot, col)] == 0.0 {
            return 0.0;
        }
        if pivot != col {
            a.swap_rows(pivot, col);
            det = -det;
        }
        det *= a[(col, col)];
        for r in (col + 1)..N {
            let f = a[(r, col)] / a[(col, col)];
            for c in col..N {
                a[(r, c)] -= f * a[(col, c)];
            }
        }
    }
    det
}

/// Eigen-decomposition of a symmetric endomorphism of ℝ⁴.
pub fn sym_eigen(s: &SymEndo) -> SymEigen<4> {
    s.eigen()
}

/// Validating variant taking a raw matrix.
pub fn sym_eigen_checked(m: &Mat4) -> Result<SymEigen<4>> {
    SymEndo::new(*m).map(|s| s.eigen())
}

/// Completes `x` to a positively oriented orthonormal basis with first vector `x/‖x‖`.
pub fn extend_to_oriented_onb(x: &Vec4) -> Result<OrientedBasis> {
    let n = x.norm();
    if !(n > 1e-12) {
        return Err(Error::ZeroVector);
    }
    let first = x / n;
    let mut axes: [usize; 4] = [0, 1, 2, 3];
    axes.sort_by(|&a, &b| first[a].abs().total_cmp(&first[b].abs()));
    let mut basis: Vec<Vec4> = vec![first];
    for &axis in &axes {
        if basis.len() == 4 {
            break;
        }
        let mut v = Vec4::zeros();
        v[axis] = 1.0;
        // two passes of modified Gram–Schmidt
        for _ in 0..2 {
            for b in &basis {
                v -= b * b.dot(&v);
            }
        }
        let vn = v.norm();
        if vn > 1e-6 {
            basis.push(v / vn);
        }
    }
    let mut m = Mat4::from_columns(&basis);
    if m.determinant() < 0.0 {
        m.column_mut(3).neg_mut();
    }
    OrientedBasis::new(m)
}

/// A 2-form on ℝ⁴ in the canonical basis `(e¹², e¹³, e¹⁴, e²³, e²⁴, e³⁴)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoForm(pub Vector6<f64>);

impl TwoForm {
    pub fn new(c: [f64; 6]) -> Self {
        TwoForm(Vector6::from(c))
    }

    /// The basis element `e^{ij}` for 0-based `i ≠ j` (antisymmetric in the indices).
    pub fn basis(i: usize, j: usize) -> Self {
        let mut c = [0.0; 6];
        if let Some((idx, sign)) = pair_index(i, j) {
            c[idx] = sign;
        }
        TwoForm::new(c)
    }

    pub fn coeffs(&self) -> &Vector6<f64> {
        &self.0
    }

    pub fn dot(&self, other: &TwoForm) -> f64 {
        self.0.dot(&other.0)
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }
}

impl std::ops::Add for TwoForm {
    type Output = TwoForm;
    fn add(self, rhs: TwoForm) -> TwoForm {
        TwoForm(self.0 + rhs.0)
    }
}

impl std::ops::Sub for TwoForm {
    type Output = TwoForm;
    fn sub(self, rhs: TwoForm) -> TwoForm {
        TwoForm(self.0 - rhs.0)
    }
}

impl std::ops::Neg for TwoForm {
    type Output = TwoForm;
    fn neg(self) -> TwoForm {
        TwoForm(-self.0)
    }
}

impl std::ops::Mul<f64> for TwoForm {
    type Output = TwoForm;
    fn mul(self, s: f64) -> TwoForm {
        TwoForm(self.0 * s)
    }
}

/// Hodge star for the standard orientation `e¹∧e²∧e³∧e⁴`.
pub fn hodge_star(w: &TwoForm) -> TwoForm {
    let c = &w.0;
    TwoForm::new([c[5], -c[4], c[3], c[2], -c[1], c[0]])
}

/// Matrix of the Hodge star in the canonical basis.
pub fn hodge_matrix() -> Mat6 {
    Mat6::from_columns(&std::array::from_fn::<_, 6, _>(|k| {
        let mut e = [0.0; 6];
        e[k] = 1.0;
        hodge_star(&TwoForm::new(e)).0
    }))
}

/// The (self-dual, anti-self-dual) bases
/// `f₁± = e¹² ± e³⁴`, `f₂± = e¹³ ∓ e²⁴`, `f₃± = e¹⁴ ± e²³`.
pub fn sd_basis() -> ([TwoForm; 3], [TwoForm; 3]) {
    let e = TwoForm::basis;
    let plus = [e(0, 1) + e(2, 3), e(0, 2) - e(1, 3), e(0, 3) + e(1, 2)];
    let minus = [e(0, 1) - e(2, 3), e(0, 2) + e(1, 3), e(0, 3) - e(1, 2)];
    (plus, minus)
}

/// Orthogonal change of basis whose columns are `f₁⁺, f₂⁺, f₃⁺, f₁⁻, f₂⁻, f₃⁻`,
/// each normalised by `1/√2`.
pub fn sd_change_of_basis() -> Mat6 {
    let (plus, minus) = sd_basis();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let cols: Vec<Vector6<f64>> = plus.iter().chain(minus.iter()).map(|f| f.0 * s).collect();
    Mat6::from_columns(&cols)
}

/// Random orthonormal basis with the requested orientation (±1).
///
/// Gram–Schmidt on a matrix with uniform entries in `[-1, 1)`; redrawn if the
/// sample is nearly singular.
pub fn random_orthonormal<R: Rng + ?Sized>(rng: &mut R, orientation: i8) -> OrientedBasis {
    loop {
        let cols: [Vec4; 4] = std::array::from_fn(|_| {
            Vec4::from_fn(|_, _| rng.random_range(-1.0..1.0))
        });
        let mut basis: Vec<Vec4> = Vec::with_capacity(4);
        for c in cols {
            let mut v = c;
            for _ in 0..2 {
                for b in &basis {
                    v -= b * b.dot(&v);
                }
            }
            let n = v.norm();
            if n < 1e-3 {
                break;
            }
            basis.push(v / n);
        }
        if basis.len() < 4 {
            continue;
        }
        let mut m = Mat4::from_columns(&basis);
        let want = if orientation < 0 { -1.0 } else { 1.0 };
        if m.determinant() * want < 0.0 {
            m.column_mut(3).neg_mut();
        }
        return OrientedBasis::new(m).expect("Gram–Schmidt output is orthonormal");
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn residual(m: &Mat4, e: &SymEigen<4>) -> f64 {
        (0..4)
            .map(|i| {
                let v = e.vectors.column(i);
                (m * v - v * e.values[i]).norm()
            })
            .fold(0.0, f64::max)
    }

    fn random_sym(rng: &mut ChaCha8Rng) -> Mat4 {
        let a = Mat4::from_fn(|_, _| rng.random_range(-5.0..5.0));
        a + a.transpose()
    }

    #[test]
    fn identity_eigenvalues() {
        let e = sym_eigen(&SymEndo::identity());
        assert_eq!(e.values, Vec4::new(1.0, 1.0, 1.0, 1.0));
        let gram = e.vectors.transpose() * e.vectors;
        assert!((gram - Mat4::identity()).norm() < 1e-14);
    }

    #[test]
    fn diagonal_sorted_ascending() {
        let e = sym_eigen(&SymEndo::diagonal([3.0, -3.0, 0.0, 0.0]));
        assert_eq!(e.values, Vec4::new(-3.0, 0.0, 0.0, 3.0));
    }

    #[test]
    fn seeded_random_residuals() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let m = random_sym(&mut rng);
            let e = sym_eigen(&SymEndo::new(m).unwrap());
            let norm = m.norm();
            assert!(residual(&m, &e) <= 1e-10 * (1.0 + norm));
            let recon = e.vectors * Mat4::from_diagonal(&e.values) * e.vectors.transpose();
            assert!((m - recon).norm() <= 1e-9 * (1.0 + norm));
            assert!(e.values.as_slice().windows(2).all(|w| w[0] <= w[1]));
            assert!((e.vectors.determinant() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn eigen_rejects_asymmetric() {
        let mut m = Mat4::identity();
        m[(0, 1)] = 1.0;
        assert!(matches!(sym_eigen_checked(&m), Err(Error::NonSymmetric(_))));
    }

    #[test]
    fn jacobi_six_by_six() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = Mat6::from_fn(|_, _| rng.random_range(-1.0..1.0));
        let m = a + a.transpose();
        let e = jacobi_eigen(&m);
        let recon = e.vectors * Mat6::from_diagonal(&e.values) * e.vectors.transpose();
        assert!((m - recon).norm() < 1e-12);
    }

    #[test]
    fn extend_axis_vectors() {
        let b = extend_to_oriented_onb(&Vec4::new(1.0, 0.0, 0.0, 0.0)).unwrap();
        assert_eq!(b.vector(0), Vec4::new(1.0, 0.0, 0.0, 0.0));
        assert_eq!(b.orientation(), 1);

        let b = extend_to_oriented_onb(&Vec4::new(0.0, 0.0, 0.0, 2.0)).unwrap();
        assert_eq!(b.vector(0), Vec4::new(0.0, 0.0, 0.0, 1.0));
        let gram = b.matrix().transpose() * b.matrix();
        assert!((gram - Mat4::identity()).norm() < 1e-12);
        assert!((b.matrix().determinant() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn extend_diagonal_vector() {
        let x = Vec4::new(0.5, 0.5, 0.5, 0.5);
        let b = extend_to_oriented_onb(&x).unwrap();
        assert!((b.vector(0) - x).norm() < 1e-15);
        let gram = b.matrix().transpose() * b.matrix();
        assert!((gram - Mat4::identity()).norm() < 1e-10);
        assert!((b.matrix().determinant() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn extend_rejects_zero() {
        assert!(matches!(
            extend_to_oriented_onb(&Vec4::zeros()),
            Err(Error::ZeroVector)
        ));
    }

    #[test]
    fn hodge_on_basis() {
        let e = TwoForm::basis;
        assert_eq!(hodge_star(&e(0, 1)), e(2, 3));
        assert_eq!(hodge_star(&e(0, 2)), -e(1, 3));
        let (plus, minus) = sd_basis();
        assert_eq!(hodge_star(&plus[0]), plus[0]);
        assert_eq!(hodge_star(&plus[1]), plus[1]);
        assert_eq!(hodge_star(&minus[1]), -minus[1]);
        assert_eq!(plus[0].dot(&minus[1]), 0.0);
    }

    #[test]
    fn sd_basis_orthogonal() {
        let (plus, minus) = sd_basis();
        let all: Vec<TwoForm> = plus.iter().chain(minus.iter()).copied().collect();
        for (i, a) in all.iter().enumerate() {
            for (j, b) in all.iter().enumerate() {
                let expected = if i == j { 2.0 } else { 0.0 };
                assert_eq!(a.dot(b), expected);
            }
        }
        for f in &plus {
            assert_eq!(hodge_star(f), *f);
        }
        for f in &minus {
            assert_eq!(hodge_star(f), -*f);
        }
        let p = sd_change_of_basis();
        assert!((p.transpose() * p - Mat6::identity()).norm() < 1e-15);
    }

    #[test]
    fn random_orthonormal_orientation() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for sign in [1i8, -1] {
            let b = random_orthonormal(&mut rng, sign);
            assert_eq!(b.orientation(), sign);
        }
    }

    proptest::proptest! {
        #[test]
        fn hodge_is_involution(c in proptest::array::uniform6(-1e3f64..1e3)) {
            let w = TwoForm::new(c);
            proptest::prop_assert_eq!(hodge_star(&hodge_star(&w)), w);
        }

        #[test]
        fn extend_always_positive(c in proptest::array::uniform4(-10.0f64..10.0)) {
            let x = Vec4::from(c);
            proptest::prop_assume!(x.norm() > 1e-6);
            let b = extend_to_oriented_onb(&x).unwrap();
            proptest::prop_assert!((b.matrix().determinant() - 1.0).abs() < 1e-10);
            proptest::prop_assert!((b.vector(0) - x / x.norm()).norm() < 1e-12);
        }
    }
}
