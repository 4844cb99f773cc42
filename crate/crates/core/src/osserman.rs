//! Jacobi operators `𝒥(x): y ↦ 𝓡(y, x)x`, their conformal (Weyl) variants, and
//! two independent deciders for the (conformally) Osserman property.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::curvature::{weyl, CurvTensor, WeylTensor};
use crate::error::{Error, Result};
use crate::lintensor::{extend_to_oriented_onb, jacobi_eigen, Mat3, Mat4, OrientedBasis, SymEndo, Vec4};

/// Default relative tolerance of both deciders.
pub const DEFAULT_TOL: f64 = 1e-8;
/// Default number of low-discrepancy directions for the sampled decider.
pub const DEFAULT_SAMPLES: usize = 200;

/// `⟨𝒥(x)y, z⟩ = R(y, x, x, z)`.
pub fn jacobi_op(r: &CurvTensor, x: &Vec4) -> SymEndo {
    let m = Mat4::from_fn(|a, b| {
        let mut s = 0.0;
        for k in 0..4 {
            for l in 0..4 {
                s += r.get(b, k, l, a) * x[k] * x[l];
            }
        }
        s
    });
    SymEndo::symmetrized(m)
}

/// Jacobi operator of the Weyl part of `r`.
pub fn conf_jacobi_op(r: &CurvTensor, x: &Vec4) -> SymEndo {
    jacobi_op(weyl(r).tensor(), x)
}

/// Sorted spectrum of a Jacobi operator at a direction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct JacobiSpectrum {
    pub eigenvalues: [f64; 4],
    pub direction: [f64; 4],
}

/// Spectrum of `𝒥(x)` at the unit vector along `x`.
pub fn jacobi_spectrum(r: &CurvTensor, x: &Vec4) -> Result<JacobiSpectrum> {
    let n = x.norm();
    if !(n > 1e-12) {
        return Err(Error::ZeroVector);
    }
    let u = x / n;
    Ok(JacobiSpectrum {
        eigenvalues: jacobi_op(r, &u).eigenvalues(),
        direction: [u[0], u[1], u[2], u[3]],
    })
}

/// Result of [`osserman_sampled`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SampledDecision {
    pub osserman: bool,
    /// Sorted spectrum at `e₁`.
    pub reference: [f64; 4],
    /// Largest ∞-distance between a sampled sorted spectrum and the reference.
    pub worst_deviation: f64,
    pub worst_direction: [f64; 4],
    pub threshold: f64,
    pub directions: usize,
}

/// Deterministic direction set on S³: the 4 axes, the 8 diagonal directions
/// `(±1, ±1, ±1, ±1)/2` up to sign, then `n` points of an additive-recurrence
/// sequence pushed onto S³ through Hopf coordinates.
pub fn sample_directions(n: usize) -> Vec<Vec4> {
    let mut dirs = Vec::with_capacity(n + 12);
    for i in 0..4 {
        let mut v = Vec4::zeros();
        v[i] = 1.0;
        dirs.push(v);
    }
    for mask in 0..8u32 {
        let s = |bit: u32| if mask & (1 << bit) != 0 { -0.5 } else { 0.5 };
        dirs.push(Vec4::new(0.5, s(0), s(1), s(2)));
    }
    // generalised golden ratio for three dimensions: root of t⁴ = t + 1
    let mut phi = 1.5_f64;
    for _ in 0..32 {
        phi = (1.0 + phi).powf(0.25);
    }
    let alpha = [1.0 / phi, 1.0 / (phi * phi), 1.0 / (phi * phi * phi)];
    let tau = std::f64::consts::TAU;
    for i in 0..n {
        let t = i as f64 + 0.5;
        let u: Vec<f64> = alpha.iter().map(|a| (0.5 + a * t).fract()).collect();
        let (r1, r2) = (u[0].sqrt(), (1.0 - u[0]).sqrt());
        let (t1, t2) = (tau * u[1], tau * u[2]);
        dirs.push(Vec4::new(r2 * t1.sin(), r2 * t1.cos(), r1 * t2.sin(), r1 * t2.cos()));
    }
    dirs
}

fn inf_distance(a: &[f64; 4], b: &[f64; 4]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| f64::max(m, (x - y).abs()))
}

/// Samples sorted Jacobi spectra (of `R`, or of its Weyl part when
/// `use_weyl`) and reports whether they agree with the spectrum at `e₁`
/// within `tol·(1 + ‖R‖)`.
pub fn osserman_sampled(r: &CurvTensor, use_weyl: bool, n: usize, tol: f64) -> Result<SampledDecision> {
    if n < 8 {
        return Err(Error::BadParameters(format!("need at least 8 directions, got {n}")));
    }
    if !(tol > 0.0) {
        return Err(Error::BadParameters(format!("tolerance must be positive, got {tol}")));
    }
    let w;
    let target = if use_weyl {
        w = weyl(r);
        w.tensor()
    } else {
        r
    };
    let threshold = tol * (1.0 + r.norm());
    let dirs = sample_directions(n);
    let reference = jacobi_op(target, &dirs[0]).eigenvalues();
    let mut worst = 0.0_f64;
    let mut worst_dir = dirs[0];
    for d in &dirs {
        let dev = inf_distance(&jacobi_op(target, d).eigenvalues(), &reference);
        if dev > worst {
            worst = dev;
            worst_dir = *d;
        }
    }
    Ok(SampledDecision {
        osserman: worst <= threshold,
        reference,
        worst_deviation: worst,
        worst_direction: [worst_dir[0], worst_dir[1], worst_dir[2], worst_dir[3]],
        threshold,
        directions: dirs.len(),
    })
}

/// Homogeneous polynomials in four variables with exponent-vector keys.
#[derive(Clone, Debug, Default, PartialEq)]
pub(crate) struct Poly(BTreeMap<[u8; 4], f64>);

impl Poly {
    fn constant(c: f64) -> Self {
        let mut m = BTreeMap::new();
        m.insert([0; 4], c);
        Poly(m)
    }

    fn add_term(&mut self, e: [u8; 4], c: f64) {
        *self.0.entry(e).or_insert(0.0) += c;
    }

    fn add(&self, o: &Poly) -> Poly {
        let mut out = self.clone();
        for (e, c) in &o.0 {
            out.add_term(*e, *c);
        }
        out
    }

    fn sub(&self, o: &Poly) -> Poly {
        self.add(&o.scale(-1.0))
    }

    fn scale(&self, s: f64) -> Poly {
        Poly(self.0.iter().map(|(e, c)| (*e, c * s)).collect())
    }

    fn mul(&self, o: &Poly) -> Poly {
        let mut out = Poly::default();
        for (ea, ca) in &self.0 {
            for (eb, cb) in &o.0 {
                let e = [ea[0] + eb[0], ea[1] + eb[1], ea[2] + eb[2], ea[3] + eb[3]];
                out.add_term(e, ca * cb);
            }
        }
        out
    }

    pub(crate) fn eval(&self, x: &Vec4) -> f64 {
        self.0
            .iter()
            .map(|(e, c)| c * (0..4).map(|i| x[i].powi(e[i] as i32)).product::<f64>())
            .sum()
    }

    fn terms(&self) -> impl Iterator<Item = (&[u8; 4], &f64)> {
        self.0.iter()
    }
}

/// `(x·x)^k`.
fn norm_power(k: usize) -> Poly {
    let mut sq = Poly::default();
    for i in 0..4 {
        let mut e = [0; 4];
        e[i] = 2;
        sq.add_term(e, 1.0);
    }
    (0..k).fold(Poly::constant(1.0), |acc, _| acc.mul(&sq))
}

/// Entries of `𝒥(x)` as quadratic forms in `x`.
fn jacobi_poly(r: &CurvTensor) -> [[Poly; 4]; 4] {
    std::array::from_fn(|a| {
        std::array::from_fn(|b| {
            let mut p = Poly::default();
            for k in 0..4 {
                for l in 0..4 {
                    let mut e = [0u8; 4];
                    e[k] += 1;
                    e[l] += 1;
                    // symmetrise the coefficient matrix so a ≠ b entries agree exactly
                    let c = 0.5 * (r.get(b, k, l, a) + r.get(a, k, l, b));
                    if c != 0.0 {
                        p.add_term(e, c);
                    }
                }
            }
            p
        })
    })
}

/// Determinant of the submatrix on rows `rs` and columns `cs`, by Laplace expansion.
fn general_det(m: &[[Poly; 4]; 4], rs: &[usize], cs: &[usize]) -> Poly {
    if rs.len() == 1 {
        return m[rs[0]][cs[0]].clone();
    }
    let mut out = Poly::default();
    for (c, &col) in cs.iter().enumerate() {
        let sub_c: Vec<usize> = cs.iter().copied().filter(|&x| x != col).collect();
        let term = m[rs[0]][col].mul(&general_det(m, &rs[1..], &sub_c));
        out = if c % 2 == 0 { out.add(&term) } else { out.sub(&term) };
    }
    out
}

/// Elementary symmetric functions `σ₁..σ₄` of the eigenvalues of `𝒥(x)` as
/// homogeneous polynomials of degree 2, 4, 6, 8 in `x` (sums of principal minors).
pub(crate) fn char_coefficients(r: &CurvTensor) -> [Poly; 4] {
    let j = jacobi_poly(r);
    std::array::from_fn(|k| {
        let size = k + 1;
        let mut total = Poly::default();
        for mask in 0u8..16 {
            if mask.count_ones() as usize != size {
                continue;
            }
            let rows: Vec<usize> = (0..4).filter(|i| mask & (1 << i) != 0).collect();
            total = total.add(&general_det(&j, &rows, &rows));
        }
        total
    })
}

/// A coefficient of `σ_k(𝒥(x)) − σ_k(𝒥(e₁))·|x|^{2k}` that failed the test.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Certificate {
    /// `k` in `σ_k`, 1-based.
    pub order: usize,
    /// Exponents of `x₁..x₄` in the offending monomial.
    pub monomial: [u8; 4],
    pub coefficient: f64,
    pub threshold: f64,
}

/// Result of [`osserman_exact`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExactDecision {
    pub osserman: bool,
    /// `σ₁..σ₄` of `𝒥(e₁)`.
    pub reference_coefficients: [f64; 4],
    /// Largest coefficient defect divided by its threshold.
    pub worst_ratio: f64,
    pub certificate: Option<Certificate>,
}

/// Exact decider: `R` is Osserman iff every characteristic coefficient
/// `σ_k(𝒥(x))` equals `σ_k(𝒥(e₁))·|x|^{2k}` as a polynomial. Coefficients are
/// obtained by expanding the principal minors of `𝒥(x)` symbolically; a
/// coefficient counts as zero when `≤ tol·(1+‖R‖)^k`.
pub fn osserman_exact(r: &CurvTensor, use_weyl: bool, tol: f64) -> Result<ExactDecision> {
    if !(tol > 0.0) {
        return Err(Error::BadParameters(format!("tolerance must be positive, got {tol}")));
    }
    let w;
    let target = if use_weyl {
        w = weyl(r);
        w.tensor()
    } else {
        r
    };
    let scale = 1.0 + r.norm();
    let sigma = char_coefficients(target);
    let e1 = Vec4::new(1.0, 0.0, 0.0, 0.0);
    let reference: [f64; 4] = std::array::from_fn(|k| sigma[k].eval(&e1));
    let mut worst_ratio = 0.0_f64;
    let mut certificate = None;
    for (k, s) in sigma.iter().enumerate() {
        let order = k + 1;
        let threshold = tol * scale.powi(order as i32);
        let diff = s.sub(&norm_power(order).scale(reference[k]));
        for (e, c) in diff.terms() {
            let ratio = c.abs() / threshold;
            if ratio > worst_ratio {
                worst_ratio = ratio;
                if ratio > 1.0 {
                    certificate = Some(Certificate {
                        order,
                        monomial: *e,
                        coefficient: *c,
                        threshold,
                    });
                }
            }
        }
    }
    Ok(ExactDecision {
        osserman: certificate.is_none(),
        reference_coefficients: reference,
        worst_ratio,
        certificate,
    })
}

/// Oriented orthonormal frame `e₁ = x, e₂, e₃, e₄` diagonalising `𝒥_W(x)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdaptedFrame {
    pub basis: OrientedBasis,
    /// Eigenvalues `(a, b, c)` on `e₂, e₃, e₄`, ascending.
    pub eigenvalues: [f64; 3],
    /// Whether `e₄` was negated to make the frame positively oriented.
    pub flipped: bool,
}

/// Diagonalises `𝒥_W(x)` on `x^⊥` and returns the positively oriented
/// eigenframe with `e₁ = x/|x|`.
pub fn adapted_basis(w: &WeylTensor, x: &Vec4) -> Result<AdaptedFrame> {
    let start = extend_to_oriented_onb(x)?;
    let j = jacobi_op(w.tensor(), &start.vector(0));
    let b = start.matrix();
    // restriction to span(e₂, e₃, e₄)
    let restricted = Mat3::from_fn(|p, q| {
        let u = b.column(p + 1);
        let v = b.column(q + 1);
        u.dot(&(j.matrix() * v))
    });
    let eig = jacobi_eigen(&restricted);
    let mut cols = [start.vector(0), Vec4::zeros(), Vec4::zeros(), Vec4::zeros()];
    for (c, col) in cols.iter_mut().enumerate().skip(1) {
        let coeffs = eig.vectors.column(c - 1);
        *col = (0..3).map(|p| start.vector(p + 1) * coeffs[p]).sum();
    }
    let mut basis = OrientedBasis::from_vectors(cols)?;
    let flipped = basis.orientation() < 0;
    if flipped {
        basis = basis.with_last_flipped();
    }
    Ok(AdaptedFrame {
        basis,
        eigenvalues: [eig.values[0], eig.values[1], eig.values[2]],
        flipped,
    })
}
