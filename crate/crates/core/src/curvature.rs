//! Algebraic curvature tensors on ℝ⁴.
//!
//! Components are stored densely, `R[i][j][k][l] = R(e_i, e_j, e_k, e_l)` with
//! `R(x, y, z, w) = ⟨𝓡(x, y)z, w⟩`. With this convention the Ricci tensor is
//! `ρ(y, z) = Σᵢ R(eᵢ, y, z, eᵢ)` and the unit sphere has `R(x, y, y, x) = +1`.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result, Symmetry};
use crate::lintensor::{Mat4, SymEndo};

pub const DIM: usize = 4;

/// Raw 4⁴ component array, index `((i·4 + j)·4 + k)·4 + l`.
pub type RawTensor = [f64; 256];

#[inline]
pub const fn idx(i: usize, j: usize, k: usize, l: usize) -> usize {
    ((i * 4 + j) * 4 + k) * 4 + l
}

const ANTISYM_TOL: f64 = 1e-12;
const BIANCHI_TOL: f64 = 1e-11;
const TRACE_FREE_TOL: f64 = 1e-10;

/// The eight signed index permutations generated by `i↔j`, `k↔l` and `(ij)↔(kl)`.
pub(crate) fn symmetry_orbit(
    i: usize,
    j: usize,
    k: usize,
    l: usize,
) -> [((usize, usize, usize, usize), f64); 8] {
    [
        ((i, j, k, l), 1.0),
        ((j, i, k, l), -1.0),
        ((i, j, l, k), -1.0),
        ((j, i, l, k), 1.0),
        ((k, l, i, j), 1.0),
        ((l, k, i, j), -1.0),
        ((k, l, j, i), -1.0),
        ((l, k, j, i), 1.0),
    ]
}

fn all_indices() -> impl Iterator<Item = (usize, usize, usize, usize)> {
    (0..4).flat_map(|i| {
        (0..4).flat_map(move |j| (0..4).flat_map(move |k| (0..4).map(move |l| (i, j, k, l))))
    })
}

/// An algebraic curvature tensor: antisymmetric in each pair, symmetric under
/// pair exchange, and satisfying the first Bianchi identity.
#[derive(Clone, PartialEq)]
pub struct CurvTensor {
    c: Box<RawTensor>,
}

impl std::fmt::Debug for CurvTensor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let nz: Vec<_> = canonical_components(self)
            .into_iter()
            .filter(|&(_, v)| v != 0.0)
            .collect();
        f.debug_struct("CurvTensor").field("canonical", &nz).finish()
    }
}

impl CurvTensor {
    pub fn zero() -> Self {
        CurvTensor {
            c: Box::new([0.0; 256]),
        }
    }

    /// Build without checking the symmetries; every generator in this crate
    /// produces a valid tensor by construction.
    pub(crate) fn from_raw_unchecked(raw: RawTensor) -> Self {
        CurvTensor { c: Box::new(raw) }
    }

    pub(crate) fn from_fn(f: impl Fn(usize, usize, usize, usize) -> f64) -> Self {
        let mut raw = [0.0; 256];
        for (i, j, k, l) in all_indices() {
            raw[idx(i, j, k, l)] = f(i, j, k, l);
        }
        CurvTensor::from_raw_unchecked(raw)
    }

    /// 0-based component access.
    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.c[idx(i, j, k, l)]
    }

    pub fn raw(&self) -> &RawTensor {
        &self.c
    }

    /// Frobenius norm over all 256 components.
    pub fn norm(&self) -> f64 {
        self.c.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &CurvTensor) -> f64 {
        self.c
            .iter()
            .zip(other.c.iter())
            .fold(0.0, |m, (a, b)| f64::max(m, (a - b).abs()))
    }

    /// Components with respect to the orthonormal basis whose vectors are the
    /// columns of `basis`: `R'_{abcd} = Σ B_{ia}B_{jb}B_{kc}B_{ld} R_{ijkl}`.
    pub fn in_basis(&self, basis: &Mat4) -> CurvTensor {
        CurvTensor::from_raw_unchecked(change_basis(&self.c, basis))
    }

    /// `R(x, y, z, w)` for arbitrary vectors.
    pub fn eval(&self, x: &[f64; 4], y: &[f64; 4], z: &[f64; 4], w: &[f64; 4]) -> f64 {
        let mut s = 0.0;
        for (i, j, k, l) in all_indices() {
            s += self.get(i, j, k, l) * x[i] * y[j] * z[k] * w[l];
        }
        s
    }
}

/// Multilinear change of basis on a raw array (basis vectors as columns).
pub(crate) fn change_basis(raw: &RawTensor, basis: &Mat4) -> RawTensor {
    // contract one slot at a time
    let mut cur = *raw;
    for slot in 0..4 {
        let mut next = [0.0; 256];
        for (i, j, k, l) in all_indices() {
            let ids = [i, j, k, l];
            let mut s = 0.0;
            for m in 0..4 {
                let mut src = ids;
                src[slot] = m;
                s += basis[(m, ids[slot])] * cur[idx(src[0], src[1], src[2], src[3])];
            }
            next[idx(i, j, k, l)] = s;
        }
        cur = next;
    }
    cur
}

impl Add for &CurvTensor {
    type Output = CurvTensor;
    fn add(self, rhs: &CurvTensor) -> CurvTensor {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Add for CurvTensor {
    type Output = CurvTensor;
    fn add(mut self, rhs: CurvTensor) -> CurvTensor {
        self += &rhs;
        self
    }
}

impl AddAssign<&CurvTensor> for CurvTensor {
    fn add_assign(&mut self, rhs: &CurvTensor) {
        for (a, b) in self.c.iter_mut().zip(rhs.c.iter()) {
            *a += b;
        }
    }
}

impl Sub for &CurvTensor {
    type Output = CurvTensor;
    fn sub(self, rhs: &CurvTensor) -> CurvTensor {
        let mut out = self.clone();
        for (a, b) in out.c.iter_mut().zip(rhs.c.iter()) {
            *a -= b;
        }
        out
    }
}

impl Sub for CurvTensor {
    type Output = CurvTensor;
    fn sub(self, rhs: CurvTensor) -> CurvTensor {
        &self - &rhs
    }
}

impl Mul<f64> for &CurvTensor {
    type Output = CurvTensor;
    fn mul(self, s: f64) -> CurvTensor {
        let mut out = self.clone();
        out.c.iter_mut().for_each(|v| *v *= s);
        out
    }
}

impl Mul<f64> for CurvTensor {
    type Output = CurvTensor;
    fn mul(self, s: f64) -> CurvTensor {
        &self * s
    }
}

impl Neg for CurvTensor {
    type Output = CurvTensor;
    fn neg(self) -> CurvTensor {
        self * -1.0
    }
}

/// Independent components `R_{ijkl}` with `i<j`, `k<l`, `(i,j) ≤ (k,l)` (0-based).
pub fn canonical_components(r: &CurvTensor) -> Vec<([usize; 4], f64)> {
    use crate::lintensor::PAIRS;
    let mut out = Vec::with_capacity(21);
    for (a, &(i, j)) in PAIRS.iter().enumerate() {
        for &(k, l) in &PAIRS[a..] {
            out.push(([i, j, k, l], r.get(i, j, k, l)));
        }
    }
    out
}

/// Largest absolute violation of each curvature symmetry.
pub fn symmetry_defects(raw: &RawTensor) -> [(Symmetry, f64); 3] {
    let mut anti = 0.0_f64;
    let mut pair = 0.0_f64;
    let mut bianchi = 0.0_f64;
    for (i, j, k, l) in all_indices() {
        let r = raw[idx(i, j, k, l)];
        anti = anti.max((r + raw[idx(j, i, k, l)]).abs());
        pair = pair.max((r - raw[idx(k, l, i, j)]).abs());
        bianchi = bianchi.max((r + raw[idx(j, k, i, l)] + raw[idx(k, i, j, l)]).abs());
    }
    [
        (Symmetry::Antisymmetry, anti),
        (Symmetry::PairSymmetry, pair),
        (Symmetry::FirstBianchi, bianchi),
    ]
}

/// Accepts a raw array iff it has the curvature symmetries; otherwise reports
/// the first failing symmetry with its maximal violation.
pub fn validate(raw: &RawTensor) -> Result<CurvTensor> {
    validate_with_tol(raw, 1.0)
}

/// As [`validate`], with all tolerances multiplied by `loosen`.
pub fn validate_with_tol(raw: &RawTensor, loosen: f64) -> Result<CurvTensor> {
    if let Some(v) = raw.iter().find(|v| !v.is_finite()) {
        return Err(Error::BadParameters(format!("non-finite component {v}")));
    }
    let scale = 1.0 + raw.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    for (which, magnitude) in symmetry_defects(raw) {
        let tol = match which {
            Symmetry::FirstBianchi => BIANCHI_TOL,
            _ => ANTISYM_TOL,
        } * scale
            * loosen;
        if magnitude > tol {
            return Err(Error::SymmetryViolation { which, magnitude });
        }
    }
    Ok(CurvTensor::from_raw_unchecked(*raw))
}

/// Fills a raw array from a list of 0-based components, propagating each one
/// over its symmetry orbit. Entries that disagree by more than `1e-12` after
/// completion are rejected; unspecified components are zero.
pub fn complete_by_symmetry(entries: &[([usize; 4], f64)]) -> Result<RawTensor> {
    let mut raw = [0.0; 256];
    let mut set = [false; 256];
    for &([i, j, k, l], value) in entries {
        if [i, j, k, l].iter().any(|&x| x >= 4) {
            return Err(Error::BadParameters(format!("index out of range in {:?}", [i, j, k, l])));
        }
        for ((a, b, c, d), sign) in symmetry_orbit(i, j, k, l) {
            let pos = idx(a, b, c, d);
            let v = sign * value;
            if set[pos] {
                if (raw[pos] - v).abs() > 1e-12 {
                    return Err(Error::ConflictingComponent {
                        indices: [a, b, c, d],
                        first: raw[pos],
                        second: v,
                    });
                }
            } else {
                raw[pos] = v;
                set[pos] = true;
            }
        }
    }
    Ok(raw)
}

/// Orthogonal projection of an arbitrary array onto algebraic curvature
/// tensors: average over the order-8 symmetry group, then remove the totally
/// antisymmetric part that carries the Bianchi defect.
pub fn project_to_curvature(raw: &RawTensor) -> CurvTensor {
    let mut t = [0.0; 256];
    for (i, j, k, l) in all_indices() {
        t[idx(i, j, k, l)] = symmetry_orbit(i, j, k, l)
            .iter()
            .map(|&((a, b, c, d), s)| s * raw[idx(a, b, c, d)])
            .sum::<f64>()
            / 8.0;
    }
    let mut out = [0.0; 256];
    for (i, j, k, l) in all_indices() {
        let b = (t[idx(i, j, k, l)] + t[idx(j, k, i, l)] + t[idx(k, i, j, l)]) / 3.0;
        out[idx(i, j, k, l)] = t[idx(i, j, k, l)] - b;
    }
    CurvTensor::from_raw_unchecked(out)
}

/// Ricci tensor `ρ(y, z) = Σᵢ R(eᵢ, y, z, eᵢ)`.
pub fn ricci(r: &CurvTensor) -> SymEndo {
    let m = Mat4::from_fn(|y, z| (0..4).map(|i| r.get(i, y, z, i)).sum());
    SymEndo::symmetrized(m)
}

pub fn scalar(r: &CurvTensor) -> f64 {
    ricci(r).trace()
}

/// Constant-curvature building block `R⁰(x, y)z = g(y, z)x − g(x, z)y`, i.e.
/// `R⁰_{ijkl} = δ_{jk}δ_{il} − δ_{ik}δ_{jl}`.
pub fn r0() -> CurvTensor {
    let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
    CurvTensor::from_fn(|i, j, k, l| d(j, k) * d(i, l) - d(i, k) * d(j, l))
}

/// Kulkarni–Nomizu product of `h` with the metric:
/// `h_{jk}δ_{il} − h_{ik}δ_{jl} + δ_{jk}h_{il} − δ_{ik}h_{jl}`.
pub fn kulkarni(h: &SymEndo) -> CurvTensor {
    let h = h.matrix();
    let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
    CurvTensor::from_fn(|i, j, k, l| {
        h[(j, k)] * d(i, l) - h[(i, k)] * d(j, l) + d(j, k) * h[(i, l)] - d(i, k) * h[(j, l)]
    })
}

/// `ℒ(x,y)z = g(ρy,z)x − g(ρx,z)y + g(y,z)ρx − g(x,z)ρy` in components.
pub fn ell(rho: &SymEndo) -> CurvTensor {
    let p = rho.matrix();
    let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
    // written term by term from the operator formula, independently of `kulkarni`
    CurvTensor::from_fn(|i, j, k, l| {
        let t1 = p[(j, k)] * d(i, l); // g(ρy,z) g(x,w)
        let t2 = p[(i, k)] * d(j, l); // g(ρx,z) g(y,w)
        let t3 = d(j, k) * p[(i, l)]; // g(y,z) g(ρx,w)
        let t4 = d(i, k) * p[(j, l)]; // g(x,z) g(ρy,w)
        t1 - t2 + t3 - t4
    })
}

/// Trace-free curvature tensor (the Weyl part of some `R`).
#[derive(Clone, Debug, PartialEq)]
pub struct WeylTensor {
    tensor: CurvTensor,
    ricci_norm: f64,
}

impl WeylTensor {
    /// Accepts `t` only if its Ricci contraction vanishes.
    pub fn new(t: CurvTensor) -> Result<Self> {
        let ricci_norm = ricci(&t).matrix().norm();
        if ricci_norm > TRACE_FREE_TOL * (1.0 + t.norm()) {
            return Err(Error::NotTraceFree(ricci_norm));
        }
        Ok(WeylTensor {
            tensor: t,
            ricci_norm,
        })
    }

    pub fn tensor(&self) -> &CurvTensor {
        &self.tensor
    }

    pub fn into_tensor(self) -> CurvTensor {
        self.tensor
    }

    /// Norm of the Ricci contraction, zero up to rounding.
    pub fn ricci_norm(&self) -> f64 {
        self.ricci_norm
    }

    pub fn norm(&self) -> f64 {
        self.tensor.norm()
    }
}

/// Weyl projection in dimension m = 4:
/// `W = R − ℒ(ρ)/(m−2) + τ R⁰/((m−1)(m−2))`.
pub fn weyl(r: &CurvTensor) -> WeylTensor {
    let rho = ricci(r);
    let tau = rho.trace();
    let m = DIM as f64;
    let w = r - &(&ell(&rho) * (1.0 / (m - 2.0)));
    let w = &w + &(&r0() * (tau / ((m - 1.0) * (m - 2.0))));
    let ricci_norm = ricci(&w).matrix().norm();
    WeylTensor {
        tensor: w,
        ricci_norm,
    }
}

/// Seeded random algebraic curvature tensor: uniform entries in `[-1, 1)`
/// projected onto the curvature-symmetry subspace.
pub fn random_act(seed: u64) -> CurvTensor {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_act_with(&mut rng)
}

pub fn random_act_with<R: Rng + ?Sized>(rng: &mut R) -> CurvTensor {
    let mut raw = [0.0; 256];
    raw.iter_mut()
        .for_each(|v| *v = rng.random_range(-1.0..1.0));
    project_to_curvature(&raw)
}

/// Random symmetric endomorphism with entries in `[-scale, scale)`.
pub fn random_sym<R: Rng + ?Sized>(rng: &mut R, scale: f64) -> SymEndo {
    let a = Mat4::from_fn(|_, _| rng.random_range(-scale..scale));
    SymEndo::symmetrized(a + a.transpose())
}
