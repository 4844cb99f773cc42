//! Curvature of concrete metrics by finite differences, expressed in an
//! orthonormal frame and fed through the algebraic classifiers.

mod charts;

pub use charts::{
    chart_by_name, euclidean, fubini_study, generic, hyperbolic, product_spheres, sphere,
    ConformalFactor, MetricChart, CHART_NAMES,
};

use serde::Serialize;

use crate::curvature::{project_to_curvature, validate_with_tol, weyl, CurvTensor, RawTensor};
use crate::duality::{classify, DualityClass, DualityReport};
use crate::error::{Error, Result};
use crate::lintensor::{Mat4, Vec4};
use crate::osserman::{jacobi_spectrum, osserman_exact, osserman_sampled, DEFAULT_SAMPLES};

/// Default finite-difference step.
pub const DEFAULT_STEP: f64 = 1e-3;
/// Relative tolerance for classifying finite-difference curvature.
pub const POINT_TOL: f64 = 1e-4;

/// `Γ[i][j][k] = Γ^i_{jk}`.
pub type Christoffel = [[[f64; 4]; 4]; 4];

fn check_step(h: f64) -> Result<()> {
    if h > 0.0 && h.is_finite() {
        Ok(())
    } else {
        Err(Error::BadParameters(format!("step must be positive, got {h}")))
    }
}

fn shifted(p: &[f64; 4], axis: usize, by: f64) -> [f64; 4] {
    let mut q = *p;
    q[axis] += by;
    q
}

fn inverse_metric(chart: &MetricChart, p: &[f64; 4], g: &Mat4) -> Result<Mat4> {
    g.cholesky()
        .map(|c| c.inverse())
        .ok_or_else(|| Error::SingularMetric {
            chart: chart.name().to_string(),
            point: *p,
        })
}

fn christoffel_unchecked(chart: &MetricChart, p: &[f64; 4], h: f64) -> Result<Christoffel> {
    let g = chart.metric_at(p)?;
    let ginv = inverse_metric(chart, p, &g)?;
    let mut dg = [Mat4::zeros(); 4];
    for (m, d) in dg.iter_mut().enumerate() {
        let gp = chart.metric_at(&shifted(p, m, h))?;
        let gm = chart.metric_at(&shifted(p, m, -h))?;
        *d = (gp - gm) / (2.0 * h);
    }
    let mut gamma = [[[0.0; 4]; 4]; 4];
    for (i, gi) in gamma.iter_mut().enumerate() {
        for j in 0..4 {
            for k in j..4 {
                let mut s = 0.0;
                for l in 0..4 {
                    s += ginv[(i, l)] * (dg[j][(l, k)] + dg[k][(l, j)] - dg[l][(j, k)]);
                }
                gi[j][k] = 0.5 * s;
                gi[k][j] = 0.5 * s;
            }
        }
    }
    Ok(gamma)
}

/// Christoffel symbols of the second kind by central differences of the metric.
pub fn christoffel(chart: &MetricChart, p: &[f64; 4], h: f64) -> Result<Christoffel> {
    check_step(h)?;
    chart.require(p, 2.0 * h)?;
    christoffel_unchecked(chart, p, h)
}

/// Curvature at a point in the orthonormal frame of `g(p)`.
#[derive(Clone, Debug, PartialEq)]
pub struct FrameCurvature {
    /// Projected onto the curvature symmetries.
    pub curvature: CurvTensor,
    /// Frobenius norm of the part removed by the projection.
    pub defect: f64,
    /// Frame vectors (columns): `L^{-T}` for the Cholesky factor `g = L Lᵀ`.
    pub frame: Mat4,
}

/// Coordinate Riemann tensor by nested central differences, lowered with
/// `g(p)` and rewritten in the Cholesky frame.
pub fn riemann_at(chart: &MetricChart, p: &[f64; 4], h: f64) -> Result<FrameCurvature> {
    check_step(h)?;
    chart.require(p, 3.0 * h)?;
    let gamma = christoffel_unchecked(chart, p, h)?;
    // dgamma[m] = ∂_m Γ
    let mut dgamma = [[[[0.0; 4]; 4]; 4]; 4];
    for (m, dm) in dgamma.iter_mut().enumerate() {
        let gp = christoffel_unchecked(chart, &shifted(p, m, h), h)?;
        let gm = christoffel_unchecked(chart, &shifted(p, m, -h), h)?;
        for i in 0..4 {
            for j in 0..4 {
                for k in 0..4 {
                    dm[i][j][k] = (gp[i][j][k] - gm[i][j][k]) / (2.0 * h);
                }
            }
        }
    }
    // up[i][j][k][l] = R^i_{jkl}
    let mut up = [[[[0.0; 4]; 4]; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            for k in 0..4 {
                for l in 0..4 {
                    let mut s = dgamma[k][i][l][j] - dgamma[l][i][k][j];
                    for m in 0..4 {
                        s += gamma[i][k][m] * gamma[m][l][j] - gamma[i][l][m] * gamma[m][k][j];
                    }
                    up[i][j][k][l] = s;
                }
            }
        }
    }
    let g = chart.metric_at(p)?;
    let chol = g.cholesky().ok_or_else(|| Error::SingularMetric {
        chart: chart.name().to_string(),
        point: *p,
    })?;
    // R(∂a, ∂b, ∂c, ∂d) = g(R(∂a, ∂b)∂c, ∂d) = g_{di} R^i_{cab}
    let mut low: RawTensor = [0.0; 256];
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    low[crate::curvature::idx(a, b, c, d)] =
                        (0..4).map(|i| g[(d, i)] * up[i][c][a][b]).sum();
                }
            }
        }
    }
    let l_inv = chol
        .l()
        .try_inverse()
        .ok_or_else(|| Error::SingularMetric {
            chart: chart.name().to_string(),
            point: *p,
        })?;
    let frame = l_inv.transpose();
    let in_frame = CurvTensor::from_raw_unchecked(low).in_basis(&frame);
    let curvature = project_to_curvature(in_frame.raw());
    let defect = (&in_frame - &curvature).norm();
    Ok(FrameCurvature {
        curvature,
        defect,
        frame,
    })
}

/// Deterministic interior point number `k` of the chart's domain box.
pub fn sample_point(chart: &MetricChart, k: usize) -> [f64; 4] {
    let (lo, hi) = chart.bounds();
    let t = [0.31, 0.47, 0.62, 0.55, 0.38];
    std::array::from_fn(|i| lo[i] + (hi[i] - lo[i]) * t[(i + k) % 5])
}

/// Osserman decisions for a point's curvature.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct OssermanPair {
    pub osserman: bool,
    pub conformally_osserman: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PointReport {
    pub point: [f64; 4],
    /// Independent frame components `R_{ijkl}` (1-based), `i<j`, `k<l`, `(i,j) ≤ (k,l)`.
    #[serde(serialize_with = "serialize_canonical")]
    pub curvature: CurvTensor,
    pub duality: DualityReport,
    pub osserman: OssermanPair,
    /// Whether the sampled and exact deciders agree on both questions.
    pub deciders_agree: bool,
    pub step: f64,
    pub symmetrization_defect: f64,
    /// `conformally Osserman ⟺ half-flat`.
    pub consistent: bool,
}

fn serialize_canonical<S: serde::Serializer>(r: &CurvTensor, s: S) -> std::result::Result<S::Ok, S::Error> {
    crate::io::component_records(r).serialize(s)
}

/// Classifies finite-difference curvature at `p` with tolerance [`POINT_TOL`].
pub fn classify_point(chart: &MetricChart, p: &[f64; 4], h: f64) -> Result<PointReport> {
    let fc = riemann_at(chart, p, h)?;
    let r = fc.curvature;
    validate_with_tol(r.raw(), 1e6)?;
    let duality = classify(&r, POINT_TOL)?;
    let exact_r = osserman_exact(&r, false, POINT_TOL)?.osserman;
    let exact_w = osserman_exact(&r, true, POINT_TOL)?.osserman;
    let sampled_r = osserman_sampled(&r, false, DEFAULT_SAMPLES, POINT_TOL)?.osserman;
    let sampled_w = osserman_sampled(&r, true, DEFAULT_SAMPLES, POINT_TOL)?.osserman;
    let osserman = OssermanPair {
        osserman: exact_r,
        conformally_osserman: exact_w,
    };
    Ok(PointReport {
        point: *p,
        consistent: exact_w == duality.class.is_half_flat(),
        curvature: r,
        duality,
        osserman,
        deciders_agree: exact_r == sampled_r && exact_w == sampled_w,
        step: h,
        symmetrization_defect: fc.defect,
    })
}

/// Comparison of `g` and `e^{α} g` at one point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConformalComparison {
    pub alpha: String,
    pub alpha_at_point: f64,
    /// `e^{−α(p)}`.
    pub scale: f64,
    pub label_g: DualityClass,
    pub label_h: DualityClass,
    /// Sorted `𝒥_W` spectra along each frame vector, for `g` and `e^{α} g`.
    pub spectra_g: Vec<[f64; 4]>,
    pub spectra_h: Vec<[f64; 4]>,
    /// `max |s_h − scale·s_g| / (1 + max |scale·s_g|)`.
    pub max_relative_deviation: f64,
    pub labels_agree: bool,
    pub spectra_scale: bool,
}

/// Frame-axis `𝒥_W` spectra for `g` and `e^{α} g`, each measured with its
/// own unit vectors, and their duality labels.
pub fn conformal_check(
    chart: &MetricChart,
    alpha: ConformalFactor,
    p: &[f64; 4],
    h: f64,
) -> Result<ConformalComparison> {
    let scaled = chart.conformal(alpha);
    let rg = riemann_at(chart, p, h)?.curvature;
    let rh = riemann_at(&scaled, p, h)?.curvature;
    let label_g = classify(&rg, POINT_TOL)?.class;
    let label_h = classify(&rh, POINT_TOL)?.class;
    let wg = weyl(&rg).into_tensor();
    let wh = weyl(&rh).into_tensor();
    let a = alpha.eval(p);
    let scale = (-a).exp();
    let mut spectra_g = Vec::with_capacity(4);
    let mut spectra_h = Vec::with_capacity(4);
    let mut dev = 0.0_f64;
    let mut size = 0.0_f64;
    for axis in 0..4 {
        let x = Vec4::from_fn(|i, _| if i == axis { 1.0 } else { 0.0 });
        let sg = jacobi_spectrum(&wg, &x)?.eigenvalues;
        let sh = jacobi_spectrum(&wh, &x)?.eigenvalues;
        for (u, v) in sg.iter().zip(&sh) {
            dev = dev.max((v - scale * u).abs());
            size = size.max((scale * u).abs());
        }
        spectra_g.push(sg);
        spectra_h.push(sh);
    }
    let rel = dev / (1.0 + size);
    Ok(ConformalComparison {
        alpha: alpha.to_string(),
        alpha_at_point: a,
        scale,
        label_g,
        label_h,
        spectra_g,
        spectra_h,
        max_relative_deviation: rel,
        labels_agree: label_g == label_h,
        spectra_scale: rel <= POINT_TOL,
    })
}
