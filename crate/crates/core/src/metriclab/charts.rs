use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lintensor::Mat4;

type MetricFn = dyn Fn(&[f64; 4]) -> Mat4 + Send + Sync;

/// A coordinate patch with a Riemannian metric on a box domain.
#[derive(Clone)]
pub struct MetricChart {
    name: String,
    lower: [f64; 4],
    upper: [f64; 4],
    metric: Arc<MetricFn>,
}

impl fmt::Debug for MetricChart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MetricChart")
            .field("name", &self.name)
            .field("lower", &self.lower)
            .field("upper", &self.upper)
            .finish()
    }
}

impl MetricChart {
    pub fn new(
        name: impl Into<String>,
        lower: [f64; 4],
        upper: [f64; 4],
        metric: impl Fn(&[f64; 4]) -> Mat4 + Send + Sync + 'static,
    ) -> Self {
        MetricChart {
            name: name.into(),
            lower,
            upper,
            metric: Arc::new(metric),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn bounds(&self) -> ([f64; 4], [f64; 4]) {
        (self.lower, self.upper)
    }

    /// Whether `p` lies in the domain shrunk by `margin` on every side.
    pub fn contains(&self, p: &[f64; 4], margin: f64) -> bool {
        (0..4).all(|i| p[i] >= self.lower[i] + margin && p[i] <= self.upper[i] - margin)
    }

    pub(crate) fn require(&self, p: &[f64; 4], margin: f64) -> Result<()> {
        if p.iter().all(|v| v.is_finite()) && self.contains(p, margin) {
            Ok(())
        } else {
            Err(Error::OutOfDomain {
                chart: self.name.clone(),
                point: *p,
                margin,
            })
        }
    }

    /// Metric matrix at `p`; `p` must lie in the closed domain.
    pub fn metric_at(&self, p: &[f64; 4]) -> Result<Mat4> {
        self.require(p, 0.0)?;
        Ok((self.metric)(p))
    }

    /// The chart with metric `e^{α} g`.
    pub fn conformal(&self, alpha: ConformalFactor) -> MetricChart {
        let inner = Arc::clone(&self.metric);
        MetricChart {
            name: format!("{}*exp({})", self.name, alpha),
            lower: self.lower,
            upper: self.upper,
            metric: Arc::new(move |p| inner(p) * alpha.eval(p).exp()),
        }
    }
}

/// Scalar functions `α` used for conformal rescaling `g ↦ e^{α} g`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ConformalFactor {
    Constant(f64),
    /// `Σ cᵢ xᵢ`
    Linear([f64; 4]),
    /// `sin(x₁ + x₂)`
    Sin,
    /// `c·|x|²`
    Quadratic(f64),
}

impl ConformalFactor {
    pub fn eval(&self, p: &[f64; 4]) -> f64 {
        match self {
            ConformalFactor::Constant(c) => *c,
            ConformalFactor::Linear(c) => (0..4).map(|i| c[i] * p[i]).sum(),
            ConformalFactor::Sin => (p[0] + p[1]).sin(),
            ConformalFactor::Quadratic(c) => c * p.iter().map(|x| x * x).sum::<f64>(),
        }
    }

    /// Parses `zero`, `const:C`, `lin:C1,C2,C3,C4`, `sin`, `quad:C`.
    pub fn parse(spec: &str) -> Result<Self> {
        let bad = |msg: &str| Error::Parse {
            context: format!("alpha spec `{spec}`"),
            message: msg.to_string(),
        };
        let num = |s: &str| s.trim().parse::<f64>().map_err(|e| bad(&e.to_string()));
        let (head, tail) = match spec.split_once(':') {
            Some((h, t)) => (h.trim(), Some(t)),
            None => (spec.trim(), None),
        };
        match (head, tail) {
            ("zero", None) => Ok(ConformalFactor::Constant(0.0)),
            ("sin", None) => Ok(ConformalFactor::Sin),
            ("const", Some(t)) => Ok(ConformalFactor::Constant(num(t)?)),
            ("quad", Some(t)) => Ok(ConformalFactor::Quadratic(num(t)?)),
            ("lin", Some(t)) => {
                let v: Vec<f64> = t.split(',').map(num).collect::<Result<_>>()?;
                let c: [f64; 4] = v
                    .try_into()
                    .map_err(|_| bad("lin needs four coefficients"))?;
                Ok(ConformalFactor::Linear(c))
            }
            _ => Err(bad("expected zero, sin, const:C, quad:C or lin:C1,C2,C3,C4")),
        }
    }
}

impl fmt::Display for ConformalFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConformalFactor::Constant(c) => write!(f, "const:{c}"),
            ConformalFactor::Linear(c) => write!(f, "lin:{},{},{},{}", c[0], c[1], c[2], c[3]),
            ConformalFactor::Sin => write!(f, "sin"),
            ConformalFactor::Quadratic(c) => write!(f, "quad:{c}"),
        }
    }
}

pub fn euclidean() -> MetricChart {
    MetricChart::new("euclidean", [-10.0; 4], [10.0; 4], |_| Mat4::identity())
}

/// Stereographic chart of the round 4-sphere of radius `r`:
/// `g = 4r⁴/(r² + |x|²)² δ`, sectional curvature `1/r²`.
pub fn sphere(radius: f64) -> MetricChart {
    let r2 = radius * radius;
    MetricChart::new("sphere", [-3.0 * radius; 4], [3.0 * radius; 4], move |p| {
        let s: f64 = p.iter().map(|x| x * x).sum();
        Mat4::identity() * (4.0 * r2 * r2 / ((r2 + s) * (r2 + s)))
    })
}

/// Upper half-space `g = δ / x₄²`, curvature −1.
pub fn hyperbolic() -> MetricChart {
    MetricChart::new(
        "hyperbolic",
        [-5.0, -5.0, -5.0, 0.2],
        [5.0, 5.0, 5.0, 5.0],
        |p| Mat4::identity() / (p[3] * p[3]),
    )
}

/// Fubini–Study metric on the affine patch `z₁ = x₁ + i x₂, z₂ = x₃ + i x₄` of
/// CP², `g(v, w) = Re[(1+|z|²)⟨v, w⟩ − (z̄·v)·conj(z̄·w)] / (1+|z|²)²`.
/// Holomorphic sectional curvature 4; Euclidean at the origin.
pub fn fubini_study() -> MetricChart {
    MetricChart::new("fubini-study", [-3.0; 4], [3.0; 4], |p| {
        let z = [Complex64::new(p[0], p[1]), Complex64::new(p[2], p[3])];
        let s = 1.0 + z[0].norm_sqr() + z[1].norm_sqr();
        // real coordinate directions as complex tangent vectors
        let basis = [
            [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
            [Complex64::new(0.0, 1.0), Complex64::new(0.0, 0.0)],
            [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
            [Complex64::new(0.0, 0.0), Complex64::new(0.0, 1.0)],
        ];
        let zbar_dot = |v: &[Complex64; 2]| z[0].conj() * v[0] + z[1].conj() * v[1];
        Mat4::from_fn(|a, b| {
            let (v, w) = (&basis[a], &basis[b]);
            let herm = v[0] * w[0].conj() + v[1] * w[1].conj();
            let proj = zbar_dot(v) * zbar_dot(w).conj();
            (s * herm - proj).re / (s * s)
        })
    })
}

/// `S²(1) × S²(1)` in spherical angles `(θ₁, φ₁, θ₂, φ₂)`, away from the poles.
pub fn product_spheres() -> MetricChart {
    let eps = 0.2;
    MetricChart::new(
        "product-spheres",
        [eps, -PI, eps, -PI],
        [PI - eps, PI, PI - eps, PI],
        |p| {
            let (s1, s2) = (p[0].sin(), p[2].sin());
            Mat4::from_diagonal(&[1.0, s1 * s1, 1.0, s2 * s2].into())
        },
    )
}

/// `δ + ε P(x)` with a fixed symmetric quadratic perturbation `P`; generic
/// enough that its Weyl tensor is neither self-dual nor anti-self-dual.
pub fn generic(epsilon: f64) -> MetricChart {
    MetricChart::new("generic", [-0.4; 4], [0.4; 4], move |p| {
        Mat4::from_fn(|a, b| {
            let (a, b) = (a.min(b), a.max(b));
            let mut s = 0.0;
            for m in 0..4 {
                for n in m..4 {
                    let c = (1.3 * (a + b) as f64 + 0.7 * (a * b) as f64 + 2.1 * m as f64
                        + 1.1 * n as f64
                        + 0.4 * (m * n) as f64
                        + 0.5)
                        .sin();
                    s += c * p[m] * p[n];
                }
            }
            let d = if a == b { 1.0 } else { 0.0 };
            d + epsilon * s
        })
    })
}

/// Names accepted by [`chart_by_name`].
pub const CHART_NAMES: [&str; 6] = [
    "euclidean",
    "sphere",
    "hyperbolic",
    "fubini-study",
    "product-spheres",
    "generic",
];

/// Looks up a built-in chart. Parameters: `radius` for `sphere` (default 1),
/// `epsilon` for `generic` (default 0.1).
pub fn chart_by_name(name: &str, params: &BTreeMap<String, f64>) -> Result<MetricChart> {
    let allowed: &[&str] = match name {
        "sphere" => &["radius"],
        "generic" => &["epsilon"],
        _ => &[],
    };
    if let Some(k) = params.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(Error::BadParameters(format!("chart `{name}` has no parameter `{k}`")));
    }
    let get = |k: &str, default: f64| params.get(k).copied().unwrap_or(default);
    match name {
        "euclidean" => Ok(euclidean()),
        "sphere" => {
            let r = get("radius", 1.0);
            if !(r > 0.0) {
                return Err(Error::BadParameters(format!("sphere radius must be positive, got {r}")));
            }
            Ok(sphere(r))
        }
        "hyperbolic" => Ok(hyperbolic()),
        "fubini-study" => Ok(fubini_study()),
        "product-spheres" => Ok(product_spheres()),
        "generic" => Ok(generic(get("epsilon", 0.1))),
        other => Err(Error::UnknownChart(other.to_string())),
    }
}
