//! Python bindings. Build the cdylib and import it as `selfdual`.

use std::collections::BTreeMap;

use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::Value;

use selfdual::curvature::{self as curv, CurvTensor};
use selfdual::lintensor::{random_orthonormal, Mat4, OrientedBasis, SymEndo, Vec4};
use selfdual::metriclab::{self, ConformalFactor};
use selfdual::quaternion::{self, Phi2Table};
use selfdual::{duality, io, osserman, verify};

create_exception!(selfdual, SelfdualError, PyValueError);

fn err(e: selfdual::Error) -> PyErr {
    SelfdualError::new_err(e.to_string())
}

fn json_to_py(py: Python<'_>, v: &Value) -> PyResult<Py<PyAny>> {
    Ok(match v {
        Value::Null => py.None(),
        Value::Bool(b) => b.into_pyobject(py)?.to_owned().into_any().unbind(),
        Value::Number(n) => match (n.as_i64(), n.as_f64()) {
            (Some(i), _) => i.into_pyobject(py)?.into_any().unbind(),
            (None, Some(f)) => f.into_pyobject(py)?.into_any().unbind(),
            _ => py.None(),
        },
        Value::String(s) => s.into_pyobject(py)?.into_any().unbind(),
        Value::Array(a) => {
            let items = a.iter().map(|x| json_to_py(py, x)).collect::<PyResult<Vec<_>>>()?;
            PyList::new(py, items)?.into_any().unbind()
        }
        Value::Object(m) => {
            let d = PyDict::new(py);
            for (k, x) in m {
                d.set_item(k, json_to_py(py, x)?)?;
            }
            d.into_any().unbind()
        }
    })
}

fn to_py<T: Serialize>(py: Python<'_>, v: &T) -> PyResult<Py<PyAny>> {
    let value = serde_json::to_value(v).map_err(|e| SelfdualError::new_err(e.to_string()))?;
    json_to_py(py, &value)
}

fn mat4(rows: [[f64; 4]; 4]) -> Mat4 {
    Mat4::from_fn(|i, j| rows[i][j])
}

fn rows(m: &Mat4) -> [[f64; 4]; 4] {
    std::array::from_fn(|i| std::array::from_fn(|j| m[(i, j)]))
}

fn check_index(i: usize) -> PyResult<()> {
    if i < 4 {
        Ok(())
    } else {
        Err(SelfdualError::new_err(format!("index {i} outside 0..4")))
    }
}

/// An algebraic curvature tensor on R⁴ (0-based indices).
#[pyclass(name = "CurvatureTensor", module = "selfdual", frozen)]
struct PyCurvature {
    inner: CurvTensor,
}

fn wrap(inner: CurvTensor) -> PyCurvature {
    PyCurvature { inner }
}

#[pymethods]
impl PyCurvature {
    #[staticmethod]
    fn zero() -> Self {
        wrap(CurvTensor::zero())
    }

    /// Constant sectional curvature 1.
    #[staticmethod]
    fn r0() -> Self {
        wrap(curv::r0())
    }

    /// Seeded random tensor with both Weyl blocks nonzero.
    #[staticmethod]
    fn random(seed: u64) -> Self {
        wrap(curv::random_act(seed))
    }

    /// Components `{(i, j, k, l): value}`, 0-based; the rest follow by symmetry.
    #[staticmethod]
    fn from_components(components: BTreeMap<(usize, usize, usize, usize), f64>) -> PyResult<Self> {
        let entries: Vec<_> = components
            .into_iter()
            .map(|((i, j, k, l), v)| ([i, j, k, l], v))
            .collect();
        let raw = curv::complete_by_symmetry(&entries).map_err(err)?;
        curv::validate(&raw).map(wrap).map_err(err)
    }

    /// Normal form with Jacobi eigenvalues `(a, b, c)` on `e₁^⊥`; needs `a + b + c = 0`.
    #[staticmethod]
    fn normal_form(a: f64, b: f64, c: f64) -> PyResult<Self> {
        selfdual::fixtures::normal_form([a, b, c]).map(wrap).map_err(err)
    }

    /// `h ∧ id` for a symmetric 4×4 matrix `h`.
    #[staticmethod]
    fn kulkarni(h: [[f64; 4]; 4]) -> PyResult<Self> {
        let h = SymEndo::new(mat4(h)).map_err(err)?;
        Ok(wrap(curv::kulkarni(&h)))
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        io::parse_tensor(text).map(wrap).map_err(err)
    }

    #[pyo3(signature = (description=None))]
    fn to_json(&self, description: Option<String>) -> String {
        io::tensor_to_string(&self.inner, description)
    }

    fn get(&self, i: usize, j: usize, k: usize, l: usize) -> PyResult<f64> {
        for x in [i, j, k, l] {
            check_index(x)?;
        }
        Ok(self.inner.get(i, j, k, l))
    }

    /// The 21 independent components, 0-based.
    fn components(&self) -> BTreeMap<(usize, usize, usize, usize), f64> {
        curv::canonical_components(&self.inner)
            .into_iter()
            .map(|([i, j, k, l], v)| ((i, j, k, l), v))
            .collect()
    }

    fn norm(&self) -> f64 {
        self.inner.norm()
    }

    fn ricci(&self) -> [[f64; 4]; 4] {
        rows(curv::ricci(&self.inner).matrix())
    }

    fn scalar(&self) -> f64 {
        curv::scalar(&self.inner)
    }

    fn weyl(&self) -> Self {
        wrap(curv::weyl(&self.inner).into_tensor())
    }

    /// Components in the orthonormal basis given by the columns of `basis`.
    fn in_basis(&self, basis: [[f64; 4]; 4]) -> PyResult<Self> {
        let b = OrientedBasis::new(mat4(basis)).map_err(err)?;
        Ok(wrap(self.inner.in_basis(b.matrix())))
    }

    #[pyo3(signature = (tol=duality::DEFAULT_TOL))]
    fn classify(&self, py: Python<'_>, tol: f64) -> PyResult<Py<PyAny>> {
        to_py(py, &duality::classify(&self.inner, tol).map_err(err)?)
    }

    /// Osserman test of `R` (or of its Weyl part when `conformal`).
    /// `method` is `"exact"` or `"sampled"`.
    #[pyo3(signature = (conformal=true, method="exact", tol=osserman::DEFAULT_TOL, samples=osserman::DEFAULT_SAMPLES))]
    fn is_osserman(&self, conformal: bool, method: &str, tol: f64, samples: usize) -> PyResult<bool> {
        match method {
            "exact" => osserman::osserman_exact(&self.inner, conformal, tol).map(|d| d.osserman),
            "sampled" => osserman::osserman_sampled(&self.inner, conformal, samples, tol).map(|d| d.osserman),
            other => return Err(SelfdualError::new_err(format!("unknown method `{other}`"))),
        }
        .map_err(err)
    }

    /// Sorted spectrum of the Jacobi operator along `x`.
    #[pyo3(signature = (x, conformal=false))]
    fn jacobi_spectrum(&self, x: [f64; 4], conformal: bool) -> PyResult<[f64; 4]> {
        let x = Vec4::from(x);
        let r = if conformal {
            curv::weyl(&self.inner).into_tensor()
        } else {
            self.inner.clone()
        };
        osserman::jacobi_spectrum(&r, &x).map(|s| s.eigenvalues).map_err(err)
    }

    /// Quaternionic decomposition of the Weyl part; fails unless half-flat.
    #[pyo3(signature = (tol=duality::DEFAULT_TOL))]
    fn recover(&self, py: Python<'_>, tol: f64) -> PyResult<Py<PyAny>> {
        let d = quaternion::recover(&curv::weyl(&self.inner), tol).map_err(err)?;
        let m = d.structure.matrices();
        let out = PyDict::new(py);
        out.set_item("structure", [rows(&m[0]), rows(&m[1]), rows(&m[2])])?;
        out.set_item("lambdas", d.lambdas)?;
        out.set_item("residual", d.residual)?;
        out.set_item("orientation_flipped", d.orientation_flipped)?;
        Ok(out.into_any().unbind())
    }

    fn __add__(&self, other: &Self) -> Self {
        wrap(&self.inner + &other.inner)
    }

    fn __sub__(&self, other: &Self) -> Self {
        wrap(&self.inner - &other.inner)
    }

    fn __mul__(&self, s: f64) -> Self {
        wrap(&self.inner * s)
    }

    fn __rmul__(&self, s: f64) -> Self {
        wrap(&self.inner * s)
    }

    fn __neg__(&self) -> Self {
        wrap(-self.inner.clone())
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.inner == other.inner
    }

    fn __repr__(&self) -> String {
        let nz = curv::canonical_components(&self.inner)
            .into_iter()
            .filter(|(_, v)| *v != 0.0)
            .count();
        format!("CurvatureTensor(norm={}, nonzero_components={nz})", self.inner.norm())
    }
}

/// `Σ λᵢ R_{Φᵢ}` for the standard quaternion structure on the standard frame,
/// or on a seeded random frame of the given orientation.
#[pyfunction]
#[pyo3(signature = (lambdas, seed=None, orientation=1))]
fn synthesize(lambdas: [f64; 3], seed: Option<u64>, orientation: i8) -> PyResult<PyCurvature> {
    let basis = match seed {
        Some(s) => random_orthonormal(&mut ChaCha8Rng::seed_from_u64(s), orientation),
        None if orientation >= 0 => OrientedBasis::standard(),
        None => OrientedBasis::standard().with_last_flipped(),
    };
    let q = quaternion::standard_structure(&basis).map_err(err)?;
    Ok(wrap(quaternion::synthesize(&q, lambdas)))
}

fn chart(name: &str, params: Option<BTreeMap<String, f64>>) -> PyResult<metriclab::MetricChart> {
    metriclab::chart_by_name(name, &params.unwrap_or_default()).map_err(err)
}

/// Finite-difference curvature of a built-in chart in its orthonormal frame.
#[pyfunction]
#[pyo3(signature = (chart_name, point, step=metriclab::DEFAULT_STEP, params=None))]
fn riemann_at(
    chart_name: &str,
    point: [f64; 4],
    step: f64,
    params: Option<BTreeMap<String, f64>>,
) -> PyResult<PyCurvature> {
    let c = chart(chart_name, params)?;
    metriclab::riemann_at(&c, &point, step)
        .map(|fc| wrap(fc.curvature))
        .map_err(err)
}

#[pyfunction]
#[pyo3(signature = (chart_name, point, step=metriclab::DEFAULT_STEP, params=None))]
fn classify_point(
    py: Python<'_>,
    chart_name: &str,
    point: [f64; 4],
    step: f64,
    params: Option<BTreeMap<String, f64>>,
) -> PyResult<Py<PyAny>> {
    let c = chart(chart_name, params)?;
    to_py(py, &metriclab::classify_point(&c, &point, step).map_err(err)?)
}

/// Compares `g` with `e^α g`; `alpha` is `zero`, `sin`, `const:C`, `quad:C` or `lin:C1,C2,C3,C4`.
#[pyfunction]
#[pyo3(signature = (chart_name, alpha, point, step=metriclab::DEFAULT_STEP, params=None))]
fn conformal_check(
    py: Python<'_>,
    chart_name: &str,
    alpha: &str,
    point: [f64; 4],
    step: f64,
    params: Option<BTreeMap<String, f64>>,
) -> PyResult<Py<PyAny>> {
    let c = chart(chart_name, params)?;
    let a = ConformalFactor::parse(alpha).map_err(err)?;
    to_py(py, &metriclab::conformal_check(&c, a, &point, step).map_err(err)?)
}

#[pyfunction]
fn chart_names() -> Vec<&'static str> {
    metriclab::CHART_NAMES.to_vec()
}

/// Runs the seeded equivalence battery and returns its summary.
#[pyfunction]
#[pyo3(signature = (seed=1, count=50))]
fn run_battery(py: Python<'_>, seed: u64, count: usize) -> PyResult<Py<PyAny>> {
    let cfg = verify::BatteryConfig {
        seed,
        count,
        table: Phi2Table::Corrected,
    };
    let rep = py.detach(|| verify::run_battery(&cfg)).map_err(err)?;
    to_py(py, &rep)
}

#[pymodule]
#[pyo3(name = "selfdual")]
fn selfdual_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyCurvature>()?;
    m.add("SelfdualError", m.py().get_type::<SelfdualError>())?;
    m.add_function(wrap_pyfunction!(synthesize, m)?)?;
    m.add_function(wrap_pyfunction!(riemann_at, m)?)?;
    m.add_function(wrap_pyfunction!(classify_point, m)?)?;
    m.add_function(wrap_pyfunction!(conformal_check, m)?)?;
    m.add_function(wrap_pyfunction!(chart_names, m)?)?;
    m.add_function(wrap_pyfunction!(run_battery, m)?)?;
    Ok(())
}
