//! Python bindings for the certification toolkit.
//!
//! The module mirrors the library surface: `Function` and `VectorField`
//! wrap the expression parser, `Orbit` wraps numerical flow lines, and the
//! free functions (`integrate`, `certify`, `flatness`, `gronwall`, ...)
//! return plain dicts shaped exactly like the CLI's JSON reports.
//!
//! ```python
//! import gscert
//!
//! field = gscert.VectorField(["x1", "x2"])
//! f = gscert.Function("x1^2 + x2^2", 2)
//! cert = gscert.certify(field, f, radius=1.0, c=2.0)
//! print(cert["conclusion"])
//! ```
//!
//! Input problems raise `ValueError`; numerical failures (divergent
//! orbits, singular Jacobians, domain errors) raise `RuntimeError`.

use gscert_core::catalog as core_catalog;
use gscert_core::certifier::{self, CertifyConfig};
use gscert_core::error::Error;
use gscert_core::expr::{self, ParsedFunction};
use gscert_core::field::{self, VectorField};
use gscert_core::flow::{self, IntegratorConfig, Method, Orbit, OrbitDirection};
use gscert_core::inequality::{self, RhsMode};
use gscert_core::report;
use gscert_core::sample::SamplerConfig;
use pyo3::exceptions::{PyKeyError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

fn to_py_err(e: Error) -> PyErr {
    match e {
        Error::Syntax { .. }
        | Error::Arity { .. }
        | Error::InvalidInput(_)
        | Error::InsufficientSamples { .. } => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

/// Converts any report struct into Python dicts/lists via its JSON form,
/// so the Python surface stays byte-compatible with the CLI output.
fn report_to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value)
        .map_err(|e| PyRuntimeError::new_err(format!("report serialization failed: {e}")))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn parse_rhs(rhs: &str) -> PyResult<RhsMode> {
    match rhs {
        "f" => Ok(RhsMode::FunctionValue),
        "norm" => Ok(RhsMode::PointNorm),
        other => Err(PyValueError::new_err(format!("rhs must be 'f' or 'norm', got '{other}'"))),
    }
}

/// A scalar function of `x1..xn`, parsed from an expression string.
#[pyclass(frozen, name = "Function")]
struct PyFunction {
    inner: ParsedFunction,
}

#[pymethods]
impl PyFunction {
    /// Function("exp(-1/(x1^2))", 1, origin_value=0.0)
    #[new]
    #[pyo3(signature = (expr, dim, origin_value=None))]
    fn new(expr: &str, dim: usize, origin_value: Option<f64>) -> PyResult<Self> {
        let f = expr::parse(expr, dim).map_err(to_py_err)?;
        let inner = match origin_value {
            Some(v) => f.with_origin_value(v),
            None => f,
        };
        Ok(PyFunction { inner })
    }

    /// Evaluates the function at a point.
    fn __call__(&self, point: Vec<f64>) -> PyResult<f64> {
        self.inner.evaluate(&point).map_err(to_py_err)
    }

    /// Exact symbolic partial derivative with respect to `x<var>` (1-based).
    fn diff(&self, var: usize) -> PyResult<PyFunction> {
        Ok(PyFunction { inner: self.inner.differentiate(var).map_err(to_py_err)? })
    }

    /// Constant-folded, identity-eliminated copy.
    fn simplified(&self) -> PyFunction {
        PyFunction { inner: self.inner.simplified() }
    }

    #[getter]
    fn arity(&self) -> usize {
        self.inner.arity
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Function(\"{}\", {})", self.inner, self.inner.arity)
    }
}

/// A polynomial-or-elementary vector field `x' = X(x)`, one expression per
/// component.
#[pyclass(frozen, name = "VectorField")]
struct PyVectorField {
    inner: VectorField,
}

#[pymethods]
impl PyVectorField {
    /// VectorField(["x2", "-x1"])
    #[new]
    fn new(components: Vec<String>) -> PyResult<Self> {
        let refs: Vec<&str> = components.iter().map(String::as_str).collect();
        Ok(PyVectorField { inner: VectorField::parse(&refs).map_err(to_py_err)? })
    }

    /// Evaluates the field at a point.
    fn __call__(&self, point: Vec<f64>) -> PyResult<Vec<f64>> {
        self.inner.evaluate(&point).map_err(to_py_err)
    }

    #[getter]
    fn dimension(&self) -> usize {
        self.inner.dimension
    }

    /// Jacobian matrix at a point, as nested lists (row major).
    fn jacobian(&self, point: Vec<f64>) -> PyResult<Vec<Vec<f64>>> {
        let m = field::jacobian_at(&self.inner, &point).map_err(to_py_err)?;
        Ok(m.rows().to_vec())
    }

    /// Eigenvalue report for the singular point at the origin.
    #[pyo3(signature = (tol=1e-9))]
    fn classify<'py>(&self, py: Python<'py>, tol: f64) -> PyResult<Bound<'py, PyAny>> {
        let origin = vec![0.0; self.inner.dimension];
        let spectrum =
            field::classify_singularity(&self.inner, &origin, tol).map_err(to_py_err)?;
        report_to_py(py, &spectrum)
    }

    /// Checks `<X(x), x> > 0` over the punctured disc of the given radius.
    #[pyo3(signature = (radius=1.0, seed=42))]
    fn inner_product_positivity<'py>(
        &self,
        py: Python<'py>,
        radius: f64,
        seed: u64,
    ) -> PyResult<Bound<'py, PyAny>> {
        let sampler = SamplerConfig { seed, ..Default::default() };
        let positivity = field::inner_product_positivity(&self.inner, radius, &sampler)
            .map_err(to_py_err)?;
        report_to_py(py, &positivity)
    }

    /// Derivative of `f` along the field at a point: `sum_i X_i * df/dx_i`.
    fn derive_along(&self, f: &PyFunction, point: Vec<f64>) -> PyResult<f64> {
        inequality::derive_along(&self.inner, &f.inner, &point).map_err(to_py_err)
    }

    fn __str__(&self) -> String {
        let parts: Vec<String> = self.inner.components.iter().map(|c| c.to_string()).collect();
        parts.join(", ")
    }

    fn __repr__(&self) -> String {
        format!("VectorField([{}])", self.__str__())
    }
}

/// One numerically integrated flow line.
#[pyclass(frozen, name = "Orbit")]
struct PyOrbit {
    inner: Orbit,
}

#[pymethods]
impl PyOrbit {
    #[getter]
    fn times(&self) -> Vec<f64> {
        self.inner.times.clone()
    }

    #[getter]
    fn states(&self) -> Vec<Vec<f64>> {
        self.inner.states.clone()
    }

    /// Why integration stopped: "reached_t_max", "converged_to_singularity",
    /// "left_domain", or "step_underflow".
    #[getter]
    fn termination(&self) -> &'static str {
        self.inner.termination.reason()
    }

    #[getter]
    fn direction(&self) -> &'static str {
        match self.inner.direction {
            OrbitDirection::Forward => "forward",
            OrbitDirection::Backward => "backward",
        }
    }

    #[getter]
    fn limit_point(&self) -> Option<Vec<f64>> {
        self.inner.limit_point.clone()
    }

    #[getter]
    fn final_time(&self) -> f64 {
        self.inner.final_time()
    }

    #[getter]
    fn final_state(&self) -> Vec<f64> {
        self.inner.final_state().to_vec()
    }

    fn __len__(&self) -> usize {
        self.inner.times.len()
    }

    /// Fits `|x(t) - a| <= theta * e^(-lambda t) * |x(0) - a|` against the
    /// orbit's own limit point. Requires a convergent orbit.
    fn sink_fit<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        let limit = self.inner.limit_point.clone().ok_or_else(|| {
            PyValueError::new_err("sink_fit needs a convergent orbit with a limit point")
        })?;
        let fit = flow::fit_sink_rate(&self.inner, &limit).map_err(to_py_err)?;
        report_to_py(py, &fit)
    }

    /// The orbit as `t,x1,..,xn` CSV with a termination footer.
    fn to_csv(&self) -> String {
        report::orbit_to_csv(&self.inner)
    }

    fn __repr__(&self) -> String {
        format!(
            "Orbit({} samples, {}, {})",
            self.inner.times.len(),
            self.direction(),
            self.inner.termination.reason()
        )
    }
}

/// Integrates one orbit of `x' = X(x)` (or `x' = -X(x)` backward).
#[pyfunction]
#[pyo3(signature = (
    field, x0, t_max=10.0, escape_radius=10.0, direction="forward",
    method="rk45", step=1e-3, convergence_radius=1e-7,
))]
#[allow(clippy::too_many_arguments)]
fn integrate(
    field: &PyVectorField,
    x0: Vec<f64>,
    t_max: f64,
    escape_radius: f64,
    direction: &str,
    method: &str,
    step: f64,
    convergence_radius: f64,
) -> PyResult<PyOrbit> {
    let method = match method {
        "rk45" => Method::default(),
        "rk4" => Method::FixedRk4 { step },
        other => {
            return Err(PyValueError::new_err(format!(
                "method must be 'rk45' or 'rk4', got '{other}'"
            )))
        }
    };
    let direction = match direction {
        "forward" => OrbitDirection::Forward,
        "backward" => OrbitDirection::Backward,
        other => {
            return Err(PyValueError::new_err(format!(
                "direction must be 'forward' or 'backward', got '{other}'"
            )))
        }
    };
    let config = IntegratorConfig {
        method,
        t_max,
        escape_radius,
        convergence_radius,
        ..Default::default()
    };
    let orbit = flow::integrate(&field.inner, &x0, &config, direction).map_err(to_py_err)?;
    Ok(PyOrbit { inner: orbit })
}

/// Runs the full vanishing certificate; returns the certificate as a dict
/// (same shape as `gscert certify` JSON).
#[pyfunction]
#[pyo3(signature = (
    field, f, radius=1.0, c=None, seed=42, rhs="f", kmax=8,
    flat_tol=1e-12, tol_hyperbolic=1e-9,
))]
#[allow(clippy::too_many_arguments)]
fn certify<'py>(
    py: Python<'py>,
    field: &PyVectorField,
    f: &PyFunction,
    radius: f64,
    c: Option<f64>,
    seed: u64,
    rhs: &str,
    kmax: u32,
    flat_tol: f64,
    tol_hyperbolic: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let config = CertifyConfig {
        radius,
        constant_c: c,
        seed,
        hyperbolic_tol: tol_hyperbolic,
        flat_tol,
        k_max: kmax,
        rhs: parse_rhs(rhs)?,
        ..Default::default()
    };
    let cert = certifier::certify_gs(&field.inner, &f.inner, &config).map_err(to_py_err)?;
    report_to_py(py, &cert)
}

/// Probes flatness of `f` at the origin, order by order up to `kmax`.
#[pyfunction]
#[pyo3(signature = (f, radius=1.0, radii=None, kmax=8, seed=42, flat_tol=1e-12))]
fn flatness<'py>(
    py: Python<'py>,
    f: &PyFunction,
    radius: f64,
    radii: Option<Vec<f64>>,
    kmax: u32,
    seed: u64,
    flat_tol: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let radii = radii.unwrap_or_else(|| certifier::default_probe_radii(radius));
    let probe = certifier::flatness_probe(
        &f.inner,
        &radii,
        kmax,
        64 * f.inner.arity,
        seed,
        flat_tol,
    )
    .map_err(to_py_err)?;
    report_to_py(py, &probe)
}

/// Checks `|f(x(t))| <= |f(x0)| * e^(ct)` along the forward orbit from x0.
/// With `c=None` the constant is estimated from disc samples first.
#[pyfunction]
#[pyo3(signature = (field, f, x0, c=None, radius=1.0, t_max=1.0, escape_radius=None, slack=1e-7, seed=42))]
#[allow(clippy::too_many_arguments)]
fn gronwall<'py>(
    py: Python<'py>,
    field: &PyVectorField,
    f: &PyFunction,
    x0: Vec<f64>,
    c: Option<f64>,
    radius: f64,
    t_max: f64,
    escape_radius: Option<f64>,
    slack: f64,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let (c, c_source) = match c {
        Some(c) => (c, "user"),
        None => {
            let sampler = SamplerConfig { seed, ..Default::default() };
            let estimate = inequality::estimate_inequality_constant(
                &field.inner,
                &f.inner,
                radius,
                &sampler,
                inequality::DEFAULT_F_FLOOR,
            )
            .map_err(to_py_err)?;
            (estimate.c_hat, "estimated")
        }
    };
    let config = IntegratorConfig {
        t_max,
        escape_radius: escape_radius.unwrap_or(10.0 * radius),
        ..Default::default()
    };
    let orbit = flow::integrate(&field.inner, &x0, &config, OrbitDirection::Forward)
        .map_err(to_py_err)?;
    let bound =
        inequality::verify_gronwall_along_orbit(&orbit, &f.inner, c, slack).map_err(to_py_err)?;
    let out = serde_json::json!({
        "c_source": c_source,
        "termination": orbit.termination.reason(),
        "report": bound,
    });
    report_to_py(py, &out)
}

/// The power-law lower bound along a backward orbit into the origin:
/// `|f(x)| >= k * |x|^(c/lambda)`. Returns `(summary, rows)` where rows are
/// `[t, lhs, rhs]` triples.
#[pyfunction]
#[pyo3(signature = (field, f, radius=1.0, c=2.0, seed=42))]
fn lower_bound_witness<'py>(
    py: Python<'py>,
    field: &PyVectorField,
    f: &PyFunction,
    radius: f64,
    c: f64,
    seed: u64,
) -> PyResult<(Bound<'py, PyAny>, Vec<[f64; 3]>)> {
    let (bound, rows) =
        certifier::lower_bound_witness(&field.inner, &f.inner, radius, c, seed)
            .map_err(to_py_err)?;
    Ok((report_to_py(py, &bound)?, rows))
}

/// One-dimensional dichotomy check on `[0, radius]`: a right-isolated zero
/// of `f`, the inequality `|x f'| <= c|f|`, and the induced power bound.
#[pyfunction]
#[pyo3(signature = (f, c, radius=1.0, n_samples=256))]
fn theorem1_check<'py>(
    py: Python<'py>,
    f: &PyFunction,
    c: f64,
    radius: f64,
    n_samples: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let out = certifier::theorem1_check(&f.inner, c, radius, n_samples).map_err(to_py_err)?;
    report_to_py(py, &out)
}

/// Full list of built-in example problems.
#[pyfunction]
fn catalog(py: Python<'_>) -> PyResult<Bound<'_, PyAny>> {
    report_to_py(py, &core_catalog::entries())
}

/// One built-in example problem by name; raises KeyError when unknown.
#[pyfunction]
fn catalog_entry<'py>(py: Python<'py>, name: &str) -> PyResult<Bound<'py, PyAny>> {
    let entry = core_catalog::lookup(name)
        .ok_or_else(|| PyKeyError::new_err(format!("unknown catalog entry '{name}'")))?;
    report_to_py(py, &entry)
}

#[pymodule]
fn gscert(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyFunction>()?;
    m.add_class::<PyVectorField>()?;
    m.add_class::<PyOrbit>()?;
    m.add_function(wrap_pyfunction!(integrate, m)?)?;
    m.add_function(wrap_pyfunction!(certify, m)?)?;
    m.add_function(wrap_pyfunction!(flatness, m)?)?;
    m.add_function(wrap_pyfunction!(gronwall, m)?)?;
    m.add_function(wrap_pyfunction!(lower_bound_witness, m)?)?;
    m.add_function(wrap_pyfunction!(theorem1_check, m)?)?;
    m.add_function(wrap_pyfunction!(catalog, m)?)?;
    m.add_function(wrap_pyfunction!(catalog_entry, m)?)?;
    Ok(())
}
