//! Python bindings for the flow-constant simulator.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};

use percoflow::config::parse_config;
use percoflow::estimators;
use percoflow::functionals::phi_to_infinity;
use percoflow::geometry::body::ConvexBody;
use percoflow::geometry::polytope::direction_set;
use percoflow::law::CapacityLaw;
use percoflow::lattice::CapacityField;
use percoflow::runner;

fn to_py_err(e: percoflow::error::Error) -> PyErr {
    PyRuntimeError::new_err(e.to_string())
}

fn as_v(x: &[f64]) -> PyResult<[f64; 3]> {
    match x.len() {
        2 => Ok([x[0], x[1], 0.0]),
        3 => Ok([x[0], x[1], x[2]]),
        k => Err(PyValueError::new_err(format!(
            "expected 2 or 3 coordinates, found {k}"
        ))),
    }
}

fn v_list(py: Python<'_>, v: [f64; 3], d: usize) -> PyResult<Py<PyList>> {
    Ok(PyList::new(py, &v[..d])?.unbind())
}

/// An edge capacity distribution.
#[pyclass(name = "Law", from_py_object)]
#[derive(Clone)]
struct PyLaw {
    inner: CapacityLaw,
}

#[pymethods]
impl PyLaw {
    #[staticmethod]
    fn constant(c: f64) -> Self {
        PyLaw {
            inner: CapacityLaw::Constant { c },
        }
    }

    #[staticmethod]
    fn bernoulli_scaled(p: f64, value: f64) -> Self {
        PyLaw {
            inner: CapacityLaw::BernoulliScaled { p, value },
        }
    }

    #[staticmethod]
    fn uniform(a: f64, b: f64) -> Self {
        PyLaw {
            inner: CapacityLaw::Uniform { a, b },
        }
    }

    #[staticmethod]
    fn exponential(rate: f64) -> Self {
        PyLaw {
            inner: CapacityLaw::Exponential { rate },
        }
    }

    #[staticmethod]
    fn finite_discrete(atoms: Vec<(f64, f64)>) -> Self {
        PyLaw {
            inner: CapacityLaw::FiniteDiscrete { atoms },
        }
    }

    /// Checks well-formedness and percolation-related warnings for dimension `d`.
    fn validate(&self, py: Python<'_>, d: usize) -> PyResult<Py<PyDict>> {
        let report = percoflow::law::validate_law(&self.inner, d).map_err(to_py_err)?;
        let out = PyDict::new(py);
        out.set_item("zero_atom", report.zero_atom)?;
        out.set_item("pc", report.pc)?;
        out.set_item("subcritical_zeros", report.subcritical_zeros)?;
        out.set_item("exp_moment", report.exp_moment)?;
        out.set_item("warnings", report.warnings)?;
        Ok(out.unbind())
    }

    fn __repr__(&self) -> String {
        format!("{:?}", self.inner)
    }
}

/// A compact convex region with nonempty interior.
#[pyclass(name = "Body", from_py_object)]
#[derive(Clone)]
struct PyBody {
    inner: ConvexBody,
}

#[pymethods]
impl PyBody {
    #[staticmethod]
    fn ball(center: Vec<f64>, radius: f64) -> PyResult<Self> {
        let d = center.len();
        let inner = ConvexBody::ball(as_v(&center)?, radius, d);
        inner.check_non_degenerate().map_err(to_py_err)?;
        Ok(PyBody { inner })
    }

    #[staticmethod]
    #[pyo3(name = "box")]
    fn box_(lo: Vec<f64>, hi: Vec<f64>) -> PyResult<Self> {
        if lo.len() != hi.len() {
            return Err(PyValueError::new_err("lo and hi must have equal length"));
        }
        let d = lo.len();
        let inner = ConvexBody::box_at(as_v(&lo)?, as_v(&hi)?, d);
        inner.check_non_degenerate().map_err(to_py_err)?;
        Ok(PyBody { inner })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn contains(&self, x: Vec<f64>) -> PyResult<bool> {
        Ok(self.inner.contains(as_v(&x)?, 1e-9))
    }

    fn __repr__(&self) -> String {
        format!("{:?}", self.inner)
    }
}

/// Monte Carlo estimate of the flow constant in direction `v`.
#[pyfunction]
#[pyo3(signature = (v, d, n, law, h = 1.0, replicas = 32, master_seed = 0))]
fn estimate_nu(
    py: Python<'_>,
    v: Vec<f64>,
    d: usize,
    n: i64,
    law: PyLaw,
    h: f64,
    replicas: u64,
    master_seed: u64,
) -> PyResult<Py<PyDict>> {
    let rec = estimators::estimate_nu(as_v(&v)?, d, n, h, &law.inner, replicas, master_seed)
        .map_err(to_py_err)?;
    let out = PyDict::new(py);
    out.set_item("direction", v_list(py, rec.direction.unwrap(), d)?)?;
    out.set_item("n", rec.n)?;
    out.set_item("h", rec.h)?;
    out.set_item("replicas", rec.replicas)?;
    out.set_item("samples", rec.samples)?;
    out.set_item("mean", rec.mean)?;
    out.set_item("std", rec.std)?;
    out.set_item("stderr", rec.stderr)?;
    Ok(out.unbind())
}

/// Exact maximal flow from the dilated body to infinity for one replica,
/// with its certified truncation radius and canonical minimal cutset.
#[pyfunction]
#[pyo3(signature = (body, n, law, master_seed = 0, replica = 0))]
fn flow_to_infinity(
    py: Python<'_>,
    body: PyBody,
    n: i64,
    law: PyLaw,
    master_seed: u64,
    replica: u64,
) -> PyResult<Py<PyDict>> {
    let field = CapacityField::new(law.inner, master_seed, replica);
    let res = phi_to_infinity(&body.inner, n, &field).map_err(to_py_err)?;
    let d = body.inner.dim();
    let out = PyDict::new(py);
    out.set_item("value", res.value)?;
    out.set_item("normalized_value", res.value / (n as f64).powi(d as i32 - 1))?;
    out.set_item("truncation_radius", res.truncation_radius)?;
    out.set_item("cut_size", res.cut.edges.len())?;
    out.set_item("cut_capacity", res.cut.capacity)?;
    out.set_item(
        "trace",
        res.trace
            .iter()
            .map(|(r, v)| (*r, *v))
            .collect::<Vec<(f64, f64)>>(),
    )?;
    Ok(out.unbind())
}

/// Size and capacity statistics of canonical minimal cutsets across replicas.
#[pyfunction]
#[pyo3(signature = (body, n, law, eps = 0.5, replicas = 32, master_seed = 0))]
fn cutset_statistics(
    py: Python<'_>,
    body: PyBody,
    n: i64,
    law: PyLaw,
    eps: f64,
    replicas: u64,
    master_seed: u64,
) -> PyResult<Py<PyDict>> {
    let stats = estimators::cutset_statistics(&body.inner, &law.inner, n, eps, replicas, master_seed)
        .map_err(to_py_err)?;
    let rows = PyList::empty(py);
    for r in &stats.per_replica {
        let row = PyDict::new(py);
        row.set_item("replica", r.replica)?;
        row.set_item("size", r.size)?;
        row.set_item("capacity", r.capacity)?;
        row.set_item("n_plus", r.n_plus)?;
        row.set_item("n_minus", r.n_minus)?;
        row.set_item("n_zero", r.n_zero)?;
        rows.append(row)?;
    }
    let out = PyDict::new(py);
    out.set_item("eps", stats.eps)?;
    out.set_item("per_replica", rows)?;
    out.set_item("beta_grid", stats.beta_grid)?;
    out.set_item("beta_frequency", stats.beta_frequency)?;
    Ok(out.unbind())
}

/// Evenly spread unit directions for surface-energy sampling.
#[pyfunction]
fn directions(py: Python<'_>, d: usize, m: usize) -> PyResult<Py<PyList>> {
    let out = PyList::empty(py);
    for v in direction_set(d, m) {
        out.append(v_list(py, v, d)?)?;
    }
    Ok(out.unbind())
}

/// Parses a TOML experiment config and runs it, returning artifact paths.
#[pyfunction]
#[pyo3(signature = (kind, config_text, out_dir, workers = None))]
fn run_experiment(
    py: Python<'_>,
    kind: &str,
    config_text: &str,
    out_dir: &str,
    workers: Option<usize>,
) -> PyResult<Py<PyDict>> {
    let kind = kind
        .parse()
        .map_err(|e: String| PyValueError::new_err(e))?;
    let cfg = parse_config(kind, config_text).map_err(|issues| {
        PyValueError::new_err(
            issues
                .iter()
                .map(|i| i.to_string())
                .collect::<Vec<_>>()
                .join("; "),
        )
    })?;
    let output = runner::run(&cfg, std::path::Path::new(out_dir), workers).map_err(to_py_err)?;
    let out = PyDict::new(py);
    out.set_item("csv", output.csv_path.to_string_lossy())?;
    out.set_item("manifest", output.manifest_path.to_string_lossy())?;
    out.set_item("svg", output.svg_path.to_string_lossy())?;
    Ok(out.unbind())
}

#[pymodule]
fn percoflow_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyLaw>()?;
    m.add_class::<PyBody>()?;
    m.add_function(wrap_pyfunction!(estimate_nu, m)?)?;
    m.add_function(wrap_pyfunction!(flow_to_infinity, m)?)?;
    m.add_function(wrap_pyfunction!(cutset_statistics, m)?)?;
    m.add_function(wrap_pyfunction!(directions, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    m.add(
        "GENERIC_OFFSET",
        estimators::GENERIC_OFFSET,
    )?;
    Ok(())
}
