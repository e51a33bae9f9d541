//! Python bindings. Every call returns a dict of floats with the same keys as the CLI columns.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

pub mod api;

use api::Record;

fn to_py(e: wedgecrack::Error) -> PyErr {
    if e.is_validation() {
        PyValueError::new_err(e.to_string())
    } else {
        PyRuntimeError::new_err(e.to_string())
    }
}

fn to_dict<'py>(py: Python<'py>, rec: Record) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    for (k, v) in rec {
        d.set_item(k, v)?;
    }
    Ok(d)
}

/// SIFs of an edge crack 0 < r < b under constant crack-face load (p1, p2).
#[pyfunction]
#[pyo3(signature = (alpha, p1 = 1.0, p2 = 0.0, b = 1.0, tol = 1e-10))]
fn edge_sif(py: Python<'_>, alpha: f64, p1: f64, p2: f64, b: f64, tol: f64) -> PyResult<Bound<'_, PyDict>> {
    let rec = py.detach(|| api::edge_constant(alpha, b, [p1, p2], tol)).map_err(to_py)?;
    to_dict(py, rec)
}

/// SIFs of an edge crack loaded by the first or second eigen-solution.
#[pyfunction]
#[pyo3(signature = (alpha, which = "first", k_theta0 = 1.0, b = 1.0, tol = 1e-10))]
fn edge_eigen_sif<'py>(
    py: Python<'py>,
    alpha: f64,
    which: &str,
    k_theta0: f64,
    b: f64,
    tol: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let kind = api::parse_eigen(which).map_err(to_py)?;
    let rec = py.detach(|| api::edge_eigen(alpha, b, kind, k_theta0, tol)).map_err(to_py)?;
    to_dict(py, rec)
}

/// SIFs at both tips of an internal crack a < r < b on theta = 0.
#[pyfunction]
#[pyo3(signature = (alpha, a, b = 1.0, p1 = 1.0, p2 = 0.0, young = 1.0, poisson = 0.3, plane_strain = false, tol = 1e-10))]
#[allow(clippy::too_many_arguments)]
fn internal_sif(
    py: Python<'_>,
    alpha: f64,
    a: f64,
    b: f64,
    p1: f64,
    p2: f64,
    young: f64,
    poisson: f64,
    plane_strain: bool,
    tol: f64,
) -> PyResult<Bound<'_, PyDict>> {
    let m = api::material(young, poisson, plane_strain).map_err(to_py)?;
    let rec = py.detach(|| api::internal(alpha, a, b, [p1, p2], &m, tol)).map_err(to_py)?;
    to_dict(py, rec)
}

/// Mode I SIFs of a crack a < r < b normal to a half-plane boundary.
#[pyfunction]
#[pyo3(signature = (a, b = 1.0, p = 1.0, young = 1.0, poisson = 0.3, plane_strain = false))]
fn halfplane_sif(
    py: Python<'_>,
    a: f64,
    b: f64,
    p: f64,
    young: f64,
    poisson: f64,
    plane_strain: bool,
) -> PyResult<Bound<'_, PyDict>> {
    let m = api::material(young, poisson, plane_strain).map_err(to_py)?;
    let rec = py.detach(|| api::halfplane(a, b, p, &m)).map_err(to_py)?;
    to_dict(py, rec)
}

/// Collocation solution of the half-plane crack under constant pressure: (K-, K+).
#[pyfunction]
#[pyo3(signature = (a, b = 1.0, p = 1.0, nodes = 128))]
fn halfplane_oracle(py: Python<'_>, a: f64, b: f64, p: f64, nodes: usize) -> PyResult<(f64, f64)> {
    py.detach(|| api::oracle(a, b, p, nodes)).map_err(to_py)
}

/// Edge-crack factor of the half-plane problem, K_I = sqrt(pi b) P gamma.
#[pyfunction]
fn koiter_gamma(py: Python<'_>) -> PyResult<f64> {
    py.detach(api::koiter_gamma).map_err(to_py)
}

/// Add the functions to `m`; shared by the module init and embedded use.
pub fn register(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(edge_sif, m)?)?;
    m.add_function(wrap_pyfunction!(edge_eigen_sif, m)?)?;
    m.add_function(wrap_pyfunction!(internal_sif, m)?)?;
    m.add_function(wrap_pyfunction!(halfplane_sif, m)?)?;
    m.add_function(wrap_pyfunction!(halfplane_oracle, m)?)?;
    m.add_function(wrap_pyfunction!(koiter_gamma, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}

#[pymodule]
fn wedgecrack_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    register(m)
}
