//! Calls through the Python module object with an embedded interpreter.

use pyo3::prelude::*;
use pyo3::types::PyDict;

fn module(py: Python<'_>) -> Bound<'_, PyModule> {
    let m = PyModule::new(py, "wedgecrack_py").unwrap();
    wedgecrack_py::register(&m).unwrap();
    m
}

#[test]
fn edge_sif_returns_dict() {
    Python::attach(|py| {
        let m = module(py);
        let d = m.getattr("edge_sif").unwrap().call1((std::f64::consts::FRAC_PI_2,)).unwrap();
        let d = d.cast_into::<PyDict>().unwrap();
        let k: f64 = d.get_item("k_i").unwrap().unwrap().extract().unwrap();
        assert!((k - 1.776778).abs() < 1e-5);
    });
}

#[test]
fn keyword_arguments_and_eigen() {
    Python::attach(|py| {
        let m = module(py);
        let kw = PyDict::new(py);
        kw.set_item("which", "first").unwrap();
        let d = m.getattr("edge_eigen_sif").unwrap().call((std::f64::consts::FRAC_PI_4,), Some(&kw)).unwrap();
        let mu: f64 = d.get_item("mu").unwrap().extract().unwrap();
        assert!((mu - 0.673583).abs() < 1e-6);
    });
}

#[test]
fn errors_map_to_python_exceptions() {
    Python::attach(|py| {
        let m = module(py);
        let e = m.getattr("edge_sif").unwrap().call1((0.0,)).unwrap_err();
        assert!(e.is_instance_of::<pyo3::exceptions::PyValueError>(py));
        let e = m.getattr("edge_eigen_sif").unwrap().call1((0.3, "second")).unwrap_err();
        assert!(e.is_instance_of::<pyo3::exceptions::PyValueError>(py));
    });
}

#[test]
fn halfplane_and_oracle_agree() {
    Python::attach(|py| {
        let m = module(py);
        let d = m.getattr("halfplane_sif").unwrap().call1((0.5,)).unwrap();
        let kp: f64 = d.get_item("k_i_plus").unwrap().extract().unwrap();
        let (_, op): (f64, f64) = m.getattr("halfplane_oracle").unwrap().call1((0.5,)).unwrap().extract().unwrap();
        assert!((kp - op).abs() < 1e-3 * op.abs());
        let g: f64 = m.getattr("koiter_gamma").unwrap().call0().unwrap().extract().unwrap();
        assert!((g - 1.1215222).abs() < 1e-6);
    });
}
