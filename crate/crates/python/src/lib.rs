//! Python bindings. Build with `maturin develop --features extension-module`.

use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;
use quasi_herglotz::cone_solver::SolveOptions;
use quasi_herglotz::presets::{angular_strength, hat_equivalent};
use quasi_herglotz::{Error, Preset, Scenario};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Solver(m) => PyRuntimeError::new_err(m),
        other => PyValueError::new_err(other.to_string()),
    }
}

#[pyclass(name = "SplineBasis", frozen)]
pub struct PySplineBasis(quasi_herglotz::SplineBasis);

#[pymethods]
impl PySplineBasis {
    #[new]
    fn new(lo: f64, hi: f64, count: usize, order: usize) -> PyResult<Self> {
        quasi_herglotz::SplineBasis::new(lo, hi, count, order).map(Self).map_err(to_py)
    }

    #[getter]
    fn count(&self) -> usize {
        self.0.count()
    }

    #[getter]
    fn order(&self) -> usize {
        self.0.order()
    }

    #[getter]
    fn spacing(&self) -> f64 {
        self.0.spacing()
    }

    fn support(&self, n: usize) -> PyResult<(f64, f64)> {
        self.0.support(n).map_err(to_py)
    }

    fn eval(&self, n: usize, x: f64) -> PyResult<f64> {
        self.0.eval(n, x).map_err(to_py)
    }

    fn hilbert_eval(&self, n: usize, x: f64) -> PyResult<f64> {
        self.0.hilbert_eval(n, x).map_err(to_py)
    }

    fn cauchy_eval(&self, n: usize, z: Complex64) -> PyResult<Complex64> {
        self.0.cauchy_eval(n, z).map_err(to_py)
    }

    fn moment(&self, n: usize, k: i32) -> PyResult<f64> {
        self.0.moment(n, k).map_err(to_py)
    }
}

#[pyclass(name = "QuasiHerglotzRep", frozen)]
pub struct PyRep(quasi_herglotz::QuasiHerglotzRep);

#[pymethods]
impl PyRep {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        quasi_herglotz::QuasiHerglotzRep::from_json(text).map(Self).map_err(to_py)
    }

    fn to_json(&self) -> String {
        self.0.to_json()
    }

    #[getter]
    fn symmetric(&self) -> bool {
        self.0.is_symmetric()
    }

    #[getter]
    fn b(&self) -> f64 {
        self.0.b()
    }

    /// `(location, amplitude)` pairs.
    #[getter]
    fn masses(&self) -> Vec<(f64, f64)> {
        self.0.masses().iter().map(|m| (m.location, m.amplitude)).collect()
    }

    #[getter]
    fn density_coeffs(&self) -> Vec<f64> {
        self.0.density_coeffs().to_vec()
    }

    fn eval_boundary(&self, x: f64) -> PyResult<Complex64> {
        self.0.eval_boundary(x).map_err(to_py)
    }

    fn eval_upper(&self, z: Complex64) -> PyResult<Complex64> {
        self.0.eval_upper(z).map_err(to_py)
    }

    fn verify_sum_rule(&self, k: i32) -> PyResult<f64> {
        quasi_herglotz::verify_sum_rule(&self.0, k).map_err(to_py)
    }
}

#[pyfunction]
fn passive_bound(eps_inf: f64, eps_t: f64, bandwidth: f64) -> PyResult<f64> {
    quasi_herglotz::passive_bound(eps_inf, eps_t, bandwidth).map_err(to_py)
}

#[pyfunction]
fn presets() -> Vec<&'static str> {
    Preset::ALL.iter().map(|p| p.name()).collect()
}

fn solve(py: Python<'_>, scenario: &Scenario, tol: Option<f64>, max_iter: Option<usize>) -> PyResult<Py<PyDict>> {
    let mut opts = SolveOptions::default();
    if let Some(t) = tol {
        opts.tol_rel = t;
    }
    if let Some(m) = max_iter {
        opts.max_iter = m;
    }
    let r = py.detach(|| quasi_herglotz::solve_approximation(scenario, &opts)).map_err(to_py)?;
    let out = PyDict::new(py);
    out.set_item("error", r.error)?;
    out.set_item("status", format!("{:?}", r.solution.status))?;
    out.set_item("iterations", r.solution.iterations)?;
    out.set_item("p0", r.rep.masses().iter().find(|m| m.location == 0.0).map(|m| angular_strength(m.amplitude)))?;
    if let Some(spacing) = scenario.display_spacing {
        let eq: Vec<(f64, f64)> = r
            .rep
            .masses()
            .iter()
            .filter(|m| m.location != 0.0)
            .map(|m| (m.location, hat_equivalent(m.amplitude, spacing)))
            .collect();
        out.set_item("hat_equivalents", eq)?;
    }
    out.set_item("rep", PyRep(r.rep))?;
    Ok(out.unbind())
}

/// Solves a named preset and returns a dict with the error, status and representation.
#[pyfunction]
#[pyo3(signature = (name, tol=None, max_iter=None))]
fn solve_preset(py: Python<'_>, name: &str, tol: Option<f64>, max_iter: Option<usize>) -> PyResult<Py<PyDict>> {
    let preset: Preset = name.parse().map_err(to_py)?;
    solve(py, &preset.scenario(), tol, max_iter)
}

#[pyfunction]
#[pyo3(signature = (text, tol=None, max_iter=None))]
fn solve_scenario(py: Python<'_>, text: &str, tol: Option<f64>, max_iter: Option<usize>) -> PyResult<Py<PyDict>> {
    let scenario = Scenario::from_json(text).map_err(to_py)?;
    solve(py, &scenario, tol, max_iter)
}

#[pymodule]
fn quasi_herglotz_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySplineBasis>()?;
    m.add_class::<PyRep>()?;
    m.add_function(wrap_pyfunction!(passive_bound, m)?)?;
    m.add_function(wrap_pyfunction!(presets, m)?)?;
    m.add_function(wrap_pyfunction!(solve_preset, m)?)?;
    m.add_function(wrap_pyfunction!(solve_scenario, m)?)?;
    Ok(())
}
