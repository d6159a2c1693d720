//! Python bindings. Structured results come back as plain dicts and lists,
//! built by round-tripping the Rust reports through JSON.

use std::path::PathBuf;

use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;

use mocpde::dynamics::Model;
use mocpde::evolution::{run, InitialData, Normalization, SimConfig, TimeStep};
use mocpde::littlewood_paley::DyadicPartition;
use mocpde::moc::{
    canonical_grid, search_parameters, verify_negativity, EstimateConstants, MocParameters, ModulusOfContinuity,
    SearchBudget,
};
use mocpde::spectral::snapshot::{read_snapshot, write_snapshot};
use mocpde::spectral::{Grid, ScalarField};

create_exception!(pymocpde, MocpdeError, PyException);

fn err(e: impl std::fmt::Display) -> PyErr {
    MocpdeError::new_err(e.to_string())
}

fn to_py<'py, T: serde::Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(err)?;
    py.import("json")?.call_method1("loads", (text,))
}

fn constants(c1: f64, c2: f64) -> PyResult<EstimateConstants> {
    EstimateConstants::new(c1, c2).map_err(err)
}

/// ω(ξ) for the explicit modulus with the given parameters.
#[pyfunction]
fn omega(xi: f64, alpha: f64, r: f64, gamma: f64, delta: f64) -> PyResult<f64> {
    let p = MocParameters::new(alpha, r, gamma, delta).map_err(err)?;
    ModulusOfContinuity::explicit(p).value(xi).map_err(err)
}

/// Negativity report on the canonical ξ grid.
#[pyfunction]
#[pyo3(signature = (alpha, r, gamma, delta, c1 = 1.0, c2 = 1.0))]
fn verify<'py>(
    py: Python<'py>,
    alpha: f64,
    r: f64,
    gamma: f64,
    delta: f64,
    c1: f64,
    c2: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let p = MocParameters::new(alpha, r, gamma, delta).map_err(err)?;
    let rep = verify_negativity(&p, &constants(c1, c2)?, &canonical_grid(delta)).map_err(err)?;
    to_py(py, &rep)
}

#[pyfunction]
#[pyo3(signature = (alpha, c1 = 1.0, c2 = 1.0, budget = 64))]
fn search<'py>(py: Python<'py>, alpha: f64, c1: f64, c2: f64, budget: usize) -> PyResult<Bound<'py, PyAny>> {
    let b = SearchBudget { max_candidates: budget, ..SearchBudget::default() };
    let rep = search_parameters(alpha, &constants(c1, c2)?, &b).map_err(err)?;
    to_py(py, &rep)
}

/// Runs a seeded simulation; returns `{"report": ..., "samples": [...]}`.
#[pyfunction]
#[pyo3(signature = (model = "qg2d", alpha = 0.5, nu = 0.1, n = None, t_final = 1.0, dt = None, seed = 0, k_max = 8.0, hm = 1.0, stride = 10))]
#[allow(clippy::too_many_arguments)]
fn simulate<'py>(
    py: Python<'py>,
    model: &str,
    alpha: f64,
    nu: f64,
    n: Option<usize>,
    t_final: f64,
    dt: Option<f64>,
    seed: u64,
    k_max: f64,
    hm: f64,
    stride: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let model: Model = model.parse().map_err(err)?;
    let mut c = SimConfig::new(model, alpha, nu);
    if let Some(n) = n {
        c.n = n;
    }
    if let Some(dt) = dt {
        c.time_step = TimeStep::Fixed { dt };
    }
    c.t_final = t_final;
    c.stride = stride;
    c.initial = InitialData::Random { seed, k_min: 1.0, k_max, normalization: Normalization::Hm { value: hm } };
    let out = py.detach(|| run(&c)).map_err(err)?;
    let value = serde_json::json!({ "report": out.report, "samples": out.series.samples });
    to_py(py, &value)
}

/// Reads a MOCF snapshot as `(dim, n, length, values)`.
#[pyfunction]
fn load_field(path: PathBuf) -> PyResult<(usize, usize, f64, Vec<f64>)> {
    let f = read_snapshot(&path).map_err(err)?;
    let g = *f.grid();
    Ok((g.dim(), g.n(), g.length(), f.into_values()))
}

#[pyfunction]
fn save_field(path: PathBuf, dim: usize, n: usize, length: f64, values: Vec<f64>) -> PyResult<()> {
    let g = Grid::new(dim, n, length).map_err(err)?;
    let f = ScalarField::new(g, values).map_err(err)?;
    write_snapshot(&path, &f).map_err(err)
}

/// Besov norm and block profile of a field given by its grid samples.
#[pyfunction]
#[pyo3(signature = (values, dim, n, s, p, r, homogeneous = false, length = std::f64::consts::TAU))]
#[allow(clippy::too_many_arguments)]
fn besov<'py>(
    py: Python<'py>,
    values: Vec<f64>,
    dim: usize,
    n: usize,
    s: f64,
    p: f64,
    r: f64,
    homogeneous: bool,
    length: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let g = Grid::new(dim, n, length).map_err(err)?;
    let f = ScalarField::new(g, values).map_err(err)?;
    let profile = DyadicPartition::new(g).and_then(|d| d.profile(&f, s, p, r, homogeneous)).map_err(err)?;
    let value = serde_json::json!({ "norm": profile.norm(), "profile": profile });
    to_py(py, &value)
}

#[pymodule]
fn pymocpde(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("MocpdeError", m.py().get_type::<MocpdeError>())?;
    m.add_function(wrap_pyfunction!(omega, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(search, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(load_field, m)?)?;
    m.add_function(wrap_pyfunction!(save_field, m)?)?;
    m.add_function(wrap_pyfunction!(besov, m)?)?;
    Ok(())
}
