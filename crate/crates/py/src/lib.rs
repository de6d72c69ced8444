//! Python bindings: run the `su2pd` subcommands and a few primitives in-process.

use std::collections::HashMap;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use su2_paradiff::cg::clebsch_gordan as cg;
use su2_paradiff::runner::{self, RunConfig, Subcommand};
use su2_paradiff::structure;
use su2_paradiff::Spin;

fn err(e: su2_paradiff::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn spin(j: f64) -> PyResult<Spin> {
    Spin::new(j).map_err(err)
}

/// Outcome of one subcommand run.
#[pyclass(frozen, get_all)]
struct Report {
    subcommand: String,
    /// Rendered CSV or JSON without the timestamp line.
    text: String,
    passed: bool,
    /// One CSV line (`name,measured,lo,hi,pass`) per failed check.
    failures: Vec<String>,
}

#[pymethods]
impl Report {
    fn __repr__(&self) -> String {
        format!("Report(subcommand={:?}, passed={}, failures={})", self.subcommand, self.passed, self.failures.len())
    }
}

/// Runs a subcommand; `settings` uses the config-file keys (`bandlimit`, `delta`, `gap`, `s`, `seed`, …).
#[pyfunction]
#[pyo3(signature = (subcommand, settings = None))]
fn run(py: Python<'_>, subcommand: &str, settings: Option<HashMap<String, String>>) -> PyResult<Report> {
    let sub: Subcommand = subcommand.parse().map_err(err)?;
    let mut cfg = RunConfig::default();
    for (k, v) in settings.unwrap_or_default() {
        cfg.set(&k, &v).map_err(err)?;
    }
    let report = py.detach(|| runner::run(sub, &cfg)).map_err(err)?;
    Ok(Report {
        subcommand: sub.name().to_string(),
        text: report.body(),
        passed: report.pass(),
        failures: report.failures().iter().map(|c| c.csv()).collect(),
    })
}

/// Names of all subcommands.
#[pyfunction]
fn subcommands() -> Vec<&'static str> {
    Subcommand::ALL.iter().map(|s| s.name()).collect()
}

/// Spins `|j1 − j2| ..= j1 + j2` occurring in a product of spin-`j1` and spin-`j2` functions.
#[pyfunction]
fn product_support(j1: f64, j2: f64) -> PyResult<Vec<f64>> {
    Ok(structure::product_support(spin(j1)?, spin(j2)?).into_iter().map(|j| j.value()).collect())
}

/// `(N(t), N(t)/t³)`: dimension of the span of spins with `√λ ≤ t`.
#[pyfunction]
fn weyl_count(t: f64) -> (f64, f64) {
    structure::weyl_count(t)
}

/// Clebsch–Gordan coefficient `⟨j1 m1; j2 m2 | j m⟩`.
#[pyfunction]
fn clebsch_gordan(j1: f64, m1: f64, j2: f64, m2: f64, j: f64, m: f64) -> f64 {
    let two = |x: f64| (2.0 * x).round() as i64;
    cg(two(j1), two(m1), two(j2), two(m2), two(j), two(m))
}

#[pymodule]
fn su2_paradiff_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Report>()?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(subcommands, m)?)?;
    m.add_function(wrap_pyfunction!(product_support, m)?)?;
    m.add_function(wrap_pyfunction!(weyl_count, m)?)?;
    m.add_function(wrap_pyfunction!(clebsch_gordan, m)?)?;
    Ok(())
}
