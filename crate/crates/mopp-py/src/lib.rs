//! Python bindings for the proximal multiobjective solver.
//!
//! The module exposes the registry problems, pointwise evaluation, the
//! criticality certificate, the sampling validator, single solves, and weight
//! sweeps. Structured results cross the boundary as plain dicts and lists so
//! no Python-side classes are needed.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};

use mopp_core::criticality::{certificate_at, pareto_grid_oracle, weak_pareto_grid_oracle};
use mopp_core::problems::{problem_names, registry, validate_problem};
use mopp_core::runner::{parse_config, sweep_weights};
use mopp_core::scalarization::normalize_weights;
use mopp_core::{dominance, run, scalarize, Error};

/// Configuration, weight, and contract mistakes are the caller's to fix;
/// everything else is a solver-side failure.
fn to_py_err(e: Error) -> PyErr {
    match e {
        Error::Config(_) | Error::Weight(_) | Error::Contract(_) => {
            PyValueError::new_err(e.to_string())
        }
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

fn json_to_py<'py>(py: Python<'py>, value: &serde_json::Value) -> PyResult<Py<PyAny>> {
    use pyo3::IntoPyObjectExt;
    match value {
        serde_json::Value::Null => Ok(py.None()),
        serde_json::Value::Bool(b) => b.into_py_any(py),
        serde_json::Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                i.into_py_any(py)
            } else {
                n.as_f64()
                    .expect("JSON numbers are i64 or f64")
                    .into_py_any(py)
            }
        }
        serde_json::Value::String(s) => s.into_py_any(py),
        serde_json::Value::Array(items) => {
            let list = PyList::empty(py);
            for item in items {
                list.append(json_to_py(py, item)?)?;
            }
            list.into_py_any(py)
        }
        serde_json::Value::Object(map) => {
            let dict = PyDict::new(py);
            for (key, item) in map {
                dict.set_item(key, json_to_py(py, item)?)?;
            }
            dict.into_py_any(py)
        }
    }
}

fn serialize_to_py<T: serde::Serialize>(py: Python<'_>, value: &T) -> PyResult<Py<PyAny>> {
    let json = serde_json::to_value(value)
        .map_err(|e| PyRuntimeError::new_err(format!("serialization failed: {e}")))?;
    json_to_py(py, &json)
}

fn join_floats(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| format!("{v:?}"))
        .collect::<Vec<_>>()
        .join(",")
}

/// Names of the built-in problems, sorted.
#[pyfunction]
fn problems() -> Vec<String> {
    problem_names().iter().map(|s| s.to_string()).collect()
}

/// Objective vector of a built-in problem at a point.
#[pyfunction]
fn evaluate(problem: &str, x: Vec<f64>) -> PyResult<Vec<f64>> {
    let p = registry(problem).map_err(to_py_err)?;
    p.evaluate(&x).map_err(to_py_err)
}

/// Jacobian rows (one per objective) of a built-in problem at a point.
#[pyfunction]
fn jacobian(problem: &str, x: Vec<f64>) -> PyResult<Vec<Vec<f64>>> {
    let p = registry(problem).map_err(to_py_err)?;
    p.jacobian(&x).map_err(to_py_err)
}

/// Weighted sum of an objective vector with the weights normalized first.
#[pyfunction(name = "scalarize")]
fn scalarize_py(f: Vec<f64>, z: Vec<f64>) -> PyResult<f64> {
    let weights = normalize_weights(&z).map_err(to_py_err)?;
    scalarize(&f, &weights).map_err(to_py_err)
}

/// Componentwise order of two objective vectors at a tolerance; one of
/// "strictly_dominates", "weakly_dominates", "equal", or "incomparable".
#[pyfunction(name = "dominance", signature = (a, b, tol = 1e-12))]
fn dominance_py(py: Python<'_>, a: Vec<f64>, b: Vec<f64>, tol: f64) -> PyResult<Py<PyAny>> {
    serialize_to_py(py, &dominance(&a, &b, tol))
}

/// Pareto-criticality certificate at a point: minimum-norm convex combination
/// of the gradients, its residual, and a common descent direction when one
/// exists.
#[pyfunction(signature = (problem, x, tol = 1e-8))]
fn criticality(py: Python<'_>, problem: &str, x: Vec<f64>, tol: f64) -> PyResult<Py<PyAny>> {
    let p = registry(problem).map_err(to_py_err)?;
    let cert = certificate_at(&p, &x, tol).map_err(to_py_err)?;
    serialize_to_py(py, &cert)
}

/// Sample-check a problem's declared metadata; returns the full report.
#[pyfunction(signature = (problem, samples = 1000, seed = 42))]
fn validate(py: Python<'_>, problem: &str, samples: usize, seed: u64) -> PyResult<Py<PyAny>> {
    let p = registry(problem).map_err(to_py_err)?;
    let report = validate_problem(&p, samples, seed).map_err(to_py_err)?;
    serialize_to_py(py, &report)
}

/// Exhaustively scan a grid for points that weakly dominate `x` (all
/// objectives strictly better). `scan_box` is a list of (lo, hi) pairs.
#[pyfunction(signature = (problem, x, scan_box, resolution, tol = 1e-9))]
fn weak_pareto_check(
    py: Python<'_>,
    problem: &str,
    x: Vec<f64>,
    scan_box: Vec<(f64, f64)>,
    resolution: f64,
    tol: f64,
) -> PyResult<Py<PyAny>> {
    let p = registry(problem).map_err(to_py_err)?;
    let outcome = weak_pareto_grid_oracle(&p, &x, &scan_box, resolution, tol).map_err(to_py_err)?;
    serialize_to_py(py, &outcome)
}

/// Exhaustively scan a grid for points that dominate `x` in the Pareto sense
/// (no objective worse, at least one strictly better).
#[pyfunction(signature = (problem, x, scan_box, resolution, tol = 1e-9))]
fn pareto_check(
    py: Python<'_>,
    problem: &str,
    x: Vec<f64>,
    scan_box: Vec<(f64, f64)>,
    resolution: f64,
    tol: f64,
) -> PyResult<Py<PyAny>> {
    let p = registry(problem).map_err(to_py_err)?;
    let outcome = pareto_grid_oracle(&p, &x, &scan_box, resolution, tol).map_err(to_py_err)?;
    serialize_to_py(py, &outcome)
}

#[allow(clippy::too_many_arguments)]
fn build_overrides(
    problem: &str,
    x0: &[f64],
    variant: &str,
    z: Option<&[f64]>,
    alpha: &str,
    step_tol: Option<f64>,
    crit_tol: Option<f64>,
    max_outer: Option<usize>,
    delta0: Option<f64>,
) -> Vec<(String, String)> {
    let mut overrides = vec![
        ("problem".to_string(), problem.to_string()),
        ("x0".to_string(), join_floats(x0)),
        ("variant".to_string(), variant.to_string()),
        ("alpha".to_string(), alpha.to_string()),
    ];
    if let Some(z) = z {
        overrides.push(("z".to_string(), join_floats(z)));
    }
    if let Some(v) = step_tol {
        overrides.push(("step_tol".to_string(), format!("{v:?}")));
    }
    if let Some(v) = crit_tol {
        overrides.push(("crit_tol".to_string(), format!("{v:?}")));
    }
    if let Some(v) = max_outer {
        overrides.push(("max_outer".to_string(), v.to_string()));
    }
    if let Some(v) = delta0 {
        overrides.push(("delta0".to_string(), format!("{v:?}")));
    }
    overrides
}

/// Run the solver once and return the full report (trajectory, termination,
/// final certificate, budget ledgers) as a dict. `alpha` uses the same
/// schedule syntax as configuration files: a bare number, `const:V`,
/// `harmonic:V`, or `list:a,b,c`.
#[pyfunction(signature = (
    problem,
    x0,
    variant = "spp",
    z = None,
    alpha = "const:1",
    step_tol = None,
    crit_tol = None,
    max_outer = None,
    delta0 = None,
))]
#[allow(clippy::too_many_arguments)]
fn solve(
    py: Python<'_>,
    problem: &str,
    x0: Vec<f64>,
    variant: &str,
    z: Option<Vec<f64>>,
    alpha: &str,
    step_tol: Option<f64>,
    crit_tol: Option<f64>,
    max_outer: Option<usize>,
    delta0: Option<f64>,
) -> PyResult<Py<PyAny>> {
    let overrides = build_overrides(
        problem,
        &x0,
        variant,
        z.as_deref(),
        alpha,
        step_tol,
        crit_tol,
        max_outer,
        delta0,
    );
    let setup = parse_config(None, &overrides).map_err(to_py_err)?;
    let report = run(&setup.problem, &setup.config).map_err(to_py_err)?;
    serialize_to_py(py, &report)
}

/// Run the configured variant once per weight vector from the same start
/// point, apply the dominance filter over the finals, and return the summary
/// as a dict.
#[pyfunction(signature = (
    problem,
    x0,
    weights,
    variant = "spp",
    alpha = "const:1",
    step_tol = None,
    max_outer = None,
))]
#[allow(clippy::too_many_arguments)]
fn sweep(
    py: Python<'_>,
    problem: &str,
    x0: Vec<f64>,
    weights: Vec<Vec<f64>>,
    variant: &str,
    alpha: &str,
    step_tol: Option<f64>,
    max_outer: Option<usize>,
) -> PyResult<Py<PyAny>> {
    let overrides = build_overrides(
        problem, &x0, variant, None, alpha, step_tol, None, max_outer, None,
    );
    let setup = parse_config(None, &overrides).map_err(to_py_err)?;
    let grid = weights
        .iter()
        .map(|w| normalize_weights(w))
        .collect::<Result<Vec<_>, _>>()
        .map_err(to_py_err)?;
    let summary = sweep_weights(&setup.problem, &grid, &setup.config).map_err(to_py_err)?;
    serialize_to_py(py, &summary)
}

#[pymodule]
fn mopp_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(problems, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(jacobian, m)?)?;
    m.add_function(wrap_pyfunction!(scalarize_py, m)?)?;
    m.add_function(wrap_pyfunction!(dominance_py, m)?)?;
    m.add_function(wrap_pyfunction!(criticality, m)?)?;
    m.add_function(wrap_pyfunction!(validate, m)?)?;
    m.add_function(wrap_pyfunction!(weak_pareto_check, m)?)?;
    m.add_function(wrap_pyfunction!(pareto_check, m)?)?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    Ok(())
}
