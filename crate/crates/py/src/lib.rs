use clap::Parser;
use momentkit::cli::{run as run_cli, Cli};
use momentkit::models;
use momentkit::perturb::{check_certificate, geometric_grid, scaling_search, PerturbOptions};
use momentkit::report::{verify_report, Report};
use momentkit::{kempf_ness_flow, linear_moment, torus_polystability, FlowOptions, GroupAction, StatePoint, C64};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn torus(weights: Vec<Vec<i64>>) -> PyResult<GroupAction> {
    GroupAction::torus(weights).map_err(err)
}

/// Moment map of a torus action in orthonormal algebra coordinates.
#[pyfunction]
fn moment(weights: Vec<Vec<i64>>, point: Vec<C64>) -> PyResult<Vec<f64>> {
    let action = torus(weights)?;
    let v = StatePoint::from_vec(point);
    if v.dim() != action.ambient_dim() {
        return Err(err(format!("point has {} coordinates, expected {}", v.dim(), action.ambient_dim())));
    }
    Ok(linear_moment(&action, &v).coeffs.iter().copied().collect())
}

/// Flow verdict and exact verdict for a torus point.
#[pyfunction]
fn classify<'py>(py: Python<'py>, weights: Vec<Vec<i64>>, point: Vec<C64>) -> PyResult<Bound<'py, PyDict>> {
    let action = torus(weights.clone())?;
    let v = StatePoint::from_vec(point);
    if v.dim() != action.ambient_dim() {
        return Err(err(format!("point has {} coordinates, expected {}", v.dim(), action.ambient_dim())));
    }
    let flow = kempf_ness_flow(&action, &v, &FlowOptions::default()).map_err(err)?;
    let exact = torus_polystability(&weights, &v.support());
    let out = PyDict::new(py);
    out.set_item("class", flow.class.as_str())?;
    out.set_item("exact", exact.class.as_str())?;
    out.set_item("witness", flow.witness.map(|w| w.to_f64()))?;
    out.set_item("iterations", flow.diagnostics.iterations)?;
    Ok(out)
}

#[pyfunction]
fn bundled_models() -> Vec<&'static str> {
    models::bundled_models().iter().map(|m| m.name).collect()
}

/// Scaling search on a bundled model; returns the certified `t` and the
/// certificate summary.
#[pyfunction]
#[pyo3(signature = (model, point, delta = 0.1, start = 1e-3, stop = 1e-1, count = 20))]
fn scan<'py>(
    py: Python<'py>,
    model: &str,
    point: Vec<C64>,
    delta: f64,
    start: f64,
    stop: f64,
    count: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let m = models::bundled(model).ok_or_else(|| err(format!("no bundled model {model:?}")))?;
    let v = StatePoint::from_vec(point);
    let report = scaling_search(&m.model, &v, delta, &geometric_grid(start, stop, count), &PerturbOptions::default()).map_err(err)?;
    let check = check_certificate(&m.model, &report.certificate);
    let out = PyDict::new(py);
    out.set_item("t_star", report.t_star)?;
    out.set_item("eta_norm", report.certificate.eta_norm)?;
    out.set_item("mu_norm_initial", report.certificate.mu_norm_initial)?;
    out.set_item("mu_norm_final", report.certificate.mu_norm_final)?;
    out.set_item("lambda", report.certificate.lambda_used)?;
    out.set_item("verified", check.passed())?;
    Ok(out)
}

/// Runs the command-line driver and returns `(exit_code, report_json)`.
#[pyfunction]
fn run(args: Vec<String>) -> PyResult<(i32, String)> {
    let argv: Vec<String> = std::iter::once("momentkit".to_string()).chain(args.iter().cloned()).collect();
    let cli = Cli::try_parse_from(&argv).map_err(err)?;
    let report = run_cli(&cli, args);
    Ok((report.exit_code, report.to_json()))
}

/// True iff every certificate in a JSON report passes.
#[pyfunction]
fn verify(report_json: &str) -> PyResult<bool> {
    let report = Report::from_json(report_json).map_err(err)?;
    Ok(verify_report(&report).map_err(err)?.passed())
}

#[pymodule]
fn momentkit_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_function(wrap_pyfunction!(moment, m)?)?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(bundled_models, m)?)?;
    m.add_function(wrap_pyfunction!(scan, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    Ok(())
}
