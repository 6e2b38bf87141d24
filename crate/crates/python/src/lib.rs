//! Python bindings: predicted spectra and config-driven runs returning the
//! JSON result record.

use pyo3::exceptions::{PyKeyError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use ::weyl_lab::cli_io::{record_json, run_propagate, run_spectrum, run_sweep, ScenarioConfig, ValidatedConfig};
use ::weyl_lab::scenarios::{builtin, predicted_essential_spectrum, BUILTIN_SCENARIOS};
use ::weyl_lab::Error;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Validation(_) | Error::InvalidArgument(_) | Error::Parse { .. } => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn validated(config_toml: &str) -> PyResult<ValidatedConfig> {
    let c = ScenarioConfig::from_toml_str(config_toml).map_err(|e| PyValueError::new_err(e.to_string()))?;
    c.validate().map_err(to_py)
}

/// Names of the built-in scenarios.
#[pyfunction]
fn scenarios() -> Vec<&'static str> {
    BUILTIN_SCENARIOS.to_vec()
}

/// Predicted essential spectrum of a built-in scenario as `(lo, hi)` pairs;
/// `hi` is `None` for a half-line.
#[pyfunction]
fn predicted_spectrum(scenario: &str) -> PyResult<Vec<(f64, Option<f64>)>> {
    let s = builtin(scenario).ok_or_else(|| PyKeyError::new_err(format!("unknown scenario {scenario:?}")))?;
    let p = predicted_essential_spectrum(&s).map_err(to_py)?;
    Ok(p.intervals()
        .iter()
        .map(|i| (i.lo, i.hi.is_finite().then_some(i.hi)))
        .collect())
}

/// Normalizations applied while validating a TOML config.
#[pyfunction]
fn validate(config_toml: &str) -> PyResult<Vec<String>> {
    Ok(validated(config_toml)?.normalizations)
}

/// Runs `spectrum`, `sweep` or `propagate` on a TOML config and returns the
/// JSON result record.
#[pyfunction]
fn run(py: Python<'_>, command: &str, config_toml: &str) -> PyResult<String> {
    let v = validated(config_toml)?;
    let f = match command {
        "spectrum" => run_spectrum,
        "sweep" => run_sweep,
        "propagate" => run_propagate,
        other => return Err(PyValueError::new_err(format!("unknown command {other:?}"))),
    };
    let record = py.detach(|| f(&v)).map_err(to_py)?;
    let bytes = record_json(&record).map_err(to_py)?;
    Ok(String::from_utf8(bytes).expect("JSON is UTF-8"))
}

#[pymodule]
fn weyl_lab(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_function(wrap_pyfunction!(scenarios, m)?)?;
    m.add_function(wrap_pyfunction!(predicted_spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(validate, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    Ok(())
}
