//! Python bindings. The plain functions in [`api`] carry the logic; the
//! module below only converts errors.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

pub mod api {
    use std::collections::BTreeMap;

    use eds_waves::cli::{explain, run_document, ProblemDocument, Report, RunOptions};
    use eds_waves::jettw::{reduce, EvolutionPde};
    use eds_waves::numcheck::{pde_residual, GridSpec};
    use eds_waves::solvable::verify_first_integral;
    use eds_waves::symcore::{parse, Chart};

    /// Reduced right-hand side, Vessiot fields and both integrability flags.
    #[derive(Debug, Clone, PartialEq)]
    pub struct Reduction {
        pub f_tilde: String,
        pub v1: String,
        pub v2: String,
        pub frobenius: bool,
        pub closed: bool,
    }

    fn pde(order: usize, rhs: &str, params: &[String]) -> Result<EvolutionPde, String> {
        EvolutionPde::parse(order, rhs, params).map_err(|e| e.to_string())
    }

    pub fn reduce_pde(order: usize, rhs: &str, params: &[String], speed: &str) -> Result<Reduction, String> {
        let tws = reduce(&pde(order, rhs, params)?, speed).map_err(|e| e.to_string())?;
        let d = tws.frobenius_direct();
        let ch = tws.chart();
        Ok(Reduction {
            f_tilde: tws.rhs().to_string_with(&|v| ch.name(v).to_string()),
            v1: tws.v1().to_string(),
            v2: tws.v2().to_string(),
            frobenius: d.frobenius,
            closed: d.closed,
        })
    }

    /// Whether `expr` (over the jet chart) is a first integral of the reduced system.
    pub fn is_first_integral(order: usize, rhs: &str, params: &[String], speed: &str, expr: &str) -> Result<bool, String> {
        let p = pde(order, rhs, params)?;
        let tws = reduce(&p, speed).map_err(|e| e.to_string())?;
        let f = parse(expr, p.chart()).map_err(|e| e.to_string())?;
        let g = tws.restrict_elem(&f).map_err(|e| e.to_string())?;
        Ok(verify_first_integral(&[tws.v1().clone(), tws.v2().clone()], &g).is_ok())
    }

    /// Max `|u_t − F|` of a candidate `u(x, t)` on an `nx × nt` default-range grid.
    pub fn max_residual(
        order: usize,
        rhs: &str,
        params: &[String],
        u: &str,
        constants: &BTreeMap<String, f64>,
        nx: usize,
        nt: usize,
    ) -> Result<f64, String> {
        let p = pde(order, rhs, params)?;
        let mut names: Vec<String> = params.to_vec();
        names.extend(constants.keys().filter(|k| !params.contains(k)).cloned());
        let ch = Chart::new(&["t".to_string(), "x".to_string()], &names).map_err(|e| e.to_string())?;
        let cand = parse(u, &ch).map_err(|e| e.to_string())?;
        let grid = GridSpec { nx, nt, ..GridSpec::default() };
        let r = pde_residual(&p, &cand, &ch, constants, &grid).map_err(|e| e.to_string())?;
        r.residual.map(|e| e.max).ok_or_else(|| "no node could be evaluated".to_string())
    }

    /// Report JSON for a problem document given as JSON text.
    pub fn run_json(doc: &str) -> Result<String, String> {
        let d: ProblemDocument = serde_json::from_str(doc).map_err(|e| e.to_string())?;
        Ok(run_document(&d, &RunOptions::default()).map_err(|e| e.to_string())?.to_json())
    }

    pub fn explain_json(report: &str) -> Result<String, String> {
        let r: Report = serde_json::from_str(report).map_err(|e| e.to_string())?;
        Ok(explain(&r))
    }
}

fn value_error(e: String) -> PyErr {
    PyValueError::new_err(e)
}

#[pyfunction]
#[pyo3(signature = (rhs, order = 3, params = vec!["c".to_string()], speed = "c"))]
fn reduce(rhs: &str, order: usize, params: Vec<String>, speed: &str) -> PyResult<(String, String, String, bool, bool)> {
    let r = api::reduce_pde(order, rhs, &params, speed).map_err(value_error)?;
    Ok((r.f_tilde, r.v1, r.v2, r.frobenius, r.closed))
}

#[pyfunction]
#[pyo3(signature = (rhs, expr, order = 3, params = vec!["c".to_string()], speed = "c"))]
fn is_first_integral(rhs: &str, expr: &str, order: usize, params: Vec<String>, speed: &str) -> PyResult<bool> {
    api::is_first_integral(order, rhs, &params, speed, expr).map_err(value_error)
}

#[pyfunction]
#[pyo3(signature = (rhs, u, constants, order = 3, params = vec!["c".to_string()], nx = 201, nt = 101))]
fn max_residual(
    rhs: &str,
    u: &str,
    constants: std::collections::BTreeMap<String, f64>,
    order: usize,
    params: Vec<String>,
    nx: usize,
    nt: usize,
) -> PyResult<f64> {
    api::max_residual(order, rhs, &params, u, &constants, nx, nt).map_err(value_error)
}

#[pyfunction]
fn run(doc: &str) -> PyResult<String> {
    api::run_json(doc).map_err(value_error)
}

#[pyfunction]
fn explain(report: &str) -> PyResult<String> {
    api::explain_json(report).map_err(value_error)
}

#[pymodule]
fn eds_waves_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(reduce, m)?)?;
    m.add_function(wrap_pyfunction!(is_first_integral, m)?)?;
    m.add_function(wrap_pyfunction!(max_residual, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(explain, m)?)?;
    Ok(())
}
