//! Python bindings: grids and fields, the linear propagator, norms,
//! paraproducts, the admissibility checker, the Picard solver and the
//! experiment runner.

use besov_wave_lab::admissibility;
use besov_wave_lab::grid::{make_grid, GridField, TorusGrid};
use besov_wave_lab::lab;
use besov_wave_lab::norms::{self, BesovParams, ProblemParams};
use besov_wave_lab::paraproduct;
use besov_wave_lab::profiles::DataProfile;
use besov_wave_lab::propagator;
use besov_wave_lab::solver::{self, SolverConfig};
use besov_wave_lab::LabError;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};
use serde_json::Value;

fn err(e: LabError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_py<'py>(py: Python<'py>, v: &Value) -> PyResult<Bound<'py, PyAny>> {
    Ok(match v {
        Value::Null => py.None().into_bound(py),
        Value::Bool(b) => b.into_pyobject(py)?.to_owned().into_any(),
        Value::Number(n) => match n.as_i64() {
            Some(i) => i.into_pyobject(py)?.into_any(),
            None => n.as_f64().unwrap_or(f64::NAN).into_pyobject(py)?.into_any(),
        },
        Value::String(s) => s.into_pyobject(py)?.into_any(),
        Value::Array(a) => {
            let l = PyList::empty(py);
            for x in a {
                l.append(to_py(py, x)?)?;
            }
            l.into_any()
        }
        Value::Object(o) => {
            let d = PyDict::new(py);
            for (k, x) in o {
                d.set_item(k, to_py(py, x)?)?;
            }
            d.into_any()
        }
    })
}

fn serialize<'py, T: serde::Serialize>(py: Python<'py>, v: &T) -> PyResult<Bound<'py, PyAny>> {
    let value = serde_json::to_value(v).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    to_py(py, &value)
}

/// Periodic box `[-L/2, L/2)^n` with `points` samples per axis.
#[pyclass(name = "Grid", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyGrid(TorusGrid);

#[pymethods]
impl PyGrid {
    #[new]
    fn new(n: usize, points: usize, length: f64) -> PyResult<Self> {
        make_grid(n, points, length).map(PyGrid).map_err(err)
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    #[getter]
    fn points(&self) -> usize {
        self.0.points()
    }

    #[getter]
    fn length(&self) -> f64 {
        self.0.length()
    }

    #[getter]
    fn nyquist(&self) -> f64 {
        self.0.nyquist()
    }

    /// Largest deviation of the dyadic partition from 1.
    fn partition_residual(&self) -> f64 {
        self.0.dyadic_blocks().partition_residual(&self.0)
    }

    /// Samples a data profile given as keyword arguments, e.g.
    /// `grid.profile("gaussian", amplitude=1.0, width=2.0)`.
    #[pyo3(signature = (kind, **params))]
    fn profile(&self, kind: &str, params: Option<&Bound<'_, PyDict>>) -> PyResult<PyField> {
        let mut map = serde_json::Map::new();
        map.insert("kind".into(), Value::String(kind.into()));
        if let Some(p) = params {
            for (k, v) in p.iter() {
                let key: String = k.extract()?;
                let value = if let Ok(b) = v.extract::<bool>() {
                    Value::Bool(b)
                } else if let Ok(i) = v.extract::<i64>() {
                    Value::from(i)
                } else if let Ok(f) = v.extract::<f64>() {
                    Value::from(f)
                } else if let Ok(l) = v.extract::<Vec<i64>>() {
                    Value::from(l)
                } else {
                    return Err(PyValueError::new_err(format!("unsupported value for '{key}'")));
                };
                map.insert(key, value);
            }
        }
        let profile: DataProfile =
            serde_json::from_value(Value::Object(map)).map_err(|e| PyValueError::new_err(e.to_string()))?;
        profile.sample(&self.0).map(PyField).map_err(err)
    }

    /// Field from samples in row-major order.
    fn field(&self, values: Vec<f64>) -> PyResult<PyField> {
        GridField::new(&self.0, values).map(PyField).map_err(err)
    }

    fn zeros(&self) -> PyField {
        PyField(GridField::zeros(&self.0))
    }

    fn __repr__(&self) -> String {
        format!("Grid(n={}, points={}, length={})", self.0.dim(), self.0.points(), self.0.length())
    }
}

/// Real field sampled on a grid.
#[pyclass(name = "Field", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyField(GridField);

#[pymethods]
impl PyField {
    fn values(&self) -> Vec<f64> {
        self.0.values().to_vec()
    }

    #[getter]
    fn grid(&self) -> PyGrid {
        PyGrid(self.0.grid().clone())
    }

    fn max_abs(&self) -> f64 {
        self.0.max_abs()
    }

    fn lebesgue_norm(&self, p: f64) -> PyResult<f64> {
        norms::lebesgue_norm(&self.0, p).map_err(err)
    }

    /// Homogeneous Besov seminorm with the DC mode excluded.
    #[pyo3(signature = (s, p, q = 2.0))]
    fn besov_seminorm(&self, s: f64, p: f64, q: f64) -> PyResult<f64> {
        norms::besov_seminorm(&self.0, &BesovParams::homogeneous(s, p).with_q(q)).map_err(err)
    }

    fn sobolev_norm(&self, s: f64, p: f64) -> PyResult<f64> {
        norms::sobolev_norm(&self.0, s, p).map_err(err)
    }

    fn __add__(&self, other: &PyField) -> PyResult<PyField> {
        self.0.add(&other.0).map(PyField).map_err(err)
    }

    fn __sub__(&self, other: &PyField) -> PyResult<PyField> {
        self.0.sub(&other.0).map(PyField).map_err(err)
    }

    fn __mul__(&self, a: f64) -> PyField {
        PyField(self.0.scaled(a))
    }

    fn __len__(&self) -> usize {
        self.0.values().len()
    }
}

/// `(K, ∂ₜK)` of the damped propagator at time `t` and frequency `|ξ|`.
#[pyfunction]
fn kernel(t: f64, xi: f64) -> PyResult<(f64, f64)> {
    propagator::kernel(t, xi).map_err(err)
}

/// `D(t)g`, the solution with data `(0, g)`.
#[pyfunction]
fn apply_d(t: f64, g: &PyField) -> PyResult<PyField> {
    propagator::apply_d(t, &g.0).map(PyField).map_err(err)
}

/// Solution of the linear damped wave equation with data `(u0, u1)`.
#[pyfunction]
fn linear_solution(u0: &PyField, u1: &PyField, t: f64) -> PyResult<PyField> {
    propagator::linear_solution(&u0.0, &u1.0, t).map(PyField).map_err(err)
}

#[pyfunction]
fn mode_ode_residual(t: f64, xi: f64, h: f64) -> f64 {
    propagator::mode_ode_residual(t, xi, h)
}

#[pyfunction]
fn para_t(f: &PyField, g: &PyField) -> PyResult<PyField> {
    paraproduct::para_t(&f.0, &g.0).map(PyField).map_err(err)
}

#[pyfunction]
fn para_r(f: &PyField, g: &PyField) -> PyResult<PyField> {
    paraproduct::para_r(&f.0, &g.0).map(PyField).map_err(err)
}

/// Relative L² residual of `T_f g + T_g f + R(f, g) = fg`.
#[pyfunction]
fn decomposition_residual(f: &PyField, g: &PyField) -> PyResult<f64> {
    paraproduct::decomposition_residual(&f.0, &g.0).map_err(err)
}

/// Local well-posedness conditions as a dict.
#[pyfunction]
fn check_lwp<'py>(py: Python<'py>, n: usize, r: f64, s: f64, p: f64) -> PyResult<Bound<'py, PyAny>> {
    let v = admissibility::check_lwp(n, r, s, p).map_err(err)?;
    verdict_dict(py, &v)
}

/// As `check_lwp`, plus the threshold `p ≥ 1 + 2r/n`.
#[pyfunction]
fn check_gwp<'py>(py: Python<'py>, n: usize, r: f64, s: f64, p: f64) -> PyResult<Bound<'py, PyAny>> {
    let v = admissibility::check_gwp(n, r, s, p).map_err(err)?;
    verdict_dict(py, &v)
}

fn verdict_dict<'py>(py: Python<'py>, v: &admissibility::AdmissibilityVerdict) -> PyResult<Bound<'py, PyAny>> {
    let d = serialize(py, v)?;
    d.set_item("lwp_passes", v.lwp_passes())?;
    d.set_item("gwp_passes", v.gwp_passes())?;
    Ok(d)
}

/// Smallest `s` on a 0.01 grid that passes, or `None`.
#[pyfunction]
fn suggest_s(n: usize, r: f64, p: f64) -> PyResult<Option<f64>> {
    admissibility::suggest_s(n, r, p).map(|s| s.s).map_err(err)
}

/// Picard solve. `config` is a dict of solver settings (same keys as the
/// `[solver]` config section). Returns `(times, fields, diagnostics)`.
#[pyfunction]
#[pyo3(signature = (u0, u1, n, r, s, p, config = None))]
#[allow(clippy::too_many_arguments)]
fn picard_solve<'py>(
    py: Python<'py>,
    u0: &PyField,
    u1: &PyField,
    n: usize,
    r: f64,
    s: f64,
    p: u32,
    config: Option<&Bound<'py, PyDict>>,
) -> PyResult<(Vec<f64>, Vec<PyField>, Bound<'py, PyAny>)> {
    let cfg: SolverConfig = match config {
        Some(d) => {
            let json: String = py.import("json")?.call_method1("dumps", (d,))?.extract()?;
            serde_json::from_str(&json).map_err(|e| PyValueError::new_err(e.to_string()))?
        }
        None => SolverConfig::default(),
    };
    let pp = ProblemParams::new(n, r, s, p).map_err(err)?;
    let out = py
        .detach(|| solver::picard_solve(&u0.0, &u1.0, &pp, &cfg))
        .map_err(err)?;
    let fields = out.trajectory.fields().iter().cloned().map(PyField).collect();
    Ok((out.trajectory.times().to_vec(), fields, serialize(py, &out.diagnostics)?))
}

/// Runs an experiment from config text and returns the report as a dict.
#[pyfunction]
#[pyo3(signature = (text, override_admissibility = false, seed = None))]
fn run_experiment<'py>(
    py: Python<'py>,
    text: &str,
    override_admissibility: bool,
    seed: Option<u64>,
) -> PyResult<Bound<'py, PyAny>> {
    let opts = lab::RunOptions {
        override_admissibility,
        seed,
        out: None,
    };
    let cfg = lab::load_config(text, &opts).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let (report, _) = py
        .detach(|| lab::run_config(&cfg))
        .map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    serialize(py, &report)
}

/// `(name, description)` of every experiment kind.
#[pyfunction]
fn list_experiments() -> Vec<(&'static str, &'static str)> {
    lab::REGISTRY.iter().map(|e| (e.name, e.description)).collect()
}

#[pymodule]
fn bwlab(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGrid>()?;
    m.add_class::<PyField>()?;
    m.add_function(wrap_pyfunction!(kernel, m)?)?;
    m.add_function(wrap_pyfunction!(apply_d, m)?)?;
    m.add_function(wrap_pyfunction!(linear_solution, m)?)?;
    m.add_function(wrap_pyfunction!(mode_ode_residual, m)?)?;
    m.add_function(wrap_pyfunction!(para_t, m)?)?;
    m.add_function(wrap_pyfunction!(para_r, m)?)?;
    m.add_function(wrap_pyfunction!(decomposition_residual, m)?)?;
    m.add_function(wrap_pyfunction!(check_lwp, m)?)?;
    m.add_function(wrap_pyfunction!(check_gwp, m)?)?;
    m.add_function(wrap_pyfunction!(suggest_s, m)?)?;
    m.add_function(wrap_pyfunction!(picard_solve, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(list_experiments, m)?)?;
    Ok(())
}
