//! Python bindings: `import liftline`.

use std::collections::BTreeMap;

use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;

use liftline_core::circulation::{self, ModeCoefficients};
use liftline_core::feasibility::{self, ConstraintSet, Model, SweepSpec, DEFAULT_REFINE_TOL};
use liftline_core::moments::{self, MomentMethod, NoncollapseScale, WeightForm, DEFAULT_ODE_STEP};
use liftline_core::optimizer::{self, GeneralOptions};
use liftline_core::selftest::{self, SelftestOptions};
use liftline_core::Error;

fn to_py(e: Error) -> PyErr {
    if e.is_numerical() {
        PyArithmeticError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

fn coeffs(a: Vec<f64>) -> PyResult<ModeCoefficients> {
    ModeCoefficients::new(a).map_err(to_py)
}

/// Chebyshev-U coefficients `a_0, a_2, ...` of `f`, with `Gamma = f sqrt(1 - xi^2)`.
#[pyclass(name = "Coefficients", module = "liftline", frozen)]
struct PyCoefficients {
    inner: ModeCoefficients,
}

#[pymethods]
impl PyCoefficients {
    #[new]
    fn new(values: Vec<f64>) -> PyResult<Self> {
        Ok(Self { inner: coeffs(values)? })
    }

    #[getter]
    fn values(&self) -> Vec<f64> {
        self.inner.as_slice().to_vec()
    }

    fn f(&self, xi: f64) -> f64 {
        self.inner.f(xi)
    }

    fn gamma(&self, xi: f64) -> PyResult<f64> {
        circulation::eval_gamma(&self.inner, xi).map_err(to_py)
    }

    fn downwash(&self, xi: f64) -> PyResult<f64> {
        circulation::downwash_spectral(&self.inner, xi).map_err(to_py)
    }

    fn drag(&self) -> f64 {
        circulation::induced_drag(&self.inner)
    }

    fn min_f(&self) -> f64 {
        circulation::min_f(&self.inner)
    }

    /// Span carrying unit lift, `4 / (pi a_0)`.
    fn unit_lift_span(&self) -> PyResult<f64> {
        circulation::span_from_lift(&self.inner, &Default::default()).map_err(to_py)
    }

    fn __len__(&self) -> usize {
        self.inner.as_slice().len()
    }

    fn __repr__(&self) -> String {
        format!("Coefficients({:?})", self.inner.as_slice())
    }
}

#[pyclass(name = "SolveReport", module = "liftline", frozen)]
struct PySolveReport {
    inner: optimizer::SolveReport,
}

#[pymethods]
impl PySolveReport {
    #[getter]
    fn model(&self) -> String {
        self.inner.model.to_string()
    }

    #[getter]
    fn coeffs(&self) -> Vec<f64> {
        self.inner.coeffs.as_slice().to_vec()
    }

    #[getter]
    fn span_b(&self) -> f64 {
        self.inner.span_b
    }

    #[getter]
    fn drag(&self) -> f64 {
        self.inner.drag
    }

    #[getter]
    fn mu(&self) -> Option<f64> {
        self.inner.mu
    }

    #[getter]
    fn constraint_values(&self) -> BTreeMap<String, f64> {
        self.inner.constraint_values.clone()
    }

    #[getter]
    fn drag_ratio_vs_elliptic(&self) -> f64 {
        self.inner.drag_ratio_vs_elliptic
    }

    #[getter]
    fn drag_ratio_vs_prandtl(&self) -> f64 {
        self.inner.drag_ratio_vs_prandtl
    }

    #[getter]
    fn drag_history(&self) -> Vec<f64> {
        self.inner.drag_history.clone()
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner).map_err(|e| PyValueError::new_err(e.to_string()))
    }

    fn __repr__(&self) -> String {
        format!(
            "SolveReport(model={}, drag={}, span_b={}, ratio_vs_prandtl={})",
            self.inner.model, self.inner.drag, self.inner.span_b, self.inner.drag_ratio_vs_prandtl
        )
    }
}

impl From<optimizer::SolveReport> for PySolveReport {
    fn from(inner: optimizer::SolveReport) -> Self {
        Self { inner }
    }
}

fn parse<T: std::str::FromStr<Err = Error>>(s: &str) -> PyResult<T> {
    s.parse().map_err(to_py)
}

#[allow(clippy::too_many_arguments)]
fn sweep_spec(
    model: &str,
    grid: (usize, usize),
    a0_range: (f64, f64),
    a2_range: (f64, f64),
    weight_form: &str,
    noncollapse_scale: &str,
    budget: f64,
) -> PyResult<SweepSpec> {
    let spec = SweepSpec::new(parse::<Model>(model)?)
        .with_grid(grid.0, grid.1)
        .with_window([a0_range.0, a0_range.1], [a2_range.0, a2_range.1])
        .with_weight_form(parse::<WeightForm>(weight_form)?)
        .with_noncollapse_scale(parse::<NoncollapseScale>(noncollapse_scale)?)
        .with_budget(budget);
    spec.validate().map_err(to_py)?;
    Ok(spec)
}

#[pyfunction]
fn solve_elliptic() -> PyResult<PySolveReport> {
    optimizer::solve_elliptic().map(Into::into).map_err(to_py)
}

#[pyfunction]
fn solve_prandtl1933() -> PyResult<PySolveReport> {
    optimizer::solve_prandtl1933().map(Into::into).map_err(to_py)
}

/// Two-mode optimum of the self-weight model over a swept window.
#[pyfunction]
#[pyo3(signature = (
    grid = (400, 400),
    a0_range = (0.01, 0.5),
    a2_range = (-0.2, 0.2),
    weight_form = "reduced",
    noncollapse_scale = "consistent",
    budget = 1.0,
))]
fn solve_improved(
    py: Python<'_>,
    grid: (usize, usize),
    a0_range: (f64, f64),
    a2_range: (f64, f64),
    weight_form: &str,
    noncollapse_scale: &str,
    budget: f64,
) -> PyResult<PySolveReport> {
    let spec = sweep_spec("improved", grid, a0_range, a2_range, weight_form, noncollapse_scale, budget)?;
    py.detach(|| optimizer::solve_improved(&spec, DEFAULT_REFINE_TOL))
        .map(Into::into)
        .map_err(to_py)
}

/// Local optimum over `a_0, ..., a_{2n}` starting from `start`.
#[pyfunction]
#[pyo3(signature = (n, start, model = "prandtl", weight_form = "reduced", budget = 1.0, gamma_nonneg = false))]
fn solve_general(
    py: Python<'_>,
    n: usize,
    start: Vec<f64>,
    model: &str,
    weight_form: &str,
    budget: f64,
    gamma_nonneg: bool,
) -> PyResult<PySolveReport> {
    let start = coeffs(start)?;
    let opts = GeneralOptions {
        weight_form: parse(weight_form)?,
        ..GeneralOptions::new(parse(model)?)
            .with_budget(budget)
            .with_gamma_nonneg(gamma_nonneg)
    };
    py.detach(|| optimizer::solve_general_modes_with(n, &start, opts))
        .map(Into::into)
        .map_err(to_py)
}

#[pyfunction]
fn prandtl_drag_of_mu(mu: f64) -> PyResult<f64> {
    optimizer::prandtl_drag_of_mu(mu).map_err(to_py)
}

#[pyfunction]
fn induced_drag(c: Vec<f64>) -> PyResult<f64> {
    Ok(circulation::induced_drag(&coeffs(c)?))
}

/// Bending moment at one station; `model` is "lift-only" or "self-weight".
#[pyfunction]
#[pyo3(signature = (c, b, xi, model = "self-weight"))]
fn moment(c: Vec<f64>, b: f64, xi: f64, model: &str) -> PyResult<f64> {
    let c = coeffs(c)?;
    match model {
        "lift-only" => moments::moment_lift_only(&c, b, xi),
        "self-weight" => moments::moment_selfweight_closed(&c, b, xi),
        other => return Err(PyValueError::new_err(format!("unknown moment model `{other}`"))),
    }
    .map_err(to_py)
}

/// `(xi, M)` on a uniform grid for one of "lift-only", "closed-form", "ode",
/// "volterra-oracle".
#[pyfunction]
#[pyo3(signature = (c, b, method = "closed-form", points = 201))]
fn moment_profile(c: Vec<f64>, b: f64, method: &str, points: usize) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let c = coeffs(c)?;
    let grid = moments::uniform_grid(points);
    let p = match parse::<MomentMethod>(method)? {
        MomentMethod::LiftOnly => moments::moment_lift_only_profile(&c, b, &grid),
        MomentMethod::ClosedForm => moments::moment_selfweight_profile(&c, b, &grid),
        MomentMethod::Ode => moments::moment_selfweight_ode(&c, b, &grid, DEFAULT_ODE_STEP),
        MomentMethod::VolterraOracle => moments::moment_volterra_oracle(&c, b, points),
    }
    .map_err(to_py)?;
    Ok((p.xi().to_vec(), p.values().to_vec()))
}

/// Raster of the constraints as a dict of equal-length lists.
#[pyfunction]
#[pyo3(signature = (
    model = "prandtl",
    grid = (100, 100),
    a0_range = (0.01, 0.5),
    a2_range = (-0.2, 0.2),
    weight_form = "reduced",
    noncollapse_scale = "consistent",
    budget = 1.0,
))]
#[allow(clippy::too_many_arguments)]
fn sweep(
    py: Python<'_>,
    model: &str,
    grid: (usize, usize),
    a0_range: (f64, f64),
    a2_range: (f64, f64),
    weight_form: &str,
    noncollapse_scale: &str,
    budget: f64,
) -> PyResult<BTreeMap<&'static str, Py<PyAny>>> {
    let spec = sweep_spec(model, grid, a0_range, a2_range, weight_form, noncollapse_scale, budget)?;
    let g = py.detach(|| feasibility::sweep(&spec)).map_err(to_py)?;
    let set = ConstraintSet::for_model(spec.model);
    let (mut a0, mut a2, mut value, mut feasible) = (vec![], vec![], vec![], vec![]);
    for (_, _, x0, x2, c) in g.iter() {
        a0.push(x0);
        a2.push(x2);
        value.push(c.value);
        feasible.push(c.feasible(&set));
    }
    let mut out = BTreeMap::new();
    out.insert("a0", a0.into_pyobject(py)?.into_any().unbind());
    out.insert("a2", a2.into_pyobject(py)?.into_any().unbind());
    out.insert("weight_value", value.into_pyobject(py)?.into_any().unbind());
    out.insert("feasible", feasible.into_pyobject(py)?.into_any().unbind());
    Ok(out)
}

/// Run one reproduction check; returns `(passed, summary line)`.
#[pyfunction]
#[pyo3(signature = (check, grid = 400, perturb = 0.0))]
fn run_check(py: Python<'_>, check: u8, grid: usize, perturb: f64) -> (bool, String) {
    let opts = SelftestOptions {
        grid,
        perturb,
        ..SelftestOptions::default()
    };
    let outcome = py.detach(|| selftest::run_check(check, &opts));
    (outcome.passed, outcome.line())
}

#[pymodule]
fn liftline(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyCoefficients>()?;
    m.add_class::<PySolveReport>()?;
    m.add_function(wrap_pyfunction!(solve_elliptic, m)?)?;
    m.add_function(wrap_pyfunction!(solve_prandtl1933, m)?)?;
    m.add_function(wrap_pyfunction!(solve_improved, m)?)?;
    m.add_function(wrap_pyfunction!(solve_general, m)?)?;
    m.add_function(wrap_pyfunction!(prandtl_drag_of_mu, m)?)?;
    m.add_function(wrap_pyfunction!(induced_drag, m)?)?;
    m.add_function(wrap_pyfunction!(moment, m)?)?;
    m.add_function(wrap_pyfunction!(moment_profile, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add_function(wrap_pyfunction!(run_check, m)?)?;
    m.add("ELLIPTIC_DRAG", optimizer::ELLIPTIC_DRAG)?;
    m.add("PRANDTL_DRAG", optimizer::PRANDTL_DRAG)?;
    Ok(())
}
