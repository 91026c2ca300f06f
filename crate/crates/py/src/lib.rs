//! Python bindings: weight parameters, kernel checks, boundary data and
//! its norms, the heat extension and the 1-D boundary value solver.

use std::path::PathBuf;
use std::sync::Arc;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use wtrace::boundary::{slobodeckij_norm, BoundaryData, SeminormSpec, SeparableBoundary};
use wtrace::bvp::{self, BvpForm, BvpMesh, BvpProblem, TimeScheme};
use wtrace::field::MultiIndex;
use wtrace::grid::{Axis, GradedGrid, SpaceTimeGrid};
use wtrace::heat_ext::{self, ExtensionSpec};
use wtrace::norms::tilde_norm;
use wtrace::profile::Profile;
use wtrace::quad::{QuadRule, QuadSpec};

fn err(e: wtrace::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

#[pyclass(name = "WeightParams", frozen, skip_from_py_object, module = "wtrace_py")]
#[derive(Clone, Copy)]
struct PyWeightParams(wtrace::WeightParams);

#[pymethods]
impl PyWeightParams {
    #[new]
    #[pyo3(signature = (p, theta, n = 1))]
    fn new(p: f64, theta: f64, n: usize) -> PyResult<Self> {
        wtrace::WeightParams::new(p, theta, n).map(Self).map_err(err)
    }
    #[getter]
    fn p(&self) -> f64 {
        self.0.p()
    }
    #[getter]
    fn theta(&self) -> f64 {
        self.0.theta()
    }
    #[getter]
    fn n(&self) -> usize {
        self.0.n()
    }
    /// Boundary smoothness `(p - theta + n - 1) / p`.
    #[getter]
    fn s(&self) -> f64 {
        self.0.s()
    }
    fn rho_power(&self, shift: f64) -> f64 {
        self.0.rho_power(shift)
    }
    fn __repr__(&self) -> String {
        format!("WeightParams(p={}, theta={}, n={})", self.0.p(), self.0.theta(), self.0.n())
    }
}

/// Distance to the boundary of the half-space or of (0, 1).
#[pyfunction]
#[pyo3(signature = (x, unit_interval = false))]
fn rho(x: Vec<f64>, unit_interval: bool) -> PyResult<f64> {
    if x.is_empty() {
        return Err(PyValueError::new_err("empty point"));
    }
    let d = if unit_interval { wtrace::Domain::unit_interval(0.0, 1.0) } else { wtrace::Domain::half_space(x.len()) };
    Ok(d.rho(&x))
}

#[pyfunction]
#[pyo3(signature = (t, x1, xp = None))]
fn kernel_value(t: f64, x1: f64, xp: Option<f64>) -> f64 {
    heat_ext::kernel_value(t, x1, xp)
}

/// `(value, tail_bound)` of the kernel mass at `x1`.
#[pyfunction]
#[pyo3(signature = (x1, n = 1))]
fn kernel_mass(x1: f64, n: usize) -> PyResult<(f64, f64)> {
    let w = wtrace::WeightParams::new(2.0, n as f64 - 0.5, n).map_err(err)?;
    let r = heat_ext::kernel_mass(x1, &w, &QuadSpec::default()).map_err(err)?;
    Ok((r.value, r.tail_bound))
}

/// `(value, tail_bound)` of the integral of `D^alpha` of the kernel, with
/// `alpha = (normal, tangential)`.
#[pyfunction]
#[pyo3(signature = (normal, tangential, x1, n = 1))]
fn kernel_derivative_moment(normal: usize, tangential: usize, x1: f64, n: usize) -> PyResult<(f64, f64)> {
    let r = heat_ext::kernel_derivative_moment(MultiIndex::new(normal, tangential), x1, n, &QuadSpec::default()).map_err(err)?;
    Ok((r.value, r.tail_bound))
}

/// Boundary data on the half-line (`n = 1`) sampled on a uniform time axis.
#[pyclass(name = "BoundaryData", frozen, module = "wtrace_py")]
struct PyBoundaryData(BoundaryData);

#[pymethods]
impl PyBoundaryData {
    /// `amplitude * bump((t - center) / radius)`.
    #[staticmethod]
    #[pyo3(signature = (center, radius, amplitude = 1.0, t_start = -2.0, t_end = 2.0, nodes = 41))]
    fn bump(center: f64, radius: f64, amplitude: f64, t_start: f64, t_end: f64, nodes: usize) -> PyResult<Self> {
        let time = Axis::new(t_start, t_end, nodes).map_err(err)?;
        let g = SeparableBoundary::new(amplitude, Profile::bump(center, radius), None);
        BoundaryData::half_space(1, time, None, Arc::new(g)).map(Self).map_err(err)
    }

    #[staticmethod]
    fn from_samples(t_start: f64, t_end: f64, values: Vec<f64>) -> PyResult<Self> {
        let time = Axis::new(t_start, t_end, values.len()).map_err(err)?;
        BoundaryData::half_space_samples(1, time, None, values).map(Self).map_err(err)
    }

    /// Reads `t, x', value` rows plus the `.meta.json` sidecar.
    #[staticmethod]
    fn read_csv(path: PathBuf) -> PyResult<Self> {
        BoundaryData::read_csv(&path).map(Self).map_err(err)
    }

    fn write_csv(&self, path: PathBuf) -> PyResult<()> {
        self.0.write_csv(&path).map_err(err)
    }

    fn times(&self) -> Vec<f64> {
        self.0.time().points()
    }

    fn values(&self) -> Vec<f64> {
        self.0.values(0).to_vec()
    }

    /// Slobodeckij norm components as a dict, plus `"total"`.
    fn slobodeckij_norm<'py>(&self, py: Python<'py>, params: &PyWeightParams) -> PyResult<Bound<'py, PyDict>> {
        let r = py.detach(|| slobodeckij_norm(&self.0, &params.0, &SeminormSpec::default())).map_err(err)?;
        let d = PyDict::new(py);
        for c in &r.components {
            d.set_item(&c.name, c.value)?;
        }
        d.set_item("total", r.total)?;
        Ok(d)
    }
}

fn half_line_grid(time: &Axis, x1_max: f64, cells: usize) -> PyResult<Arc<SpaceTimeGrid>> {
    let normal = GradedGrid::half_line(x1_max, cells, 2.0, QuadRule::Gauss2).map_err(err)?;
    Ok(Arc::new(SpaceTimeGrid::new(time.clone(), normal, None)))
}

/// Extension of `g` (with the cutoff) sampled on a graded grid.
///
/// Returns a dict with `t`, `x1`, `u` (rows indexed by time), the parabolic
/// norms `tilde_1`, `tilde_2` and `trace_error`, the largest mismatch between
/// the sampled trace and `g`.
#[pyfunction]
#[pyo3(signature = (g, params, cells = 32, x1_max = 2.0))]
fn extend<'py>(py: Python<'py>, g: &PyBoundaryData, params: &PyWeightParams, cells: usize, x1_max: f64) -> PyResult<Bound<'py, PyDict>> {
    if params.0.n() != 1 {
        return Err(PyValueError::new_err("bindings cover n = 1"));
    }
    let grid = half_line_grid(g.0.time(), x1_max, cells)?;
    let w = params.0;
    let (u, t1, t2, trace_error) = py
        .detach(|| -> wtrace::Result<_> {
            let (u, rep) = heat_ext::extend_with_flux(&g.0, true, grid.clone(), ExtensionSpec::default())?;
            let t1 = tilde_norm(&u, Some(&rep), &w, 1)?.total;
            let t2 = tilde_norm(&u, Some(&rep), &w, 2)?.total;
            let tr = heat_ext::trace_restrict(&u.without_field(), true)?;
            let e = tr.values(0).iter().zip(g.0.values(0)).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            Ok((u, t1, t2, e))
        })
        .map_err(err)?;
    let nx = grid.nx();
    let rows: Vec<Vec<f64>> = u.values().chunks(nx).map(<[f64]>::to_vec).collect();
    let d = PyDict::new(py);
    d.set_item("t", grid.time.points())?;
    d.set_item("x1", grid.normal.points().to_vec())?;
    d.set_item("u", rows)?;
    d.set_item("tilde_1", t1)?;
    d.set_item("tilde_2", t2)?;
    d.set_item("trace_error", trace_error)?;
    Ok(d)
}

/// `tilde_norm(extend(g), gamma) / slobodeckij_norm(g)`.
#[pyfunction]
#[pyo3(signature = (g, params, gamma, cells = 32, x1_max = 2.0))]
fn extension_ratio(py: Python<'_>, g: &PyBoundaryData, params: &PyWeightParams, gamma: usize, cells: usize, x1_max: f64) -> PyResult<f64> {
    let grid = half_line_grid(g.0.time(), x1_max, cells)?;
    py.detach(|| heat_ext::extension_norm_ratio(&g.0, &params.0, gamma, grid, ExtensionSpec::default(), &SeminormSpec::default()))
        .map(|r| r.ratio)
        .map_err(err)
}

fn py_fn1(f: Py<PyAny>) -> impl Fn(f64) -> f64 + Send + Sync + 'static {
    move |t| Python::attach(|py| f.bind(py).call1((t,)).and_then(|v| v.extract::<f64>()).unwrap_or(f64::NAN))
}

fn py_fn2(f: Py<PyAny>) -> impl Fn(f64, f64) -> f64 + Send + Sync + 'static {
    move |t, x| Python::attach(|py| f.bind(py).call1((t, x)).and_then(|v| v.extract::<f64>()).unwrap_or(f64::NAN))
}

/// Solve on `(0, T) x (0, 1)` with zero initial data.
///
/// `form` is `"nondivergence"` (`u_t = u_xx - f`) or `"divergence"`
/// (`u_t = (u_x - f)_x`, with `f` the flux); `left`/`right` are the boundary
/// data as functions of `t`, vanishing at `t = 0`. With `lift` the boundary
/// data are first extended into the interior. Returns `t`, `x`, `u` (rows
/// by time) and `boundary_error`.
#[pyfunction]
#[pyo3(signature = (form, left, right, f = None, cells = 32, steps = 40, horizon = 1.0, crank_nicolson = false, lift = false, theta = 0.5))]
#[allow(clippy::too_many_arguments)]
fn solve_bvp<'py>(
    py: Python<'py>,
    form: &str,
    left: Py<PyAny>,
    right: Py<PyAny>,
    f: Option<Py<PyAny>>,
    cells: usize,
    steps: usize,
    horizon: f64,
    crank_nicolson: bool,
    lift: bool,
    theta: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let form = match form {
        "nondivergence" => BvpForm::Nondivergence,
        "divergence" => BvpForm::Divergence,
        other => return Err(PyValueError::new_err(format!("unknown form {other:?}"))),
    };
    let params = wtrace::WeightParams::new(2.0, theta, 1).map_err(err)?;
    let mut prob = BvpProblem::heat(form, horizon, params).with_boundary(py_fn1(left), py_fn1(right));
    if let Some(f) = f {
        prob = match form {
            BvpForm::Nondivergence => prob.with_f(py_fn2(f)),
            BvpForm::Divergence => prob.with_f1(py_fn2(f)),
        };
    }
    let scheme = if crank_nicolson { TimeScheme::CrankNicolson } else { TimeScheme::ImplicitEuler };
    let mesh = BvpMesh::new(cells, steps).map_err(err)?.with_scheme(scheme);
    let sol = py
        .detach(|| if lift { bvp::lift_and_solve(&prob, &mesh, ExtensionSpec::default()) } else { bvp::solve(&prob, &mesh) })
        .map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("t", mesh.time_axis(horizon).map_err(err)?.points())?;
    d.set_item("x", mesh.nodes())?;
    d.set_item("u", sol.nodal.values.clone())?;
    d.set_item("boundary_error", sol.boundary_error)?;
    Ok(d)
}

/// Run the command-line tool in-process; returns its exit code.
#[pyfunction]
fn run_cli(py: Python<'_>, args: Vec<String>) -> i32 {
    py.detach(|| wtrace::cli::main_with_args(std::iter::once("wtrace".to_string()).chain(args)))
}

#[pymodule]
fn wtrace_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("SCHEMA_VERSION", wtrace::SCHEMA_VERSION)?;
    m.add_class::<PyWeightParams>()?;
    m.add_class::<PyBoundaryData>()?;
    m.add_function(wrap_pyfunction!(rho, m)?)?;
    m.add_function(wrap_pyfunction!(kernel_value, m)?)?;
    m.add_function(wrap_pyfunction!(kernel_mass, m)?)?;
    m.add_function(wrap_pyfunction!(kernel_derivative_moment, m)?)?;
    m.add_function(wrap_pyfunction!(extend, m)?)?;
    m.add_function(wrap_pyfunction!(extension_ratio, m)?)?;
    m.add_function(wrap_pyfunction!(solve_bvp, m)?)?;
    m.add_function(wrap_pyfunction!(run_cli, m)?)?;
    Ok(())
}
