//! Parabolic boundary value problems on `(0, T) x (0, 1)` with
//! `u(0, .) = 0` and Dirichlet data `g = (g_left, g_right)`:
//!
//! * non-divergence: `-u_t + u_xx + b u_x + c u = f`
//! * divergence: `-u_t + D(Du + b u) + bt Du + c u = D f1 (+ f0)`
//!
//! Uniform nodes, central differences (face fluxes in divergence form),
//! theta-scheme in time, one tridiagonal solve per step.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::boundary::{slobodeckij_norm, BoundaryData, FnBoundary, SeminormSpec};
use crate::error::{Error, Result};
use crate::field::{Field, GridFunction, MultiIndex, TimeDerivativeRep};
use crate::grid::{Axis, GradedGrid, SpaceTimeGrid};
use crate::heat_ext::{ExtensionField, ExtensionSpec};
use crate::jet::cutoff_derivatives;
use crate::norms::{tilde_norm, weighted_pth_power};
use crate::params::WeightParams;
use crate::quad::QuadRule;
use crate::report::RatioEntry;

pub type Coef = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
pub type Data1 = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BvpForm {
    Divergence,
    Nondivergence,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeScheme {
    #[default]
    ImplicitEuler,
    CrankNicolson,
}

impl TimeScheme {
    fn implicitness(self) -> f64 {
        match self {
            TimeScheme::ImplicitEuler => 1.0,
            TimeScheme::CrankNicolson => 0.5,
        }
    }
}

/// Coefficients, data and bounds of one problem. Missing coefficients are zero.
#[derive(Clone)]
pub struct BvpProblem {
    pub form: BvpForm,
    pub b: Option<Coef>,
    pub b_tilde: Option<Coef>,
    pub c: Option<Coef>,
    /// Right side `f` (non-divergence) or the non-divergence part `f0`.
    pub f: Option<Coef>,
    /// Flux data `f1` (divergence form only).
    pub f1: Option<Coef>,
    pub g_left: Data1,
    pub g_right: Data1,
    pub horizon: f64,
    pub params: WeightParams,
    /// Bound `Lambda` on the weighted lower-order coefficients.
    pub lambda_bound: f64,
    /// Smallness of `rho |b|` (resp. `rho |bt|`) near the boundary.
    pub beta: f64,
    /// Width of the boundary strip where the smallness is checked.
    pub near_boundary: f64,
}

impl BvpProblem {
    /// Heat equation with zero data.
    pub fn heat(form: BvpForm, horizon: f64, params: WeightParams) -> Self {
        let zero: Data1 = Arc::new(|_| 0.0);
        Self {
            form,
            b: None,
            b_tilde: None,
            c: None,
            f: None,
            f1: None,
            g_left: zero.clone(),
            g_right: zero,
            horizon,
            params,
            lambda_bound: 100.0,
            beta: 0.1,
            near_boundary: 0.05,
        }
    }

    pub fn with_f(mut self, f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        self.f = Some(Arc::new(f));
        self
    }
    pub fn with_f1(mut self, f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        self.f1 = Some(Arc::new(f));
        self
    }
    pub fn with_b(mut self, f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        self.b = Some(Arc::new(f));
        self
    }
    pub fn with_b_tilde(mut self, f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        self.b_tilde = Some(Arc::new(f));
        self
    }
    pub fn with_c(mut self, f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        self.c = Some(Arc::new(f));
        self
    }
    pub fn with_boundary(
        mut self,
        left: impl Fn(f64) -> f64 + Send + Sync + 'static,
        right: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        self.g_left = Arc::new(left);
        self.g_right = Arc::new(right);
        self
    }

    /// Same problem with `f`, `f1` and `g` multiplied by `k`.
    pub fn scaled_data(&self, k: f64) -> Self {
        let sc = |f: &Option<Coef>| f.clone().map(|f| Arc::new(move |t, x| k * f(t, x)) as Coef);
        let gl = self.g_left.clone();
        let gr = self.g_right.clone();
        Self {
            f: sc(&self.f),
            f1: sc(&self.f1),
            g_left: Arc::new(move |t| k * gl(t)),
            g_right: Arc::new(move |t| k * gr(t)),
            ..self.clone()
        }
    }

    fn coef(c: &Option<Coef>, t: f64, x: f64) -> f64 {
        c.as_ref().map_or(0.0, |f| f(t, x))
    }

    /// Boundary data as [`BoundaryData`] on the time axis of `mesh`.
    pub fn boundary_data(&self, mesh: &BvpMesh) -> Result<BoundaryData> {
        let (l, r) = (self.g_left.clone(), self.g_right.clone());
        BoundaryData::unit_interval(
            mesh.time_axis(self.horizon)?,
            Arc::new(FnBoundary::new(move |t, _| l(t), None)),
            Arc::new(FnBoundary::new(move |t, _| r(t), None)),
        )
    }

    /// Checks the coefficient bounds at cell centres and time nodes, and
    /// zero compatibility `g(0) = 0`.
    pub fn validate(&self, mesh: &BvpMesh) -> Result<()> {
        if self.params.n() != 1 {
            return Err(Error::DimensionMismatch { expected: 1, got: self.params.n() });
        }
        if !(self.horizon > 0.0) {
            return Err(Error::InvalidParameter(format!("horizon must be positive, got {}", self.horizon)));
        }
        for (side, g) in [("left", &self.g_left), ("right", &self.g_right)] {
            let g0 = g(0.0);
            if g0.abs() > 1e-12 {
                return Err(Error::InvalidParameter(format!("{side} boundary data is not zero-compatible: g(0) = {g0}")));
            }
        }
        if self.form == BvpForm::Nondivergence && self.f1.is_some() {
            return Err(Error::InvalidParameter("flux data f1 needs the divergence form".into()));
        }
        let h = 1.0 / mesh.cells as f64;
        for k in 0..=mesh.steps {
            let t = self.horizon * k as f64 / mesh.steps as f64;
            for j in 0..mesh.cells {
                let x = (j as f64 + 0.5) * h;
                let rho = x.min(1.0 - x);
                let b = Self::coef(&self.b, t, x).abs();
                let bt = Self::coef(&self.b_tilde, t, x).abs();
                let c = Self::coef(&self.c, t, x).abs();
                let (bound, small, name) = match self.form {
                    BvpForm::Divergence => (b + rho * bt + rho * c, rho * bt, "rho |bt|"),
                    BvpForm::Nondivergence => (rho * b + rho * c, rho * b, "rho |b|"),
                };
                if !(bound <= self.lambda_bound) {
                    return Err(Error::CoefficientBoundViolated(format!(
                        "weighted lower-order coefficients reach {bound:.4e} > {} at (t, x) = ({t}, {x})",
                        self.lambda_bound
                    )));
                }
                if rho <= self.near_boundary && !(small <= self.beta) {
                    return Err(Error::CoefficientBoundViolated(format!(
                        "{name} = {small:.4e} exceeds {} near the boundary at (t, x) = ({t}, {x})",
                        self.beta
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Uniform space-time mesh: `cells` (even) intervals in `x`, `steps` in `t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BvpMesh {
    pub cells: usize,
    pub steps: usize,
    #[serde(default)]
    pub scheme: TimeScheme,
}

impl BvpMesh {
    pub fn new(cells: usize, steps: usize) -> Result<Self> {
        if cells < 4 || !cells.is_multiple_of(2) || steps == 0 {
            return Err(Error::InvalidParameter(format!(
                "mesh needs an even number (>= 4) of cells and at least one step, got {cells} x {steps}"
            )));
        }
        Ok(Self { cells, steps, scheme: TimeScheme::ImplicitEuler })
    }
    pub fn with_scheme(mut self, scheme: TimeScheme) -> Self {
        self.scheme = scheme;
        self
    }
    pub fn refined(&self, space: usize, time: usize) -> Self {
        Self { cells: self.cells * space, steps: self.steps * time, scheme: self.scheme }
    }
    pub fn time_axis(&self, horizon: f64) -> Result<Axis> {
        Axis::new(0.0, horizon, self.steps + 1)
    }
    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.cells).map(|j| j as f64 / self.cells as f64).collect()
    }
    /// Grid of cell centres used for norms of the solution.
    pub fn grid(&self, horizon: f64) -> Result<SpaceTimeGrid> {
        Ok(SpaceTimeGrid::new(self.time_axis(horizon)?, GradedGrid::unit_interval(self.cells / 2, 1.0, QuadRule::Midpoint)?, None))
    }
}

/// Solve `a_i x_{i-1} + b_i x_i + c_i x_{i+1} = d_i`.
pub fn thomas(a: &[f64], b: &[f64], c: &[f64], d: &[f64]) -> Result<Vec<f64>> {
    let n = b.len();
    let mut cp = vec![0.0; n];
    let mut dp = vec![0.0; n];
    let scale = b.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
    for i in 0..n {
        let m = b[i] - if i > 0 { a[i] * cp[i - 1] } else { 0.0 };
        if !(m.abs() > 1e-14 * scale) {
            return Err(Error::SingularSystem { row: i, pivot: m });
        }
        cp[i] = if i + 1 < n { c[i] / m } else { 0.0 };
        dp[i] = (d[i] - if i > 0 { a[i] * dp[i - 1] } else { 0.0 }) / m;
    }
    let mut x = dp;
    for i in (0..n.saturating_sub(1)).rev() {
        x[i] -= cp[i] * x[i + 1];
    }
    Ok(x)
}

/// Nodal values `u[k][j]` at `t_k = k dt`, `x_j = j h`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodalSolution {
    pub horizon: f64,
    pub mesh: BvpMesh,
    pub values: Vec<Vec<f64>>,
}

impl NodalSolution {
    pub fn max_diff(&self, other: &NodalSolution) -> f64 {
        self.values.iter().flatten().zip(other.values.iter().flatten()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    pub fn max_error(&self, exact: impl Fn(f64, f64) -> f64) -> f64 {
        let (h, dt) = (1.0 / self.mesh.cells as f64, self.horizon / self.mesh.steps as f64);
        let mut e = 0.0f64;
        for (k, row) in self.values.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                e = e.max((v - exact(k as f64 * dt, j as f64 * h)).abs());
            }
        }
        e
    }

    /// Values averaged to cell centres, time-major.
    fn cell_values(&self) -> Vec<f64> {
        self.values.iter().flat_map(|r| r.windows(2).map(|w| 0.5 * (w[0] + w[1]))).collect()
    }

    /// Backward differences in time (the first row copies the second).
    fn time_derivative(&self) -> Vec<Vec<f64>> {
        let dt = self.horizon / self.mesh.steps as f64;
        let mut out: Vec<Vec<f64>> = self.values.windows(2).map(|w| w[1].iter().zip(&w[0]).map(|(a, b)| (a - b) / dt).collect()).collect();
        out.insert(0, out[0].clone());
        out
    }
}

#[derive(Debug, Clone)]
pub struct BvpSolution {
    pub nodal: NodalSolution,
    /// Solution at cell centres.
    pub u: GridFunction,
    /// Discrete `u_t` at cell centres.
    pub ut: GridFunction,
    /// Lifting `v` and zero-boundary part `w` (lifting mode only).
    pub lifting: Option<(NodalSolution, NodalSolution)>,
    /// Largest mismatch between the boundary nodes and `g`.
    pub boundary_error: f64,
}

/// Right side of `u_t = A u + r` at one time level, as a tridiagonal operator.
struct Level {
    lower: Vec<f64>,
    diag: Vec<f64>,
    upper: Vec<f64>,
    source: Vec<f64>,
}

fn level(prob: &BvpProblem, t: f64, nodes: &[f64], extra_f1: Option<&Coef>, extra_f0: Option<&Coef>) -> Level {
    let m = nodes.len();
    let h = nodes[1] - nodes[0];
    let (mut lower, mut diag, mut upper, mut source) = (vec![0.0; m], vec![0.0; m], vec![0.0; m], vec![0.0; m]);
    let co = BvpProblem::coef;
    match prob.form {
        BvpForm::Nondivergence => {
            for j in 1..m - 1 {
                let x = nodes[j];
                let b = co(&prob.b, t, x);
                lower[j] = 1.0 / (h * h) - b / (2.0 * h);
                upper[j] = 1.0 / (h * h) + b / (2.0 * h);
                diag[j] = -2.0 / (h * h) + co(&prob.c, t, x);
                source[j] = -co(&prob.f, t, x) - extra_f0.map_or(0.0, |f| f(t, x));
            }
        }
        BvpForm::Divergence => {
            // F_{j+1/2} = (u_{j+1} - u_j)/h + b (u_j + u_{j+1})/2 - f1
            let faces: Vec<f64> = nodes.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
            let bf: Vec<f64> = faces.iter().map(|&x| co(&prob.b, t, x)).collect();
            let f1: Vec<f64> = faces.iter().map(|&x| co(&prob.f1, t, x) + extra_f1.map_or(0.0, |f| f(t, x))).collect();
            for j in 1..m - 1 {
                let x = nodes[j];
                let (bl, br) = (bf[j - 1], bf[j]);
                let bt = co(&prob.b_tilde, t, x);
                lower[j] = (1.0 / h - 0.5 * bl) / h - bt / (2.0 * h);
                upper[j] = (1.0 / h + 0.5 * br) / h + bt / (2.0 * h);
                diag[j] = (-1.0 / h + 0.5 * br - 1.0 / h - 0.5 * bl) / h + co(&prob.c, t, x);
                source[j] = -(f1[j] - f1[j - 1]) / h - co(&prob.f, t, x) - extra_f0.map_or(0.0, |f| f(t, x));
            }
        }
    }
    Level { lower, diag, upper, source }
}

fn march(
    prob: &BvpProblem,
    mesh: &BvpMesh,
    extra_f1: Option<&Coef>,
    extra_f0: Option<&Coef>,
    zero_boundary: bool,
) -> Result<NodalSolution> {
    prob.validate(mesh)?;
    let nodes = mesh.nodes();
    let m = nodes.len();
    let dt = prob.horizon / mesh.steps as f64;
    let th = mesh.scheme.implicitness();
    let mut values = vec![vec![0.0; m]];
    let mut prev = level(prob, 0.0, &nodes, extra_f1, extra_f0);
    for k in 1..=mesh.steps {
        let t = k as f64 * dt;
        let cur = level(prob, t, &nodes, extra_f1, extra_f0);
        let u = &values[k - 1];
        let (mut a, mut b, mut c, mut d) = (vec![0.0; m], vec![0.0; m], vec![0.0; m], vec![0.0; m]);
        for j in 1..m - 1 {
            let explicit = prev.lower[j] * u[j - 1] + prev.diag[j] * u[j] + prev.upper[j] * u[j + 1] + prev.source[j];
            a[j] = -dt * th * cur.lower[j];
            b[j] = 1.0 - dt * th * cur.diag[j];
            c[j] = -dt * th * cur.upper[j];
            d[j] = u[j] + dt * ((1.0 - th) * explicit + th * cur.source[j]);
        }
        b[0] = 1.0;
        b[m - 1] = 1.0;
        if !zero_boundary {
            d[0] = (prob.g_left)(t);
            d[m - 1] = (prob.g_right)(t);
        }
        values.push(thomas(&a, &b, &c, &d)?);
        prev = cur;
    }
    Ok(NodalSolution { horizon: prob.horizon, mesh: *mesh, values })
}

fn finish(prob: &BvpProblem, nodal: NodalSolution, lifting: Option<(NodalSolution, NodalSolution)>) -> Result<BvpSolution> {
    let grid = Arc::new(nodal.mesh.grid(prob.horizon)?);
    let u = GridFunction::from_values(grid.clone(), nodal.cell_values())?;
    let dts = nodal.time_derivative();
    let ut_nodal = NodalSolution { values: dts, ..nodal.clone() };
    let ut = GridFunction::from_values(grid, ut_nodal.cell_values())?;
    let dt = prob.horizon / nodal.mesh.steps as f64;
    let boundary_error = nodal
        .values
        .iter()
        .enumerate()
        .map(|(k, r)| {
            let t = k as f64 * dt;
            ((r[0] - (prob.g_left)(t)).abs()).max((r[r.len() - 1] - (prob.g_right)(t)).abs())
        })
        .fold(0.0, f64::max);
    Ok(BvpSolution { nodal, u, ut, lifting, boundary_error })
}

pub fn solve_nondivergence(prob: &BvpProblem, mesh: &BvpMesh) -> Result<BvpSolution> {
    if prob.form != BvpForm::Nondivergence {
        return Err(Error::InvalidParameter("problem is in divergence form".into()));
    }
    finish(prob, march(prob, mesh, None, None, false)?, None)
}

pub fn solve_divergence(prob: &BvpProblem, mesh: &BvpMesh) -> Result<BvpSolution> {
    if prob.form != BvpForm::Divergence {
        return Err(Error::InvalidParameter("problem is in non-divergence form".into()));
    }
    finish(prob, march(prob, mesh, None, None, false)?, None)
}

/// Direct solve in the problem's form.
pub fn solve(prob: &BvpProblem, mesh: &BvpMesh) -> Result<BvpSolution> {
    match prob.form {
        BvpForm::Nondivergence => solve_nondivergence(prob, mesh),
        BvpForm::Divergence => solve_divergence(prob, mesh),
    }
}

/// Cutoff half-width of the endpoint liftings.
const LIFT_DELTA: f64 = 0.25;

/// Boundary lifting `v = zeta(x/d) E_L(t, x) + zeta((1-x)/d) E_R(t, 1-x)`,
/// `E` the half-line heat extensions of the endpoint data.
pub struct Lifting {
    left: ExtensionField,
    right: ExtensionField,
}

impl Lifting {
    pub fn new(prob: &BvpProblem, spec: ExtensionSpec) -> Result<Self> {
        let mk = |g: &Data1| {
            let g = g.clone();
            ExtensionField::new(Arc::new(FnBoundary::new(move |t, _| g(t), Some((0.0, f64::INFINITY)))), 1, false, spec, 0.0)
        };
        Ok(Self { left: mk(&prob.g_left)?, right: mk(&prob.g_right)? })
    }

    /// `(v, v_x, v_xx, v_t)` at `(t, x)`.
    pub fn eval(&self, t: f64, x: f64) -> [f64; 4] {
        let mut out = [0.0; 4];
        for (ext, y, sign) in [(&self.left, x, 1.0), (&self.right, 1.0 - x, -1.0)] {
            let r = y / LIFT_DELTA;
            if r >= 2.0 || t <= 0.0 {
                continue;
            }
            let z = cutoff_derivatives(r);
            let (z0, z1, z2) = (z[0], z[1] / LIFT_DELTA, z[2] / (LIFT_DELTA * LIFT_DELTA));
            let e = |k| ext.derivative(MultiIndex::new(k, 0), t, y, 0.0).unwrap_or(f64::NAN);
            let (e0, e1, e2) = (ext.value(t, y, 0.0), e(1), e(2));
            out[0] += z0 * e0;
            // d/dx = sign * d/dy
            out[1] += sign * (z1 * e0 + z0 * e1);
            out[2] += z2 * e0 + 2.0 * z1 * e1 + z0 * e2;
            out[3] += z0 * e2;
        }
        out
    }
}

/// `u = v + w`: `v` lifts the boundary data, `w` solves the zero-boundary
/// problem with the right side absorbing `v`.
pub fn lift_and_solve(prob: &BvpProblem, mesh: &BvpMesh, spec: ExtensionSpec) -> Result<BvpSolution> {
    prob.validate(mesh)?;
    let lift = Arc::new(Lifting::new(prob, spec)?);
    let co = BvpProblem::coef;
    let w = match prob.form {
        BvpForm::Nondivergence => {
            // f_w = f - (-v_t + v_xx + b v_x + c v)
            let (l, p) = (lift.clone(), prob.clone());
            let f0: Coef = Arc::new(move |t, x| {
                let [v, vx, vxx, vt] = l.eval(t, x);
                -(-vt + vxx + co(&p.b, t, x) * vx + co(&p.c, t, x) * v)
            });
            march(prob, mesh, None, Some(&f0), true)?
        }
        BvpForm::Divergence => {
            // D f1_w + f0_w with f1_w = f1 - Dv - b v and f0_w = v_t - bt Dv - c v
            let (l, p) = (lift.clone(), prob.clone());
            let f1: Coef = Arc::new(move |t, x| {
                let [v, vx, _, _] = l.eval(t, x);
                -vx - co(&p.b, t, x) * v
            });
            let (l, p) = (lift.clone(), prob.clone());
            let f0: Coef = Arc::new(move |t, x| {
                let [v, vx, _, vt] = l.eval(t, x);
                vt - co(&p.b_tilde, t, x) * vx - co(&p.c, t, x) * v
            });
            march(prob, mesh, Some(&f1), Some(&f0), true)?
        }
    };
    let nodes = mesh.nodes();
    let dt = prob.horizon / mesh.steps as f64;
    let v_values: Vec<Vec<f64>> = (0..=mesh.steps).map(|k| nodes.iter().map(|&x| lift.eval(k as f64 * dt, x)[0]).collect()).collect();
    let v = NodalSolution { horizon: prob.horizon, mesh: *mesh, values: v_values };
    let u_values = v.values.iter().zip(&w.values).map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + y).collect()).collect();
    let u = NodalSolution { horizon: prob.horizon, mesh: *mesh, values: u_values };
    finish(prob, u, Some((v, w)))
}

/// `‖u‖ / (data norms)`: the gamma = 2 tilde norm over
/// `‖f‖_{L_{p,theta+p}} + ‖g‖` (non-divergence), the gamma = 1 tilde norm
/// over `‖f1‖_{L_{p,theta}} + ‖f0‖_{L_{p,theta+p}} + ‖g‖` (divergence).
///
/// The gamma = 1 flux of `u_t` is `G(t, x) = \int_0^x u_t`.
pub fn estimate_report(sol: &BvpSolution, prob: &BvpProblem, seminorm: &SeminormSpec) -> Result<RatioEntry> {
    let w = &prob.params;
    let p = w.p();
    let grid = sol.u.grid().clone();
    let sample = |c: &Option<Coef>| -> Vec<f64> {
        (0..grid.len())
            .map(|k| {
                let (t, x, _) = grid.coords(k);
                BvpProblem::coef(c, t, x)
            })
            .collect()
    };
    let lp = |vals: &[f64], shift: f64| -> Result<f64> { Ok(weighted_pth_power(&grid, vals, p, w.rho_power(shift))?.powf(1.0 / p)) };
    let g = prob.boundary_data(&sol.nodal.mesh)?;
    let g_norm = slobodeckij_norm(&g, w, seminorm)?.total;
    let (num, data) = match prob.form {
        BvpForm::Nondivergence => {
            let num = tilde_norm(&sol.u, Some(&TimeDerivativeRep::Direct(sol.ut.clone())), w, 2)?.total;
            (num, lp(&sample(&prob.f), p)?)
        }
        BvpForm::Divergence => {
            let h = 1.0 / sol.nodal.mesh.cells as f64;
            let dts = sol.nodal.time_derivative();
            let flux: Vec<f64> = dts
                .iter()
                .flat_map(|r| {
                    // cumulative trapezoid to nodes, then the cell-centre value
                    let mut acc = 0.0;
                    let mut cells = Vec::with_capacity(r.len() - 1);
                    for wdw in r.windows(2) {
                        cells.push(acc + 0.25 * h * (wdw[0] + 0.5 * (wdw[0] + wdw[1])));
                        acc += 0.5 * h * (wdw[0] + wdw[1]);
                    }
                    cells
                })
                .collect();
            let rep = TimeDerivativeRep::Flux(vec![GridFunction::from_values(grid.clone(), flux)?]);
            let num = tilde_norm(&sol.u, Some(&rep), w, 1)?.total;
            (num, lp(&sample(&prob.f1), 0.0)? + lp(&sample(&prob.f), p)?)
        }
    };
    let den = data + g_norm;
    if !(den > 0.0) {
        return Ok(RatioEntry::new("bvp", num, 0.0));
    }
    Ok(RatioEntry::new("bvp", num, den))
}

/// Discrete maximum principle check: `min g - tol <= u <= max g + tol`.
pub fn within_boundary_range(sol: &BvpSolution, tol: f64) -> bool {
    let (mut lo, mut hi) = (0.0f64, 0.0f64);
    for r in &sol.nodal.values {
        for v in [r[0], r[r.len() - 1]] {
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    sol.nodal.values.iter().flatten().all(|&v| v >= lo - tol && v <= hi + tol)
}

/// Manufactured non-divergence problems with exact solutions.
pub mod manufactured {
    use super::*;
    use std::f64::consts::PI;

    /// A problem with its exact solution.
    pub type Manufactured = (BvpProblem, fn(f64, f64) -> f64);

    /// `u = t x^2`: reproduced exactly by the scheme.
    pub fn quadratic(params: WeightParams) -> Manufactured {
        let p = BvpProblem::heat(BvpForm::Nondivergence, 1.0, params).with_f(|t, x| -x * x + 2.0 * t).with_boundary(|_| 0.0, |t| t);
        (p, |t, x| t * x * x)
    }

    /// `u = t (x + sin(pi x))`: linear in time, so only the space error remains.
    pub fn space_limited(params: WeightParams) -> Manufactured {
        let p = BvpProblem::heat(BvpForm::Nondivergence, 1.0, params)
            .with_f(|t, x| -(x + (PI * x).sin()) - t * PI * PI * (PI * x).sin())
            .with_boundary(|_| 0.0, |t| t);
        (p, |t, x| t * (x + (PI * x).sin()))
    }

    /// `u = (1 - cos(pi t)) x^2`: quadratic in space, so only the time error remains.
    pub fn time_limited(params: WeightParams) -> Manufactured {
        let p = BvpProblem::heat(BvpForm::Nondivergence, 1.0, params)
            .with_f(|t, x| -PI * (PI * t).sin() * x * x + 2.0 * (1.0 - (PI * t).cos()))
            .with_boundary(|_| 0.0, |t| 1.0 - (PI * t).cos());
        (p, |t, x| (1.0 - (PI * t).cos()) * x * x)
    }

    /// Divergence form, `u = t (2x - x^2)`, `f1 = t(2 - 2x) - (x^2 - x^3/3)`.
    pub fn divergence(params: WeightParams) -> Manufactured {
        let p = BvpProblem::heat(BvpForm::Divergence, 1.0, params)
            .with_f1(|t, x| t * (2.0 - 2.0 * x) - (x * x - x * x * x / 3.0))
            .with_boundary(|_| 0.0, |t| t);
        (p, |t, x| t * (2.0 * x - x * x))
    }

    /// Divergence form, `u = t (x + sin(pi x))`; the flux `f1 = Du - \int_0^x u_t`.
    pub fn divergence_space_limited(params: WeightParams) -> Manufactured {
        let p = BvpProblem::heat(BvpForm::Divergence, 1.0, params)
            .with_f1(|t, x| t * (1.0 + PI * (PI * x).cos()) - 0.5 * x * x - (1.0 - (PI * x).cos()) / PI)
            .with_boundary(|_| 0.0, |t| t);
        (p, |t, x| t * (x + (PI * x).sin()))
    }

    /// Divergence form, `u = (1 - cos(pi t)) x^2`.
    pub fn divergence_time_limited(params: WeightParams) -> Manufactured {
        let p = BvpProblem::heat(BvpForm::Divergence, 1.0, params)
            .with_f1(|t, x| 2.0 * x * (1.0 - (PI * t).cos()) - PI * (PI * t).sin() * x * x * x / 3.0)
            .with_boundary(|_| 0.0, |t| 1.0 - (PI * t).cos());
        (p, |t, x| (1.0 - (PI * t).cos()) * x * x)
    }

    /// `(space-limited, time-limited)` pair for `form`.
    pub fn convergence_pair(form: BvpForm, params: WeightParams) -> [Manufactured; 2] {
        match form {
            BvpForm::Nondivergence => [space_limited(params), time_limited(params)],
            BvpForm::Divergence => [divergence_space_limited(params), divergence_time_limited(params)],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::Profile;
    use crate::report::fit_slope;

    fn w() -> WeightParams {
        WeightParams::new(2.0, 0.5, 1).unwrap()
    }

    #[test]
    fn thomas_solves_and_detects_singularity() {
        let x = thomas(&[0.0, 1.0, 1.0], &[2.0, 2.0, 2.0], &[1.0, 1.0, 0.0], &[3.0, 4.0, 3.0]).unwrap();
        for v in x {
            assert!((v - 1.0).abs() < 1e-14);
        }
        assert!(matches!(thomas(&[0.0, 1.0], &[1.0, 1.0], &[1.0, 0.0], &[1.0, 1.0]), Err(Error::SingularSystem { row: 1, .. })));
    }

    #[test]
    fn zero_data_gives_zero() {
        let mesh = BvpMesh::new(16, 10).unwrap();
        for form in [BvpForm::Divergence, BvpForm::Nondivergence] {
            let s = solve(&BvpProblem::heat(form, 1.0, w()), &mesh).unwrap();
            assert!(s.nodal.values.iter().flatten().all(|v| *v == 0.0));
        }
    }

    #[test]
    fn manufactured_quadratic_is_exact() {
        let (p, exact) = manufactured::quadratic(w());
        let s = solve(&p, &BvpMesh::new(8, 5).unwrap()).unwrap();
        assert!(s.nodal.max_error(exact) < 1e-12);
        assert!(s.boundary_error < 1e-15);
        assert!(s.nodal.values[0].iter().all(|v| *v == 0.0));
        let (p, exact) = manufactured::divergence(w());
        let s = solve(&p, &BvpMesh::new(8, 5).unwrap()).unwrap();
        assert!(s.nodal.max_error(exact) < 1e-2);
    }

    #[test]
    fn convergence_orders() {
        let (p, exact) = manufactured::space_limited(w());
        let hs: Vec<f64> = (0..3).map(|k| 1.0 / (8 << k) as f64).collect();
        let es: Vec<f64> = (0..3).map(|k| solve(&p, &BvpMesh::new(8 << k, 4).unwrap()).unwrap().nodal.max_error(exact)).collect();
        assert!(fit_slope(&hs, &es) >= 1.9, "{es:?}");
        let (p, exact) = manufactured::time_limited(w());
        let ts: Vec<f64> = (0..3).map(|k| 1.0 / (10 << k) as f64).collect();
        let es: Vec<f64> = (0..3).map(|k| solve(&p, &BvpMesh::new(16, 10 << k).unwrap()).unwrap().nodal.max_error(exact)).collect();
        assert!(fit_slope(&ts, &es) >= 0.9, "{es:?}");
        // Crank-Nicolson is second order in time
        let es: Vec<f64> = (0..3)
            .map(|k| {
                let m = BvpMesh::new(16, 10 << k).unwrap().with_scheme(TimeScheme::CrankNicolson);
                solve(&p, &m).unwrap().nodal.max_error(exact)
            })
            .collect();
        assert!(fit_slope(&ts, &es) >= 1.8, "{es:?}");
        // divergence form: time error measured on a fine space mesh
        let [(ps, es_x), (pt, et_x)] = manufactured::convergence_pair(BvpForm::Divergence, w());
        let es: Vec<f64> = (0..3).map(|k| solve(&ps, &BvpMesh::new(8 << k, 4).unwrap()).unwrap().nodal.max_error(es_x)).collect();
        assert!(fit_slope(&hs, &es) >= 1.9, "{es:?}");
        let es: Vec<f64> = (0..3).map(|k| solve(&pt, &BvpMesh::new(64, 10 << k).unwrap()).unwrap().nodal.max_error(et_x)).collect();
        assert!(fit_slope(&ts, &es) >= 0.9, "{es:?}");
    }

    #[test]
    fn lifting_matches_direct_solve() {
        let bump = Profile::bump(0.5, 0.3);
        for form in [BvpForm::Nondivergence, BvpForm::Divergence] {
            let b2 = bump.clone();
            let p = BvpProblem::heat(form, 1.0, w()).with_boundary(|_| 0.0, move |t| b2.value(t)).with_c(|_, x| 0.5 * x);
            let mut prev = f64::INFINITY;
            for k in 0..3 {
                let mesh = BvpMesh::new(16 << k, 20 << (2 * k)).unwrap();
                let direct = solve(&p, &mesh).unwrap();
                let lifted = lift_and_solve(&p, &mesh, ExtensionSpec::default()).unwrap();
                let d = direct.nodal.max_diff(&lifted.nodal);
                assert!(d < prev, "{form:?} k={k}: {d}");
                assert!(lifted.boundary_error < 1e-9, "{}", lifted.boundary_error);
                prev = d;
            }
            assert!(prev < 5e-3, "{prev}");
        }
    }

    #[test]
    fn zero_lifting_is_direct_solve() {
        let p = BvpProblem::heat(BvpForm::Nondivergence, 1.0, w()).with_f(|t, x| t * x);
        let mesh = BvpMesh::new(16, 10).unwrap();
        let a = solve(&p, &mesh).unwrap();
        let b = lift_and_solve(&p, &mesh, ExtensionSpec::default()).unwrap();
        assert_eq!(a.nodal, b.nodal);
    }

    #[test]
    fn coefficient_bounds_are_checked() {
        let mesh = BvpMesh::new(16, 4).unwrap();
        let p = BvpProblem::heat(BvpForm::Nondivergence, 1.0, w()).with_b(|_, x| 1.0 / x.min(1.0 - x));
        assert!(matches!(solve(&p, &mesh), Err(Error::CoefficientBoundViolated(_))));
        let p = BvpProblem::heat(BvpForm::Nondivergence, 1.0, w()).with_b(|_, x| 0.05 / x.min(1.0 - x));
        assert!(solve(&p, &mesh).is_ok());
        let p = BvpProblem::heat(BvpForm::Nondivergence, 1.0, w()).with_boundary(|_| 1.0, |_| 0.0);
        assert!(matches!(solve(&p, &mesh), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn maximum_principle_and_linearity() {
        let b1 = Profile::bump(0.4, 0.3);
        let b2 = Profile::bump(0.6, 0.35);
        let (c1, c2) = (b1.clone(), b2.clone());
        let p = BvpProblem::heat(BvpForm::Nondivergence, 1.0, w()).with_boundary(move |t| c1.value(t), move |t| -0.5 * c2.value(t));
        let mesh = BvpMesh::new(32, 40).unwrap();
        let s = solve(&p, &mesh).unwrap();
        assert!(within_boundary_range(&s, 1e-12));
        let q = p.clone().with_f(|t, x| (3.0 * x).sin() * t);
        let sum = solve(&q.scaled_data(2.0), &mesh).unwrap();
        let a = solve(&q, &mesh).unwrap();
        for (x, y) in sum.nodal.values.iter().flatten().zip(a.nodal.values.iter().flatten()) {
            assert!((x - 2.0 * y).abs() < 1e-12);
        }
    }

    #[test]
    fn estimate_ratio_homogeneous_and_degenerate() {
        let seminorm = SeminormSpec::default();
        let mesh = BvpMesh::new(16, 16).unwrap();
        let p = BvpProblem::heat(BvpForm::Nondivergence, 1.0, w());
        let s = solve(&p, &mesh).unwrap();
        assert!(estimate_report(&s, &p, &seminorm).unwrap().degenerate);
        let bump = Profile::bump(0.5, 0.3);
        let p = p.with_f(|t, x| t * x).with_boundary(|_| 0.0, move |t| bump.value(t));
        let r1 = estimate_report(&solve(&p, &mesh).unwrap(), &p, &seminorm).unwrap();
        let p2 = p.scaled_data(2.0);
        let r2 = estimate_report(&solve(&p2, &mesh).unwrap(), &p2, &seminorm).unwrap();
        assert!((r1.ratio - r2.ratio).abs() < 1e-10 * r1.ratio);
        let (p, _) = manufactured::divergence(w());
        let r = estimate_report(&solve(&p, &mesh).unwrap(), &p, &seminorm).unwrap();
        assert!(r.ratio.is_finite() && r.ratio > 0.0);
    }
}
