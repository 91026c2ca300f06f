//! TOML run configuration with documented defaults.
//!
//! Every section and key is optional; unknown keys are rejected. Example:
//!
//! ```toml
//! [params]
//! p = 2.0
//! theta = 0.5
//! n = 1
//!
//! [grid]
//! cells = 32
//! time_nodes = 41
//!
//! [battery]
//! size = 10
//! seed = 7
//!
//! [tolerances]
//! kernel = 1e-6
//! ```

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::boundary::SeminormSpec;
use crate::bvp::{BvpForm, BvpMesh, TimeScheme};
use crate::error::{Error, Result};
use crate::grid::{Axis, GradedGrid, SpaceTimeGrid};
use crate::heat_ext::ExtensionSpec;
use crate::params::WeightParams;
use crate::quad::{QuadRule, QuadSpec};
use crate::trace_repr::ReprSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParamsConfig {
    pub p: f64,
    pub theta: f64,
    pub n: usize,
}

impl Default for ParamsConfig {
    fn default() -> Self {
        Self { p: 2.0, theta: 0.5, n: 1 }
    }
}

/// Half-space sampling grid: graded in `x1`, uniform in `t` and `x'`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub x1_max: f64,
    pub cells: usize,
    pub grading: f64,
    pub rule: QuadRule,
    pub t_min: f64,
    pub t_max: f64,
    pub time_nodes: usize,
    /// Tangential window `[-xp_max, xp_max]` when `n = 2`.
    pub xp_max: f64,
    pub tangential_nodes: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            x1_max: 2.0,
            cells: 32,
            grading: 2.0,
            rule: QuadRule::Gauss2,
            t_min: -2.0,
            t_max: 2.0,
            time_nodes: 41,
            xp_max: 3.0,
            tangential_nodes: 33,
        }
    }
}

impl GridConfig {
    pub fn build(&self, n: usize) -> Result<Arc<SpaceTimeGrid>> {
        let time = Axis::new(self.t_min, self.t_max, self.time_nodes)?;
        let normal = GradedGrid::half_line(self.x1_max, self.cells, self.grading, self.rule)?;
        let tangential = if n == 2 { Some(Axis::new(-self.xp_max, self.xp_max, self.tangential_nodes)?) } else { None };
        Ok(Arc::new(SpaceTimeGrid::new(time, normal, tangential)))
    }

    pub fn time_axis(&self) -> Result<Axis> {
        Axis::new(self.t_min, self.t_max, self.time_nodes)
    }

    pub fn tangential_axis(&self, n: usize) -> Result<Option<Axis>> {
        if n == 2 {
            Ok(Some(Axis::new(-self.xp_max, self.xp_max, self.tangential_nodes)?))
        } else {
            Ok(None)
        }
    }

    fn refined(&self, k: u32) -> Self {
        let f = 1usize << k;
        Self {
            cells: self.cells * f,
            time_nodes: (self.time_nodes - 1) * f + 1,
            tangential_nodes: (self.tangential_nodes - 1) * f + 1,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryFamily {
    /// The ten fixed bumps.
    Shipped,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldFamily {
    /// Gaussians in `x1` concentrated near the boundary.
    Hugging,
    /// Static functions vanishing on the boundary.
    Hardy,
    Representation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BatteryConfig {
    pub boundary: BoundaryFamily,
    pub field: FieldFamily,
    pub size: usize,
    pub seed: u64,
    pub sigma_min: f64,
    pub sigma_max: f64,
}

impl Default for BatteryConfig {
    fn default() -> Self {
        Self { boundary: BoundaryFamily::Shipped, field: FieldFamily::Hugging, size: 10, seed: 1, sigma_min: 0.05, sigma_max: 0.5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KernelConfig {
    pub x1: Vec<f64>,
    pub dims: Vec<usize>,
    /// Largest `|alpha|` for the derivative moments.
    pub max_order: usize,
}

impl Default for KernelConfig {
    fn default() -> Self {
        Self { x1: vec![0.1, 0.5, 1.0, 2.0], dims: vec![1, 2], max_order: 2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExtendConfig {
    pub cutoff: bool,
    /// Orders of the parabolic norm in the extension ratio.
    pub gammas: Vec<usize>,
}

impl Default for ExtendConfig {
    fn default() -> Self {
        Self { cutoff: true, gammas: vec![1, 2] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MollifierConfig {
    pub eps: f64,
    /// Boundary sample times, evenly spaced in `[t_min/2, t_max/2]`.
    pub samples: usize,
}

impl Default for MollifierConfig {
    fn default() -> Self {
        Self { eps: 0.25, samples: 5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BvpConfig {
    pub form: BvpForm,
    pub scheme: TimeScheme,
    /// Coarsest mesh; level `k` has `cells * 2^k` cells.
    pub cells: usize,
    pub steps: usize,
    /// Mesh levels in the convergence tables.
    pub levels: usize,
    pub battery: usize,
}

impl Default for BvpConfig {
    fn default() -> Self {
        Self { form: BvpForm::Nondivergence, scheme: TimeScheme::ImplicitEuler, cells: 16, steps: 10, levels: 3, battery: 10 }
    }
}

impl BvpConfig {
    pub fn mesh(&self) -> Result<BvpMesh> {
        Ok(BvpMesh::new(self.cells, self.steps)?.with_scheme(self.scheme))
    }
}

/// Pass/fail thresholds of the check subcommands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Kernel mass and derivative moments.
    pub kernel: f64,
    /// `max |trace(extend(g)) - g|`.
    pub right_inverse: f64,
    /// Smallest accepted order of the heat residual under refinement.
    pub heat_order: f64,
    pub repr_n1: f64,
    pub repr_n2: f64,
    /// Relative drift of the maximum ratio between two resolutions.
    pub drift: f64,
    pub bvp_time_slope: f64,
    pub bvp_space_slope: f64,
    /// `|u_lift - u_direct| <= lift_factor (dt + dx^2)`.
    pub lift_factor: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            kernel: 1e-6,
            right_inverse: 1e-3,
            heat_order: 1.8,
            repr_n1: 1e-4,
            repr_n2: 1e-3,
            drift: 0.1,
            bvp_time_slope: 0.9,
            bvp_space_slope: 1.9,
            lift_factor: 2.0,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IoConfig {
    /// Boundary data CSV (with its `.meta.json` sidecar) used instead of
    /// the boundary battery.
    pub boundary_input: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub params: ParamsConfig,
    pub grid: GridConfig,
    pub quad: QuadSpec,
    pub seminorm: SeminormSpec,
    pub extension: ExtensionSpec,
    pub extend: ExtendConfig,
    pub repr: ReprSpec,
    pub mollifier: MollifierConfig,
    pub kernel: KernelConfig,
    pub battery: BatteryConfig,
    pub bvp: BvpConfig,
    pub tolerances: Tolerances,
    pub io: IoConfig,
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn weight_params(&self) -> Result<WeightParams> {
        WeightParams::new(self.params.p, self.params.theta, self.params.n)
    }

    /// Checks everything that can be checked without running.
    pub fn validate(&self) -> Result<WeightParams> {
        let w = self.weight_params()?;
        self.quad.validate()?;
        let g = &self.grid;
        if g.cells == 0 || g.time_nodes < 2 || (w.n() == 2 && g.tangential_nodes < 2) {
            return Err(Error::Config("grid needs at least one cell and two nodes per axis".into()));
        }
        if !(g.t_max > g.t_min) || !(g.x1_max > 0.0) || !(g.grading >= 1.0) || !(g.xp_max > 0.0) {
            return Err(Error::Config("grid needs t_max > t_min, x1_max > 0, xp_max > 0 and grading >= 1".into()));
        }
        if !(self.battery.sigma_min > 0.0 && self.battery.sigma_max >= self.battery.sigma_min) {
            return Err(Error::Config("battery sigma range must be positive and ordered".into()));
        }
        if self.kernel.x1.iter().any(|&x| !(x > 0.0)) || self.kernel.dims.iter().any(|&n| n != 1 && n != 2) {
            return Err(Error::Config("kernel x1 must be positive and dims in {1, 2}".into()));
        }
        if self.kernel.max_order > 3 {
            return Err(Error::UnsupportedOrder(self.kernel.max_order));
        }
        if self.extend.gammas.iter().any(|g| !(1..=3).contains(g)) {
            return Err(Error::Config("extension gammas must lie in {1, 2, 3}".into()));
        }
        if !(self.mollifier.eps > 0.0) || self.mollifier.samples == 0 || self.repr.nodes == 0 {
            return Err(Error::Config("mollifier needs eps > 0, samples > 0 and nodes > 0".into()));
        }
        if self.bvp.levels < 2 {
            return Err(Error::Config("bvp convergence needs at least two levels".into()));
        }
        self.bvp.mesh()?;
        Ok(w)
    }

    /// Configuration `k` refinement steps finer.
    pub fn refined(&self, k: u32) -> Self {
        if k == 0 {
            return self.clone();
        }
        Self {
            grid: self.grid.refined(k),
            seminorm: self.seminorm.refined(k),
            extension: self.extension.refined(k),
            repr: self.repr.refined(k),
            bvp: BvpConfig { cells: self.bvp.cells << k, steps: self.bvp.steps << (2 * k), ..self.bvp.clone() },
            ..self.clone()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_gives_defaults() {
        let c = Config::from_toml("").unwrap();
        assert_eq!(c, Config::default());
        assert!(c.validate().is_ok());
    }

    #[test]
    fn round_trip() {
        let mut c = Config::default();
        c.params.theta = 1.5;
        c.battery.boundary = BoundaryFamily::Random;
        c.io.boundary_input = Some("g.csv".into());
        let back = Config::from_toml(&c.to_toml().unwrap()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn partial_sections_and_errors() {
        let c = Config::from_toml("[params]\ntheta = 1.5\n[extension]\nh_max = 0.01\n").unwrap();
        assert_eq!((c.params.p, c.params.theta), (2.0, 1.5));
        assert_eq!(c.extension.h_max, 0.01);
        assert!(matches!(Config::from_toml("[params]\nq = 1\n"), Err(Error::Config(_))));
        assert!(matches!(Config::from_toml("[grid]\ncells = -1\n"), Err(Error::Config(_))));
        let c = Config::from_toml("[params]\ntheta = 2.5\n").unwrap();
        assert!(matches!(c.validate(), Err(Error::OutOfRangeTheta { .. })));
    }

    #[test]
    fn refinement_doubles_grids() {
        let c = Config::default().refined(1);
        assert_eq!(c.grid.cells, 64);
        assert_eq!(c.grid.time_nodes, 81);
        assert_eq!(c.bvp.steps, 40);
        assert_eq!(c.seminorm, SeminormSpec::default().refined(1));
    }
}
