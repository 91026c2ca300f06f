//! Boundary-graded spatial meshes and tensor space-time grids.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::domain::{Domain, DomainKind};
use crate::error::{Error, Result};
use crate::quad::{gauss_legendre, power_moment, QuadRule};

/// Which boundary the normal-direction mesh is graded toward.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GradedProfile {
    /// `(0, x_max]`, graded toward 0.
    HalfLine { x_max: f64 },
    /// `(0, 1)`, graded toward both endpoints with an edge at 1/2.
    UnitInterval,
}

/// Cells `x_j = X (j/M)^q` with a per-cell quadrature rule.
///
/// Sample points are the quadrature points of each cell; the optional
/// boundary node(s) are prepended/appended for evaluation and carry zero
/// quadrature weight.
#[derive(Debug, Clone, PartialEq)]
pub struct GradedGrid {
    profile: GradedProfile,
    cells: usize,
    grading: f64,
    rule: QuadRule,
    include_boundary_node: bool,
    edges: Vec<f64>,
    points: Vec<f64>,
    /// For each point: the cell it belongs to (`None` for boundary nodes).
    cell_of: Vec<Option<usize>>,
}

impl GradedGrid {
    /// Half-line mesh with `cells` cells.
    pub fn half_line(x_max: f64, cells: usize, grading: f64, rule: QuadRule) -> Result<Self> {
        if !(x_max > 0.0 && x_max.is_finite()) {
            return Err(Error::InvalidParameter(format!("x_max must be positive, got {x_max}")));
        }
        Self::build(GradedProfile::HalfLine { x_max }, cells, grading, rule)
    }

    /// Unit-interval mesh with `cells_per_half` graded cells on each half.
    pub fn unit_interval(cells_per_half: usize, grading: f64, rule: QuadRule) -> Result<Self> {
        Self::build(GradedProfile::UnitInterval, cells_per_half, grading, rule)
    }

    /// Mesh matching the normal direction of `domain`.
    pub fn for_domain(domain: &Domain, cells: usize, grading: f64, rule: QuadRule) -> Result<Self> {
        match domain.kind {
            DomainKind::HalfSpace { .. } => Self::half_line(domain.x1_max, cells, grading, rule),
            DomainKind::UnitInterval => Self::unit_interval(cells, grading, rule),
        }
    }

    fn build(profile: GradedProfile, cells: usize, grading: f64, rule: QuadRule) -> Result<Self> {
        if cells == 0 {
            return Err(Error::InvalidParameter("graded grid needs at least one cell".into()));
        }
        if !(grading >= 1.0 && grading.is_finite()) {
            return Err(Error::InvalidParameter(format!("grading exponent must be >= 1, got {grading}")));
        }
        let ramp = |x_max: f64| -> Vec<f64> { (0..=cells).map(|j| x_max * (j as f64 / cells as f64).powf(grading)).collect() };
        let edges = match profile {
            GradedProfile::HalfLine { x_max } => ramp(x_max),
            GradedProfile::UnitInterval => {
                let left = ramp(0.5);
                let mut e = left.clone();
                e.extend(left.iter().rev().skip(1).map(|x| 1.0 - x));
                e
            }
        };
        let mut grid = Self { profile, cells, grading, rule, include_boundary_node: false, edges, points: Vec::new(), cell_of: Vec::new() };
        grid.place_points();
        Ok(grid)
    }

    fn place_points(&mut self) {
        let mut points = Vec::new();
        let mut cell_of = Vec::new();
        if self.include_boundary_node {
            points.push(0.0);
            cell_of.push(None);
        }
        let gl = gauss_legendre(2);
        for (c, w) in self.edges.windows(2).enumerate() {
            match self.rule {
                QuadRule::Midpoint => {
                    points.push(0.5 * (w[0] + w[1]));
                    cell_of.push(Some(c));
                }
                QuadRule::Gauss2 => {
                    for (x, _) in gl.panel(w[0], w[1]) {
                        points.push(x);
                        cell_of.push(Some(c));
                    }
                }
            }
        }
        if self.include_boundary_node && matches!(self.profile, GradedProfile::UnitInterval) {
            points.push(1.0);
            cell_of.push(None);
        }
        self.points = points;
        self.cell_of = cell_of;
    }

    /// Same mesh with the boundary node(s) added as zero-weight samples.
    pub fn with_boundary_node(mut self, include: bool) -> Self {
        self.include_boundary_node = include;
        self.place_points();
        self
    }

    /// Mesh with half as many cells (at least one), same grading and rule.
    pub fn coarsened(&self) -> Self {
        Self::build(self.profile, (self.cells / 2).max(1), self.grading, self.rule)
            .expect("valid parameters")
            .with_boundary_node(self.include_boundary_node)
    }

    /// Mesh with `factor` times as many cells.
    pub fn refined(&self, factor: usize) -> Self {
        Self::build(self.profile, self.cells * factor.max(1), self.grading, self.rule)
            .expect("valid parameters")
            .with_boundary_node(self.include_boundary_node)
    }

    pub fn profile(&self) -> GradedProfile {
        self.profile
    }
    pub fn cells(&self) -> usize {
        self.cells
    }
    pub fn grading(&self) -> f64 {
        self.grading
    }
    pub fn rule(&self) -> QuadRule {
        self.rule
    }
    pub fn has_boundary_node(&self) -> bool {
        self.include_boundary_node
    }
    /// Cell edges, ascending, starting at 0.
    pub fn edges(&self) -> &[f64] {
        &self.edges
    }
    /// Sample points, ascending.
    pub fn points(&self) -> &[f64] {
        &self.points
    }
    pub fn len(&self) -> usize {
        self.points.len()
    }
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
    pub fn x_max(&self) -> f64 {
        *self.edges.last().unwrap()
    }

    /// Distance to the nearest boundary point of the profile.
    pub fn rho(&self, x: f64) -> f64 {
        match self.profile {
            GradedProfile::HalfLine { .. } => x,
            GradedProfile::UnitInterval => x.min(1.0 - x),
        }
    }

    /// Plain quadrature weights; they sum to the length of the mesh.
    pub fn weights(&self) -> Vec<f64> {
        self.weights_for_power(0.0).expect("power 0 is integrable")
    }

    /// Weights `w_i` with `sum_i w_i f(x_i) ~ \int f rho^power`.
    ///
    /// Midpoint cells carry the exact moment of `rho^power`; two-point
    /// Gauss cells use the pointwise weight except in the cells touching the
    /// boundary, where each point gets the exact moment of its half cell.
    pub fn weights_for_power(&self, power: f64) -> Result<Vec<f64>> {
        if !(power > -1.0) {
            return Err(Error::NonIntegrableWeight(power));
        }
        let gl = gauss_legendre(2);
        let moment = |a: f64, b: f64| -> f64 {
            // both endpoints lie in the same half, so rho is monotone on [a, b]
            let (ra, rb) = (self.rho(a), self.rho(b));
            power_moment(ra.min(rb).max(0.0), ra.max(rb), power)
        };
        let mut out = Vec::with_capacity(self.points.len());
        let mut k = 0;
        while k < self.points.len() {
            let Some(c) = self.cell_of[k] else {
                out.push(0.0);
                k += 1;
                continue;
            };
            let (a, b) = (self.edges[c], self.edges[c + 1]);
            match self.rule {
                QuadRule::Midpoint => {
                    out.push(moment(a, b));
                    k += 1;
                }
                QuadRule::Gauss2 => {
                    let touches = self.rho(a) == 0.0 || self.rho(b) == 0.0;
                    let mid = 0.5 * (a + b);
                    for (j, &gw) in gl.weights.iter().enumerate() {
                        let x = self.points[k + j];
                        if touches {
                            let (lo, hi) = if j == 0 { (a, mid) } else { (mid, b) };
                            out.push(moment(lo, hi));
                        } else {
                            out.push(gw * 0.5 * (b - a) * self.rho(x).powf(power));
                        }
                    }
                    k += 2;
                }
            }
        }
        Ok(out)
    }

    pub fn descriptor(&self) -> String {
        format!(
            "graded:{:?}:cells={}:q={}:rule={:?}:bnode={}",
            self.profile, self.cells, self.grading, self.rule, self.include_boundary_node
        )
    }
}

/// Uniform axis with trapezoid weights; a single node means a static
/// (unintegrated) direction with weight 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub start: f64,
    pub end: f64,
    pub nodes: usize,
}

impl Axis {
    pub fn new(start: f64, end: f64, nodes: usize) -> Result<Self> {
        if nodes == 0 {
            return Err(Error::InvalidParameter("axis needs at least one node".into()));
        }
        if nodes > 1 && !(end > start) {
            return Err(Error::BadInterval { a: start, b: end });
        }
        Ok(Self { start, end, nodes })
    }

    /// A single sample at `t`, e.g. for time-independent functions.
    pub fn single(t: f64) -> Self {
        Self { start: t, end: t, nodes: 1 }
    }

    pub fn len(&self) -> usize {
        self.nodes
    }
    pub fn is_empty(&self) -> bool {
        self.nodes == 0
    }
    pub fn is_static(&self) -> bool {
        self.nodes == 1
    }

    pub fn step(&self) -> f64 {
        if self.nodes < 2 {
            0.0
        } else {
            (self.end - self.start) / (self.nodes - 1) as f64
        }
    }

    pub fn point(&self, i: usize) -> f64 {
        if self.nodes == 1 {
            self.start
        } else if i + 1 == self.nodes {
            self.end
        } else {
            self.start + i as f64 * self.step()
        }
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.nodes).map(|i| self.point(i)).collect()
    }

    pub fn weights(&self) -> Vec<f64> {
        if self.nodes == 1 {
            return vec![1.0];
        }
        let h = self.step();
        (0..self.nodes).map(|i| if i == 0 || i + 1 == self.nodes { 0.5 * h } else { h }).collect()
    }

    pub fn refined(&self, factor: usize) -> Self {
        if self.nodes == 1 {
            return self.clone();
        }
        Self { nodes: (self.nodes - 1) * factor.max(1) + 1, ..self.clone() }
    }
}

/// Tensor grid time × normal × (optional) tangential direction.
///
/// Flat index of sample `(it, ix, iy)` is `(it * nx + ix) * ny + iy`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTimeGrid {
    pub time: Axis,
    pub normal: GradedGrid,
    pub tangential: Option<Axis>,
}

impl SpaceTimeGrid {
    pub fn new(time: Axis, normal: GradedGrid, tangential: Option<Axis>) -> Self {
        Self { time, normal, tangential }
    }

    /// Time-independent 1-D grid.
    pub fn spatial(normal: GradedGrid) -> Self {
        Self::new(Axis::single(0.0), normal, None)
    }

    pub fn dim(&self) -> usize {
        1 + usize::from(self.tangential.is_some())
    }
    pub fn nt(&self) -> usize {
        self.time.len()
    }
    pub fn nx(&self) -> usize {
        self.normal.len()
    }
    pub fn ny(&self) -> usize {
        self.tangential.as_ref().map_or(1, Axis::len)
    }
    pub fn len(&self) -> usize {
        self.nt() * self.nx() * self.ny()
    }
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, it: usize, ix: usize, iy: usize) -> usize {
        (it * self.nx() + ix) * self.ny() + iy
    }

    /// `(t, x1, x')` of a flat index; `x'` is 0 in one dimension.
    pub fn coords(&self, k: usize) -> (f64, f64, f64) {
        let ny = self.ny();
        let nx = self.nx();
        let iy = k % ny;
        let ix = (k / ny) % nx;
        let it = k / (ny * nx);
        let y = self.tangential.as_ref().map_or(0.0, |a| a.point(iy));
        (self.time.point(it), self.normal.points()[ix], y)
    }

    /// Product quadrature weights for `\int\int f rho^power dx dt`.
    pub fn weights_for_power(&self, power: f64) -> Result<Vec<f64>> {
        let wx = self.normal.weights_for_power(power)?;
        let wt = self.time.weights();
        let wy = self.tangential.as_ref().map_or(vec![1.0], Axis::weights);
        let mut out = Vec::with_capacity(self.len());
        for &a in &wt {
            for &b in &wx {
                for &c in &wy {
                    out.push(a * b * c);
                }
            }
        }
        Ok(out)
    }

    pub fn refined(&self, factor: usize) -> Self {
        Self {
            time: self.time.refined(factor),
            normal: self.normal.refined(factor),
            tangential: self.tangential.as_ref().map(|a| a.refined(factor)),
        }
    }

    pub fn descriptor(&self) -> String {
        format!("time:{:?}|{}|tan:{:?}", self.time, self.normal.descriptor(), self.tangential)
    }

    /// Stable hex digest of the grid description, written into reports.
    pub fn hash(&self) -> String {
        hex_digest(self.descriptor().as_bytes())
    }
}

pub(crate) fn hex_digest(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn nodes_follow_power_law() {
        let g = GradedGrid::half_line(4.0, 10, 3.0, QuadRule::Midpoint).unwrap();
        for (j, &x) in g.edges().iter().enumerate() {
            let expect = 4.0 * (j as f64 / 10.0).powi(3);
            assert!((x - expect).abs() <= 1e-15 * 4.0);
        }
        assert!(g.points().iter().all(|&x| x > 0.0 && x <= 4.0));
    }

    #[test]
    fn weights_sum_to_length() {
        for rule in [QuadRule::Midpoint, QuadRule::Gauss2] {
            let g = GradedGrid::half_line(4.0, 37, 3.0, rule).unwrap();
            let s: f64 = g.weights().iter().sum();
            assert!((s - 4.0).abs() <= 1e-12 * 4.0);
            assert!(g.weights().iter().all(|&w| w > 0.0));
            let u = GradedGrid::unit_interval(13, 2.0, rule).unwrap();
            let s: f64 = u.weights().iter().sum();
            assert!((s - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn boundary_node_has_zero_weight() {
        let g = GradedGrid::half_line(1.0, 8, 3.0, QuadRule::Midpoint).unwrap().with_boundary_node(true);
        assert_eq!(g.points()[0], 0.0);
        let w = g.weights_for_power(-0.5).unwrap();
        assert_eq!(w[0], 0.0);
        let s: f64 = w.iter().sum();
        assert!((s - 2.0).abs() < 1e-13);
        let u = GradedGrid::unit_interval(4, 3.0, QuadRule::Midpoint).unwrap().with_boundary_node(true);
        assert_eq!(*u.points().last().unwrap(), 1.0);
    }

    #[test]
    fn unit_interval_is_symmetric() {
        let u = GradedGrid::unit_interval(9, 3.0, QuadRule::Gauss2).unwrap();
        let p = u.points();
        let w = u.weights_for_power(-0.4).unwrap();
        let n = p.len();
        for i in 0..n {
            assert!((p[i] + p[n - 1 - i] - 1.0).abs() < 1e-14);
            assert!((w[i] - w[n - 1 - i]).abs() < 1e-14);
        }
    }

    #[test]
    fn space_time_indexing() {
        let g = SpaceTimeGrid::new(
            Axis::new(0.0, 1.0, 3).unwrap(),
            GradedGrid::half_line(1.0, 4, 1.0, QuadRule::Midpoint).unwrap(),
            Some(Axis::new(-1.0, 1.0, 5).unwrap()),
        );
        assert_eq!(g.len(), 60);
        let k = g.index(2, 1, 4);
        let (t, x, y) = g.coords(k);
        assert_eq!((t, y), (1.0, 1.0));
        assert!((x - 0.375).abs() < 1e-15);
        let w = g.weights_for_power(0.0).unwrap();
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-13);
        assert_eq!(g.hash(), g.clone().hash());
        assert_ne!(g.hash(), g.refined(2).hash());
    }

    proptest! {
        #[test]
        fn weighted_weights_positive(cells in 1usize..40, q in 1.0..4.0f64, w in -0.95..3.0f64) {
            let g = GradedGrid::half_line(3.0, cells, q, QuadRule::Gauss2).unwrap();
            let ws = g.weights_for_power(w).unwrap();
            prop_assert!(ws.iter().all(|&x| x > 0.0 && x.is_finite()));
        }
    }
}
