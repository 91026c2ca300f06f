//! Quadrature engines: Gauss-Legendre panels, product rules for the
//! boundary weight `rho^w`, and geometrically graded panels for integrands
//! that concentrate at one endpoint.

use std::collections::BTreeMap;
use std::num::NonZeroUsize;
use std::sync::{Arc, Mutex, OnceLock};

use gauss_quad::legendre::GaussLegendre;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GradedGrid;

/// Gauss-Legendre nodes and weights on `[-1, 1]`, nodes ascending.
#[derive(Debug, Clone)]
pub struct GlRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GlRule {
    fn build(order: usize) -> Self {
        let order = NonZeroUsize::new(order.max(1)).unwrap();
        let rule = GaussLegendre::new(order);
        let mut pairs: Vec<(f64, f64)> = rule.into_iter().collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        Self { nodes: pairs.iter().map(|p| p.0).collect(), weights: pairs.iter().map(|p| p.1).collect() }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// Nodes and weights mapped to `[a, b]`.
    pub fn panel(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes.iter().zip(&self.weights).map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        self.panel(a, b).map(|(x, w)| w * f(x)).sum()
    }
}

/// Shared Gauss-Legendre rule of the given order.
pub fn gauss_legendre(order: usize) -> Arc<GlRule> {
    static CACHE: OnceLock<Mutex<BTreeMap<usize, Arc<GlRule>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(BTreeMap::new()));
    let mut guard = cache.lock().unwrap();
    guard.entry(order).or_insert_with(|| Arc::new(GlRule::build(order))).clone()
}

/// Sample placement inside each cell of a graded grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum QuadRule {
    #[default]
    Midpoint,
    Gauss2,
}

impl QuadRule {
    pub fn points_per_cell(&self) -> usize {
        match self {
            QuadRule::Midpoint => 1,
            QuadRule::Gauss2 => 2,
        }
    }
}

/// Quadrature knobs shared by the singular integrals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadSpec {
    pub rule: QuadRule,
    /// Lower cutoff for difference quotients and kernel time integrals.
    pub tau_min: f64,
    /// Ratio between consecutive graded panels, in (1, 2].
    pub log_factor: f64,
    /// Gauss-Legendre order used on each graded panel.
    pub panel_order: usize,
}

impl Default for QuadSpec {
    fn default() -> Self {
        Self { rule: QuadRule::Midpoint, tau_min: 1e-10, log_factor: 2.0, panel_order: 8 }
    }
}

impl QuadSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau_min > 0.0) {
            return Err(Error::InvalidParameter(format!("tau_min must be positive, got {}", self.tau_min)));
        }
        if !(self.log_factor > 1.0 && self.log_factor <= 2.0) {
            return Err(Error::InvalidParameter(format!("log-grading factor must lie in (1, 2], got {}", self.log_factor)));
        }
        if self.panel_order == 0 {
            return Err(Error::InvalidParameter("panel order must be positive".into()));
        }
        Ok(())
    }
}

/// `\int_a^b x^w dx` for `0 <= a < b`, `w > -1`, without cancellation for
/// thin cells far from the origin.
pub fn power_moment(a: f64, b: f64, w: f64) -> f64 {
    debug_assert!(a >= 0.0 && b >= a && w > -1.0);
    let e = w + 1.0;
    if a == 0.0 {
        return b.powf(e) / e;
    }
    // b^e - a^e = a^e * expm1(e * ln(b / a))
    a.powf(e) * (e * ((b - a) / a).ln_1p()).exp_m1() / e
}

/// `\int f(x) rho(x)^w dx` over the truncated domain of `grid`.
pub fn integrate_weighted<F: Fn(f64) -> f64>(f: F, grid: &GradedGrid, weight_power: f64) -> Result<f64> {
    let weights = grid.weights_for_power(weight_power)?;
    Ok(grid.points().iter().zip(&weights).map(|(&x, &w)| if w == 0.0 { 0.0 } else { w * f(x) }).sum())
}

/// Value plus a Richardson-style error estimate obtained by comparing with
/// the grid that has half as many cells.
pub fn integrate_weighted_with_error<F: Fn(f64) -> f64>(f: F, grid: &GradedGrid, weight_power: f64) -> Result<(f64, f64)> {
    let fine = integrate_weighted(&f, grid, weight_power)?;
    let coarse = integrate_weighted(&f, &grid.coarsened(), weight_power)?;
    Ok((fine, (fine - coarse).abs() / 3.0))
}

/// Panels `[a, a r, a r^2, ...]` up to `b`, each no wider than `h_max`,
/// with `order` Gauss-Legendre points per panel.
pub fn loggraded_rule(a: f64, b: f64, factor: f64, order: usize, h_max: f64) -> Result<Vec<(f64, f64)>> {
    if !(a > 0.0 && b > a && a.is_finite() && b.is_finite()) {
        return Err(Error::BadInterval { a, b });
    }
    if !(factor > 1.0) {
        return Err(Error::InvalidParameter(format!("grading factor {factor} must exceed 1")));
    }
    let gl = gauss_legendre(order);
    let mut out = Vec::new();
    let mut lo = a;
    while lo < b {
        let step = (lo * (factor - 1.0)).min(h_max);
        let mut hi = lo + step;
        // avoid a sliver panel at the end
        if hi > b || (b - hi) < 0.25 * step {
            hi = b;
        }
        out.extend(gl.panel(lo, hi));
        lo = hi;
    }
    Ok(out)
}

/// `\int_a^b f` on geometrically graded panels clustered at `a`.
pub fn integrate_loggraded<F: FnMut(f64) -> f64>(f: F, a: f64, b: f64) -> Result<f64> {
    integrate_loggraded_with(f, a, b, 2.0, 8)
}

pub fn integrate_loggraded_with<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, factor: f64, order: usize) -> Result<f64> {
    let rule = loggraded_rule(a, b, factor, order, f64::INFINITY)?;
    Ok(rule.into_iter().map(|(x, w)| w * f(x)).sum())
}

/// Composite Gauss-Legendre on `cells` equal panels of `[a, b]`.
pub fn composite_rule(a: f64, b: f64, cells: usize, order: usize) -> Vec<(f64, f64)> {
    let gl = gauss_legendre(order);
    let h = (b - a) / cells as f64;
    (0..cells)
        .flat_map(|k| {
            let lo = a + k as f64 * h;
            gl.panel(lo, lo + h).collect::<Vec<_>>()
        })
        .collect()
}
