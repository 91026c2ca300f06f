//! Space-time fields: analytic evaluators, sampled grid functions and
//! representations of the time derivative.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fd::{derivative_along, Stencil, MAX_FD_ORDER};
use crate::grid::{GradedProfile, SpaceTimeGrid};
use crate::profile::Profile;

/// Derivative multi-index `(normal order, tangential order)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MultiIndex(pub [u8; 2]);

impl MultiIndex {
    pub const ZERO: MultiIndex = MultiIndex([0, 0]);

    pub fn new(normal: usize, tangential: usize) -> Self {
        MultiIndex([normal as u8, tangential as u8])
    }
    pub fn normal(&self) -> usize {
        self.0[0] as usize
    }
    pub fn tangential(&self) -> usize {
        self.0[1] as usize
    }
    pub fn order(&self) -> usize {
        self.normal() + self.tangential()
    }
    pub fn plus(&self, other: MultiIndex) -> Self {
        MultiIndex([self.0[0] + other.0[0], self.0[1] + other.0[1]])
    }
    /// Unit index in direction `i` (0 = normal, 1 = tangential).
    pub fn unit(i: usize) -> Self {
        if i == 0 {
            MultiIndex([1, 0])
        } else {
            MultiIndex([0, 1])
        }
    }

    /// All indices with `|alpha| <= k` in dimension `n`, graded by order.
    pub fn all_up_to(k: usize, n: usize) -> Vec<MultiIndex> {
        let mut out = Vec::new();
        for total in 0..=k {
            for a1 in (0..=total).rev() {
                let a2 = total - a1;
                if n == 1 && a2 > 0 {
                    continue;
                }
                out.push(MultiIndex::new(a1, a2));
            }
        }
        out
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.0[0], self.0[1])
    }
}

/// A scalar field `u(t, x1, x')` with optional analytic derivatives.
///
/// In one dimension `x'` is ignored.
pub trait Field: Send + Sync {
    fn dim(&self) -> usize;

    fn value(&self, t: f64, x1: f64, xp: f64) -> f64 {
        self.derivative(MultiIndex::ZERO, t, x1, xp).unwrap_or(f64::NAN)
    }

    /// `D^alpha u`, or `None` when not available analytically.
    fn derivative(&self, alpha: MultiIndex, t: f64, x1: f64, xp: f64) -> Option<f64>;

    /// `D^alpha u_t`, or `None` when not available analytically.
    fn time_derivative(&self, alpha: MultiIndex, t: f64, x1: f64, xp: f64) -> Option<f64>;

    /// Highest spatial derivative order served analytically.
    fn max_order(&self) -> usize;

    /// The separable form, when the field has one.
    fn as_separable(&self) -> Option<&SeparableField> {
        None
    }
}

/// `amplitude * T(t) X(x1) Y(x')`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparableField {
    pub amplitude: f64,
    pub time: Profile,
    pub normal: Profile,
    pub tangential: Option<Profile>,
}

impl SeparableField {
    pub fn new(amplitude: f64, time: Profile, normal: Profile, tangential: Option<Profile>) -> Self {
        Self { amplitude, time, normal, tangential }
    }

    /// Static field `X(x1)` (constant in time).
    pub fn static_1d(normal: Profile) -> Self {
        Self::new(1.0, Profile::constant(1.0), normal, None)
    }

    fn tangential_factor(&self, k: usize, xp: f64) -> f64 {
        match &self.tangential {
            Some(p) => p.derivative(k, xp),
            None if k == 0 => 1.0,
            None => 0.0,
        }
    }

    /// Flux components `(g_1, ..., g_n)` with `u_t = sum_i D_i g_i`:
    /// `g_1 = -T'(t) (\int_{x1}^\infty X) Y(x')` and `g_2 = 0`.
    ///
    /// Needs a normal profile with a finite upper tail.
    pub fn flux(&self) -> Result<Vec<Arc<dyn Field>>> {
        if self.normal.upper_tail(0.0).is_none() {
            return Err(Error::MissingRepresentation);
        }
        let mut out: Vec<Arc<dyn Field>> = vec![Arc::new(SeparableFlux { base: self.clone() })];
        if self.tangential.is_some() {
            out.push(Arc::new(ZeroField { dim: 2 }));
        }
        Ok(out)
    }

    pub fn max_profile_order(&self) -> usize {
        let t = self.tangential.as_ref().map_or(usize::MAX, Profile::max_order);
        self.normal.max_order().min(t)
    }
}

impl Field for SeparableField {
    fn dim(&self) -> usize {
        1 + usize::from(self.tangential.is_some())
    }

    fn derivative(&self, alpha: MultiIndex, t: f64, x1: f64, xp: f64) -> Option<f64> {
        if alpha.normal() > self.normal.max_order() {
            return None;
        }
        Some(
            self.amplitude
                * self.time.value(t)
                * self.normal.derivative(alpha.normal(), x1)
                * self.tangential_factor(alpha.tangential(), xp),
        )
    }

    fn time_derivative(&self, alpha: MultiIndex, t: f64, x1: f64, xp: f64) -> Option<f64> {
        if alpha.normal() > self.normal.max_order() {
            return None;
        }
        Some(
            self.amplitude
                * self.time.derivative(1, t)
                * self.normal.derivative(alpha.normal(), x1)
                * self.tangential_factor(alpha.tangential(), xp),
        )
    }

    fn max_order(&self) -> usize {
        self.max_profile_order().min(3)
    }

    fn as_separable(&self) -> Option<&SeparableField> {
        Some(self)
    }
}

/// First flux component of a [`SeparableField`].
#[derive(Debug, Clone)]
pub struct SeparableFlux {
    base: SeparableField,
}

impl SeparableFlux {
    fn eval(&self, time_order: usize, alpha: MultiIndex, t: f64, x1: f64, xp: f64) -> f64 {
        let b = &self.base;
        let normal =
            if alpha.normal() == 0 { b.normal.upper_tail(x1).unwrap_or(f64::NAN) } else { -b.normal.derivative(alpha.normal() - 1, x1) };
        -b.amplitude * b.time.derivative(time_order + 1, t) * normal * b.tangential_factor(alpha.tangential(), xp)
    }
}

impl Field for SeparableFlux {
    fn dim(&self) -> usize {
        self.base.dim()
    }
    fn derivative(&self, alpha: MultiIndex, t: f64, x1: f64, xp: f64) -> Option<f64> {
        Some(self.eval(0, alpha, t, x1, xp))
    }
    fn time_derivative(&self, alpha: MultiIndex, t: f64, x1: f64, xp: f64) -> Option<f64> {
        Some(self.eval(1, alpha, t, x1, xp))
    }
    fn max_order(&self) -> usize {
        self.base.max_order()
    }
}

/// The zero field.
#[derive(Debug, Clone, Copy)]
pub struct ZeroField {
    pub dim: usize,
}

impl Field for ZeroField {
    fn dim(&self) -> usize {
        self.dim
    }
    fn derivative(&self, _: MultiIndex, _: f64, _: f64, _: f64) -> Option<f64> {
        Some(0.0)
    }
    fn time_derivative(&self, _: MultiIndex, _: f64, _: f64, _: f64) -> Option<f64> {
        Some(0.0)
    }
    fn max_order(&self) -> usize {
        usize::MAX
    }
}

/// Linear combination `sum_k c_k u_k`.
#[derive(Clone)]
pub struct SumField {
    pub terms: Vec<(f64, Arc<dyn Field>)>,
}

impl SumField {
    pub fn new(terms: Vec<(f64, Arc<dyn Field>)>) -> Self {
        Self { terms }
    }
}

impl Field for SumField {
    fn dim(&self) -> usize {
        self.terms.iter().map(|(_, f)| f.dim()).max().unwrap_or(1)
    }
    fn derivative(&self, alpha: MultiIndex, t: f64, x1: f64, xp: f64) -> Option<f64> {
        self.terms.iter().map(|(c, f)| f.derivative(alpha, t, x1, xp).map(|v| c * v)).sum()
    }
    fn time_derivative(&self, alpha: MultiIndex, t: f64, x1: f64, xp: f64) -> Option<f64> {
        self.terms.iter().map(|(c, f)| f.time_derivative(alpha, t, x1, xp).map(|v| c * v)).sum()
    }
    fn max_order(&self) -> usize {
        self.terms.iter().map(|(_, f)| f.max_order()).min().unwrap_or(usize::MAX)
    }
}

/// Parabolic rescaling `u(lambda^2 t, lambda x)`.
#[derive(Clone)]
pub struct Rescaled {
    pub inner: Arc<dyn Field>,
    pub lambda: f64,
}

impl Field for Rescaled {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn derivative(&self, alpha: MultiIndex, t: f64, x1: f64, xp: f64) -> Option<f64> {
        let l = self.lambda;
        self.inner.derivative(alpha, l * l * t, l * x1, l * xp).map(|v| v * l.powi(alpha.order() as i32))
    }
    fn time_derivative(&self, alpha: MultiIndex, t: f64, x1: f64, xp: f64) -> Option<f64> {
        let l = self.lambda;
        self.inner.time_derivative(alpha, l * l * t, l * x1, l * xp).map(|v| v * l.powi(alpha.order() as i32 + 2))
    }
    fn max_order(&self) -> usize {
        self.inner.max_order()
    }
}

type ValueFn = dyn Fn(f64, f64, f64) -> f64 + Send + Sync;
type DerivFn = dyn Fn(MultiIndex, f64, f64, f64) -> Option<f64> + Send + Sync;

/// Field defined by closures; derivatives default to unavailable.
#[derive(Clone)]
pub struct FnField {
    dim: usize,
    value: Arc<ValueFn>,
    derivative: Option<Arc<DerivFn>>,
    time_derivative: Option<Arc<DerivFn>>,
    max_order: usize,
}

impl FnField {
    pub fn new(dim: usize, value: impl Fn(f64, f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        Self { dim, value: Arc::new(value), derivative: None, time_derivative: None, max_order: 0 }
    }

    pub fn with_derivatives(
        mut self,
        max_order: usize,
        d: impl Fn(MultiIndex, f64, f64, f64) -> Option<f64> + Send + Sync + 'static,
    ) -> Self {
        self.derivative = Some(Arc::new(d));
        self.max_order = max_order;
        self
    }

    pub fn with_time_derivative(mut self, d: impl Fn(MultiIndex, f64, f64, f64) -> Option<f64> + Send + Sync + 'static) -> Self {
        self.time_derivative = Some(Arc::new(d));
        self
    }
}

impl Field for FnField {
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, t: f64, x1: f64, xp: f64) -> f64 {
        (self.value)(t, x1, xp)
    }
    fn derivative(&self, alpha: MultiIndex, t: f64, x1: f64, xp: f64) -> Option<f64> {
        if alpha == MultiIndex::ZERO {
            return Some((self.value)(t, x1, xp));
        }
        self.derivative.as_ref().and_then(|d| d(alpha, t, x1, xp))
    }
    fn time_derivative(&self, alpha: MultiIndex, t: f64, x1: f64, xp: f64) -> Option<f64> {
        self.time_derivative.as_ref().and_then(|d| d(alpha, t, x1, xp))
    }
    fn max_order(&self) -> usize {
        self.max_order
    }
}

/// Samples of a field on a [`SpaceTimeGrid`], optionally backed by the
/// analytic field that produced them.
#[derive(Clone)]
pub struct GridFunction {
    grid: Arc<SpaceTimeGrid>,
    values: Vec<f64>,
    field: Option<Arc<dyn Field>>,
}

impl fmt::Debug for GridFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GridFunction")
            .field("grid", &self.grid.descriptor())
            .field("len", &self.values.len())
            .field("analytic", &self.field.is_some())
            .finish()
    }
}

impl GridFunction {
    /// Sample `field` at every grid point.
    pub fn sample(grid: Arc<SpaceTimeGrid>, field: Arc<dyn Field>) -> Result<Self> {
        if field.dim() != grid.dim() {
            return Err(Error::DimensionMismatch { expected: grid.dim(), got: field.dim() });
        }
        let values = sample_values(&grid, |t, x, y| field.value(t, x, y));
        Self::check_finite(&values)?;
        Ok(Self { grid, values, field: Some(field) })
    }

    /// Wrap raw samples (flat index as in [`SpaceTimeGrid::index`]).
    pub fn from_values(grid: Arc<SpaceTimeGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidParameter(format!("expected {} samples, got {}", grid.len(), values.len())));
        }
        Self::check_finite(&values)?;
        Ok(Self { grid, values, field: None })
    }

    fn check_finite(values: &[f64]) -> Result<()> {
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!("non-finite sample at index {k}")));
        }
        Ok(())
    }

    pub fn zeros(grid: Arc<SpaceTimeGrid>) -> Self {
        let n = grid.len();
        let dim = grid.dim();
        Self { grid, values: vec![0.0; n], field: Some(Arc::new(ZeroField { dim })) }
    }

    pub fn grid(&self) -> &Arc<SpaceTimeGrid> {
        &self.grid
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn field(&self) -> Option<&Arc<dyn Field>> {
        self.field.as_ref()
    }
    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    /// Same samples with the analytic backing dropped (forces finite differences).
    pub fn without_field(&self) -> Self {
        Self { grid: self.grid.clone(), values: self.values.clone(), field: None }
    }

    /// `a * self + b * other` on the same grid.
    pub fn combine(&self, a: f64, other: &GridFunction, b: f64) -> Result<Self> {
        if self.grid.descriptor() != other.grid.descriptor() {
            return Err(Error::InvalidParameter("grid functions live on different grids".into()));
        }
        let values = self.values.iter().zip(&other.values).map(|(x, y)| a * x + b * y).collect();
        let field = match (&self.field, &other.field) {
            (Some(f), Some(g)) => Some(Arc::new(SumField::new(vec![(a, f.clone()), (b, g.clone())])) as Arc<dyn Field>),
            _ => None,
        };
        Ok(Self { grid: self.grid.clone(), values, field })
    }

    /// Samples of `D^alpha u`: analytic when available, otherwise finite
    /// differences of order at most two per direction.
    pub fn derivative_values(&self, alpha: MultiIndex) -> Result<Vec<f64>> {
        if alpha == MultiIndex::ZERO {
            return Ok(self.values.clone());
        }
        if alpha.tangential() > 0 && self.dim() == 1 {
            return Ok(vec![0.0; self.values.len()]);
        }
        if let Some(f) = &self.field {
            if alpha.order() <= f.max_order() && f.derivative(alpha, 0.0, 0.5, 0.0).is_some() {
                return Ok(sample_values(&self.grid, |t, x, y| f.derivative(alpha, t, x, y).unwrap_or(f64::NAN)));
            }
        }
        self.fd_values(&self.values, alpha)
    }

    fn fd_values(&self, base: &[f64], alpha: MultiIndex) -> Result<Vec<f64>> {
        let max = alpha.normal().max(alpha.tangential());
        if max > MAX_FD_ORDER {
            let available = self.field.as_ref().map_or(MAX_FD_ORDER, |f| f.max_order().max(MAX_FD_ORDER));
            return Err(Error::MissingDerivatives { requested: alpha.order(), available });
        }
        let g = &self.grid;
        let (nt, nx, ny) = (g.nt(), g.nx(), g.ny());
        let mut cur = base.to_vec();
        if alpha.normal() > 0 {
            let mut out = vec![0.0; cur.len()];
            derivative_along(g.normal.points(), &cur, &mut out, nt, nx, ny, alpha.normal(), Stencil::Central5)?;
            cur = out;
        }
        if alpha.tangential() > 0 {
            let ys = g.tangential.as_ref().unwrap().points();
            let mut out = vec![0.0; cur.len()];
            derivative_along(&ys, &cur, &mut out, nt * nx, ny, 1, alpha.tangential(), Stencil::Central5)?;
            cur = out;
        }
        Ok(cur)
    }

    /// Samples of `D^alpha u_t` (analytic, else finite differences in time).
    pub fn time_derivative_values(&self, alpha: MultiIndex) -> Result<Vec<f64>> {
        if let Some(f) = &self.field {
            if alpha.order() <= f.max_order() && f.time_derivative(alpha, 0.0, 0.5, 0.0).is_some() {
                return Ok(sample_values(&self.grid, |t, x, y| f.time_derivative(alpha, t, x, y).unwrap_or(f64::NAN)));
            }
        }
        let g = &self.grid;
        if g.time.is_static() {
            return Ok(vec![0.0; self.values.len()]);
        }
        let base = self.derivative_values(alpha)?;
        let ts = g.time.points();
        let mut out = vec![0.0; base.len()];
        derivative_along(&ts, &base, &mut out, 1, g.nt(), g.nx() * g.ny(), 1, Stencil::Central5)?;
        Ok(out)
    }

    /// Values on the boundary `x1 = 0` (or `x = 1` when `right` is set on
    /// the unit interval), one per `(t, x')` sample in grid order.
    ///
    /// Uses the analytic field, then a boundary node, then quadratic
    /// extrapolation from the three nearest sample points if allowed.
    pub fn boundary_values(&self, right: bool, allow_extrapolation: bool) -> Result<Vec<f64>> {
        let g = &self.grid;
        let (nt, nx, ny) = (g.nt(), g.nx(), g.ny());
        let xb = if right { 1.0 } else { 0.0 };
        if right && !matches!(g.normal.profile(), GradedProfile::UnitInterval) {
            return Err(Error::InvalidParameter("right boundary exists only on the unit interval".into()));
        }
        if let Some(f) = &self.field {
            let ys = g.tangential.as_ref().map_or(vec![0.0], |a| a.points());
            let mut out = Vec::with_capacity(nt * ny);
            for it in 0..nt {
                let t = g.time.point(it);
                for &y in &ys {
                    out.push(f.value(t, xb, y));
                }
            }
            return Ok(out);
        }
        let xs = g.normal.points();
        let order: Vec<usize> = if right { (0..nx).rev().collect() } else { (0..nx).collect() };
        if g.normal.has_boundary_node() {
            let ix = order[0];
            return Ok((0..nt).flat_map(|it| (0..ny).map(move |iy| (it, iy))).map(|(it, iy)| self.values[g.index(it, ix, iy)]).collect());
        }
        if !allow_extrapolation || nx < 3 {
            return Err(Error::NoBoundaryAccess);
        }
        let idx = [order[0], order[1], order[2]];
        let pts: Vec<f64> = idx.iter().map(|&i| xs[i]).collect();
        let w = crate::fd::fornberg(xb, &pts, 0)[0].clone();
        Ok((0..nt)
            .flat_map(|it| (0..ny).map(move |iy| (it, iy)))
            .map(|(it, iy)| idx.iter().zip(&w).map(|(&ix, wj)| wj * self.values[g.index(it, ix, iy)]).sum())
            .collect())
    }
}

/// Evaluate `f(t, x1, x')` at every grid point, in parallel, in index order.
pub fn sample_values<F: Fn(f64, f64, f64) -> f64 + Sync>(grid: &SpaceTimeGrid, f: F) -> Vec<f64> {
    (0..grid.len())
        .into_par_iter()
        .map(|k| {
            let (t, x, y) = grid.coords(k);
            f(t, x, y)
        })
        .collect()
}

/// Representation of `u_t`: flux components with `u_t = sum_i D_i g_i`, or
/// `u_t` itself.
///
/// The gamma = 1 norm consumes the flux form; gamma >= 2 norms consume the
/// direct form (or differentiate `u` in time when only a flux is given).
#[derive(Debug, Clone)]
pub enum TimeDerivativeRep {
    Flux(Vec<GridFunction>),
    Direct(GridFunction),
}

impl TimeDerivativeRep {
    /// Sample analytic flux components on `grid`.
    pub fn flux_from_fields(grid: Arc<SpaceTimeGrid>, fields: &[Arc<dyn Field>]) -> Result<Self> {
        if fields.len() != grid.dim() {
            return Err(Error::DimensionMismatch { expected: grid.dim(), got: fields.len() });
        }
        let comps = fields.iter().map(|f| GridFunction::sample(grid.clone(), f.clone())).collect::<Result<Vec<_>>>()?;
        Ok(TimeDerivativeRep::Flux(comps))
    }

    pub fn zero(grid: Arc<SpaceTimeGrid>) -> Self {
        let n = grid.dim();
        TimeDerivativeRep::Flux((0..n).map(|_| GridFunction::zeros(grid.clone())).collect())
    }

    pub fn flux(&self) -> Option<&[GridFunction]> {
        match self {
            TimeDerivativeRep::Flux(g) => Some(g),
            TimeDerivativeRep::Direct(_) => None,
        }
    }
}

/// Both sides of `\int u phi_t = \int g_i D_i phi` for a test function
/// `phi` compactly supported inside the domain, by tensor Gauss-Legendre
/// quadrature over `[t0, t1] x [a, b] (x [c, d])`.
pub fn pairing_sides(
    u: &dyn Field,
    flux: &[Arc<dyn Field>],
    phi: &dyn Field,
    time: (f64, f64),
    normal: (f64, f64),
    tangential: Option<(f64, f64)>,
    panels: usize,
) -> (f64, f64) {
    let tr = crate::quad::composite_rule(time.0, time.1, panels, 6);
    let xr = crate::quad::composite_rule(normal.0, normal.1, panels, 6);
    let yr = tangential.map_or(vec![(0.0, 1.0)], |(c, d)| crate::quad::composite_rule(c, d, panels, 6));
    let (mut lhs, mut rhs) = (0.0, 0.0);
    for &(t, wt) in &tr {
        for &(x, wx) in &xr {
            for &(y, wy) in &yr {
                let w = wt * wx * wy;
                lhs += w * u.value(t, x, y) * phi.time_derivative(MultiIndex::ZERO, t, x, y).unwrap_or(0.0);
                for (i, g) in flux.iter().enumerate() {
                    let dphi = phi.derivative(MultiIndex::unit(i), t, x, y).unwrap_or(0.0);
                    rhs += w * g.value(t, x, y) * dphi;
                }
            }
        }
    }
    (lhs, rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Axis, GradedGrid};
    use crate::quad::QuadRule;

    fn sep_1d() -> SeparableField {
        SeparableField::new(1.3, Profile::bump(0.0, 0.8), Profile::gaussian(0.4, 0.2), None)
    }

    #[test]
    fn multi_indices_enumerated() {
        assert_eq!(MultiIndex::all_up_to(2, 1).len(), 3);
        assert_eq!(MultiIndex::all_up_to(2, 2).len(), 6);
        assert_eq!(MultiIndex::all_up_to(3, 2).len(), 10);
    }

    #[test]
    fn flux_pairing_identity() {
        // oracle: direct quadrature of both sides for five test functions
        let u = sep_1d();
        let flux = u.flux().unwrap();
        let mut largest = 0.0f64;
        for k in 0..5 {
            let c = 0.3 + 0.15 * k as f64;
            let phi = SeparableField::new(1.0, Profile::bump(-0.1 + 0.05 * k as f64, 0.6), Profile::bump(c, 0.25), None);
            let (l, r) = pairing_sides(&u, &flux, &phi, (-1.0, 1.0), (c - 0.25, c + 0.25), None, 48);
            assert!((l - r).abs() < 1e-8 * (1.0 + l.abs()), "phi {k}: {l} vs {r}");
            largest = largest.max(l.abs());
        }
        assert!(largest > 1e-3);
    }

    #[test]
    fn flux_pairing_two_dims() {
        let u = SeparableField::new(1.0, Profile::bump(0.0, 0.8), Profile::gaussian(0.3, 0.2), Some(Profile::bump(0.0, 1.0)));
        let flux = u.flux().unwrap();
        let phi = SeparableField::new(1.0, Profile::bump(0.2, 0.5), Profile::bump(0.5, 0.3), Some(Profile::bump(0.3, 0.5)));
        let (l, r) = pairing_sides(&u, &flux, &phi, (-0.3, 0.7), (0.2, 0.8), Some((-0.2, 0.8)), 10);
        assert!((l - r).abs() < 1e-8 * (1.0 + l.abs()));
    }

    #[test]
    fn samples_agree_with_field() {
        let grid = Arc::new(SpaceTimeGrid::new(
            Axis::new(-1.0, 1.0, 9).unwrap(),
            GradedGrid::half_line(2.0, 12, 3.0, QuadRule::Gauss2).unwrap(),
            None,
        ));
        let f: Arc<dyn Field> = Arc::new(sep_1d());
        let gf = GridFunction::sample(grid.clone(), f.clone()).unwrap();
        for k in 0..grid.len() {
            let (t, x, y) = grid.coords(k);
            assert!((gf.values()[k] - f.value(t, x, y)).abs() <= 1e-12);
        }
    }

    #[test]
    fn fd_derivatives_track_analytic_ones() {
        let grid = Arc::new(SpaceTimeGrid::new(
            Axis::new(-1.0, 1.0, 161).unwrap(),
            GradedGrid::half_line(2.0, 160, 1.5, QuadRule::Midpoint).unwrap(),
            None,
        ));
        let gf = GridFunction::sample(grid.clone(), Arc::new(sep_1d())).unwrap();
        let bare = gf.without_field();
        for alpha in [MultiIndex::new(1, 0), MultiIndex::new(2, 0)] {
            let a = gf.derivative_values(alpha).unwrap();
            let b = bare.derivative_values(alpha).unwrap();
            let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let err = a.iter().zip(&b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
            assert!(err < 2e-2 * scale, "{alpha}: {err} vs {scale}");
        }
        let a = gf.time_derivative_values(MultiIndex::ZERO).unwrap();
        let b = bare.time_derivative_values(MultiIndex::ZERO).unwrap();
        let err = a.iter().zip(&b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
        assert!(err < 2e-2);
        assert!(matches!(bare.derivative_values(MultiIndex::new(3, 0)), Err(Error::MissingDerivatives { .. })));
    }

    #[test]
    fn boundary_access_paths() {
        let normal = GradedGrid::half_line(1.0, 40, 1.0, QuadRule::Midpoint).unwrap();
        let grid = Arc::new(SpaceTimeGrid::new(Axis::new(-0.5, 0.5, 5).unwrap(), normal.clone(), None));
        let phi = Profile::bump(0.0, 0.8);
        let u = FnField::new(1, move |t, x, _| phi.value(t) * (1.0 + x));
        let gf = GridFunction::sample(grid.clone(), Arc::new(u.clone())).unwrap();
        let exact: Vec<f64> = grid.time.points().iter().map(|&t| Profile::bump(0.0, 0.8).value(t)).collect();
        let tr = gf.boundary_values(false, false).unwrap();
        assert_eq!(tr, exact);
        let bare = gf.without_field();
        assert_eq!(bare.boundary_values(false, false), Err(Error::NoBoundaryAccess));
        let ex = bare.boundary_values(false, true).unwrap();
        for (a, b) in ex.iter().zip(&exact) {
            assert!((a - b).abs() < 1e-13);
        }
        let grid_b = Arc::new(SpaceTimeGrid::new(Axis::new(-0.5, 0.5, 5).unwrap(), normal.with_boundary_node(true), None));
        let gb = GridFunction::sample(grid_b, Arc::new(u)).unwrap().without_field();
        assert_eq!(gb.boundary_values(false, false).unwrap(), exact);
    }

    #[test]
    fn rescaled_chain_rule() {
        let u: Arc<dyn Field> = Arc::new(sep_1d());
        let r = Rescaled { inner: u.clone(), lambda: 2.0 };
        let a = MultiIndex::new(1, 0);
        let v = r.derivative(a, 0.1, 0.2, 0.0).unwrap();
        assert!((v - 2.0 * u.derivative(a, 0.4, 0.4, 0.0).unwrap()).abs() < 1e-14);
        let w = r.time_derivative(MultiIndex::ZERO, 0.1, 0.2, 0.0).unwrap();
        assert!((w - 4.0 * u.time_derivative(MultiIndex::ZERO, 0.4, 0.4, 0.0).unwrap()).abs() < 1e-14);
    }
}
