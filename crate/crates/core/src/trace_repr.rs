//! One-sided parabolic mollification, the integral representation of the
//! boundary value `u(t, 0, x')`, and the empirical trace-inequality ratio.
//!
//! The mollifier is `phi(a, b1, b') = eta(b1) tau(a) chi(b')`, scaled as
//! `eps^{-n-2} phi(t/eps^2, x/eps)`, so `u^(eps)(t, x) = \int phi(a, b)
//! u(t - eps^2 a, x - eps b)`. Profiles are exponential bumps
//! `bump1(y) = exp(-1/(1-y^2))` on shifted intervals:
//!
//! | mode           | `eta` support   | `tau` support | `chi` support |
//! |----------------|-----------------|---------------|---------------|
//! | representation | `(-1, -1/2)`    | `(0, 1)`      | `(-1, 1)`     |
//! | density        | `(-3/4, -1/4)`  | `(-1, 1)`     | `(-1/2, 1/2)` |
//!
//! Each factor is integrated with an `N`-point midpoint rule and normalised
//! to unit mass under that rule.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::boundary::{self, BoundaryData, SeminormSpec, TraceOf};
use crate::error::{Error, Result};
use crate::field::{Field, GridFunction, MultiIndex, TimeDerivativeRep};
use crate::norms::tilde_norm;
use crate::params::WeightParams;
use crate::profile::Profile;
use crate::quad::loggraded_rule;
use crate::report::{RatioEntry, RatioReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MollifierMode {
    Density,
    Representation,
}

/// A profile factor discretised as `(node, weight * profile, weight * profile')`.
type Factor = Vec<(f64, f64, f64)>;

fn factor(p: &Profile, n: usize) -> Factor {
    let (c, r) = match p {
        Profile::Bump { center, radius } => (*center, *radius),
        _ => unreachable!("mollifier factors are bumps"),
    };
    let h = 2.0 * r / n as f64;
    let raw: Factor = (0..n)
        .map(|k| {
            let x = c - r + (k as f64 + 0.5) * h;
            (x, h * p.value(x), h * p.derivative(1, x))
        })
        .collect();
    let mass: f64 = raw.iter().map(|f| f.1).sum();
    raw.into_iter().map(|(x, v, d)| (x, v / mass, d / mass)).collect()
}

#[derive(Debug, Clone)]
pub struct Mollifier {
    mode: MollifierMode,
    n: usize,
    eps: f64,
    time: Factor,
    normal: Factor,
    tangential: Factor,
}

impl Mollifier {
    /// `nodes` midpoint nodes per direction.
    pub fn new(mode: MollifierMode, n: usize, eps: f64, nodes: usize) -> Result<Self> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::InvalidParameter(format!("eps must be positive, got {eps}")));
        }
        if !(n == 1 || n == 2) {
            return Err(Error::InvalidParameter(format!("n must be 1 or 2, got {n}")));
        }
        if nodes < 4 {
            return Err(Error::InvalidParameter("mollifier needs at least 4 nodes".into()));
        }
        let (eta, tau, chi) = match mode {
            MollifierMode::Representation => (Profile::bump(-0.75, 0.25), Profile::bump(0.5, 0.5), Profile::bump(0.0, 1.0)),
            MollifierMode::Density => (Profile::bump(-0.5, 0.25), Profile::bump(0.0, 1.0), Profile::bump(0.0, 0.5)),
        };
        let tangential = if n == 2 { factor(&chi, nodes) } else { vec![(0.0, 1.0, 0.0)] };
        Ok(Self { mode, n, eps, time: factor(&tau, nodes), normal: factor(&eta, nodes), tangential })
    }

    pub fn mode(&self) -> MollifierMode {
        self.mode
    }
    pub fn eps(&self) -> f64 {
        self.eps
    }
    pub fn n(&self) -> usize {
        self.n
    }

    /// Total mass under the discrete rule.
    pub fn mass(&self) -> f64 {
        let s = |f: &Factor| f.iter().map(|x| x.1).sum::<f64>();
        s(&self.time) * s(&self.normal) * s(&self.tangential)
    }

    /// `\int (-b1) phi`: `u = x1` mollifies to `eps` times this at `x1 = 0`.
    pub fn normal_moment(&self) -> f64 {
        self.normal.iter().map(|&(b, w, _)| -b * w).sum()
    }

    /// `\int phi(a, b) f(a, b1, b')`.
    fn integrate(&self, mut f: impl FnMut(f64, f64, f64) -> f64) -> f64 {
        let mut s = 0.0;
        for &(a, wa, _) in &self.time {
            for &(b1, wb, _) in &self.normal {
                for &(bp, wp, _) in &self.tangential {
                    s += wa * wb * wp * f(a, b1, bp);
                }
            }
        }
        s
    }

    /// `(u^(eps))(t, x1, x')` for a pointwise function `u`.
    pub fn apply(&self, mut u: impl FnMut(f64, f64, f64) -> f64, t: f64, x1: f64, xp: f64) -> f64 {
        let e = self.eps;
        self.integrate(|a, b1, bp| u(t - e * e * a, x1 - e * b1, xp - e * bp))
    }
}

/// `u^(eps)` as a field: derivatives are mollified derivatives.
pub struct MollifiedField {
    inner: Arc<dyn Field>,
    moll: Mollifier,
}

impl MollifiedField {
    pub fn new(inner: Arc<dyn Field>, moll: Mollifier) -> Self {
        Self { inner, moll }
    }
}

impl Field for MollifiedField {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn derivative(&self, alpha: MultiIndex, t: f64, x1: f64, xp: f64) -> Option<f64> {
        let mut ok = true;
        let v = self.moll.apply(
            |s, y1, yp| {
                self.inner.derivative(alpha, s, y1, yp).unwrap_or_else(|| {
                    ok = false;
                    0.0
                })
            },
            t,
            x1,
            xp,
        );
        ok.then_some(v)
    }
    fn time_derivative(&self, alpha: MultiIndex, t: f64, x1: f64, xp: f64) -> Option<f64> {
        let mut ok = true;
        let v = self.moll.apply(
            |s, y1, yp| {
                self.inner.time_derivative(alpha, s, y1, yp).unwrap_or_else(|| {
                    ok = false;
                    0.0
                })
            },
            t,
            x1,
            xp,
        );
        ok.then_some(v)
    }
    fn max_order(&self) -> usize {
        self.inner.max_order()
    }
}

/// Wraps a field and counts evaluations, separately those at `x1 < 0`.
pub struct CountingField {
    inner: Arc<dyn Field>,
    total: AtomicUsize,
    outside: AtomicUsize,
}

impl CountingField {
    pub fn new(inner: Arc<dyn Field>) -> Self {
        Self { inner, total: AtomicUsize::new(0), outside: AtomicUsize::new(0) }
    }
    pub fn total(&self) -> usize {
        self.total.load(Ordering::Relaxed)
    }
    pub fn outside(&self) -> usize {
        self.outside.load(Ordering::Relaxed)
    }
    fn count(&self, x1: f64) {
        self.total.fetch_add(1, Ordering::Relaxed);
        if x1 < 0.0 {
            self.outside.fetch_add(1, Ordering::Relaxed);
        }
    }
}

impl Field for CountingField {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn derivative(&self, alpha: MultiIndex, t: f64, x1: f64, xp: f64) -> Option<f64> {
        self.count(x1);
        self.inner.derivative(alpha, t, x1, xp)
    }
    fn time_derivative(&self, alpha: MultiIndex, t: f64, x1: f64, xp: f64) -> Option<f64> {
        self.count(x1);
        self.inner.time_derivative(alpha, t, x1, xp)
    }
    fn max_order(&self) -> usize {
        self.inner.max_order()
    }
}

fn analytic(u: &GridFunction) -> Result<&Arc<dyn Field>> {
    u.field().ok_or_else(|| Error::InvalidParameter("pointwise evaluation needs an analytic field".into()))
}

fn flux_fields(rep: &TimeDerivativeRep, n: usize) -> Result<Vec<Arc<dyn Field>>> {
    let flux = rep.flux().ok_or(Error::MissingRepresentation)?;
    if flux.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: flux.len() });
    }
    flux.iter().map(|g| analytic(g).cloned()).collect()
}

/// `u^(eps)` sampled on the grid of `u` (which must carry a field).
pub fn mollify(u: &GridFunction, eps: f64, mode: MollifierMode, nodes: usize) -> Result<GridFunction> {
    let field = analytic(u)?.clone();
    let moll = Mollifier::new(mode, u.dim(), eps, nodes)?;
    GridFunction::sample(u.grid().clone(), Arc::new(MollifiedField::new(field, moll)))
}

/// The three integrands of the representation at `(t, 0, x')` and lag `lambda`.
pub fn vj_terms_fields(u: &dyn Field, flux: &[Arc<dyn Field>], t: f64, xp: f64, lambda: f64, m: &Mollifier) -> Result<[f64; 3]> {
    if m.mode != MollifierMode::Representation {
        return Err(Error::InvalidParameter("V terms need a representation-mode mollifier".into()));
    }
    if !(lambda > 0.0) {
        return Err(Error::InvalidParameter(format!("lambda must be positive, got {lambda}")));
    }
    if flux.len() != m.n {
        return Err(Error::DimensionMismatch { expected: m.n, got: flux.len() });
    }
    let r = lambda.sqrt();
    let d1 = MultiIndex::unit(0);
    let d2 = MultiIndex::unit(1);
    let missing = || Error::MissingDerivatives { requested: 1, available: 0 };
    let (mut v1, mut v2, mut v3) = (0.0, 0.0, 0.0);
    for &(a, wa, _) in &m.time {
        let l = t - lambda * a;
        for &(b1, wb, db) in &m.normal {
            let z1 = -r * b1;
            for &(bp, wp, dp) in &m.tangential {
                let zp = xp - r * bp;
                let w = wa * wb * wp;
                v1 += w * (-b1) * u.derivative(d1, l, z1, zp).ok_or_else(missing)?;
                if m.n == 2 {
                    v2 += w * (-bp) * u.derivative(d2, l, z1, zp).ok_or_else(missing)?;
                }
                let mut gd = flux[0].value(l, z1, zp) * db * wp;
                if m.n == 2 {
                    gd += flux[1].value(l, z1, zp) * wb * dp;
                }
                v3 += wa * (-a) * gd;
            }
        }
    }
    let s = 1.0 / r;
    Ok([0.5 * s * v1, 0.5 * s * v2, s * v3])
}

/// [`vj_terms_fields`] for grid functions carrying analytic fields.
pub fn vj_terms(u: &GridFunction, ut_rep: &TimeDerivativeRep, t: f64, xp: f64, lambda: f64, m: &Mollifier) -> Result<[f64; 3]> {
    let flux = flux_fields(ut_rep, u.dim())?;
    vj_terms_fields(analytic(u)?.as_ref(), &flux, t, xp, lambda, m)
}

/// Quadrature knobs for the representation residual.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReprSpec {
    /// Midpoint nodes per mollifier direction.
    pub nodes: usize,
    /// Lower end of the log-graded lambda nodes.
    pub lambda_min: f64,
    pub log_factor: f64,
    pub panel_order: usize,
}

impl Default for ReprSpec {
    fn default() -> Self {
        Self { nodes: 48, lambda_min: 1e-12, log_factor: 2.0, panel_order: 8 }
    }
}

impl ReprSpec {
    /// `k` joint refinements of the lambda grid (smaller cutoff, more
    /// nodes per panel) and the mollifier rule.
    pub fn refined(&self, k: u32) -> Self {
        Self {
            nodes: self.nodes + 16 * k as usize,
            lambda_min: self.lambda_min * 1e-2f64.powi(k as i32),
            panel_order: self.panel_order + 2 * k as usize,
            ..*self
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReprResidual {
    pub max: f64,
    pub per_sample: Vec<f64>,
    /// Leading-order estimate of the omitted `[0, lambda_min]` piece.
    pub truncation: f64,
}

/// `max |u(t,0,x') - u^(eps)(t,0,x') + sum_j \int_0^{eps^2} V_j|` over the samples.
///
/// The lambda integral uses log-graded nodes on `[lambda_min, eps^2]`; the
/// integrands behave like `lambda^{-1/2}` near 0, so the omitted piece is
/// added as `2 lambda_min V(lambda_min)` and also reported.
pub fn representation_residual_fields(
    u: &dyn Field,
    flux: &[Arc<dyn Field>],
    eps: f64,
    samples: &[(f64, f64)],
    spec: &ReprSpec,
) -> Result<ReprResidual> {
    let n = u.dim();
    let m = Mollifier::new(MollifierMode::Representation, n, eps, spec.nodes)?;
    let lmin = spec.lambda_min;
    if !(lmin > 0.0 && lmin < eps * eps) {
        return Err(Error::InvalidParameter(format!("lambda_min must lie in (0, eps^2), got {lmin}")));
    }
    let nodes = loggraded_rule(lmin, eps * eps, spec.log_factor, spec.panel_order, f64::INFINITY)?;
    let mut per_sample = Vec::with_capacity(samples.len());
    let mut truncation = 0.0f64;
    for &(t, xp) in samples {
        let mut integral = 0.0;
        for &(l, w) in &nodes {
            integral += w * vj_terms_fields(u, flux, t, xp, l, &m)?.iter().sum::<f64>();
        }
        let tail = 2.0 * lmin * vj_terms_fields(u, flux, t, xp, lmin, &m)?.iter().sum::<f64>();
        truncation = truncation.max(tail.abs());
        integral += tail;
        let mollified = m.apply(|s, y1, yp| u.value(s, y1, yp), t, 0.0, xp);
        per_sample.push((u.value(t, 0.0, xp) - mollified + integral).abs());
    }
    let max = per_sample.iter().copied().fold(0.0, f64::max);
    Ok(ReprResidual { max, per_sample, truncation })
}

pub fn representation_residual(
    u: &GridFunction,
    ut_rep: &TimeDerivativeRep,
    eps: f64,
    samples: &[(f64, f64)],
    spec: &ReprSpec,
) -> Result<ReprResidual> {
    let flux = flux_fields(ut_rep, u.dim())?;
    representation_residual_fields(analytic(u)?.as_ref(), &flux, eps, samples, spec)
}

/// Smallest interval outside of which all `values` (sampled on `points`,
/// at stride `stride` and offset `offset`) vanish; `None` unless the first
/// and last samples vanish.
fn sampled_support(points: &[f64], nonzero: impl Fn(usize) -> bool) -> Option<(f64, f64)> {
    let n = points.len();
    if n < 3 || nonzero(0) || nonzero(n - 1) {
        return None;
    }
    let first = (0..n).find(|&k| nonzero(k))?;
    let last = (0..n).rev().find(|&k| nonzero(k))?;
    Some((points[first - 1], points[last + 1]))
}

/// Boundary data of `u`: the exact restriction when `u` carries a field
/// (with supports read off the samples), else sampled values.
pub fn boundary_trace(u: &GridFunction) -> Result<BoundaryData> {
    let Some(field) = u.field() else {
        return crate::heat_ext::trace_restrict(u, true);
    };
    let g = u.grid();
    let vals = u.boundary_values(false, true)?;
    let ny = g.ny();
    let times = g.time.points();
    let time_support = sampled_support(&times, |k| (0..ny).any(|j| vals[k * ny + j] != 0.0));
    let tangential_support = g.tangential.as_ref().and_then(|ax| {
        let ys = ax.points();
        sampled_support(&ys, |j| (0..g.nt()).any(|k| vals[k * ny + j] != 0.0))
    });
    let f: Arc<dyn boundary::BoundaryFn> = match field.as_separable() {
        Some(sep) => {
            let a = sep.amplitude * sep.normal.value(0.0);
            Arc::new(boundary::SeparableBoundary::new(a, sep.time.clone(), sep.tangential.clone()))
        }
        None => Arc::new(TraceOf { field: field.clone(), x_b: 0.0, time_support, tangential_support }),
    };
    BoundaryData::half_space(g.dim(), g.time.clone(), g.tangential.clone(), f)
}

/// Per-function `slobodeckij_norm(trace u) / tilde_norm(u, gamma = 1)`.
///
/// `homogeneous_ratio` compares the seminorms with `|Du| + |g|`, the parts
/// that scale alike under `u(lambda^2 t, lambda x)`.
pub fn trace_inequality_ratio(
    battery: &[(GridFunction, TimeDerivativeRep)],
    w: &WeightParams,
    seminorm: &SeminormSpec,
) -> Result<RatioReport> {
    let entries = battery
        .iter()
        .enumerate()
        .map(|(k, (u, rep))| trace_ratio_entry(format!("u{k}"), u, rep, w, seminorm))
        .collect::<Result<Vec<_>>>()?;
    Ok(RatioReport::from_entries(entries))
}

pub fn trace_ratio_entry(
    label: String,
    u: &GridFunction,
    rep: &TimeDerivativeRep,
    w: &WeightParams,
    seminorm: &SeminormSpec,
) -> Result<RatioEntry> {
    let g = boundary_trace(u)?;
    let num = boundary::slobodeckij_norm(&g, w, seminorm)?;
    let den = tilde_norm(u, Some(rep), w, 1)?;
    let part = |r: &crate::report::NormReport, names: &[&str]| names.iter().filter_map(|n| r.component(n)).sum::<f64>();
    let hn = part(&num, &["time_seminorm", "space_seminorm"]);
    let hd = part(&den, &["du", "ut"]);
    let homog = (hd > 1e-300).then(|| hn / hd);
    Ok(RatioEntry::new(label, num.total, den.total).with_homogeneous(homog))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{FnField, SeparableField};
    use crate::grid::{Axis, GradedGrid, SpaceTimeGrid};
    use crate::quad::QuadRule;

    fn bump_field(n: usize) -> SeparableField {
        let tang = (n == 2).then(|| Profile::bump(0.1, 0.8));
        SeparableField::new(1.0, Profile::bump(0.0, 0.7), Profile::bump(0.0, 0.9), tang)
    }

    #[test]
    fn mass_and_moment() {
        for mode in [MollifierMode::Density, MollifierMode::Representation] {
            for n in [1, 2] {
                let m = Mollifier::new(mode, n, 0.25, 32).unwrap();
                assert!((m.mass() - 1.0).abs() < 1e-12);
            }
        }
        // oracle: independent fine quadrature of the profile moment
        let eta = Profile::bump(-0.75, 0.25);
        let fine = crate::quad::composite_rule(-1.0, -0.5, 64, 8);
        let mass: f64 = fine.iter().map(|&(x, w)| w * eta.value(x)).sum();
        let mom: f64 = fine.iter().map(|&(x, w)| -w * x * eta.value(x)).sum::<f64>() / mass;
        let m = Mollifier::new(MollifierMode::Representation, 1, 0.25, 48).unwrap();
        assert!((m.normal_moment() - mom).abs() < 1e-10);
        assert!(mom > 0.5 && mom < 1.0);
        let v = m.apply(|_, x, _| x, 0.3, 0.0, 0.0);
        assert!((v - 0.25 * mom).abs() < 1e-12);
        assert!(matches!(Mollifier::new(MollifierMode::Density, 1, 0.0, 32), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn mollification_is_one_sided_and_preserves_constants() {
        for mode in [MollifierMode::Density, MollifierMode::Representation] {
            let count = Arc::new(CountingField::new(Arc::new(FnField::new(1, |_, _, _| 3.0))));
            let grid = Arc::new(SpaceTimeGrid::new(
                Axis::new(0.0, 1.0, 5).unwrap(),
                GradedGrid::half_line(1.0, 8, 2.0, QuadRule::Midpoint).unwrap().with_boundary_node(true),
                None,
            ));
            let u = GridFunction::sample(grid, count.clone()).unwrap();
            let count_before = count.total();
            let v = mollify(&u, 0.3, mode, 16).unwrap();
            assert!(count.total() > count_before);
            assert_eq!(count.outside(), 0);
            assert!(v.values().iter().all(|x| (x - 3.0).abs() < 1e-12));
        }
    }

    #[test]
    fn derivatives_commute_with_mollification() {
        let inner: Arc<dyn Field> = Arc::new(bump_field(1));
        let f = MollifiedField::new(inner, Mollifier::new(MollifierMode::Density, 1, 0.2, 32).unwrap());
        let h = 1e-4;
        for &(t, x) in &[(0.1, 0.2), (-0.2, 0.5), (0.3, 0.05)] {
            let d = f.derivative(MultiIndex::unit(0), t, x, 0.0).unwrap();
            let fd = (f.value(t, x + h, 0.0) - f.value(t, x - h, 0.0)) / (2.0 * h);
            assert!((d - fd).abs() < 1e-6, "{d} vs {fd}");
        }
    }

    #[test]
    fn mollification_converges() {
        let w = WeightParams::new(2.0, 0.5, 1).unwrap();
        let grid = Arc::new(SpaceTimeGrid::new(
            Axis::new(-1.0, 1.0, 41).unwrap(),
            GradedGrid::half_line(1.5, 32, 2.0, QuadRule::Midpoint).unwrap(),
            None,
        ));
        let u = GridFunction::sample(grid, Arc::new(bump_field(1))).unwrap();
        let mut prev = f64::INFINITY;
        for k in 2..6 {
            let v = mollify(&u, 2f64.powi(-k), MollifierMode::Density, 24).unwrap();
            let d = crate::norms::lp_theta_norm(&u.without_field().combine(1.0, &v.without_field(), -1.0).unwrap(), &w).unwrap();
            assert!(d < prev, "eps=2^-{k}: {d}");
            prev = d;
        }
    }

    #[test]
    fn vj_examples() {
        let m = Mollifier::new(MollifierMode::Representation, 1, 0.5, 32).unwrap();
        let c: Arc<dyn Field> = Arc::new(FnField::new(1, |_, _, _| 2.0).with_derivatives(1, |_, _, _, _| Some(0.0)));
        let zero: Vec<Arc<dyn Field>> = vec![Arc::new(crate::field::ZeroField { dim: 1 })];
        assert_eq!(vj_terms_fields(c.as_ref(), &zero, 0.0, 0.0, 0.1, &m).unwrap(), [0.0; 3]);
        // u = x1: V1 = lambda^{-1/2} / 2 * \int (-b1) phi
        let x: Arc<dyn Field> =
            Arc::new(FnField::new(1, |_, x, _| x).with_derivatives(1, |a, _, _, _| Some(if a.order() == 1 { 1.0 } else { 0.0 })));
        let v = vj_terms_fields(x.as_ref(), &zero, 0.0, 0.0, 0.04, &m).unwrap();
        assert!((v[0] - 0.5 / 0.2 * m.normal_moment()).abs() < 1e-12);
        assert_eq!((v[1], v[2]), (0.0, 0.0));
        // and the identity holds with LHS 0
        let r = representation_residual_fields(x.as_ref(), &zero, 0.5, &[(0.0, 0.0), (0.3, 0.0)], &ReprSpec::default()).unwrap();
        assert!(r.max < 1e-4, "{r:?}");
    }

    #[test]
    fn representation_identity_n1() {
        let f = SeparableField::new(1.0, Profile::bump(0.0, 0.7), Profile::gaussian(0.0, 0.4), None);
        let flux = f.flux().unwrap();
        let samples: Vec<(f64, f64)> = (0..5).map(|k| (-0.4 + 0.2 * k as f64, 0.0)).collect();
        let a = representation_residual_fields(&f, &flux, 0.25, &samples, &ReprSpec::default()).unwrap();
        let b = representation_residual_fields(&f, &flux, 0.25, &samples, &ReprSpec::default().refined(1)).unwrap();
        assert!(a.max < 1e-4 && b.max < a.max, "{a:?} {b:?}");
    }

    #[test]
    fn homogeneous_ratio_is_scale_invariant() {
        use crate::field::{Field, Rescaled, SumField};
        let w = WeightParams::new(2.0, 0.5, 1).unwrap();
        let grid = Arc::new(SpaceTimeGrid::new(
            Axis::new(-1.0, 1.0, 161).unwrap(),
            GradedGrid::half_line(1.0, 64, 2.0, QuadRule::Gauss2).unwrap(),
            None,
        ));
        let base = bump_field(1);
        let flux = base.flux().unwrap();
        let ratio = |lambda: f64| {
            let u: Arc<dyn Field> = Arc::new(Rescaled { inner: Arc::new(base.clone()), lambda });
            // u_t = D1 g rescales to (u_lambda)_t = D1 (lambda g_lambda)
            let g: Arc<dyn Field> = Arc::new(SumField::new(vec![(lambda, Arc::new(Rescaled { inner: flux[0].clone(), lambda }))]));
            let rep = TimeDerivativeRep::flux_from_fields(grid.clone(), &[g]).unwrap();
            let u = GridFunction::sample(grid.clone(), u).unwrap();
            trace_ratio_entry("u".into(), &u, &rep, &w, &SeminormSpec::default()).unwrap().homogeneous_ratio.unwrap()
        };
        let (a, b) = (ratio(1.0), ratio(2.0));
        assert!((a - b).abs() < 5e-3 * a, "{a} {b}");
    }

    #[test]
    fn zero_function_is_degenerate() {
        let w = WeightParams::new(2.0, 0.5, 1).unwrap();
        let grid = Arc::new(SpaceTimeGrid::new(
            Axis::new(-1.0, 1.0, 21).unwrap(),
            GradedGrid::half_line(2.0, 16, 3.0, QuadRule::Midpoint).unwrap(),
            None,
        ));
        let u = GridFunction::sample(grid.clone(), Arc::new(crate::field::ZeroField { dim: 1 })).unwrap();
        let rep = TimeDerivativeRep::zero(grid);
        let r = trace_inequality_ratio(&[(u, rep)], &w, &SeminormSpec::default()).unwrap();
        assert_eq!(r.degenerate_count, 1);
    }
}
