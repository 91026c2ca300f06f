//! The half-space heat extension: kernel `p = (4 pi t)^{-n/2} (x1/t)
//! exp(-|x|^2/4t)`, its integral identities, the extension `v = g * p`
//! with a smooth cutoff in `x1`, and restriction back to the boundary.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use crate::boundary::{BoundaryData, BoundaryFn, BoundaryKind, SeminormSpec};
use crate::error::{Error, Result};
use crate::fd::{derivative_along, Stencil};
use crate::field::{Field, GridFunction, MultiIndex, TimeDerivativeRep};
use crate::grid::SpaceTimeGrid;
use crate::jet::cutoff_derivatives;
use crate::params::WeightParams;
use crate::profile::{hermite_he, Profile};
use crate::quad::{composite_rule, gauss_legendre, loggraded_rule, QuadSpec};
use crate::report::RatioEntry;

const FOUR_PI: f64 = 4.0 * std::f64::consts::PI;

/// One-dimensional heat kernel `(4 pi t)^{-1/2} exp(-y^2/4t)`.
pub fn heat1(t: f64, y: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    (-y * y / (4.0 * t)).exp() / (FOUR_PI * t).sqrt()
}

/// `d^k/dy^k` of [`heat1`]: `(-1)^k He_k(y/sigma) / sigma^k * heat1`, `sigma^2 = 2t`.
pub fn heat1_derivative(k: usize, t: f64, y: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let sigma = (2.0 * t).sqrt();
    let sign = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
    sign * hermite_he(k, y / sigma) / sigma.powi(k as i32) * heat1(t, y)
}

/// Derivatives `0..=kmax` of [`heat1`] in one pass.
fn heat1_derivatives(kmax: usize, t: f64, y: f64, out: &mut [f64]) {
    let sigma = (2.0 * t).sqrt();
    let z = y / sigma;
    let g = heat1(t, y);
    let (mut he_prev, mut he) = (0.0, 1.0);
    let mut scale = g;
    for (k, o) in out.iter_mut().enumerate().take(kmax + 1) {
        if k > 0 {
            let next = z * he - (k - 1) as f64 * he_prev;
            he_prev = he;
            he = next;
            scale *= -1.0 / sigma;
        }
        *o = he * scale;
    }
}

/// `p(t, x1, x')` for `n = 1` (`xp = None`) or `n = 2`.
pub fn kernel_value(t: f64, x1: f64, xp: Option<f64>) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let n = if xp.is_some() { 2.0 } else { 1.0 };
    let r2 = x1 * x1 + xp.map_or(0.0, |y| y * y);
    (FOUR_PI * t).powf(-n / 2.0) * (x1 / t) * (-r2 / (4.0 * t)).exp()
}

/// `D^alpha p` for any order: `p = -2 d_{x1} heat1(x1) * heat1(x')`.
fn kernel_derivative_any(alpha: MultiIndex, t: f64, x1: f64, xp: Option<f64>) -> f64 {
    let normal = -2.0 * heat1_derivative(alpha.normal() + 1, t, x1);
    match xp {
        Some(y) => normal * heat1_derivative(alpha.tangential(), t, y),
        None if alpha.tangential() == 0 => normal,
        None => 0.0,
    }
}

/// `D^alpha p` for `|alpha| <= 3`.
pub fn kernel_derivative(alpha: MultiIndex, t: f64, x1: f64, xp: Option<f64>) -> Result<f64> {
    if alpha.order() > 3 {
        return Err(Error::UnsupportedOrder(alpha.order()));
    }
    Ok(kernel_derivative_any(alpha, t, x1, xp))
}

/// Stateless evaluator of the kernel in dimension `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KernelEval {
    pub n: usize,
}

impl KernelEval {
    pub fn value(&self, t: f64, x1: f64, xp: f64) -> f64 {
        kernel_value(t, x1, (self.n == 2).then_some(xp))
    }
    pub fn derivative(&self, alpha: MultiIndex, t: f64, x1: f64, xp: f64) -> Result<f64> {
        kernel_derivative(alpha, t, x1, (self.n == 2).then_some(xp))
    }
}

/// A kernel integral with the analytic bound on the truncated time tail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelIntegral {
    pub value: f64,
    pub tail_bound: f64,
}

/// `\int_0^\infty \int D^alpha p dx' dt` at fixed `x1 > 0` by log-graded
/// quadrature in `t` over `[x1^2/2800, 1e16 x1^2]` (below that range the
/// integrand is below `e^{-700}`); for `n = 2` the `x'` integral uses the
/// substitution `x' = sqrt(4t) z` with Gauss-Legendre on `|z| <= 8`.
fn kernel_time_integral(alpha: MultiIndex, x1: f64, n: usize, quad: &QuadSpec) -> Result<KernelIntegral> {
    if !(x1 > 0.0) {
        return Err(Error::InvalidParameter(format!("x1 must be positive, got {x1}")));
    }
    if n == 1 && alpha.tangential() > 0 {
        return Err(Error::DimensionMismatch { expected: 2, got: 1 });
    }
    quad.validate()?;
    let (lo, hi) = (x1 * x1 / 2800.0, x1 * x1 * 1e16);
    let nodes = loggraded_rule(lo, hi, quad.log_factor, quad.panel_order, f64::INFINITY)?;
    let z_rule = composite_rule(-8.0, 8.0, 4, 16);
    let mut value = 0.0;
    for (t, w) in nodes {
        let normal = -2.0 * heat1_derivative(alpha.normal() + 1, t, x1);
        let tang = if n == 1 {
            1.0
        } else {
            let s = (4.0 * t).sqrt();
            z_rule.iter().map(|&(z, wz)| wz * s * heat1_derivative(alpha.tangential(), t, s * z)).sum()
        };
        value += w * normal * tang;
    }
    // the tail beyond `hi`: \int_hi^\infty d^k_{x1} p dt = -d^k_{x1} erfc(x1/sqrt(4 hi))
    let tail_bound = if alpha.tangential() > 0 {
        0.0
    } else if alpha.normal() == 0 {
        x1 / (std::f64::consts::PI * hi).sqrt()
    } else {
        2.0 * heat1_derivative(alpha.normal() - 1, hi, x1).abs().max(heat1(hi, 0.0) / hi.sqrt().max(1.0))
    };
    Ok(KernelIntegral { value, tail_bound })
}

/// `\int\int p dx' dt`, equal to 1 for every `x1 > 0`.
pub fn kernel_mass(x1: f64, w: &WeightParams, quad: &QuadSpec) -> Result<KernelIntegral> {
    kernel_time_integral(MultiIndex::ZERO, x1, w.n(), quad)
}

/// `\int\int D^alpha p dx' dt`, zero for `1 <= |alpha| <= 3`.
pub fn kernel_derivative_moment(alpha: MultiIndex, x1: f64, n: usize, quad: &QuadSpec) -> Result<KernelIntegral> {
    if alpha.order() > 3 {
        return Err(Error::UnsupportedOrder(alpha.order()));
    }
    if alpha.order() == 0 {
        return Err(Error::InvalidParameter("use kernel_mass for alpha = 0".into()));
    }
    kernel_time_integral(alpha, x1, n, quad)
}

/// Quadrature knobs for the extension integrals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExtensionSpec {
    /// Ratio of consecutive graded panels in the time lag.
    pub log_factor: f64,
    /// Gauss-Legendre order per panel.
    pub panel_order: usize,
    /// Largest panel width in the time lag (resolves the data in time).
    pub h_max: f64,
    /// Smallest time lag; also floors `x1^2 / 2800`.
    pub tau_floor: f64,
    /// Gauss-Legendre order for the numerical tangential convolution.
    pub tangential_order: usize,
}

impl Default for ExtensionSpec {
    fn default() -> Self {
        Self { log_factor: 2.0, panel_order: 8, h_max: 0.05, tau_floor: 1e-14, tangential_order: 8 }
    }
}

impl ExtensionSpec {
    pub fn refined(&self, k: u32) -> Self {
        let f = 2f64.powi(k as i32);
        Self { h_max: self.h_max / f, ..*self }
    }
}

/// Highest total derivative order kept in a jet.
const JET_ORDER: usize = 3;
type VJet = [[f64; JET_ORDER + 1]; JET_ORDER + 1];

enum Tangential {
    /// `n = 1`.
    Absent,
    /// `g = a T(t) Y(x')` with Gaussian `Y`: the heat convolution is closed form.
    Gaussian { amplitude: f64, time: Profile, center: f64, width: f64 },
    /// General data: numerical convolution in `x'`.
    Numeric,
}

/// `u = zeta(x1) (g * p)` as an analytic field, with the cutoff optional.
///
/// Derivatives are computed as a jet `D^{(a,b)} v`, `a + b <= 3`, in one
/// pass over the time-lag nodes, using the subtraction
/// `v = \int K (G(tau) - G(0)) dtau + G(0) E(tau_max)` where `E` is the
/// exact time integral of the kernel. Jets are memoised per point.
pub struct ExtensionField {
    g: Arc<dyn BoundaryFn>,
    n: usize,
    cutoff: bool,
    spec: ExtensionSpec,
    support: (f64, f64),
    tangential: Tangential,
    /// Highest tangential order with available data derivatives.
    bmax: usize,
    cache: Mutex<HashMap<(u64, u64, u64), VJet>>,
    flux_cache: Mutex<HashMap<(u64, u64), f64>>,
}

impl ExtensionField {
    /// `n` is 1 or 2; `window_start` bounds the support of `g` from below
    /// when `g` does not declare a time support.
    pub fn new(g: Arc<dyn BoundaryFn>, n: usize, cutoff: bool, spec: ExtensionSpec, window_start: f64) -> Result<Self> {
        if !(n == 1 || n == 2) {
            return Err(Error::InvalidParameter(format!("n must be 1 or 2, got {n}")));
        }
        let support = g.time_support().unwrap_or((window_start, f64::INFINITY));
        let tangential = if n == 1 {
            Tangential::Absent
        } else {
            match g.as_separable() {
                Some(sep) => match sep.tangential {
                    Some(Profile::Gaussian { center, width }) => {
                        Tangential::Gaussian { amplitude: sep.amplitude, time: sep.time.clone(), center, width }
                    }
                    _ => Tangential::Numeric,
                },
                None => Tangential::Numeric,
            }
        };
        let bmax = match (&tangential, n) {
            (_, 1) => 0,
            (Tangential::Gaussian { .. }, _) => JET_ORDER,
            _ => {
                let (s, e) = support;
                let probe = if e.is_finite() { 0.5 * (s + e) } else { s + 1.0 };
                (1..=JET_ORDER).take_while(|&b| g.derivative(0, b, probe, 0.0).is_some()).count()
            }
        };
        Ok(Self {
            g,
            n,
            bmax,
            cutoff,
            spec,
            support,
            tangential,
            cache: Mutex::new(HashMap::new()),
            flux_cache: Mutex::new(HashMap::new()),
        })
    }

    /// Extension of the (first side of) boundary data on a half-space.
    pub fn from_boundary(g: &BoundaryData, cutoff: bool, spec: ExtensionSpec) -> Result<Self> {
        match g.kind() {
            BoundaryKind::HalfSpace { n } => Self::new(g.function(0).clone(), n, cutoff, spec, g.time().start),
            BoundaryKind::UnitInterval => {
                Err(Error::InvalidParameter("extension acts on half-space data; the interval lifting lives in bvp".into()))
            }
        }
    }

    pub fn has_cutoff(&self) -> bool {
        self.cutoff
    }

    /// `G_b(tau) = \int heat1(tau, y) d^b_{x'} g(t - tau, x' - y) dy` for
    /// `b = 0..=bmax` (in one dimension just `g(t - tau)`).
    fn tangential_terms(&self, tau: f64, t: f64, xp: f64, bmax: usize, out: &mut [f64]) -> bool {
        match &self.tangential {
            Tangential::Absent => {
                out[0] = self.g.value(t - tau, 0.0);
                out[1..=bmax].iter_mut().for_each(|o| *o = 0.0);
                true
            }
            Tangential::Gaussian { amplitude, time, center, width } => {
                let big = (width * width + 2.0 * tau).sqrt();
                let smoothed = Profile::Gaussian { center: *center, width: big };
                let a = amplitude * time.value(t - tau) * width / big;
                for (b, o) in out.iter_mut().enumerate().take(bmax + 1) {
                    *o = a * smoothed.derivative(b, xp);
                }
                true
            }
            Tangential::Numeric => {
                let s = (4.0 * tau).sqrt();
                let (mut lo, mut hi) = (-6.0 * s, 6.0 * s);
                if let Some((c, d)) = self.g.tangential_support() {
                    lo = lo.max(xp - d);
                    hi = hi.min(xp - c);
                }
                out[..=bmax].iter_mut().for_each(|o| *o = 0.0);
                if hi <= lo {
                    return true;
                }
                let scale = self.g.tangential_support().map_or(s, |(c, d)| s.min((d - c) / 8.0));
                let panels = (((hi - lo) / scale).ceil() as usize).clamp(1, 64);
                for (y, w) in composite_rule(lo, hi, panels, self.spec.tangential_order) {
                    let k = heat1(tau, y);
                    for (b, o) in out.iter_mut().enumerate().take(bmax + 1) {
                        match self.g.derivative(0, b, t - tau, xp - y) {
                            Some(v) => *o += w * k * v,
                            None => return false,
                        }
                    }
                }
                true
            }
        }
    }

    /// `d^b_{x'} g(t, x')`, `b <= bmax`.
    fn boundary_terms(&self, t: f64, xp: f64, bmax: usize, out: &mut [f64]) -> bool {
        for (b, o) in out.iter_mut().enumerate().take(bmax + 1) {
            match self.g.derivative(0, b, t, xp) {
                Some(v) => *o = v,
                None => return false,
            }
        }
        true
    }

    fn time_lag_nodes(&self, t: f64, x1: f64) -> (bool, Vec<(f64, f64)>) {
        let (s, e) = self.support;
        let inside = t < e;
        let tau_hi = t - s;
        if inside {
            let lo = (x1 * x1 / 2800.0).max(self.spec.tau_floor);
            if lo >= tau_hi {
                return (true, Vec::new());
            }
            let nodes =
                loggraded_rule(lo, tau_hi, self.spec.log_factor, self.spec.panel_order, self.spec.h_max).expect("valid lag interval");
            (true, nodes)
        } else {
            // g(t - tau) vanishes unless tau lies in [t - e, t - s]
            let (a, b) = (t - e, tau_hi);
            let panels = ((b - a) / self.spec.h_max).ceil().max(1.0) as usize;
            (false, composite_rule(a, b, panels, self.spec.panel_order))
        }
    }

    /// Jet of `v` (no cutoff) at a point; `None` if tangential derivatives
    /// of the data are unavailable.
    fn v_jet(&self, t: f64, x1: f64, xp: f64) -> Option<VJet> {
        let key = (t.to_bits(), x1.to_bits(), xp.to_bits());
        if let Some(j) = self.cache.lock().unwrap().get(&key) {
            return Some(*j);
        }
        let jet = self.compute_jet(t, x1, xp)?;
        self.cache.lock().unwrap().insert(key, jet);
        Some(jet)
    }

    fn compute_jet(&self, t: f64, x1: f64, xp: f64) -> Option<VJet> {
        let bmax = self.bmax;
        let mut jet = [[0.0; JET_ORDER + 1]; JET_ORDER + 1];
        for row in jet.iter_mut() {
            row[bmax + 1..].iter_mut().for_each(|v| *v = f64::NAN);
        }
        if t <= self.support.0 {
            return Some(jet);
        }
        let (inside, nodes) = self.time_lag_nodes(t, x1);
        let mut g0 = [0.0; JET_ORDER + 1];
        if inside && !self.boundary_terms(t, xp, bmax, &mut g0) {
            return None;
        }
        let mut gt = [0.0; JET_ORDER + 1];
        let mut h = [0.0; JET_ORDER + 2];
        for &(tau, w) in &nodes {
            if !self.tangential_terms(tau, t, xp, bmax, &mut gt) {
                return None;
            }
            heat1_derivatives(JET_ORDER + 1, tau, x1, &mut h);
            for b in 0..=bmax {
                let d = gt[b] - if inside { g0[b] } else { 0.0 };
                if d == 0.0 {
                    continue;
                }
                for a in 0..=(JET_ORDER - b) {
                    jet[a][b] += w * (-2.0 * h[a + 1]) * d;
                }
            }
        }
        if inside {
            // \int_0^{tau_hi} d^a_{x1} p dtau = d^a_{x1} erfc(x1 / sqrt(4 tau_hi))
            let tau_hi = t - self.support.0;
            let mut e = [0.0; JET_ORDER + 1];
            e[0] = libm::erfc(x1 / (4.0 * tau_hi).sqrt());
            let mut hk = [0.0; JET_ORDER + 1];
            heat1_derivatives(JET_ORDER - 1, tau_hi, x1, &mut hk);
            for a in 1..=JET_ORDER {
                e[a] = -2.0 * hk[a - 1];
            }
            for b in 0..=bmax {
                for a in 0..=(JET_ORDER - b) {
                    jet[a][b] += g0[b] * e[a];
                }
            }
        }
        Some(jet)
    }

    /// `D^{(a,b)} (zeta v)` from the jet by the Leibniz rule.
    fn cut_derivative(&self, jet: &VJet, a: usize, b: usize, x1: f64) -> f64 {
        if !self.cutoff {
            return jet[a][b];
        }
        let z = cutoff_derivatives(x1);
        let mut s = 0.0;
        let mut binom = 1.0;
        for j in 0..=a {
            s += binom * z[j] * jet[a - j][b];
            binom = binom * (a - j) as f64 / (j + 1) as f64;
        }
        s
    }

    fn outside_cutoff(&self, x1: f64) -> bool {
        self.cutoff && x1 >= 2.0
    }

    /// `\int_{x1}^\infty zeta'(r) D_1 v(t, r, x') dr` (zero without cutoff).
    fn flux_correction(&self, t: f64, x1: f64, xp: f64) -> f64 {
        if !self.cutoff || x1 >= 2.0 {
            return 0.0;
        }
        let lo = x1.max(1.0);
        let key = (t.to_bits(), xp.to_bits());
        if lo == 1.0 {
            if let Some(v) = self.flux_cache.lock().unwrap().get(&key) {
                return *v;
            }
        }
        let gl = gauss_legendre(16);
        let val: f64 = gl
            .panel(lo, 2.0)
            .map(|(r, w)| {
                let dz = cutoff_derivatives(r)[1];
                let j = self.compute_jet(t, r, xp).unwrap_or([[f64::NAN; JET_ORDER + 1]; JET_ORDER + 1]);
                w * dz * j[1][0]
            })
            .sum();
        if lo == 1.0 {
            self.flux_cache.lock().unwrap().insert(key, val);
        }
        val
    }

    /// Flux components `g_i` with `u_t = sum_i D_i g_i`:
    /// `g_1 = zeta D_1 v + \int_{x1}^\infty zeta' D_1 v`, `g_2 = zeta D_2 v`.
    pub fn flux(self: &Arc<Self>) -> Vec<Arc<dyn Field>> {
        (0..self.n).map(|i| Arc::new(ExtensionFlux { ext: self.clone(), component: i }) as Arc<dyn Field>).collect()
    }
}

impl Field for ExtensionField {
    fn dim(&self) -> usize {
        self.n
    }

    fn value(&self, t: f64, x1: f64, xp: f64) -> f64 {
        if x1 <= 0.0 {
            // the extension attains its boundary data as a limit
            return if t <= self.support.0 { 0.0 } else { self.g.value(t, xp) };
        }
        self.derivative(MultiIndex::ZERO, t, x1, xp).unwrap_or(f64::NAN)
    }

    fn derivative(&self, alpha: MultiIndex, t: f64, x1: f64, xp: f64) -> Option<f64> {
        let (a, b) = (alpha.normal(), alpha.tangential());
        if a + b > JET_ORDER || (self.n == 1 && b > 0) {
            return if self.n == 1 && b > 0 { Some(0.0) } else { None };
        }
        if b > self.bmax {
            return None;
        }
        if self.outside_cutoff(x1) {
            return Some(0.0);
        }
        let jet = self.v_jet(t, x1.max(0.0), xp)?;
        Some(self.cut_derivative(&jet, a, b, x1))
    }

    /// `D^alpha u_t = D^alpha (zeta Delta v)`, from `v_t = Delta v`.
    fn time_derivative(&self, alpha: MultiIndex, t: f64, x1: f64, xp: f64) -> Option<f64> {
        let (a, b) = (alpha.normal(), alpha.tangential());
        if a + b + 2 > JET_ORDER || (self.n == 1 && b > 0) {
            return if self.n == 1 && b > 0 { Some(0.0) } else { None };
        }
        if self.n == 2 && b + 2 > self.bmax {
            return None;
        }
        if self.outside_cutoff(x1) {
            return Some(0.0);
        }
        let jet = self.v_jet(t, x1.max(0.0), xp)?;
        let mut lap = [[0.0; JET_ORDER + 1]; JET_ORDER + 1];
        for i in 0..=JET_ORDER {
            for j in 0..=(JET_ORDER - i) {
                let mut s = if i + 2 + j <= JET_ORDER { jet[i + 2][j] } else { 0.0 };
                if self.n == 2 && i + j + 2 <= JET_ORDER {
                    s += jet[i][j + 2];
                }
                lap[i][j] = s;
            }
        }
        Some(self.cut_derivative(&lap, a, b, x1))
    }

    fn max_order(&self) -> usize {
        JET_ORDER
    }
}

/// One flux component of an [`ExtensionField`]; values only.
pub struct ExtensionFlux {
    ext: Arc<ExtensionField>,
    component: usize,
}

impl Field for ExtensionFlux {
    fn dim(&self) -> usize {
        self.ext.n
    }
    fn value(&self, t: f64, x1: f64, xp: f64) -> f64 {
        let e = &self.ext;
        if e.outside_cutoff(x1) {
            return 0.0;
        }
        let Some(jet) = e.v_jet(t, x1.max(0.0), xp) else { return f64::NAN };
        let zeta = if e.cutoff { cutoff_derivatives(x1)[0] } else { 1.0 };
        let dv = if self.component == 0 { jet[1][0] } else { jet[0][1] };
        let mut v = zeta * dv;
        if self.component == 0 {
            v += e.flux_correction(t, x1, xp);
        }
        v
    }
    fn derivative(&self, alpha: MultiIndex, t: f64, x1: f64, xp: f64) -> Option<f64> {
        (alpha == MultiIndex::ZERO).then(|| self.value(t, x1, xp))
    }
    fn time_derivative(&self, _: MultiIndex, _: f64, _: f64, _: f64) -> Option<f64> {
        None
    }
    fn max_order(&self) -> usize {
        0
    }
}

/// Sample the extension of `g` on `grid` (analytic derivatives attached).
pub fn extend(
    g: &BoundaryData,
    w: &WeightParams,
    with_cutoff: bool,
    grid: Arc<SpaceTimeGrid>,
    spec: ExtensionSpec,
) -> Result<GridFunction> {
    if g.n() != w.n() || grid.dim() != w.n() {
        return Err(Error::DimensionMismatch { expected: w.n(), got: g.n() });
    }
    let field = Arc::new(ExtensionField::from_boundary(g, with_cutoff, spec)?);
    GridFunction::sample(grid, field)
}

/// Extension together with its flux representation of `u_t`.
pub fn extend_with_flux(
    g: &BoundaryData,
    with_cutoff: bool,
    grid: Arc<SpaceTimeGrid>,
    spec: ExtensionSpec,
) -> Result<(GridFunction, TimeDerivativeRep)> {
    let field = Arc::new(ExtensionField::from_boundary(g, with_cutoff, spec)?);
    let rep = TimeDerivativeRep::flux_from_fields(grid.clone(), &field.flux())?;
    Ok((GridFunction::sample(grid, field)?, rep))
}

/// Max over interior samples of `|u_t - Delta u|` with three-point
/// differences on the samples alone; two samples next to every edge are
/// excluded.
pub fn heat_residual(u: &GridFunction) -> Result<f64> {
    let g = u.grid();
    let (nt, nx, ny) = (g.nt(), g.nx(), g.ny());
    if nt < 5 || nx < 5 || (g.dim() == 2 && ny < 5) {
        return Err(Error::InvalidParameter("heat residual needs at least 5 samples per direction".into()));
    }
    let v = u.values();
    let mut ut = vec![0.0; v.len()];
    derivative_along(&g.time.points(), v, &mut ut, 1, nt, nx * ny, 1, Stencil::Central3)?;
    let mut lap = vec![0.0; v.len()];
    derivative_along(g.normal.points(), v, &mut lap, nt, nx, ny, 2, Stencil::Central3)?;
    if let Some(ax) = &g.tangential {
        let mut dyy = vec![0.0; v.len()];
        derivative_along(&ax.points(), v, &mut dyy, nt * nx, ny, 1, 2, Stencil::Central3)?;
        lap.iter_mut().zip(&dyy).for_each(|(a, b)| *a += b);
    }
    let (ylo, yhi) = if g.dim() == 2 { (2, ny - 2) } else { (0, 1) };
    let mut worst = 0.0f64;
    for it in 2..nt - 2 {
        for ix in 2..nx - 2 {
            for iy in ylo..yhi {
                let k = g.index(it, ix, iy);
                worst = worst.max((ut[k] - lap[k]).abs());
            }
        }
    }
    Ok(worst)
}

/// Boundary samples of `u`: from the analytic field when present, else the
/// boundary node, else (if allowed) quadratic extrapolation from the three
/// nearest samples.
pub fn trace_restrict(u: &GridFunction, allow_extrapolation: bool) -> Result<BoundaryData> {
    let g = u.grid();
    match g.normal.profile() {
        crate::grid::GradedProfile::HalfLine { .. } => {
            let vals = u.boundary_values(false, allow_extrapolation)?;
            BoundaryData::half_space_samples(g.dim(), g.time.clone(), g.tangential.clone(), vals)
        }
        crate::grid::GradedProfile::UnitInterval => {
            let l = u.boundary_values(false, allow_extrapolation)?;
            let r = u.boundary_values(true, allow_extrapolation)?;
            BoundaryData::unit_interval_samples(g.time.clone(), l, r)
        }
    }
}

/// `tilde_norm(extend(g) with cutoff, gamma) / slobodeckij_norm(g)`.
pub fn extension_norm_ratio(
    g: &BoundaryData,
    w: &WeightParams,
    gamma: usize,
    grid: Arc<SpaceTimeGrid>,
    ext: ExtensionSpec,
    seminorm: &SeminormSpec,
) -> Result<RatioEntry> {
    if !(1..=3).contains(&gamma) {
        return Err(Error::UnsupportedOrder(gamma));
    }
    let den = crate::boundary::slobodeckij_norm(g, w, seminorm)?.total;
    if den == 0.0 {
        return Ok(RatioEntry::new(format!("gamma={gamma}"), 0.0, 0.0));
    }
    let (u, rep) = extend_with_flux(g, true, grid, ext)?;
    let num = crate::norms::tilde_norm(&u, Some(&rep), w, gamma)?.total;
    Ok(RatioEntry::new(format!("gamma={gamma}"), num, den))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::{FnBoundary, SeparableBoundary};
    use crate::grid::{Axis, GradedGrid};
    use crate::quad::QuadRule;

    #[test]
    fn kernel_examples() {
        assert!((kernel_value(1.0, 1.0, None) - 0.219696).abs() < 1e-6);
        assert!((kernel_value(1.0, 1.0, Some(0.0)) - 0.061974).abs() < 1e-6);
        assert_eq!(kernel_value(-0.5, 1.0, None), 0.0);
        assert!(kernel_value(0.3, 0.2, Some(0.5)) > 0.0);
        assert!(matches!(kernel_derivative(MultiIndex::new(2, 2), 1.0, 1.0, Some(0.0)), Err(Error::UnsupportedOrder(4))));
    }

    #[test]
    fn kernel_derivatives_match_differences() {
        // oracle: central differences of the printed kernel formula
        let h = 1e-5;
        for &(t, x, y) in &[(0.7, 0.4, 0.3), (0.2, 1.1, -0.6), (2.0, 0.05, 0.9)] {
            for alpha in MultiIndex::all_up_to(2, 2) {
                let d = kernel_derivative(alpha, t, x, Some(y)).unwrap();
                let (e1, e2) = if alpha.normal() > 0 { (h, 0.0) } else { (0.0, h) };
                let lower = if alpha.normal() > 0 {
                    MultiIndex::new(alpha.normal() - 1, alpha.tangential())
                } else if alpha.tangential() > 0 {
                    MultiIndex::new(0, alpha.tangential() - 1)
                } else {
                    continue;
                };
                let fd = (kernel_derivative(lower, t, x + e1, Some(y + e2)).unwrap()
                    - kernel_derivative(lower, t, x - e1, Some(y - e2)).unwrap())
                    / (2.0 * h);
                assert!((d - fd).abs() < 1e-6 * (1.0 + d.abs()), "{alpha} at {t},{x},{y}: {d} vs {fd}");
            }
            // p_t = Delta p
            let pt = (kernel_value(t + h, x, Some(y)) - kernel_value(t - h, x, Some(y))) / (2.0 * h);
            let lap = kernel_derivative(MultiIndex::new(2, 0), t, x, Some(y)).unwrap()
                + kernel_derivative(MultiIndex::new(0, 2), t, x, Some(y)).unwrap();
            assert!((pt - lap).abs() < 1e-6 * (1.0 + pt.abs()));
        }
    }

    #[test]
    fn kernel_mass_is_one() {
        let q = QuadSpec::default();
        let w1 = WeightParams::new(2.0, 0.5, 1).unwrap();
        let w2 = WeightParams::new(2.0, 1.5, 2).unwrap();
        let m = kernel_mass(0.5, &w1, &q).unwrap();
        assert!((m.value - 1.0).abs() < 1e-6 && m.tail_bound < 1e-6);
        assert!((kernel_mass(2.0, &w2, &q).unwrap().value - 1.0).abs() < 1e-6);
        assert!((kernel_mass(0.01, &w1, &q).unwrap().value - 1.0).abs() < 1e-4);
    }

    #[test]
    fn derivative_moments_vanish() {
        let q = QuadSpec::default();
        assert!(kernel_derivative_moment(MultiIndex::new(1, 0), 1.0, 1, &q).unwrap().value.abs() < 1e-6);
        assert!(kernel_derivative_moment(MultiIndex::new(0, 1), 1.0, 2, &q).unwrap().value.abs() < 1e-6);
        assert!(kernel_derivative_moment(MultiIndex::new(2, 0), 0.5, 1, &q).unwrap().value.abs() < 1e-5);
        assert!(matches!(kernel_derivative_moment(MultiIndex::new(4, 0), 1.0, 1, &q), Err(Error::UnsupportedOrder(4))));
    }

    fn bump_data(c: f64, r: f64) -> BoundaryData {
        BoundaryData::half_space(
            1,
            Axis::new(-1.0, 3.0, 81).unwrap(),
            None,
            Arc::new(SeparableBoundary::new(1.0, Profile::bump(c, r), None)),
        )
        .unwrap()
    }

    #[test]
    fn extension_approaches_data() {
        let g = bump_data(1.0, 0.6);
        let f = ExtensionField::from_boundary(&g, false, ExtensionSpec::default()).unwrap();
        let gv = |t: f64| Profile::bump(1.0, 0.6).value(t);
        let mut prev = f64::INFINITY;
        for k in 2..8 {
            let x = 2f64.powi(-k);
            let err = (0..40).map(|i| 0.45 + i as f64 * 0.03).map(|t| (f.value(t, x, 0.0) - gv(t)).abs()).fold(0.0, f64::max);
            assert!(err < prev, "k={k}: {err} >= {prev}");
            prev = err;
        }
        assert!(prev < 0.05);
        assert_eq!(f.value(1.2, 0.0, 0.0), gv(1.2));
    }

    #[test]
    fn causality() {
        let g = bump_data(1.5, 0.5);
        let f = ExtensionField::from_boundary(&g, true, ExtensionSpec::default()).unwrap();
        for i in 0..20 {
            let t = -1.0 + i as f64 * 0.1;
            for &x in &[0.0, 0.1, 0.7, 1.5] {
                assert_eq!(f.value(t, x, 0.0), 0.0);
            }
        }
        assert!(f.value(1.6, 0.2, 0.0) > 0.0);
    }

    #[test]
    fn jet_matches_differences_and_solves_heat() {
        let g = bump_data(0.8, 0.6);
        let f = ExtensionField::from_boundary(&g, true, ExtensionSpec::default()).unwrap();
        let h = 1e-4;
        for &(t, x) in &[(0.9, 0.3), (1.2, 0.8), (1.0, 1.4), (1.6, 1.7)] {
            for a in 1..=3 {
                let d = f.derivative(MultiIndex::new(a, 0), t, x, 0.0).unwrap();
                let lo = MultiIndex::new(a - 1, 0);
                let fd = (f.derivative(lo, t, x + h, 0.0).unwrap() - f.derivative(lo, t, x - h, 0.0).unwrap()) / (2.0 * h);
                assert!((d - fd).abs() < 1e-5 * (1.0 + d.abs()), "a={a} ({t},{x}): {d} vs {fd}");
            }
            let ut = f.time_derivative(MultiIndex::ZERO, t, x, 0.0).unwrap();
            let fd = (f.value(t + h, x, 0.0) - f.value(t - h, x, 0.0)) / (2.0 * h);
            assert!((ut - fd).abs() < 1e-5 * (1.0 + ut.abs()), "ut ({t},{x}): {ut} vs {fd}");
        }
    }

    #[test]
    fn flux_represents_time_derivative() {
        // d/dx1 g_1 = u_t for n = 1
        let g = bump_data(0.8, 0.6);
        let f = Arc::new(ExtensionField::from_boundary(&g, true, ExtensionSpec::default()).unwrap());
        let flux = f.flux();
        let h = 1e-4;
        for &(t, x) in &[(0.9, 0.3), (1.2, 1.3), (1.1, 1.8), (1.3, 0.9)] {
            let d = (flux[0].value(t, x + h, 0.0) - flux[0].value(t, x - h, 0.0)) / (2.0 * h);
            let ut = f.time_derivative(MultiIndex::ZERO, t, x, 0.0).unwrap();
            assert!((d - ut).abs() < 1e-5 * (1.0 + ut.abs()), "({t},{x}): {d} vs {ut}");
        }
    }

    #[test]
    fn two_dimensional_paths_agree() {
        // closed-form Gaussian smoothing vs numerical tangential convolution
        let time = Axis::new(-1.0, 2.0, 31).unwrap();
        let tan = Some(Axis::new(-2.0, 2.0, 21).unwrap());
        let sep = SeparableBoundary::new(1.0, Profile::bump(0.5, 0.5), Some(Profile::gaussian(0.2, 0.3)));
        let fast = BoundaryData::half_space(2, time.clone(), tan.clone(), Arc::new(sep.clone())).unwrap();
        let s2 = sep.clone();
        let slow_fn = FnBoundary::new(move |t, y| s2.value(t, y), Some((0.0, 1.0))).with_tangential_support((-2.2, 2.6));
        let slow = BoundaryData::half_space(2, time, tan, Arc::new(slow_fn)).unwrap();
        let a = ExtensionField::from_boundary(&fast, false, ExtensionSpec::default()).unwrap();
        let b = ExtensionField::from_boundary(&slow, false, ExtensionSpec::default()).unwrap();
        for &(t, x, y) in &[(0.4, 0.2, 0.1), (0.8, 0.5, -0.3), (1.5, 0.3, 0.6)] {
            let (va, vb) = (a.value(t, x, y), b.value(t, x, y));
            assert!((va - vb).abs() < 1e-7, "({t},{x},{y}): {va} vs {vb}");
        }
    }

    #[test]
    fn heat_residual_of_linear_function_vanishes() {
        let grid = Arc::new(SpaceTimeGrid::new(
            Axis::new(0.0, 1.0, 11).unwrap(),
            GradedGrid::half_line(1.0, 10, 2.0, QuadRule::Midpoint).unwrap(),
            None,
        ));
        let u = GridFunction::sample(grid, Arc::new(crate::field::FnField::new(1, |_, x, _| x))).unwrap();
        assert!(heat_residual(&u).unwrap() < 1e-12);
    }

    #[test]
    fn trace_examples() {
        let grid = Arc::new(SpaceTimeGrid::new(
            Axis::new(-1.0, 1.0, 21).unwrap(),
            GradedGrid::half_line(1.0, 40, 1.0, QuadRule::Midpoint).unwrap(),
            None,
        ));
        let phi = Profile::bump(0.0, 0.9);
        let p2 = phi.clone();
        let u =
            GridFunction::sample(grid.clone(), Arc::new(crate::field::FnField::new(1, move |t, x, _| p2.value(t) * (1.0 + x)))).unwrap();
        let tr = trace_restrict(&u.without_field(), true).unwrap();
        for (k, t) in grid.time.points().into_iter().enumerate() {
            assert!((tr.values(0)[k] - phi.value(t)).abs() < 1e-13);
        }
        let p3 = phi.clone();
        let z = GridFunction::sample(grid.clone(), Arc::new(crate::field::FnField::new(1, move |t, x, _| x * p3.value(t)))).unwrap();
        assert!(trace_restrict(&z.without_field(), true).unwrap().max_abs() < 1e-13);
        assert_eq!(trace_restrict(&z.without_field(), false).err(), Some(Error::NoBoundaryAccess));
    }
}
