//! Lateral boundary data and the parabolic Slobodeckij norm
//! `W_p^{s/2, s}` on `(S, T) x boundary`.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Field, MultiIndex};
use crate::grid::{hex_digest, Axis};
use crate::params::WeightParams;
use crate::profile::Profile;
use crate::quad::{composite_rule, loggraded_rule};
use crate::report::NormReport;

/// Boundary function `g(t, x')` (x' ignored when the boundary is a point).
pub trait BoundaryFn: Send + Sync {
    fn value(&self, t: f64, xp: f64) -> f64;

    /// `d_t^i d_{x'}^j g`, when available.
    fn derivative(&self, time_order: usize, tangential_order: usize, t: f64, xp: f64) -> Option<f64> {
        (time_order == 0 && tangential_order == 0).then(|| self.value(t, xp))
    }

    /// Interval in `t` outside which `g` vanishes, if known.
    fn time_support(&self) -> Option<(f64, f64)>;

    /// Interval in `x'` outside which `g` vanishes, if known.
    fn tangential_support(&self) -> Option<(f64, f64)> {
        None
    }

    /// `Some` when `g(t, x') = a T(t) Y(x')`; lets the seminorm integrals
    /// factor into one-dimensional ones.
    fn as_separable(&self) -> Option<SeparableBoundary> {
        None
    }
}

/// `amplitude * T(t) Y(x')`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparableBoundary {
    pub amplitude: f64,
    pub time: Profile,
    pub tangential: Option<Profile>,
}

impl SeparableBoundary {
    pub fn new(amplitude: f64, time: Profile, tangential: Option<Profile>) -> Self {
        Self { amplitude, time, tangential }
    }
}

impl BoundaryFn for SeparableBoundary {
    fn value(&self, t: f64, xp: f64) -> f64 {
        self.derivative(0, 0, t, xp).unwrap()
    }
    fn derivative(&self, i: usize, j: usize, t: f64, xp: f64) -> Option<f64> {
        let y = match &self.tangential {
            Some(p) => p.derivative(j, xp),
            None if j == 0 => 1.0,
            None => 0.0,
        };
        Some(self.amplitude * self.time.derivative(i, t) * y)
    }
    fn time_support(&self) -> Option<(f64, f64)> {
        self.time.support()
    }
    fn tangential_support(&self) -> Option<(f64, f64)> {
        match &self.tangential {
            Some(p) => p.support(),
            None => None,
        }
    }
    fn as_separable(&self) -> Option<SeparableBoundary> {
        Some(self.clone())
    }
}

type BoundaryClosure = dyn Fn(f64, f64) -> f64 + Send + Sync;

/// Boundary function given by a closure and a declared time support.
#[derive(Clone)]
pub struct FnBoundary {
    f: Arc<BoundaryClosure>,
    time_support: Option<(f64, f64)>,
    tangential_support: Option<(f64, f64)>,
}

impl FnBoundary {
    pub fn new(f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static, time_support: Option<(f64, f64)>) -> Self {
        Self { f: Arc::new(f), time_support, tangential_support: None }
    }
    pub fn with_tangential_support(mut self, s: (f64, f64)) -> Self {
        self.tangential_support = Some(s);
        self
    }
}

impl BoundaryFn for FnBoundary {
    fn value(&self, t: f64, xp: f64) -> f64 {
        (self.f)(t, xp)
    }
    fn time_support(&self) -> Option<(f64, f64)> {
        self.time_support
    }
    fn tangential_support(&self) -> Option<(f64, f64)> {
        self.tangential_support
    }
}

/// Restriction of a field to `x1 = x_b`.
#[derive(Clone)]
pub struct TraceOf {
    pub field: Arc<dyn Field>,
    pub x_b: f64,
    pub time_support: Option<(f64, f64)>,
    pub tangential_support: Option<(f64, f64)>,
}

impl BoundaryFn for TraceOf {
    fn value(&self, t: f64, xp: f64) -> f64 {
        self.field.value(t, self.x_b, xp)
    }
    fn derivative(&self, i: usize, j: usize, t: f64, xp: f64) -> Option<f64> {
        match i {
            0 => self.field.derivative(MultiIndex::new(0, j), t, self.x_b, xp),
            1 => self.field.time_derivative(MultiIndex::new(0, j), t, self.x_b, xp),
            _ => None,
        }
    }
    fn time_support(&self) -> Option<(f64, f64)> {
        self.time_support
    }
    fn tangential_support(&self) -> Option<(f64, f64)> {
        self.tangential_support
    }
}

/// Tensor four-point Lagrange interpolation of samples; zero outside the
/// sampled window.
#[derive(Debug, Clone)]
pub struct SampledBoundary {
    time: Axis,
    tangential: Option<Axis>,
    values: Vec<f64>,
}

fn lagrange4(axis: &Axis, x: f64) -> Option<([usize; 4], [f64; 4])> {
    let n = axis.len();
    if n == 1 {
        return ((x - axis.start).abs() < 1e-14).then_some(([0; 4], [1.0, 0.0, 0.0, 0.0]));
    }
    if x < axis.start || x > axis.end {
        return None;
    }
    let h = axis.step();
    let s = (x - axis.start) / h;
    let m = n.min(4);
    let i0 = ((s.floor() as isize) - 1).clamp(0, n as isize - m as isize) as usize;
    let mut idx = [0usize; 4];
    let mut w = [0.0; 4];
    for a in 0..m {
        idx[a] = i0 + a;
        let mut l = 1.0;
        for b in 0..m {
            if a != b {
                l *= (s - (i0 + b) as f64) / (a as f64 - b as f64);
            }
        }
        w[a] = l;
    }
    Some((idx, w))
}

impl BoundaryFn for SampledBoundary {
    fn value(&self, t: f64, xp: f64) -> f64 {
        let Some((it, wt)) = lagrange4(&self.time, t) else { return 0.0 };
        let ny = self.tangential.as_ref().map_or(1, Axis::len);
        let (iy, wy) = match &self.tangential {
            Some(ax) => match lagrange4(ax, xp) {
                Some(v) => v,
                None => return 0.0,
            },
            None => ([0; 4], [1.0, 0.0, 0.0, 0.0]),
        };
        let mut s = 0.0;
        for a in 0..4 {
            if wt[a] == 0.0 {
                continue;
            }
            for b in 0..4 {
                if wy[b] != 0.0 {
                    s += wt[a] * wy[b] * self.values[it[a] * ny + iy[b]];
                }
            }
        }
        s
    }
    fn time_support(&self) -> Option<(f64, f64)> {
        Some((self.time.start, self.time.end))
    }
    fn tangential_support(&self) -> Option<(f64, f64)> {
        self.tangential.as_ref().map(|a| (a.start, a.end))
    }
}

/// Which lateral boundary the data lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BoundaryKind {
    /// `R^{n-1}` as the boundary of the half-space.
    HalfSpace { n: usize },
    /// The two endpoints of `(0, 1)`.
    UnitInterval,
}

/// Samples of `g` on a `(t, x')` grid (one set per boundary component)
/// plus an evaluator for off-grid values.
#[derive(Clone)]
pub struct BoundaryData {
    kind: BoundaryKind,
    time: Axis,
    tangential: Option<Axis>,
    sides: Vec<(Vec<f64>, Arc<dyn BoundaryFn>)>,
}

/// Sidecar metadata written next to a boundary CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryMeta {
    pub schema_version: String,
    pub boundary: BoundaryKind,
    pub time: Axis,
    pub tangential: Option<Axis>,
    pub time_step: f64,
    pub tangential_step: Option<f64>,
}

impl BoundaryData {
    fn sample(time: &Axis, tangential: &Option<Axis>, f: &dyn BoundaryFn) -> Vec<f64> {
        let ys = tangential.as_ref().map_or(vec![0.0], Axis::points);
        let mut out = Vec::with_capacity(time.len() * ys.len());
        for t in time.points() {
            for &y in &ys {
                out.push(f.value(t, y));
            }
        }
        out
    }

    /// Half-space data from an analytic function.
    pub fn half_space(n: usize, time: Axis, tangential: Option<Axis>, f: Arc<dyn BoundaryFn>) -> Result<Self> {
        Self::check_half_space(n, &tangential)?;
        let values = Self::sample(&time, &tangential, f.as_ref());
        Self::checked(Self { kind: BoundaryKind::HalfSpace { n }, time, tangential, sides: vec![(values, f)] })
    }

    /// Half-space data from samples; off-grid values are interpolated.
    pub fn half_space_samples(n: usize, time: Axis, tangential: Option<Axis>, values: Vec<f64>) -> Result<Self> {
        Self::check_half_space(n, &tangential)?;
        let ny = tangential.as_ref().map_or(1, Axis::len);
        if values.len() != time.len() * ny {
            return Err(Error::InvalidParameter(format!("expected {} samples, got {}", time.len() * ny, values.len())));
        }
        let f = Arc::new(SampledBoundary { time: time.clone(), tangential: tangential.clone(), values: values.clone() });
        Self::checked(Self { kind: BoundaryKind::HalfSpace { n }, time, tangential, sides: vec![(values, f)] })
    }

    /// Endpoint pair `(g_left(t), g_right(t))` for the unit interval.
    pub fn unit_interval(time: Axis, left: Arc<dyn BoundaryFn>, right: Arc<dyn BoundaryFn>) -> Result<Self> {
        let lv = Self::sample(&time, &None, left.as_ref());
        let rv = Self::sample(&time, &None, right.as_ref());
        Self::checked(Self { kind: BoundaryKind::UnitInterval, time, tangential: None, sides: vec![(lv, left), (rv, right)] })
    }

    pub fn unit_interval_samples(time: Axis, left: Vec<f64>, right: Vec<f64>) -> Result<Self> {
        if left.len() != time.len() || right.len() != time.len() {
            return Err(Error::InvalidParameter("endpoint samples must match the time axis".into()));
        }
        let mk =
            |v: &Vec<f64>| -> Arc<dyn BoundaryFn> { Arc::new(SampledBoundary { time: time.clone(), tangential: None, values: v.clone() }) };
        let (l, r) = (mk(&left), mk(&right));
        Self::checked(Self { kind: BoundaryKind::UnitInterval, time, tangential: None, sides: vec![(left, l), (right, r)] })
    }

    fn check_half_space(n: usize, tangential: &Option<Axis>) -> Result<()> {
        match (n, tangential) {
            (1, None) | (2, Some(_)) => Ok(()),
            (1, Some(_)) | (2, None) => Err(Error::DimensionMismatch { expected: n, got: 1 + usize::from(tangential.is_some()) }),
            _ => Err(Error::InvalidParameter(format!("n must be 1 or 2, got {n}"))),
        }
    }

    fn checked(self) -> Result<Self> {
        for (vals, _) in &self.sides {
            if vals.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidParameter("boundary samples must be finite".into()));
            }
        }
        Ok(self)
    }

    pub fn kind(&self) -> BoundaryKind {
        self.kind
    }
    pub fn n(&self) -> usize {
        match self.kind {
            BoundaryKind::HalfSpace { n } => n,
            BoundaryKind::UnitInterval => 1,
        }
    }
    pub fn time(&self) -> &Axis {
        &self.time
    }
    pub fn tangential(&self) -> Option<&Axis> {
        self.tangential.as_ref()
    }
    pub fn side_count(&self) -> usize {
        self.sides.len()
    }
    pub fn values(&self, side: usize) -> &[f64] {
        &self.sides[side].0
    }
    pub fn function(&self, side: usize) -> &Arc<dyn BoundaryFn> {
        &self.sides[side].1
    }

    /// Largest absolute sample over all sides.
    pub fn max_abs(&self) -> f64 {
        self.sides.iter().flat_map(|(v, _)| v.iter()).fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn descriptor_hash(&self) -> String {
        hex_digest(format!("{:?}|{:?}|{:?}|sides={}", self.kind, self.time, self.tangential, self.sides.len()).as_bytes())
    }

    /// CSV with columns `t, x', value`; on the unit interval the `x'`
    /// column holds the endpoint (0 or 1). Metadata goes to
    /// `<path>.meta.json`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut wr = csv::Writer::from_path(path).map_err(|e| Error::Io(e.to_string()))?;
        let err = |e: csv::Error| Error::Io(e.to_string());
        wr.write_record(["t", "x'", "value"]).map_err(err)?;
        let ys = self.tangential.as_ref().map_or(vec![0.0], Axis::points);
        for (s, (vals, _)) in self.sides.iter().enumerate() {
            for (it, t) in self.time.points().into_iter().enumerate() {
                for (iy, &y) in ys.iter().enumerate() {
                    let x = match self.kind {
                        BoundaryKind::UnitInterval => s as f64,
                        _ => y,
                    };
                    let v = vals[it * ys.len() + iy];
                    wr.write_record([format!("{t:e}"), format!("{x:e}"), format!("{v:e}")]).map_err(err)?;
                }
            }
        }
        wr.flush()?;
        let meta = BoundaryMeta {
            schema_version: crate::SCHEMA_VERSION.into(),
            boundary: self.kind,
            time: self.time.clone(),
            tangential: self.tangential.clone(),
            time_step: self.time.step(),
            tangential_step: self.tangential.as_ref().map(Axis::step),
        };
        let json = serde_json::to_string_pretty(&meta).map_err(|e| Error::Io(e.to_string()))?;
        fs::write(meta_path(path), json + "\n")?;
        Ok(())
    }

    /// Read a CSV written by [`BoundaryData::write_csv`] (sample-backed).
    pub fn read_csv(path: &Path) -> Result<Self> {
        let meta: BoundaryMeta =
            serde_json::from_str(&fs::read_to_string(meta_path(path))?).map_err(|e| Error::Config(format!("boundary metadata: {e}")))?;
        let mut rd = csv::Reader::from_path(path).map_err(|e| Error::Io(e.to_string()))?;
        let mut values = Vec::new();
        for rec in rd.records() {
            let rec = rec.map_err(|e| Error::Io(e.to_string()))?;
            let v: f64 = rec
                .get(2)
                .ok_or_else(|| Error::Config("boundary CSV needs three columns".into()))?
                .trim()
                .parse()
                .map_err(|e| Error::Config(format!("boundary CSV value: {e}")))?;
            values.push(v);
        }
        match meta.boundary {
            BoundaryKind::HalfSpace { n } => Self::half_space_samples(n, meta.time, meta.tangential, values),
            BoundaryKind::UnitInterval => {
                let nt = meta.time.len();
                if values.len() != 2 * nt {
                    return Err(Error::Config(format!("expected {} rows, got {}", 2 * nt, values.len())));
                }
                let right = values.split_off(nt);
                Self::unit_interval_samples(meta.time, values, right)
            }
        }
    }
}

fn meta_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

/// Quadrature knobs for the Slobodeckij integrals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SeminormSpec {
    /// Smallest difference step; the omitted mass is estimated.
    pub tau_min: f64,
    /// Ratio of consecutive graded panels for the difference step.
    pub log_factor: f64,
    /// Gauss-Legendre order per graded panel.
    pub panel_order: usize,
    /// Largest graded panel width.
    pub h_max: f64,
    /// Panels per unit length for the outer `t` and `x'` integrals.
    pub panels_per_unit: f64,
}

impl Default for SeminormSpec {
    fn default() -> Self {
        Self { tau_min: 1e-8, log_factor: 2.0, panel_order: 8, h_max: 0.1, panels_per_unit: 16.0 }
    }
}

impl SeminormSpec {
    /// Spec with `2^k` times finer outer and graded quadrature.
    pub fn refined(&self, k: u32) -> Self {
        let f = 2f64.powi(k as i32);
        Self { h_max: self.h_max / f, panels_per_unit: self.panels_per_unit * f, ..*self }
    }
}

/// A seminorm with its p-th power and the estimated omitted p-th power mass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeminormValue {
    pub value: f64,
    pub pth: f64,
    pub truncation: f64,
}

impl SeminormValue {
    fn from_pth(pth: f64, truncation: f64, p: f64) -> Self {
        Self { value: pth.max(0.0).powf(1.0 / p), pth, truncation }
    }
}

fn outer_rule(a: f64, b: f64, ppu: f64) -> Vec<(f64, f64)> {
    if !(b > a) {
        return Vec::new();
    }
    let panels = ((b - a) * ppu).ceil().max(1.0) as usize;
    composite_rule(a, b, panels, 6)
}

/// Which direction differences are taken in.
#[derive(Clone, Copy, PartialEq)]
enum Direction {
    Time,
    Tangential,
}

struct SideGeometry {
    /// Integration range for t and whether it is a finite window.
    t_range: (f64, f64),
    t_finite: bool,
    y_range: Option<(f64, f64)>,
    y_finite: bool,
}

impl BoundaryData {
    fn geometry(&self, f: &dyn BoundaryFn) -> SideGeometry {
        let window = (self.time.start, self.time.end);
        let (t_range, t_finite) = match (self.kind, f.time_support()) {
            (BoundaryKind::HalfSpace { .. }, Some(s)) => (s, false),
            _ => (window, true),
        };
        let (y_range, y_finite) = match (&self.tangential, f.tangential_support()) {
            (None, _) => (None, false),
            (Some(_), Some(s)) => (Some(s), false),
            (Some(ax), None) => (Some((ax.start, ax.end)), true),
        };
        SideGeometry { t_range, t_finite, y_range, y_finite }
    }

    fn check_params(&self, w: &WeightParams) -> Result<()> {
        if w.n() != self.n() {
            return Err(Error::DimensionMismatch { expected: self.n(), got: w.n() });
        }
        Ok(())
    }
}

/// `\int\int |g|^p` over one side.
fn side_lp_pth(f: &dyn BoundaryFn, geo: &SideGeometry, p: f64, spec: &SeminormSpec) -> f64 {
    if let Some(sep) = f.as_separable() {
        let (t, y) = separable_lp_pth(&sep, geo, p, spec);
        return sep.amplitude.abs().powf(p) * t * y;
    }
    let tr = outer_rule(geo.t_range.0, geo.t_range.1, spec.panels_per_unit);
    let yr = geo.y_range.map_or(vec![(0.0, 1.0)], |(a, b)| outer_rule(a, b, spec.panels_per_unit));
    let mut s = 0.0;
    for &(t, wt) in &tr {
        for &(y, wy) in &yr {
            s += wt * wy * f.value(t, y).abs().powf(p);
        }
    }
    s
}

/// `(\int |T|^p, \int |Y|^p)` for separable data (the second is 1 without `x'`).
fn separable_lp_pth(sep: &SeparableBoundary, geo: &SideGeometry, p: f64, spec: &SeminormSpec) -> (f64, f64) {
    let one_d = |prof: &Profile, (a, b): (f64, f64)| -> f64 {
        outer_rule(a, b, spec.panels_per_unit).iter().map(|&(x, w)| w * prof.value(x).abs().powf(p)).sum()
    };
    let t = one_d(&sep.time, geo.t_range);
    let y = match (&sep.tangential, geo.y_range) {
        (Some(prof), Some(r)) => one_d(prof, r),
        _ => 1.0,
    };
    (t, y)
}

/// `\int_I |h(u + tau) - h(u)|^p du` with `I = [a, b - tau]` on a finite
/// window and `[a - tau, b]` for compactly supported `h`.
fn shifted_difference_1d(h: &dyn Fn(f64) -> f64, (a, b): (f64, f64), finite: bool, tau: f64, p: f64, ppu: f64) -> f64 {
    let (lo, hi) = if finite { (a, b - tau) } else { (a - tau, b) };
    outer_rule(lo, hi, ppu).iter().map(|&(u, w)| w * (h(u + tau) - h(u)).abs().powf(p)).sum()
}

/// `2 \int tau^{-1-sigma} D(tau) dtau` along one direction for one side.
///
/// The graded rule covers `[tau_min, tau_max]`; beyond `tau_max` the exact
/// non-overlap tail is added for compactly supported data, and below
/// `tau_min` the leading-order term `D(tau) ~ C tau^p` is added. The size
/// of that last term is returned as the truncation estimate.
fn side_seminorm_pth(
    f: &dyn BoundaryFn,
    geo: &SideGeometry,
    dir: Direction,
    p: f64,
    sigma: f64,
    spec: &SeminormSpec,
) -> Result<(f64, f64)> {
    let ((a, b), finite) = match dir {
        Direction::Time => (geo.t_range, geo.t_finite),
        Direction::Tangential => (geo.y_range.expect("tangential range"), geo.y_finite),
    };
    let ppu = spec.panels_per_unit;
    let tau_max = b - a;
    if !(tau_max > spec.tau_min) {
        return Ok((0.0, 0.0));
    }
    let sep = f.as_separable();
    let diff: Box<dyn Fn(f64) -> f64 + '_> = match &sep {
        Some(sep) => {
            // |a T(t) Y(y) shifted| factors into the shifted factor times the other's L_p mass
            let (tp, yp) = separable_lp_pth(sep, geo, p, spec);
            let amp = sep.amplitude.abs().powf(p);
            match dir {
                Direction::Time => {
                    let prof = sep.time.clone();
                    Box::new(move |tau| amp * yp * shifted_difference_1d(&|t| prof.value(t), (a, b), finite, tau, p, ppu))
                }
                Direction::Tangential => {
                    let prof = sep.tangential.clone().expect("tangential profile");
                    Box::new(move |tau| amp * tp * shifted_difference_1d(&|y| prof.value(y), (a, b), finite, tau, p, ppu))
                }
            }
        }
        None => {
            let other = match dir {
                Direction::Time => geo.y_range.map_or(vec![(0.0, 1.0)], |(c, d)| outer_rule(c, d, ppu)),
                Direction::Tangential => outer_rule(geo.t_range.0, geo.t_range.1, ppu),
            };
            Box::new(move |tau| {
                let mut s = 0.0;
                for &(v, wv) in &other {
                    let h = |u: f64| match dir {
                        Direction::Time => f.value(u, v),
                        Direction::Tangential => f.value(v, u),
                    };
                    s += wv * shifted_difference_1d(&h, (a, b), finite, tau, p, ppu);
                }
                s
            })
        }
    };
    let nodes = loggraded_rule(spec.tau_min, tau_max, spec.log_factor, spec.panel_order, spec.h_max)?;
    let mut total = 0.0;
    for &(tau, wt) in &nodes {
        total += 2.0 * wt * tau.powf(-1.0 - sigma) * diff(tau);
    }
    if !finite {
        // beyond tau_max the shifted copies do not overlap: D = 2 ||g||^p
        let norm_p = side_lp_pth(f, geo, p, spec);
        total += 4.0 * norm_p * tau_max.powf(-sigma) / sigma;
    }
    let c = diff(spec.tau_min) / spec.tau_min.powf(p);
    let below = 2.0 * c * spec.tau_min.powf(p - sigma) / (p - sigma);
    Ok((total + below, below))
}

/// Time seminorm `[g]_{W_p^{s/2, 0}}` (sides combined in the `l_p` sense).
pub fn time_seminorm_detail(g: &BoundaryData, w: &WeightParams, spec: &SeminormSpec) -> Result<SeminormValue> {
    g.check_params(w)?;
    let sigma = w.time_order();
    let (mut pth, mut trunc) = (0.0, 0.0);
    for side in 0..g.side_count() {
        let f = g.function(side).as_ref();
        let geo = g.geometry(f);
        let (a, b) = side_seminorm_pth(f, &geo, Direction::Time, w.p(), sigma, spec)?;
        pth += a;
        trunc += b;
    }
    Ok(SeminormValue::from_pth(pth, trunc, w.p()))
}

pub fn time_seminorm(g: &BoundaryData, w: &WeightParams, spec: &SeminormSpec) -> Result<f64> {
    Ok(time_seminorm_detail(g, w, spec)?.value)
}

/// Tangential seminorm `[g]_{W_p^{0, s}}`; only for `n = 2`.
pub fn space_seminorm_detail(g: &BoundaryData, w: &WeightParams, spec: &SeminormSpec) -> Result<SeminormValue> {
    if g.n() != 2 || w.n() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: w.n().min(g.n()) });
    }
    g.check_params(w)?;
    let sigma = w.s() * w.p();
    let f = g.function(0).as_ref();
    let geo = g.geometry(f);
    let (pth, trunc) = side_seminorm_pth(f, &geo, Direction::Tangential, w.p(), sigma, spec)?;
    Ok(SeminormValue::from_pth(pth, trunc, w.p()))
}

pub fn space_seminorm(g: &BoundaryData, w: &WeightParams, spec: &SeminormSpec) -> Result<f64> {
    Ok(space_seminorm_detail(g, w, spec)?.value)
}

/// `||g||_{L_p}` over the lateral boundary (sides combined in `l_p`).
pub fn boundary_lp_norm(g: &BoundaryData, w: &WeightParams, spec: &SeminormSpec) -> Result<f64> {
    g.check_params(w)?;
    let mut s = 0.0;
    for side in 0..g.side_count() {
        let f = g.function(side).as_ref();
        s += side_lp_pth(f, &g.geometry(f), w.p(), spec);
    }
    Ok(s.powf(1.0 / w.p()))
}

/// `||g||_{L_p} + [g]_{time} (+ [g]_{space} for n = 2)`.
pub fn slobodeckij_norm(g: &BoundaryData, w: &WeightParams, spec: &SeminormSpec) -> Result<NormReport> {
    let mut rep = NormReport::new(g.descriptor_hash());
    rep.push("lp", boundary_lp_norm(g, w, spec)?, false);
    let ts = time_seminorm_detail(g, w, spec)?;
    rep.push("time_seminorm", ts.value, false);
    let mut trunc = ts.truncation;
    if g.n() == 2 {
        let ss = space_seminorm_detail(g, w, spec)?;
        rep.push("space_seminorm", ss.value, false);
        trunc += ss.truncation;
    }
    rep.error_estimate = Some(trunc);
    if zero_compatible(g) {
        rep.flag("zero_compatible");
    }
    if w.s() * w.p() >= 2.0 {
        rep.flag("sp_ge_2: W and W_0 may differ");
    }
    Ok(rep)
}

/// Whether `g` vanishes at and before the window start on every side.
pub fn zero_compatible(g: &BoundaryData) -> bool {
    let s = g.time().start;
    let ny = g.tangential().map_or(1, Axis::len);
    (0..g.side_count()).all(|side| {
        let f = g.function(side);
        let support_ok = f.time_support().is_none_or(|(a, _)| a >= s - 1e-12);
        support_ok && g.values(side)[..ny].iter().all(|v| v.abs() < 1e-10)
    })
}
