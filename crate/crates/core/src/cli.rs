//! Command-line front end: one subcommand per harness, JSON + CSV reports.
//!
//! Exit codes: 0 success, 2 invalid input or configuration, 3 a check
//! exceeded its tolerance (or the numerics broke down).

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;

use crate::battery;
use crate::boundary::{slobodeckij_norm, BoundaryData, BoundaryFn};
use crate::bvp::{self, BvpMesh};
use crate::config::{BoundaryFamily, Config, FieldFamily};
use crate::error::{Error, Result};
use crate::field::{Field, GridFunction, MultiIndex, SeparableField, TimeDerivativeRep};
use crate::heat_ext::{self, kernel_derivative_moment, kernel_mass};
use crate::norms;
use crate::params::WeightParams;
use crate::report::{ConvergenceTable, NormReport, RatioEntry, RatioReport};
use crate::trace_repr;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_BREACH: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "wtrace", version, about = "Weighted trace/extension harnesses and a 1-D parabolic solver")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// TOML configuration; every key has a default.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Directory for reports.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Overrides `battery.seed`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Refinement steps applied to every grid and quadrature.
    #[arg(long, global = true, default_value_t = 0)]
    pub refine: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Weighted and parabolic norms of the field battery.
    Norms,
    /// Slobodeckij norms of boundary data.
    BoundaryNorms,
    /// Kernel mass and vanishing derivative moments.
    KernelCheck,
    /// Extend boundary data and report norm ratios.
    Extend,
    /// Trace inequality ratios at two resolutions.
    TraceCheck,
    /// Residual of the boundary representation identity.
    ReprCheck,
    /// Manufactured convergence, lifting and estimate ratios.
    Bvp,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Norms => "norms",
            Command::BoundaryNorms => "boundary-norms",
            Command::KernelCheck => "kernel-check",
            Command::Extend => "extend",
            Command::TraceCheck => "trace-check",
            Command::ReprCheck => "repr-check",
            Command::Bvp => "bvp",
        }
    }
}

#[derive(Debug, Serialize)]
struct Envelope<'a, T: Serialize> {
    schema_version: &'static str,
    command: &'static str,
    seed: u64,
    refine: u32,
    params: WeightParams,
    passed: bool,
    failures: &'a [String],
    result: &'a T,
}

/// Result of a subcommand before it is written out.
struct Outcome<T: Serialize> {
    result: T,
    failures: Vec<String>,
}

impl<T: Serialize> Outcome<T> {
    fn ok(result: T) -> Self {
        Self { result, failures: Vec::new() }
    }
}

/// Parse, run, write reports; returns the process exit code.
pub fn main_with_args<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
        }
    };
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("wtrace {}: {e}", cli.command.name());
            exit_code(&e)
        }
    }
}

/// Breakdowns of the numerics count as check failures; everything else is
/// bad input.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::SingularSystem { .. } | Error::DegenerateDenominator => EXIT_BREACH,
        _ => EXIT_INVALID,
    }
}

/// Effective configuration: file (or defaults), then `--seed`.
pub fn load_config(cli: &Cli) -> Result<Config> {
    let mut cfg = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    if let Some(s) = cli.seed {
        cfg.battery.seed = s;
    }
    Ok(cfg)
}

pub fn run(cli: &Cli) -> Result<i32> {
    let base = load_config(cli)?;
    let w = base.validate()?;
    let cfg = base.refined(cli.refine);
    let out = cli.out.as_path();
    fs::create_dir_all(out)?;
    let failures = match cli.command {
        Command::Norms => emit(cli, base.battery.seed, w, out, norms_cmd(&cfg, w, out)?)?,
        Command::BoundaryNorms => emit(cli, base.battery.seed, w, out, boundary_norms_cmd(&cfg, w, out)?)?,
        Command::KernelCheck => emit(cli, base.battery.seed, w, out, kernel_check_cmd(&cfg, w, out)?)?,
        Command::Extend => emit(cli, base.battery.seed, w, out, extend_cmd(&cfg, w, out)?)?,
        Command::TraceCheck => emit(cli, base.battery.seed, w, out, trace_check_cmd(&base, w, cli.refine, out)?)?,
        Command::ReprCheck => emit(cli, base.battery.seed, w, out, repr_check_cmd(&base, w, cli.refine, out)?)?,
        Command::Bvp => emit(cli, base.battery.seed, w, out, bvp_cmd(&cfg, w, out)?)?,
    };
    for f in &failures {
        eprintln!("wtrace {}: {f}", cli.command.name());
    }
    Ok(if failures.is_empty() { EXIT_OK } else { EXIT_BREACH })
}

fn emit<T: Serialize>(cli: &Cli, seed: u64, w: WeightParams, out: &Path, o: Outcome<T>) -> Result<Vec<String>> {
    let env = Envelope {
        schema_version: crate::SCHEMA_VERSION,
        command: cli.command.name(),
        seed,
        refine: cli.refine,
        params: w,
        passed: o.failures.is_empty(),
        failures: &o.failures,
        result: &o.result,
    };
    write_json(&out.join(format!("{}.json", cli.command.name())), &env)?;
    Ok(o.failures)
}

fn write_json<T: Serialize>(path: &Path, v: &T) -> Result<()> {
    let s = serde_json::to_string_pretty(v).map_err(|e| Error::Io(e.to_string()))?;
    fs::write(path, s + "\n")?;
    Ok(())
}

fn csv_file(path: &Path) -> Result<fs::File> {
    Ok(fs::File::create(path)?)
}

fn write_rows(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut wr = csv::Writer::from_path(path).map_err(|e| Error::Io(e.to_string()))?;
    let err = |e: csv::Error| Error::Io(e.to_string());
    wr.write_record(header).map_err(err)?;
    for r in rows {
        wr.write_record(r).map_err(err)?;
    }
    wr.flush()?;
    Ok(())
}

fn fmt(x: f64) -> String {
    format!("{x:e}")
}

fn fields(cfg: &Config, n: usize) -> Result<Vec<SeparableField>> {
    let b = &cfg.battery;
    if b.size == 0 {
        return Err(Error::Config("battery is empty (battery.size = 0)".into()));
    }
    Ok(match b.field {
        FieldFamily::Hugging => battery::boundary_hugging(n, b.size, b.seed, (b.sigma_min, b.sigma_max)),
        FieldFamily::Hardy => {
            if n != 1 {
                return Err(Error::DimensionMismatch { expected: 1, got: n });
            }
            battery::hardy_battery(b.size, b.seed)
        }
        FieldFamily::Representation => battery::representation_battery(n, b.size, b.seed),
    })
}

/// Boundary data from `io.boundary_input` or the configured battery,
/// sampled on the grid axes.
fn boundary_set(cfg: &Config, w: WeightParams) -> Result<Vec<(String, BoundaryData)>> {
    if let Some(path) = &cfg.io.boundary_input {
        let g = BoundaryData::read_csv(path)?;
        if g.n() != w.n() {
            return Err(Error::DimensionMismatch { expected: w.n(), got: g.n() });
        }
        return Ok(vec![("input".into(), g)]);
    }
    let b = &cfg.battery;
    let members = match b.boundary {
        BoundaryFamily::Shipped => battery::shipped_bumps(w.n()),
        BoundaryFamily::Random => {
            if b.size == 0 {
                return Err(Error::Config("battery is empty (battery.size = 0)".into()));
            }
            battery::random_boundary(w.n(), b.size, b.seed)
        }
    };
    let time = cfg.grid.time_axis()?;
    let tang = cfg.grid.tangential_axis(w.n())?;
    members
        .into_iter()
        .enumerate()
        .map(|(k, g)| {
            let f: Arc<dyn BoundaryFn> = Arc::new(g);
            Ok((format!("g{k}"), BoundaryData::half_space(w.n(), time.clone(), tang.clone(), f)?))
        })
        .collect()
}

fn sample_with_flux(f: &SeparableField, grid: &Arc<crate::grid::SpaceTimeGrid>) -> Result<(GridFunction, TimeDerivativeRep)> {
    let rep = TimeDerivativeRep::flux_from_fields(grid.clone(), &f.flux()?)?;
    let field: Arc<dyn Field> = Arc::new(f.clone());
    Ok((GridFunction::sample(grid.clone(), field)?, rep))
}

#[derive(Debug, Serialize)]
struct NormsEntry {
    label: String,
    lp_theta: f64,
    sobolev_1: f64,
    sobolev_2: f64,
    tilde_1: NormReport,
    tilde_2: NormReport,
    hardy: Option<RatioEntry>,
}

fn norms_cmd(cfg: &Config, w: WeightParams, out: &Path) -> Result<Outcome<Vec<NormsEntry>>> {
    let grid = cfg.grid.build(w.n())?;
    let entries = fields(cfg, w.n())?
        .par_iter()
        .enumerate()
        .map(|(k, f)| {
            let (u, rep) = sample_with_flux(f, &grid)?;
            let hardy = match norms::hardy_ratio(&u, &w) {
                Ok(r) => Some(r),
                Err(Error::NonzeroBoundaryValue(_)) => None,
                Err(e) => return Err(e),
            };
            Ok(NormsEntry {
                label: format!("u{k}"),
                lp_theta: norms::lp_theta_norm(&u, &w)?,
                sobolev_1: norms::weighted_sobolev_norm(&u, &w, 1)?,
                sobolev_2: norms::weighted_sobolev_norm(&u, &w, 2)?,
                tilde_1: norms::tilde_norm(&u, Some(&rep), &w, 1)?,
                tilde_2: norms::tilde_norm(&u, Some(&rep), &w, 2)?,
                hardy,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let rows: Vec<Vec<String>> = entries
        .iter()
        .map(|e| {
            vec![
                e.label.clone(),
                fmt(e.lp_theta),
                fmt(e.sobolev_1),
                fmt(e.sobolev_2),
                fmt(e.tilde_1.total),
                fmt(e.tilde_2.total),
                e.hardy.as_ref().map_or(String::new(), |h| fmt(h.ratio)),
            ]
        })
        .collect();
    write_rows(&out.join("norms.csv"), &["label", "lp_theta", "sobolev_1", "sobolev_2", "tilde_1", "tilde_2", "hardy_ratio"], &rows)?;
    Ok(Outcome::ok(entries))
}

#[derive(Debug, Serialize)]
struct BoundaryNormEntry {
    label: String,
    zero_compatible: bool,
    norm: NormReport,
}

fn boundary_norms_cmd(cfg: &Config, w: WeightParams, out: &Path) -> Result<Outcome<Vec<BoundaryNormEntry>>> {
    let set = boundary_set(cfg, w)?;
    let dir = out.join("boundary");
    fs::create_dir_all(&dir)?;
    let mut entries = Vec::with_capacity(set.len());
    let mut rows = Vec::new();
    for (label, g) in &set {
        g.write_csv(&dir.join(format!("{label}.csv")))?;
        let norm = slobodeckij_norm(g, &w, &cfg.seminorm)?;
        for c in &norm.components {
            rows.push(vec![label.clone(), c.name.clone(), fmt(c.value)]);
        }
        rows.push(vec![label.clone(), "total".into(), fmt(norm.total)]);
        entries.push(BoundaryNormEntry { label: label.clone(), zero_compatible: crate::boundary::zero_compatible(g), norm });
    }
    write_rows(&out.join("boundary-norms.csv"), &["label", "component", "value"], &rows)?;
    Ok(Outcome::ok(entries))
}

#[derive(Debug, Serialize)]
struct KernelEntry {
    n: usize,
    x1: f64,
    alpha: String,
    value: f64,
    target: f64,
    error: f64,
    tail_bound: f64,
    pass: bool,
}

fn kernel_check_cmd(cfg: &Config, w: WeightParams, out: &Path) -> Result<Outcome<Vec<KernelEntry>>> {
    let tol = cfg.tolerances.kernel;
    let mut entries = Vec::new();
    for &n in &cfg.kernel.dims {
        // same s, dimension n
        let wn = WeightParams::new(w.p(), w.theta() + n as f64 - w.n() as f64, n)?;
        for &x1 in &cfg.kernel.x1 {
            let mut push = |alpha: MultiIndex, r: heat_ext::KernelIntegral, target: f64| {
                let error = (r.value - target).abs();
                entries.push(KernelEntry {
                    n,
                    x1,
                    alpha: alpha.to_string(),
                    value: r.value,
                    target,
                    error,
                    tail_bound: r.tail_bound,
                    pass: error <= tol,
                });
            };
            push(MultiIndex::ZERO, kernel_mass(x1, &wn, &cfg.quad)?, 1.0);
            for alpha in MultiIndex::all_up_to(cfg.kernel.max_order, n) {
                if alpha.order() > 0 {
                    push(alpha, kernel_derivative_moment(alpha, x1, n, &cfg.quad)?, 0.0);
                }
            }
        }
    }
    let rows: Vec<Vec<String>> =
        entries.iter().map(|e| vec![e.n.to_string(), fmt(e.x1), e.alpha.clone(), fmt(e.value), fmt(e.error), e.pass.to_string()]).collect();
    write_rows(&out.join("kernel-check.csv"), &["n", "x1", "alpha", "value", "error", "pass"], &rows)?;
    let failures = entries
        .iter()
        .filter(|e| !e.pass)
        .map(|e| format!("kernel integral n={} x1={} alpha={} off by {:e} (> {tol:e})", e.n, e.x1, e.alpha, e.error))
        .collect();
    Ok(Outcome { result: entries, failures })
}

#[derive(Debug, Serialize)]
struct ExtendEntry {
    label: String,
    ratios: Vec<RatioEntry>,
    boundary_norm: f64,
    /// `max |trace(u) - g|` with the trace read off the samples.
    trace_error: f64,
    heat_residual: Option<f64>,
}

#[derive(Debug, Serialize)]
struct ExtendResult {
    cutoff: bool,
    entries: Vec<ExtendEntry>,
    summary: Vec<(usize, RatioReport)>,
}

fn extend_cmd(cfg: &Config, w: WeightParams, out: &Path) -> Result<Outcome<ExtendResult>> {
    let set = boundary_set(cfg, w)?;
    let grid = cfg.grid.build(w.n())?;
    let dir = out.join("extension");
    fs::create_dir_all(&dir)?;
    let mut entries = Vec::with_capacity(set.len());
    for (label, g) in &set {
        let (u, rep) = heat_ext::extend_with_flux(g, cfg.extend.cutoff, grid.clone(), cfg.extension)?;
        let den = slobodeckij_norm(g, &w, &cfg.seminorm)?.total;
        let mut ratios = Vec::new();
        for &gamma in &cfg.extend.gammas {
            let num = norms::tilde_norm(&u, Some(&rep), &w, gamma)?.total;
            ratios.push(RatioEntry::new(format!("gamma={gamma}"), num, den));
        }
        let tr = heat_ext::trace_restrict(&u.without_field(), true)?;
        let trace_error = tr.values(0).iter().zip(g.values(0)).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        let heat_residual = heat_ext::heat_residual(&u).ok();
        let mut rows = Vec::with_capacity(grid.len());
        for (k, v) in u.values().iter().enumerate() {
            let (t, x, y) = grid.coords(k);
            rows.push(vec![fmt(t), fmt(x), fmt(y), fmt(*v)]);
        }
        write_rows(&dir.join(format!("{label}.csv")), &["t", "x1", "x'", "u"], &rows)?;
        entries.push(ExtendEntry { label: label.clone(), ratios, boundary_norm: den, trace_error, heat_residual });
    }
    let summary = cfg
        .extend
        .gammas
        .iter()
        .enumerate()
        .map(|(i, &gamma)| (gamma, RatioReport::from_entries(entries.iter().map(|e| e.ratios[i].clone()).collect())))
        .collect::<Vec<_>>();
    for (gamma, r) in &summary {
        r.write_csv(csv_file(&out.join(format!("extend-gamma{gamma}.csv")))?)?;
    }
    Ok(Outcome::ok(ExtendResult { cutoff: cfg.extend.cutoff, entries, summary }))
}

#[derive(Debug, Serialize)]
struct TwoLevel<T: Serialize> {
    coarse_refine: u32,
    coarse: T,
    fine: T,
}

#[derive(Debug, Serialize)]
struct TraceCheck {
    levels: TwoLevel<RatioReport>,
    drift: f64,
    tolerance: f64,
}

fn trace_battery_report(cfg: &Config, w: WeightParams) -> Result<RatioReport> {
    let grid = cfg.grid.build(w.n())?;
    let entries = fields(cfg, w.n())?
        .par_iter()
        .enumerate()
        .map(|(k, f)| {
            let (u, rep) = sample_with_flux(f, &grid)?;
            trace_repr::trace_ratio_entry(format!("u{k}"), &u, &rep, &w, &cfg.seminorm)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RatioReport::from_entries(entries))
}

fn trace_check_cmd(base: &Config, w: WeightParams, refine: u32, out: &Path) -> Result<Outcome<TraceCheck>> {
    let coarse = trace_battery_report(&base.refined(refine), w)?;
    let fine = trace_battery_report(&base.refined(refine + 1), w)?;
    coarse.write_csv(csv_file(&out.join("trace-check-coarse.csv"))?)?;
    fine.write_csv(csv_file(&out.join("trace-check-fine.csv"))?)?;
    let drift = coarse.drift(&fine);
    let tolerance = base.tolerances.drift;
    let mut failures = Vec::new();
    if !(drift < tolerance) {
        failures.push(format!("trace ratio maximum drifts by {drift:.4} between resolutions (> {tolerance})"));
    }
    if fine.degenerate_count == fine.entries.len() {
        failures.push("every battery member is degenerate".into());
    }
    let levels = TwoLevel { coarse_refine: refine, coarse, fine };
    Ok(Outcome { result: TraceCheck { levels, drift, tolerance }, failures })
}

#[derive(Debug, Serialize)]
struct ReprEntry {
    label: String,
    coarse: trace_repr::ReprResidual,
    fine: trace_repr::ReprResidual,
}

#[derive(Debug, Serialize)]
struct ReprCheck {
    eps: f64,
    samples: Vec<(f64, f64)>,
    entries: Vec<ReprEntry>,
    max_coarse: f64,
    max_fine: f64,
    tolerance: f64,
}

fn repr_check_cmd(base: &Config, w: WeightParams, refine: u32, out: &Path) -> Result<Outcome<ReprCheck>> {
    let cfg = base.refined(refine);
    let n = w.n();
    let members = fields(&cfg, n)?;
    let m = cfg.mollifier.samples;
    let (a, b) = (0.5 * cfg.grid.t_min, 0.5 * cfg.grid.t_max);
    let samples: Vec<(f64, f64)> =
        (0..m).map(|i| (if m == 1 { 0.5 * (a + b) } else { a + (b - a) * i as f64 / (m - 1) as f64 }, 0.0)).collect();
    let (coarse_spec, fine_spec) = (base.repr.refined(refine), base.repr.refined(refine + 1));
    let eps = cfg.mollifier.eps;
    let entries = members
        .par_iter()
        .enumerate()
        .map(|(k, f)| {
            let flux = f.flux()?;
            Ok(ReprEntry {
                label: format!("u{k}"),
                coarse: trace_repr::representation_residual_fields(f, &flux, eps, &samples, &coarse_spec)?,
                fine: trace_repr::representation_residual_fields(f, &flux, eps, &samples, &fine_spec)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let max_coarse = entries.iter().fold(0.0f64, |m, e| m.max(e.coarse.max));
    let max_fine = entries.iter().fold(0.0f64, |m, e| m.max(e.fine.max));
    let tolerance = if n == 1 { cfg.tolerances.repr_n1 } else { cfg.tolerances.repr_n2 };
    let mut failures = Vec::new();
    if !(max_coarse <= tolerance) {
        failures.push(format!("representation residual {max_coarse:e} exceeds {tolerance:e}"));
    }
    if !(max_fine < max_coarse) {
        failures.push(format!("representation residual does not decrease under refinement ({max_coarse:e} -> {max_fine:e})"));
    }
    let rows: Vec<Vec<String>> = entries.iter().map(|e| vec![e.label.clone(), fmt(e.coarse.max), fmt(e.fine.max)]).collect();
    write_rows(&out.join("repr-check.csv"), &["label", "residual", "residual_refined"], &rows)?;
    Ok(Outcome { result: ReprCheck { eps, samples, entries, max_coarse, max_fine, tolerance }, failures })
}

#[derive(Debug, Serialize)]
struct BvpResult {
    form: bvp::BvpForm,
    space: ConvergenceTable,
    time: ConvergenceTable,
    /// Per battery member: `max |u_lift - u_direct|` and its tolerance.
    lifting: Vec<(f64, f64)>,
    estimates: TwoLevel<RatioReport>,
    estimate_drift: f64,
}

fn bvp_cmd(cfg: &Config, w: WeightParams, out: &Path) -> Result<Outcome<BvpResult>> {
    let bc = &cfg.bvp;
    let tol = &cfg.tolerances;
    let mesh = bc.mesh()?;
    let [(ps, exact_s), (pt, exact_t)] = bvp::manufactured::convergence_pair(bc.form, w);
    let mut hs = Vec::new();
    let mut es = Vec::new();
    for k in 0..bc.levels {
        let m = BvpMesh::new(bc.cells << k, 4)?.with_scheme(bc.scheme);
        hs.push(1.0 / m.cells as f64);
        es.push(bvp::solve(&ps, &m)?.nodal.max_error(exact_s));
    }
    let space = ConvergenceTable::new("dx", hs, es);
    // the time-limited case is quadratic in space; a fine space mesh keeps
    // the divergence-form flux error out of the way
    let mut ts = Vec::new();
    let mut et = Vec::new();
    for k in 0..bc.levels {
        let m = BvpMesh::new(bc.cells << bc.levels, bc.steps << k)?.with_scheme(bc.scheme);
        ts.push(1.0 / m.steps as f64);
        et.push(bvp::solve(&pt, &m)?.nodal.max_error(exact_t));
    }
    let time = ConvergenceTable::new("dt", ts, et);
    space.write_csv(csv_file(&out.join("bvp-space.csv"))?)?;
    time.write_csv(csv_file(&out.join("bvp-time.csv"))?)?;

    let problems = battery::bvp_battery(bc.form, w, bc.battery, cfg.battery.seed);
    let fine_mesh = mesh.refined(2, 4);
    let lift_tol = tol.lift_factor * (1.0 / mesh.steps as f64 + (1.0 / mesh.cells as f64).powi(2));
    let runs = problems
        .par_iter()
        .enumerate()
        .map(|(k, p)| {
            let direct = bvp::solve(p, &mesh)?;
            let lifted = bvp::lift_and_solve(p, &mesh, cfg.extension)?;
            let fine = bvp::solve(p, &fine_mesh)?;
            let label = format!("problem{k}");
            let coarse_r = bvp::estimate_report(&direct, p, &cfg.seminorm)?;
            let fine_r = bvp::estimate_report(&fine, p, &cfg.seminorm)?;
            Ok((direct.nodal.max_diff(&lifted.nodal), RatioEntry { label: label.clone(), ..coarse_r }, RatioEntry { label, ..fine_r }))
        })
        .collect::<Result<Vec<_>>>()?;
    let lifting: Vec<(f64, f64)> = runs.iter().map(|r| (r.0, lift_tol)).collect();
    let coarse = RatioReport::from_entries(runs.iter().map(|r| r.1.clone()).collect());
    let fine = RatioReport::from_entries(runs.iter().map(|r| r.2.clone()).collect());
    coarse.write_csv(csv_file(&out.join("bvp-estimates.csv"))?)?;
    let estimate_drift = if problems.is_empty() { 0.0 } else { coarse.drift(&fine) };

    let mut failures = Vec::new();
    if !(space.slope >= tol.bvp_space_slope) {
        failures.push(format!("space convergence slope {:.3} below {}", space.slope, tol.bvp_space_slope));
    }
    if !(time.slope >= tol.bvp_time_slope) {
        failures.push(format!("time convergence slope {:.3} below {}", time.slope, tol.bvp_time_slope));
    }
    for (k, (d, t)) in lifting.iter().enumerate() {
        if !(d <= t) {
            failures.push(format!("problem{k}: lifted and direct solves differ by {d:e} (> {t:e})"));
        }
    }
    if !(estimate_drift < tol.drift) {
        failures.push(format!("estimate ratio maximum drifts by {estimate_drift:.4} (> {})", tol.drift));
    }
    let estimates = TwoLevel { coarse_refine: 0, coarse, fine };
    Ok(Outcome { result: BvpResult { form: bc.form, space, time, lifting, estimates, estimate_drift }, failures })
}
