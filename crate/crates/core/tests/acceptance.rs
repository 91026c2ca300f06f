//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails. Runs as a plain binary so the lines always show.

use std::path::Path;
use std::process::Command;
use std::sync::Arc;
use std::time::Instant;

use wtrace::battery::{boundary_hugging, bvp_battery, hardy_battery, random_boundary, representation_battery, shipped_bumps};
use wtrace::boundary::{slobodeckij_norm, BoundaryData, SeminormSpec};
use wtrace::bvp::{self, manufactured, BvpForm, BvpMesh};
use wtrace::field::{Field, GridFunction, MultiIndex, SeparableField, TimeDerivativeRep};
use wtrace::grid::{Axis, GradedGrid, SpaceTimeGrid};
use wtrace::heat_ext::{extend_with_flux, heat_residual, kernel_derivative_moment, kernel_mass, trace_restrict, ExtensionSpec};
use wtrace::norms::{hardy_constant, hardy_ratio, tilde_norm};
use wtrace::profile::Profile;
use wtrace::quad::{QuadRule, QuadSpec};
use wtrace::report::{fit_slope, RatioEntry, RatioReport};
use wtrace::trace_repr::{representation_residual_fields, trace_ratio_entry, ReprSpec};
use wtrace::WeightParams;

type Verdict = Result<String, String>;
type Criterion = (&'static str, fn() -> Verdict);

fn ensure(ok: bool, detail: String) -> Verdict {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn w(p: f64, theta: f64, n: usize) -> WeightParams {
    WeightParams::new(p, theta, n).unwrap()
}

fn grid(time: Axis, normal: GradedGrid, tangential: Option<Axis>) -> Arc<SpaceTimeGrid> {
    Arc::new(SpaceTimeGrid::new(time, normal, tangential))
}

fn half_space_data(g: &wtrace::boundary::SeparableBoundary, time: &Axis, tang: Option<Axis>) -> BoundaryData {
    BoundaryData::half_space(if tang.is_some() { 2 } else { 1 }, time.clone(), tang, Arc::new(g.clone())).unwrap()
}

/// Mass 1 and vanishing derivative moments of the extension kernel.
fn kernel_identities() -> Verdict {
    let quad = QuadSpec::default();
    let mut worst: f64 = 0.0;
    for n in [1, 2] {
        let wn = w(2.0, n as f64 - 0.5, n);
        for x1 in [0.1, 0.5, 1.0, 2.0] {
            worst = worst.max((kernel_mass(x1, &wn, &quad).unwrap().value - 1.0).abs());
            for alpha in MultiIndex::all_up_to(2, n).into_iter().filter(|a| a.order() > 0) {
                worst = worst.max(kernel_derivative_moment(alpha, x1, n, &quad).unwrap().value.abs());
            }
        }
    }
    ensure(worst <= 1e-6, format!("max deviation {worst:.2e} (tol 1e-6)"))
}

/// `trace(extend(g)) = g` on the shipped bumps, read off the samples by
/// extrapolation to the boundary.
fn right_inverse() -> Verdict {
    let time = Axis::new(-2.0, 2.0, 81).unwrap();
    let err_at = |cells: usize| -> f64 {
        let gr = grid(time.clone(), GradedGrid::half_line(1.0, cells, 3.0, QuadRule::Midpoint).unwrap(), None);
        shipped_bumps(1)
            .iter()
            .map(|b| {
                let g = half_space_data(b, &time, None);
                let (u, _) = extend_with_flux(&g, true, gr.clone(), ExtensionSpec::default()).unwrap();
                let tr = trace_restrict(&u.without_field(), true).unwrap();
                tr.values(0).iter().zip(g.values(0)).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
            })
            .fold(0.0, f64::max)
    };
    let (e0, e1) = (err_at(16), err_at(32));
    ensure(e0 <= 1e-3 && e1 <= 0.5 * e0, format!("max error {e0:.2e} -> {e1:.2e} under refinement (tol 1e-3, halving)"))
}

/// Interior `|u_t - Delta u|` of extensions, order over three doublings.
fn heat_residual_order() -> Verdict {
    let spec = ExtensionSpec { panel_order: 12, h_max: 0.02, ..ExtensionSpec::default() };
    let bumps = shipped_bumps(1);
    let mut hs = Vec::new();
    let mut rs = Vec::new();
    for k in 2..6 {
        let time = Axis::new(0.7, 1.3, 10 * (1 << k) + 1).unwrap();
        let gr = grid(time.clone(), GradedGrid::half_line(1.0, 8 << k, 2.0, QuadRule::Midpoint).unwrap(), None);
        let r = bumps
            .iter()
            .take(5)
            .map(|b| {
                let g = half_space_data(b, &time, None);
                let (u, _) = extend_with_flux(&g, false, gr.clone(), spec).unwrap();
                heat_residual(&u.without_field()).unwrap()
            })
            .fold(0.0, f64::max);
        hs.push(1.0 / (1 << k) as f64);
        rs.push(r);
    }
    let slope = fit_slope(&hs, &rs);
    let table: Vec<String> = rs.iter().map(|r| format!("{r:.2e}")).collect();
    ensure(slope >= 1.8, format!("residuals [{}], order {slope:.2} (min 1.8)", table.join(", ")))
}

/// Residual of the boundary representation identity.
fn representation_identity() -> Verdict {
    let eps = 0.25;
    let samples: Vec<(f64, f64)> = (0..5).map(|i| (-0.4 + 0.2 * i as f64, 0.0)).collect();
    let run = |f: &SeparableField, spec: &ReprSpec| representation_residual_fields(f, &f.flux().unwrap(), eps, &samples, spec).unwrap().max;
    let spec = ReprSpec::default();
    let (mut a1, mut b1) = (0.0f64, 0.0f64);
    for f in representation_battery(1, 10, 3) {
        a1 = a1.max(run(&f, &spec));
        b1 = b1.max(run(&f, &spec.refined(1)));
    }
    let smoke = &representation_battery(2, 1, 3)[0];
    let spec2 = ReprSpec { nodes: 24, ..ReprSpec::default() };
    let samples2 = &samples[1..4];
    let run2 = |spec: &ReprSpec| representation_residual_fields(smoke, &smoke.flux().unwrap(), eps, samples2, spec).unwrap().max;
    let (a2, b2) = (run2(&spec2), run2(&spec2.refined(1)));
    ensure(
        a1 <= 1e-4 && b1 < a1 && a2 <= 1e-3 && b2 < a2,
        format!("n=1: {a1:.2e} -> {b1:.2e} (tol 1e-4); n=2 smoke: {a2:.2e} -> {b2:.2e} (tol 1e-3)"),
    )
}

fn sample_with_flux(f: &SeparableField, gr: &Arc<SpaceTimeGrid>) -> (GridFunction, TimeDerivativeRep) {
    let rep = TimeDerivativeRep::flux_from_fields(gr.clone(), &f.flux().unwrap()).unwrap();
    let field: Arc<dyn Field> = Arc::new(f.clone());
    (GridFunction::sample(gr.clone(), field).unwrap(), rep)
}

fn trace_grid(n: usize, k: u32) -> Arc<SpaceTimeGrid> {
    let f = 1usize << k;
    if n == 1 {
        grid(Axis::new(-2.0, 2.0, 40 * f + 1).unwrap(), GradedGrid::half_line(4.0, 16 * f, 2.0, QuadRule::Gauss2).unwrap(), None)
    } else {
        grid(
            Axis::new(-2.0, 2.0, 20 * f + 1).unwrap(),
            GradedGrid::half_line(4.0, 8 * f, 2.0, QuadRule::Gauss2).unwrap(),
            Some(Axis::new(-3.0, 3.0, 16 * f + 1).unwrap()),
        )
    }
}

/// Trace inequality ratio over boundary-hugging functions: drift of the
/// maximum between the two finest resolutions.
fn trace_constant() -> Verdict {
    let cases = [(2.0, 0.5, 1), (2.0, 1.5, 1), (3.0, 0.5, 1), (2.0, 1.5, 2)];
    let mut lines = Vec::new();
    let mut ok = true;
    for (p, theta, n) in cases {
        let wp = w(p, theta, n);
        let battery = boundary_hugging(n, 20, 1, (0.05, 0.5));
        let report = |k: u32| {
            let gr = trace_grid(n, k);
            let seminorm = SeminormSpec::default().refined(k);
            let entries: Vec<RatioEntry> = battery
                .iter()
                .enumerate()
                .map(|(i, f)| {
                    let (u, rep) = sample_with_flux(f, &gr);
                    trace_ratio_entry(format!("u{i}"), &u, &rep, &wp, &seminorm).unwrap()
                })
                .collect();
            RatioReport::from_entries(entries)
        };
        let (coarse, fine) = (report(1), report(2));
        let drift = coarse.drift(&fine);
        ok &= drift < 0.1;
        lines.push(format!("({p},{theta},n={n}) max {:.4} drift {:.2}%", fine.max, 100.0 * drift));
    }
    ensure(ok, lines.join("; "))
}

/// Extension ratio for gamma = 1, 2: drift between two resolutions and
/// gamma monotonicity per function.
fn extension_constant() -> Verdict {
    let battery = random_boundary(1, 20, 2);
    let time = Axis::new(-2.0, 2.0, 41).unwrap();
    let params = [w(2.0, 0.5, 1), w(2.0, 1.5, 1), w(3.0, 0.5, 1)];
    // ratios[level][param][gamma - 1][member]
    let mut ratios = vec![vec![vec![Vec::new(); 2]; params.len()]; 2];
    for (level, cells) in [32, 64].into_iter().enumerate() {
        let gr = grid(time.clone(), GradedGrid::half_line(2.0, cells, 2.0, QuadRule::Gauss2).unwrap(), None);
        let seminorm = SeminormSpec::default().refined(level as u32);
        for b in &battery {
            let g = half_space_data(b, &time, None);
            let (u, rep) = extend_with_flux(&g, true, gr.clone(), ExtensionSpec::default()).unwrap();
            for (j, wp) in params.iter().enumerate() {
                let den = slobodeckij_norm(&g, wp, &seminorm).unwrap().total;
                for gamma in [1, 2] {
                    let num = tilde_norm(&u, Some(&rep), wp, gamma).unwrap().total;
                    ratios[level][j][gamma - 1].push(num / den);
                }
            }
        }
    }
    let max = |v: &[f64]| v.iter().cloned().fold(f64::MIN, f64::max);
    let mut ok = true;
    let mut lines = Vec::new();
    for (j, wp) in params.iter().enumerate() {
        let mut part = format!("({},{})", wp.p(), wp.theta());
        for (gamma, (coarse, fine)) in ratios[0][j].iter().zip(&ratios[1][j]).enumerate() {
            let (c, f) = (max(coarse), max(fine));
            let drift = (c - f).abs() / f;
            ok &= drift < 0.1;
            part += &format!(" g{}: {f:.3} drift {:.2}%", gamma + 1, 100.0 * drift);
        }
        let violations = (0..battery.len()).filter(|&i| ratios[1][j][1][i] < ratios[1][j][0][i]).count();
        ok &= violations == 0;
        part += &format!(" monotone violations {violations}");
        lines.push(part);
    }
    ensure(ok, lines.join("; "))
}

/// Adaptive Simpson on `[a, b]`.
fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            return left + right + (left + right - whole) / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    rec(f, a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), tol, 50)
}

/// Hardy ratio of `x e^{-x}` against the quadrature oracle, and the
/// boundary-vanishing battery below one constant.
fn hardy() -> Verdict {
    let wp = w(2.0, 0.5, 1);
    // oracle: adaptive quadrature of both integrals, after x = s^2 to remove the x^{-1/2}
    let num = simpson(&|s: f64| 2.0 * s.powi(4) * (-2.0 * s * s).exp(), 0.0, 12.0, 1e-13);
    let den = simpson(&|s: f64| 2.0 * s.powi(4) * (1.0 - s * s).powi(2) * (-2.0 * s * s).exp(), 0.0, 12.0, 1e-13);
    let oracle = num / den;
    let gr = Arc::new(SpaceTimeGrid::spatial(GradedGrid::half_line(40.0, 800, 3.0, QuadRule::Midpoint).unwrap()));
    let xexp: Arc<dyn Field> = Arc::new(SeparableField::static_1d(Profile::poly_exp(vec![0.0, 1.0], 1.0)));
    let h = hardy_ratio(&GridFunction::sample(gr, xexp).unwrap(), &wp).unwrap().ratio;
    let wide = Arc::new(SpaceTimeGrid::spatial(GradedGrid::half_line(120.0, 1600, 3.0, QuadRule::Midpoint).unwrap()));
    let worst = hardy_battery(20, 4)
        .into_iter()
        .map(|f| hardy_ratio(&GridFunction::sample(wide.clone(), Arc::new(f)).unwrap(), &wp).unwrap().ratio)
        .fold(0.0, f64::max);
    let bound = hardy_constant(&wp);
    let rel = (h - oracle).abs() / oracle;
    ensure(
        rel < 0.01 && (oracle - 1.455).abs() < 0.01 * 1.455 && worst < bound,
        format!("x e^-x: {h:.5} vs oracle {oracle:.5} ({:.3}%); battery max {worst:.3} < {bound}", 100.0 * rel),
    )
}

/// Manufactured convergence, lifting against the direct solve, estimate
/// ratio drift; both forms.
fn bvp_checks() -> Verdict {
    let wp = w(2.0, 0.5, 1);
    let mut ok = true;
    let mut lines = Vec::new();
    for form in [BvpForm::Nondivergence, BvpForm::Divergence] {
        let [(ps, exact_s), (pt, exact_t)] = manufactured::convergence_pair(form, wp);
        let hs: Vec<f64> = (0..3).map(|k| 1.0 / (16 << k) as f64).collect();
        let es: Vec<f64> = (0..3).map(|k| bvp::solve(&ps, &BvpMesh::new(16 << k, 4).unwrap()).unwrap().nodal.max_error(exact_s)).collect();
        let ts: Vec<f64> = (0..3).map(|k| 1.0 / (10 << k) as f64).collect();
        let et: Vec<f64> =
            (0..3).map(|k| bvp::solve(&pt, &BvpMesh::new(128, 10 << k).unwrap()).unwrap().nodal.max_error(exact_t)).collect();
        let (sx, st) = (fit_slope(&hs, &es), fit_slope(&ts, &et));
        ok &= sx >= 1.9 && st >= 0.9;

        let problems = bvp_battery(form, wp, 10, 11);
        let mesh = BvpMesh::new(32, 40).unwrap();
        let tol = 2.0 * (1.0 / 40.0 + 1.0 / (32.0f64 * 32.0));
        let fine = mesh.refined(2, 4);
        let seminorm = SeminormSpec::default();
        let mut lift = 0.0f64;
        let (mut coarse, mut finer) = (Vec::new(), Vec::new());
        for p in &problems {
            let direct = bvp::solve(p, &mesh).unwrap();
            let lifted = bvp::lift_and_solve(p, &mesh, ExtensionSpec::default()).unwrap();
            lift = lift.max(direct.nodal.max_diff(&lifted.nodal));
            coarse.push(bvp::estimate_report(&direct, p, &seminorm).unwrap());
            finer.push(bvp::estimate_report(&bvp::solve(p, &fine).unwrap(), p, &seminorm).unwrap());
        }
        let drift = RatioReport::from_entries(coarse).drift(&RatioReport::from_entries(finer));
        ok &= lift <= tol && drift < 0.1;
        lines.push(format!(
            "{form:?}: slopes (dt {st:.2}, dx {sx:.2}); lift-direct {lift:.1e} (tol {tol:.1e}); estimate drift {:.2}%",
            100.0 * drift
        ));
    }
    ensure(ok, lines.join("; "))
}

/// Two CLI runs with the same seed write byte-identical reports.
fn determinism() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let bin = env!("CARGO_BIN_EXE_wtrace");
    let mut compared = 0;
    for cmd in ["kernel-check", "trace-check", "bvp", "extend"] {
        let mut outs = Vec::new();
        for run in ["a", "b"] {
            let out = dir.path().join(format!("{cmd}-{run}"));
            let status = Command::new(bin).args([cmd, "--seed", "42", "--out"]).arg(&out).status().unwrap();
            if !status.success() {
                return Err(format!("{cmd} exited with {status}"));
            }
            outs.push(out);
        }
        let files = read_tree(&outs[0]);
        if files != read_tree(&outs[1]) {
            return Err(format!("{cmd}: reports differ"));
        }
        compared += files.len();
    }
    Ok(format!("{compared} report files byte-identical across runs"))
}

fn read_tree(root: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push((p.strip_prefix(root).unwrap().display().to_string(), std::fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("kernel identities", kernel_identities),
        ("right inverse", right_inverse),
        ("heat residual order", heat_residual_order),
        ("representation identity", representation_identity),
        ("trace constant drift", trace_constant),
        ("extension constant drift and monotonicity", extension_constant),
        ("hardy ratio", hardy),
        ("bvp convergence, lifting and estimates", bvp_checks),
        ("cli determinism", determinism),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let verdict = check();
        let secs = start.elapsed().as_secs_f64();
        match verdict {
            Ok(d) => println!("PASS [{}] {name}: {d} ({secs:.1} s)", i + 1),
            Err(d) => {
                failed += 1;
                println!("FAIL [{}] {name}: {d} ({secs:.1} s)", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
