//! Weighted norms `L_{p,theta}`, integer-order `H^k_{p,theta}`, the
//! parabolic tilde norms, and Hardy-type ratios.

use crate::error::{Error, Result};
use crate::field::{GridFunction, MultiIndex, TimeDerivativeRep};
use crate::grid::{GradedProfile, SpaceTimeGrid};
use crate::params::WeightParams;
use crate::report::{NormReport, RatioEntry};

fn check_dim(grid: &SpaceTimeGrid, w: &WeightParams) -> Result<()> {
    if grid.dim() != w.n() {
        return Err(Error::DimensionMismatch { expected: w.n(), got: grid.dim() });
    }
    Ok(())
}

/// `\int |v|^p rho^power` over the grid.
pub fn weighted_pth_power(grid: &SpaceTimeGrid, values: &[f64], p: f64, power: f64) -> Result<f64> {
    let weights = grid.weights_for_power(power)?;
    Ok(weights.iter().zip(values).map(|(w, v)| if *w == 0.0 { 0.0 } else { w * v.abs().powf(p) }).sum())
}

/// `(\int\int |u|^p rho^{theta-n} dx dt)^{1/p}`.
pub fn lp_theta_norm(u: &GridFunction, w: &WeightParams) -> Result<f64> {
    check_dim(u.grid(), w)?;
    Ok(weighted_pth_power(u.grid(), u.values(), w.p(), w.rho_power(0.0))?.powf(1.0 / w.p()))
}

/// `sum_{|alpha| <= k} ||rho^{|alpha|} D^{alpha+base} v||^p_{L_{p,theta+shift}}`,
/// where `v` is `u` or (with `time`) `u_t`.
fn sobolev_pth(
    u: &GridFunction,
    direct_ut: Option<&GridFunction>,
    time: bool,
    base: MultiIndex,
    k: usize,
    w: &WeightParams,
    theta_shift: f64,
) -> Result<f64> {
    let p = w.p();
    let mut sum = 0.0;
    for alpha in MultiIndex::all_up_to(k, w.n()) {
        let a = alpha.plus(base);
        let vals = match (time, direct_ut) {
            (false, _) => u.derivative_values(a)?,
            (true, Some(ut)) => ut.derivative_values(a)?,
            (true, None) => u.time_derivative_values(a)?,
        };
        let power = w.rho_power(theta_shift) + p * alpha.order() as f64;
        sum += weighted_pth_power(u.grid(), &vals, p, power)?;
    }
    Ok(sum)
}

/// `(sum_{|alpha| <= k} ||rho^{|alpha|} D^alpha u||^p_{L_{p,theta}})^{1/p}`, `k <= 3`.
pub fn weighted_sobolev_norm(u: &GridFunction, w: &WeightParams, k: usize) -> Result<f64> {
    check_dim(u.grid(), w)?;
    if k > 3 {
        return Err(Error::UnsupportedOrder(k));
    }
    Ok(sobolev_pth(u, None, false, MultiIndex::ZERO, k, w, 0.0)?.powf(1.0 / w.p()))
}

/// `||Du||` in `H^k_{p,theta}` with the convention `||Du||^p = sum_i ||D_i u||^p`.
pub fn gradient_sobolev_norm(u: &GridFunction, w: &WeightParams, k: usize) -> Result<f64> {
    check_dim(u.grid(), w)?;
    let mut s = 0.0;
    for i in 0..w.n() {
        s += sobolev_pth(u, None, false, MultiIndex::unit(i), k, w, 0.0)?;
    }
    Ok(s.powf(1.0 / w.p()))
}

/// Parabolic norm of order `gamma` in {1, 2, 3}.
///
/// * gamma = 1: `||u|| + ||Du||` in `L_{p,theta}` plus an upper bound on
///   `||u_t||_{H^{-1}_{p,theta+p}}`: the smaller of `sum_i ||g_i||_{L_{p,theta}}`
///   (flux form) and `||u_t||_{L_{p,theta+p}}`. Needs `ut_rep`.
/// * gamma >= 2: `||u||_{H^{gamma-1}} + ||Du||_{H^{gamma-1}} + ||u_t||_{H^{gamma-2}_{p,theta+p}}`.
///   `u_t` is read from `TimeDerivativeRep::Direct` when given, otherwise
///   from `u` itself.
pub fn tilde_norm(u: &GridFunction, ut_rep: Option<&TimeDerivativeRep>, w: &WeightParams, gamma: usize) -> Result<NormReport> {
    check_dim(u.grid(), w)?;
    let p = w.p();
    let root = |x: f64| x.powf(1.0 / p);
    let mut rep = NormReport::new(u.grid().hash());
    match gamma {
        1 => {
            // ||u_t||_{H^-1_{p,theta+p}} is bounded above both by sum_i ||g_i||_{L_{p,theta}}
            // for any flux with u_t = D_i g_i and by ||u_t||_{L_{p,theta+p}}; report the smaller.
            let ut_rep = ut_rep.ok_or(Error::MissingRepresentation)?;
            let direct = match ut_rep {
                TimeDerivativeRep::Direct(d) => Some(d),
                TimeDerivativeRep::Flux(_) => None,
            };
            rep.push("u", lp_theta_norm(u, w)?, false);
            rep.push("du", gradient_sobolev_norm(u, w, 0)?, false);
            let direct_bound = root(sobolev_pth(u, direct, true, MultiIndex::ZERO, 0, w, p)?);
            let flux_bound = match ut_rep.flux() {
                Some(flux) => {
                    if flux.len() != w.n() {
                        return Err(Error::DimensionMismatch { expected: w.n(), got: flux.len() });
                    }
                    let mut g = 0.0;
                    for gi in flux {
                        g += lp_theta_norm(gi, w)?;
                    }
                    Some(g)
                }
                None => None,
            };
            match flux_bound {
                Some(g) if g <= direct_bound => {
                    rep.push("ut", g, true);
                    rep.flag("ut: flux bound sum_i |g_i|_{L_p,theta} on the H^-1 norm");
                }
                _ => {
                    rep.push("ut", direct_bound, true);
                    rep.flag("ut: direct bound |u_t|_{L_p,theta+p} on the H^-1 norm");
                }
            }
        }
        2 | 3 => {
            let k = gamma - 1;
            let direct = match ut_rep {
                Some(TimeDerivativeRep::Direct(d)) => Some(d),
                _ => None,
            };
            rep.push("u", weighted_sobolev_norm(u, w, k)?, false);
            rep.push("du", gradient_sobolev_norm(u, w, k)?, false);
            let ut = sobolev_pth(u, direct, true, MultiIndex::ZERO, gamma - 2, w, p)?;
            rep.push("ut", root(ut), false);
        }
        other => return Err(Error::UnsupportedOrder(other)),
    }
    Ok(rep)
}

/// Sharp one-dimensional Hardy constant `(p / (theta - n + 1))^p` for the
/// ratio computed by [`hardy_ratio`].
pub fn hardy_constant(w: &WeightParams) -> f64 {
    (w.p() / (w.theta() - w.n() as f64 + 1.0)).powf(w.p())
}

/// `(\int |u|^p rho^{theta-n}) / (\int |Du|^p rho^{theta-n+p})` for `u`
/// vanishing on the boundary.
pub fn hardy_ratio(u: &GridFunction, w: &WeightParams) -> Result<RatioEntry> {
    check_dim(u.grid(), w)?;
    let mut bmax = u.boundary_values(false, true)?.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if matches!(u.grid().normal.profile(), GradedProfile::UnitInterval) {
        let r = u.boundary_values(true, true)?;
        bmax = r.iter().fold(bmax, |m, v| m.max(v.abs()));
    }
    if bmax >= 1e-10 {
        return Err(Error::NonzeroBoundaryValue(bmax));
    }
    let p = w.p();
    let num = weighted_pth_power(u.grid(), u.values(), p, w.rho_power(0.0))?;
    let mut den = 0.0;
    for i in 0..w.n() {
        den += weighted_pth_power(u.grid(), &u.derivative_values(MultiIndex::unit(i))?, p, w.rho_power(p))?;
    }
    Ok(RatioEntry::new("hardy", num, den))
}
