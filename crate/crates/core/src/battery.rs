//! Seeded test-function batteries shared by the checks and the CLI.
//!
//! All randomness goes through `ChaCha8Rng::seed_from_u64(seed)`, so a
//! battery is a pure function of its arguments.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::boundary::SeparableBoundary;
use crate::bvp::{BvpForm, BvpProblem};
use crate::field::SeparableField;
use crate::params::WeightParams;
use crate::profile::Profile;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn log_uniform(r: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (r.random_range(lo.ln()..hi.ln())).exp()
}

/// Ten fixed boundary bumps in time (Gaussian in `x'` when `n = 2`),
/// supported in `(-1.5, 1.5)`.
pub fn shipped_bumps(n: usize) -> Vec<SeparableBoundary> {
    (0..10)
        .map(|k| {
            let center = -0.9 + 0.2 * k as f64;
            let radius = 0.35 + 0.05 * (k % 4) as f64;
            let tang = (n == 2).then(|| Profile::gaussian(-0.5 + 0.1 * k as f64, 0.3 + 0.02 * k as f64));
            SeparableBoundary::new(1.0 + 0.1 * k as f64, Profile::bump(center, radius), tang)
        })
        .collect()
}

/// Random boundary bumps: time bump with centre in `[-1, 1]` and radius in
/// `[0.3, 0.8]`; Gaussian in `x'` with width in `[0.2, 0.6]` for `n = 2`.
pub fn random_boundary(n: usize, size: usize, seed: u64) -> Vec<SeparableBoundary> {
    let mut r = rng(seed);
    (0..size)
        .map(|_| {
            let amp = r.random_range(0.5..2.0);
            let time = Profile::bump(r.random_range(-1.0..1.0), r.random_range(0.3..0.8));
            let tang = (n == 2).then(|| Profile::gaussian(r.random_range(-1.0..1.0), r.random_range(0.2..0.6)));
            SeparableBoundary::new(amp, time, tang)
        })
        .collect()
}

/// Boundary-hugging functions `a T(t) X(x1) Y(x')`: `X` a Gaussian centred at
/// 0 with log-uniform width in `[sigma_min, sigma_max]`, `T` a time bump,
/// `Y` a Gaussian in `x'`.
pub fn boundary_hugging(n: usize, size: usize, seed: u64, sigma: (f64, f64)) -> Vec<SeparableField> {
    let mut r = rng(seed);
    (0..size)
        .map(|_| {
            let amp = r.random_range(0.5..2.0);
            let time = Profile::bump(r.random_range(-1.0..1.0), r.random_range(0.3..0.8));
            let normal = Profile::gaussian(0.0, log_uniform(&mut r, sigma.0, sigma.1));
            let tang = (n == 2).then(|| Profile::gaussian(r.random_range(-1.0..1.0), r.random_range(0.2..0.6)));
            SeparableField::new(amp, time, normal, tang)
        })
        .collect()
}

/// Smooth compactly supported functions for the representation identity:
/// time bump, Gaussian in `x1` of width in `[0.2, 0.5]`, Gaussian in `x'`.
pub fn representation_battery(n: usize, size: usize, seed: u64) -> Vec<SeparableField> {
    let mut r = rng(seed);
    (0..size)
        .map(|_| {
            let time = Profile::bump(r.random_range(-0.3..0.3), r.random_range(0.5..0.9));
            let normal = Profile::gaussian(r.random_range(-0.2..0.2), r.random_range(0.2..0.5));
            let tang = (n == 2).then(|| Profile::gaussian(r.random_range(-0.3..0.3), r.random_range(0.3..0.6)));
            SeparableField::new(r.random_range(0.5..2.0), time, normal, tang)
        })
        .collect()
}

/// Static functions vanishing at `x1 = 0`: `x (1 + c x) e^{-a x}` and
/// `x^2 e^{-a x}`.
pub fn hardy_battery(size: usize, seed: u64) -> Vec<SeparableField> {
    let mut r = rng(seed);
    (0..size)
        .map(|k| {
            let rate = r.random_range(0.5..3.0);
            let coeffs = if k % 2 == 0 { vec![0.0, 1.0, r.random_range(-0.3..2.0)] } else { vec![0.0, 0.0, 1.0] };
            SeparableField::static_1d(Profile::poly_exp(coeffs, rate))
        })
        .collect()
}

/// Random zero-compatible problems on `(0, 1) x (0, 1)`: a smooth source
/// and time bumps at each endpoint.
pub fn bvp_battery(form: BvpForm, params: WeightParams, size: usize, seed: u64) -> Vec<BvpProblem> {
    let mut r = rng(seed);
    (0..size)
        .map(|_| {
            let (a, k, phase) = (r.random_range(-2.0..2.0), r.random_range(1.0..4.0), r.random_range(0.0..3.0));
            let gl = Profile::bump(r.random_range(0.35..0.65), r.random_range(0.2..0.3));
            let gr = Profile::bump(r.random_range(0.35..0.65), r.random_range(0.2..0.3));
            let (al, ar) = (r.random_range(-1.5..1.5), r.random_range(-1.5..1.5));
            let src = move |t: f64, x: f64| a * t * (k * std::f64::consts::PI * x + phase).sin();
            let p = BvpProblem::heat(form, 1.0, params).with_boundary(move |t| al * gl.value(t), move |t| ar * gr.value(t));
            match form {
                BvpForm::Nondivergence => p.with_f(src),
                BvpForm::Divergence => p.with_f1(src),
            }
        })
        .collect()
}
