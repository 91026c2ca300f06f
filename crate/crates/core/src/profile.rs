//! One-dimensional building blocks for separable test fields.

use serde::{Deserialize, Serialize};

use crate::jet::{bump_jet, JET_LEN};
use crate::quad::gauss_legendre;

/// Probabilists' Hermite polynomial `He_k(z)`.
pub fn hermite_he(k: usize, z: f64) -> f64 {
    let (mut a, mut b) = (1.0, z);
    if k == 0 {
        return a;
    }
    for j in 1..k {
        let c = z * b - j as f64 * a;
        a = b;
        b = c;
    }
    b
}

/// `exp(-1/(1-y^2))` on `(-1, 1)`, zero outside.
pub fn bump1(y: f64) -> f64 {
    if y.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - y * y)).exp()
    }
}

/// Smooth scalar profile with derivatives and an upper tail integral.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Profile {
    /// `exp(-(x-c)^2 / (2 w^2))`.
    Gaussian { center: f64, width: f64 },
    /// `bump1((x-c)/r)`.
    Bump { center: f64, radius: f64 },
    /// `(sum_k a_k x^k) exp(-rate x)`; `rate = 0` gives plain polynomials.
    PolyExp { coeffs: Vec<f64>, rate: f64 },
}

impl Profile {
    pub fn gaussian(center: f64, width: f64) -> Self {
        Profile::Gaussian { center, width }
    }
    pub fn bump(center: f64, radius: f64) -> Self {
        Profile::Bump { center, radius }
    }
    pub fn poly_exp(coeffs: Vec<f64>, rate: f64) -> Self {
        Profile::PolyExp { coeffs, rate }
    }
    pub fn constant(c: f64) -> Self {
        Profile::PolyExp { coeffs: vec![c], rate: 0.0 }
    }

    /// Highest derivative order available.
    pub fn max_order(&self) -> usize {
        match self {
            Profile::Bump { .. } => JET_LEN - 1,
            _ => usize::MAX,
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        self.derivative(0, x)
    }

    /// `k`-th derivative at `x`; NaN beyond [`Profile::max_order`].
    pub fn derivative(&self, k: usize, x: f64) -> f64 {
        match self {
            Profile::Gaussian { center, width } => {
                let z = (x - center) / width;
                let g = (-0.5 * z * z).exp();
                if k == 0 {
                    return g;
                }
                let sign = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
                sign * hermite_he(k, z) * g / width.powi(k as i32)
            }
            Profile::Bump { center, radius } => {
                if k >= JET_LEN {
                    return f64::NAN;
                }
                let y = (x - center) / radius;
                if y.abs() >= 1.0 {
                    return 0.0;
                }
                bump_jet(y).derivative(k) / radius.powi(k as i32)
            }
            Profile::PolyExp { coeffs, rate } => {
                let d = poly_exp_derivative(coeffs, *rate, k);
                horner(&d, x) * (-rate * x).exp()
            }
        }
    }

    /// `\int_x^\infty f`, when finite.
    pub fn upper_tail(&self, x: f64) -> Option<f64> {
        match self {
            Profile::Gaussian { center, width } => {
                let z = (x - center) / (width * std::f64::consts::SQRT_2);
                Some(width * (0.5 * std::f64::consts::PI).sqrt() * libm::erfc(z))
            }
            Profile::Bump { center, radius } => {
                let (lo, hi) = (center - radius, center + radius);
                if x >= hi {
                    return Some(0.0);
                }
                let a = x.max(lo);
                let gl = gauss_legendre(12);
                let panels = 8;
                let h = (hi - a) / panels as f64;
                let mut s = 0.0;
                for j in 0..panels {
                    let p0 = a + j as f64 * h;
                    s += gl.integrate(p0, p0 + h, |y| self.value(y));
                }
                Some(s)
            }
            Profile::PolyExp { coeffs, rate } => {
                if coeffs.iter().all(|&c| c == 0.0) {
                    return Some(0.0);
                }
                if *rate <= 0.0 {
                    return None;
                }
                // \int_x^\infty P e^{-r y} dy = e^{-r x} sum_k P^{(k)}(x) / r^{k+1}
                let mut p = coeffs.clone();
                let mut s = 0.0;
                let mut rk = *rate;
                while !p.is_empty() {
                    s += horner(&p, x) / rk;
                    p = poly_derivative(&p);
                    rk *= rate;
                }
                Some(s * (-rate * x).exp())
            }
        }
    }

    /// Interval outside which the profile is zero (or below 1e-14).
    pub fn support(&self) -> Option<(f64, f64)> {
        match self {
            Profile::Gaussian { center, width } => Some((center - 8.0 * width, center + 8.0 * width)),
            Profile::Bump { center, radius } => Some((center - radius, center + radius)),
            Profile::PolyExp { .. } => None,
        }
    }

    /// Profile of `x -> f(a x)`.
    pub fn dilated(&self, a: f64) -> Self {
        match self {
            Profile::Gaussian { center, width } => Profile::Gaussian { center: center / a, width: width / a },
            Profile::Bump { center, radius } => Profile::Bump { center: center / a, radius: radius / a },
            Profile::PolyExp { coeffs, rate } => {
                Profile::PolyExp { coeffs: coeffs.iter().enumerate().map(|(k, c)| c * a.powi(k as i32)).collect(), rate: rate * a }
            }
        }
    }
}

fn horner(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &a| acc * x + a)
}

fn poly_derivative(c: &[f64]) -> Vec<f64> {
    c.iter().enumerate().skip(1).map(|(k, &a)| k as f64 * a).collect()
}

/// Coefficients of `Q` with `(P e^{-r x})^{(k)} = Q e^{-r x}`.
fn poly_exp_derivative(c: &[f64], rate: f64, k: usize) -> Vec<f64> {
    let mut p = c.to_vec();
    for _ in 0..k {
        let mut d = poly_derivative(&p);
        d.resize(p.len(), 0.0);
        for (di, pi) in d.iter_mut().zip(&p) {
            *di -= rate * pi;
        }
        p = d;
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fd(p: &Profile, k: usize, x: f64) -> f64 {
        let h = 1e-5;
        (p.derivative(k, x + h) - p.derivative(k, x - h)) / (2.0 * h)
    }

    #[test]
    fn hermite_values() {
        assert_eq!(hermite_he(0, 2.0), 1.0);
        assert_eq!(hermite_he(1, 2.0), 2.0);
        assert_eq!(hermite_he(2, 2.0), 3.0);
        assert_eq!(hermite_he(3, 2.0), 2.0);
    }

    #[test]
    fn derivatives_are_consistent() {
        let profiles = [
            Profile::gaussian(0.3, 0.2),
            Profile::bump(0.1, 0.7),
            Profile::poly_exp(vec![0.0, 1.0], 1.0),
            Profile::poly_exp(vec![1.0, -2.0, 0.5], 0.0),
        ];
        for p in &profiles {
            for k in 0..3 {
                for &x in &[-0.2, 0.15, 0.4, 0.55] {
                    let a = p.derivative(k + 1, x);
                    let b = fd(p, k, x);
                    assert!((a - b).abs() < 1e-5 * (1.0 + a.abs()), "{p:?} k={k} x={x}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn tails_match_quadrature() {
        let profiles = [Profile::gaussian(0.3, 0.2), Profile::bump(0.1, 0.7), Profile::poly_exp(vec![0.0, 1.0], 1.0)];
        for p in &profiles {
            for &x in &[-0.5, 0.0, 0.35] {
                let t = p.upper_tail(x).unwrap();
                // independent oracle: composite Simpson on a long interval
                let (a, b) = (x, x + 60.0);
                let n = 600_000;
                let h = (b - a) / n as f64;
                let mut s = p.value(a) + p.value(b);
                for i in 1..n {
                    s += p.value(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
                }
                s *= h / 3.0;
                assert!((t - s).abs() < 1e-9, "{p:?} x={x}: {t} vs {s}");
            }
        }
        assert_eq!(Profile::constant(1.0).upper_tail(0.0), None);
    }

    proptest! {
        #[test]
        fn dilation_is_composition(a in 0.3..3.0f64, x in -1.0..1.0f64) {
            let p = Profile::gaussian(0.2, 0.3);
            prop_assert!((p.dilated(a).value(x) - p.value(a * x)).abs() < 1e-13);
            let q = Profile::poly_exp(vec![0.5, 1.0, -0.25], 0.7);
            prop_assert!((q.dilated(a).value(x) - q.value(a * x)).abs() < 1e-12);
        }
    }
}
