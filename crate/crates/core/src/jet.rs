//! Truncated Taylor arithmetic for exact low-order derivatives of smooth
//! compositions (cutoffs, bumps).

use std::ops::{Add, Mul, Neg, Sub};

/// Number of stored Taylor coefficients (derivatives 0..=5).
pub const JET_LEN: usize = 6;

/// `c[k] = f^{(k)}(x0) / k!`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub c: [f64; JET_LEN],
}

impl Jet {
    pub fn constant(v: f64) -> Self {
        let mut c = [0.0; JET_LEN];
        c[0] = v;
        Self { c }
    }

    /// The identity map expanded at `x0`.
    pub fn variable(x0: f64) -> Self {
        let mut c = [0.0; JET_LEN];
        c[0] = x0;
        c[1] = 1.0;
        Self { c }
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    /// `k`-th derivative.
    pub fn derivative(&self, k: usize) -> f64 {
        let fact: f64 = (1..=k).map(|i| i as f64).product();
        self.c[k] * fact
    }

    pub fn derivatives(&self) -> [f64; JET_LEN] {
        let mut out = [0.0; JET_LEN];
        for (k, o) in out.iter_mut().enumerate() {
            *o = self.derivative(k);
        }
        out
    }

    pub fn scale(self, a: f64) -> Self {
        let mut c = self.c;
        c.iter_mut().for_each(|x| *x *= a);
        Self { c }
    }

    pub fn recip(self) -> Self {
        let a0 = self.c[0];
        let mut r = [0.0; JET_LEN];
        r[0] = 1.0 / a0;
        for k in 1..JET_LEN {
            let s: f64 = (1..=k).map(|j| self.c[j] * r[k - j]).sum();
            r[k] = -s / a0;
        }
        Self { c: r }
    }

    pub fn exp(self) -> Self {
        // e' = a' e  =>  k e_k = sum_{j=1}^k j a_j e_{k-j}
        let mut e = [0.0; JET_LEN];
        e[0] = self.c[0].exp();
        for k in 1..JET_LEN {
            let s: f64 = (1..=k).map(|j| j as f64 * self.c[j] * e[k - j]).sum();
            e[k] = s / k as f64;
        }
        Self { c: e }
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        let mut c = self.c;
        c.iter_mut().zip(o.c).for_each(|(a, b)| *a += b);
        Jet { c }
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        self + (-o)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        let mut c = [0.0; JET_LEN];
        for (i, &a) in self.c.iter().enumerate() {
            for (j, &b) in o.c.iter().enumerate().take(JET_LEN - i) {
                c[i + j] += a * b;
            }
        }
        Jet { c }
    }
}

/// `exp(-1/y)` for `y > 0`, zero otherwise.
fn smooth_step_jet(y: Jet) -> Jet {
    if y.value() <= 0.0 {
        Jet::constant(0.0)
    } else {
        (-y.recip()).exp()
    }
}

/// Smooth cutoff equal to 1 on `x <= 1` and 0 on `x >= 2`, as a jet at `x`.
pub fn cutoff_jet(x: f64) -> Jet {
    if x <= 1.0 {
        return Jet::constant(1.0);
    }
    if x >= 2.0 {
        return Jet::constant(0.0);
    }
    let v = Jet::variable(x);
    let a = smooth_step_jet(Jet::constant(2.0) - v);
    let b = smooth_step_jet(v - Jet::constant(1.0));
    a * (a + b).recip()
}

/// Derivatives 0..=5 of the cutoff at `x`.
pub fn cutoff_derivatives(x: f64) -> [f64; JET_LEN] {
    cutoff_jet(x).derivatives()
}

/// `exp(-1/(1-y^2))` on `|y| < 1`, as a jet.
pub fn bump_jet(y: f64) -> Jet {
    if y.abs() >= 1.0 {
        return Jet::constant(0.0);
    }
    let v = Jet::variable(y);
    (-(Jet::constant(1.0) - v * v).recip()).exp()
}
