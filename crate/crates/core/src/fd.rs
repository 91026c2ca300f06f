//! Finite-difference weights on nonuniform point sets (Fornberg's
//! recursion) and derivative sampling along one axis of a tensor array.

use crate::error::{Error, Result};

/// Weights `w[k][j]` such that `f^{(k)}(z) ~ sum_j w[k][j] f(xs[j])` for
/// `k = 0..=m`.
pub fn fornberg(z: f64, xs: &[f64], m: usize) -> Vec<Vec<f64>> {
    let n = xs.len();
    let mut c = vec![vec![0.0; n]; m + 1];
    let mut c1 = 1.0;
    let mut c4 = xs[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - z;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// Stencil family: central width in the interior; near the ends a
/// one-sided stencil of `order + 2` points (second order accurate).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stencil {
    /// 5-point central, used for norms.
    Central5,
    /// 3-point central, used for PDE residuals.
    Central3,
}

impl Stencil {
    fn half_width(&self) -> usize {
        match self {
            Stencil::Central5 => 2,
            Stencil::Central3 => 1,
        }
    }
}

/// Highest derivative order computed by finite differences.
pub const MAX_FD_ORDER: usize = 2;

/// Index window and weights used for the derivative at point `i`.
fn stencil_at(xs: &[f64], i: usize, order: usize, stencil: Stencil) -> (usize, Vec<f64>) {
    let n = xs.len();
    let hw = stencil.half_width();
    let (lo, len) = if i >= hw && i + hw < n {
        (i - hw, 2 * hw + 1)
    } else {
        let len = (order + 2).min(n);
        let lo = if i < hw { 0 } else { n - len };
        (lo, len)
    };
    let w = fornberg(xs[i], &xs[lo..lo + len], order);
    (lo, w[order].clone())
}

/// Derivative of order `order` of samples `f` at the points `xs`.
pub fn derivative(xs: &[f64], f: &[f64], order: usize, stencil: Stencil) -> Result<Vec<f64>> {
    let mut out = vec![0.0; f.len()];
    derivative_along(xs, f, &mut out, 1, xs.len(), 1, order, stencil)?;
    Ok(out)
}

/// Differentiate a row-major array of shape `(outer, xs.len(), inner)`
/// along its middle axis.
#[allow(clippy::too_many_arguments)]
pub fn derivative_along(
    xs: &[f64],
    f: &[f64],
    out: &mut [f64],
    outer: usize,
    n: usize,
    inner: usize,
    order: usize,
    stencil: Stencil,
) -> Result<()> {
    if order > MAX_FD_ORDER {
        return Err(Error::MissingDerivatives { requested: order, available: MAX_FD_ORDER });
    }
    if n != xs.len() || f.len() != outer * n * inner || out.len() != f.len() {
        return Err(Error::InvalidParameter("finite-difference shape mismatch".into()));
    }
    if order == 0 {
        out.copy_from_slice(f);
        return Ok(());
    }
    if n < order + 2 {
        return Err(Error::InvalidParameter(format!("{n} points cannot carry a derivative of order {order}")));
    }
    let stencils: Vec<(usize, Vec<f64>)> = (0..n).map(|i| stencil_at(xs, i, order, stencil)).collect();
    for o in 0..outer {
        for (i, (lo, w)) in stencils.iter().enumerate() {
            for q in 0..inner {
                let mut s = 0.0;
                for (j, wj) in w.iter().enumerate() {
                    s += wj * f[(o * n + lo + j) * inner + q];
                }
                out[(o * n + i) * inner + q] = s;
            }
        }
    }
    Ok(())
}
