use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Integrability exponent `p`, weight power `theta` and dimension `n`,
/// together with the boundary smoothness `s = (p - theta + n - 1) / p`.
///
/// Construction enforces `n - 1 < theta < n - 1 + p`, which is exactly the
/// range where `0 < s < 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightParams {
    p: f64,
    theta: f64,
    n: usize,
    s: f64,
}

impl WeightParams {
    pub fn new(p: f64, theta: f64, n: usize) -> Result<Self> {
        if !(p.is_finite() && p > 1.0) {
            return Err(Error::InvalidParameter(format!("p must exceed 1, got {p}")));
        }
        if n != 1 && n != 2 {
            return Err(Error::InvalidParameter(format!("n must be 1 or 2, got {n}")));
        }
        let lo = n as f64 - 1.0;
        let hi = lo + p;
        if !(theta.is_finite() && theta > lo && theta < hi) {
            return Err(Error::OutOfRangeTheta { theta, lo, hi });
        }
        let s = (p - theta + lo) / p;
        Ok(Self { p, theta, n, s })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    /// Power of `rho` in the measure of `L_{p, theta + shift}`.
    pub fn rho_power(&self, shift: f64) -> f64 {
        self.theta + shift - self.n as f64
    }

    /// Exponent `s p / 2` of the time difference quotient.
    pub fn time_order(&self) -> f64 {
        0.5 * self.s * self.p
    }
}

pub fn make_weight_params(p: f64, theta: f64, n: usize) -> Result<WeightParams> {
    WeightParams::new(p, theta, n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn printed_examples() {
        let w = make_weight_params(2.0, 0.5, 1).unwrap();
        assert!((w.s() - 0.75).abs() < 1e-15);
        let w = make_weight_params(3.0, 2.0, 2).unwrap();
        assert!((w.s() - 2.0 / 3.0).abs() < 1e-15);
        assert!(matches!(make_weight_params(2.0, 2.1, 1), Err(Error::OutOfRangeTheta { .. })));
    }

    #[test]
    fn window_endpoints_rejected() {
        assert!(WeightParams::new(2.0, 0.0, 1).is_err());
        assert!(WeightParams::new(2.0, 2.0, 1).is_err());
        assert!(WeightParams::new(2.0, 1.0, 2).is_err());
        assert!(WeightParams::new(1.0, 0.5, 1).is_err());
        assert!(WeightParams::new(2.0, 0.5, 3).is_err());
    }

    #[test]
    fn s_decreases_in_theta() {
        for &(p, n) in &[(2.0, 1usize), (3.0, 1), (2.0, 2), (4.5, 2)] {
            let lo = n as f64 - 1.0;
            let mut prev = 1.0;
            for k in 1..200 {
                let theta = lo + p * k as f64 / 200.0;
                let s = WeightParams::new(p, theta, n).unwrap().s();
                assert!(s > 0.0 && s < 1.0);
                assert!(s < prev);
                prev = s;
            }
        }
    }
}
