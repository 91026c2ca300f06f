use serde::{Deserialize, Serialize};

/// Spatial domain of a computation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DomainKind {
    HalfSpace { n: usize },
    UnitInterval,
}

/// A domain together with the truncation box used for quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub kind: DomainKind,
    pub x1_max: f64,
    pub xp_max: f64,
    pub t_min: f64,
    pub t_max: f64,
}

impl Domain {
    pub fn half_space(n: usize) -> Self {
        Self { kind: DomainKind::HalfSpace { n }, x1_max: 4.0, xp_max: 4.0, t_min: -4.0, t_max: 4.0 }
    }

    pub fn unit_interval(t_min: f64, t_max: f64) -> Self {
        Self { kind: DomainKind::UnitInterval, x1_max: 1.0, xp_max: 0.0, t_min, t_max }
    }

    pub fn with_x1_max(mut self, x1_max: f64) -> Self {
        self.x1_max = x1_max;
        self
    }

    pub fn with_xp_max(mut self, xp_max: f64) -> Self {
        self.xp_max = xp_max;
        self
    }

    pub fn with_time_window(mut self, t_min: f64, t_max: f64) -> Self {
        self.t_min = t_min;
        self.t_max = t_max;
        self
    }

    pub fn dim(&self) -> usize {
        match self.kind {
            DomainKind::HalfSpace { n } => n,
            DomainKind::UnitInterval => 1,
        }
    }

    pub fn rho(&self, x: &[f64]) -> f64 {
        match self.kind {
            DomainKind::HalfSpace { .. } => x[0].max(0.0),
            DomainKind::UnitInterval => x[0].min(1.0 - x[0]).max(0.0),
        }
    }
}

/// Distance to the boundary; boundary points give 0.
pub fn rho(domain: &Domain, x: &[f64]) -> f64 {
    domain.rho(x)
}
