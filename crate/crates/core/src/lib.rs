//! Weighted parabolic Sobolev norms on half-spaces and the unit interval,
//! the heat-kernel extension operator and its trace, and a 1-D parabolic
//! solver with non-zero Dirichlet data.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod battery;
pub mod boundary;
pub mod bvp;
pub mod cli;
pub mod config;
pub mod domain;
pub mod error;
pub mod fd;
pub mod field;
pub mod grid;
pub mod heat_ext;
pub mod jet;
pub mod norms;
pub mod params;
pub mod profile;
pub mod quad;
pub mod report;
pub mod trace_repr;

pub use domain::{rho, Domain, DomainKind};
pub use error::{Error, Result};
pub use params::{make_weight_params, WeightParams};

/// Version tag written into every JSON report.
pub const SCHEMA_VERSION: &str = "1.0";
