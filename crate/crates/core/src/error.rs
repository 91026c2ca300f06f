use thiserror::Error;

/// Failures raised by the numerical routines and the configuration layer.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("theta = {theta} outside the admissible window ({lo}, {hi})")]
    OutOfRangeTheta { theta: f64, lo: f64, hi: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("weight power {0} is not integrable at the boundary (needs > -1)")]
    NonIntegrableWeight(f64),

    #[error("bad interval [{a}, {b}]")]
    BadInterval { a: f64, b: f64 },

    #[error("derivatives of order {requested} unavailable (at most {available})")]
    MissingDerivatives { requested: usize, available: usize },

    #[error("gamma = 1 tilde norm needs a flux representation of u_t")]
    MissingRepresentation,

    #[error("function does not vanish on the boundary (max |u| = {0:e})")]
    NonzeroBoundaryValue(f64),

    #[error("operation needs n = {expected}, got n = {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("derivative order {0} unsupported (at most 3)")]
    UnsupportedOrder(usize),

    #[error("grid has no boundary node and extrapolation is disabled")]
    NoBoundaryAccess,

    #[error("degenerate denominator in ratio")]
    DegenerateDenominator,

    #[error("singular linear system (pivot {pivot:e} at row {row})")]
    SingularSystem { row: usize, pivot: f64 },

    #[error("coefficient bound violated: {0}")]
    CoefficientBoundViolated(String),

    #[error("config: {0}")]
    Config(String),

    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
