use thiserror::Error;

pub type Result<T, E = MetriplexError> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetriplexError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid phase state: {0}")]
    InvalidState(String),

    #[error("non-finite values in {0}")]
    NonFinite(String),

    #[error("{what} violated: defect {defect:.3e} exceeds tolerance {tolerance:.3e}")]
    SymmetryViolation { what: String, defect: f64, tolerance: f64 },

    #[error("metric is not invertible (smallest singular value {smallest_singular_value:.3e})")]
    SingularMetric { smallest_singular_value: f64 },

    #[error("gradient of the generator vanishes at the evaluation point (|dS| = {norm:.3e})")]
    VanishingGradient { norm: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{0} is not a Casimir of the Poisson tensor: max |J dS| = {1:.3e}")]
    NotCasimir(String, f64),

    #[error("mode {mode} needs a {component}, which the system does not provide")]
    MissingComponent { mode: String, component: String },

    #[error("integration diverged at t = {time}: last valid state {last_state:?}")]
    Diverged { time: f64, last_state: Vec<f64> },
}
