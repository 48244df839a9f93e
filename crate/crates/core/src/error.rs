use thiserror::Error;

/// Errors raised while building or evaluating equations and checks.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("kappa must be positive, got {0}")]
    NonPositiveKappa(f64),

    #[error("deviation `{name}` is not retarded at t = {t}: maps to {value}")]
    NotRetarded { name: String, t: f64, value: f64 },

    #[error("coefficient `{name}` is negative at t = {t}: {value}")]
    NegativeCoefficient { name: String, t: f64, value: f64 },

    #[error("kernel mass is negative at t = {t}: {mass}")]
    NegativeMass { t: f64, mass: f64 },

    #[error("kernel node {node} outside [{lower}, {t}]")]
    NodeOutOfRange { t: f64, node: f64, lower: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-finite right-hand side at t = {t}")]
    NonFinite { t: f64 },

    #[error("equation shape does not fit this check: {0}")]
    ShapeMismatch(String),

    #[error("unknown theorem id `{0}`")]
    UnknownTheorem(String),

    #[error("window too short at t = {t}: reached {reached} of {level} down to s = {lowest}")]
    WindowTooShort {
        t: f64,
        level: f64,
        reached: f64,
        lowest: f64,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
