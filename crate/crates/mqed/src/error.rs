//! Error type shared across all modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum MqedError {
    #[error("invalid atom model: {0}")]
    InvalidModel(String),

    #[error("unknown energy unit `{0}` (expected model, eV or J)")]
    UnknownUnit(String),

    #[error("pole in response function: transition {transition} resonant at omega = {omega}")]
    Pole { transition: String, omega: f64 },

    #[error("matrix element undefined on the energy shell: {0}")]
    EnergyShell(String),

    #[error("basis size {size} exceeds cap {cap}")]
    BasisTooLarge { size: usize, cap: usize },

    #[error("degenerate unperturbed states {a} and {b} (relative gap {gap:.3e})")]
    Degeneracy { a: usize, b: usize, gap: f64 },

    #[error("quadrature did not converge: error estimate {estimate:.3e} above target {target:.3e}")]
    NonConvergence { estimate: f64, target: f64 },

    #[error("continuum path requires isotropic polarizability")]
    AnisotropicModel,

    #[error("config error: {0}")]
    Config(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, MqedError>;
