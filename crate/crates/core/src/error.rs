use thiserror::Error;

use crate::model::ProfileViolation;
use crate::problems::libsvm::LibsvmError;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("invalid regularity profile: {}", format_violations(.0))]
    Profile(Vec<ProfileViolation>),

    #[error("missing constant: {0}")]
    MissingConstant(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("two-timescale condition violated at t={t}: eta_x={eta_x} > eta_y={eta_y}")]
    TwoTimescale { t: usize, eta_x: f64, eta_y: f64 },

    #[error("non-finite iterate at t={t}")]
    NonFinite { t: usize },

    #[error("iterate diverged at t={t} (norm {norm:e})")]
    Diverged { t: usize, norm: f64 },

    #[error("oracle has no stochastic sampler")]
    MissingSampler,

    #[error("operation requires a strongly concave problem (mu>0 required)")]
    NotStronglyConcave,

    #[error("extragradient budget of {steps} steps exhausted (residual {residual:e})")]
    BudgetExhausted { steps: usize, residual: f64 },

    #[error(transparent)]
    Libsvm(#[from] LibsvmError),
}

fn format_violations(v: &[ProfileViolation]) -> String {
    v.iter()
        .map(|e| e.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}
