use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    #[error("particles coincide: |x1 - x2| = {separation:e} below floor {floor:e} at t = {t}")]
    CoincidentParticles { separation: f64, floor: f64, t: f64 },

    #[error("step budget of {max_steps} exhausted at t = {t} before any stop condition fired")]
    StepBudgetExhausted { max_steps: u64, t: f64 },

    #[error("well amplitude is zero; in-well offset is undefined")]
    WellAbsent,

    #[error("need at least 4 mean crossings to estimate a frequency, found {found}")]
    InsufficientOscillations { found: usize },

    #[error("system escaped the well at t = {t} instead of oscillating")]
    Escaped { t: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
