use thiserror::Error;

/// Errors produced by the model, the integrator and the analysis routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The polar phase of an element is undefined at the origin of its plane.
    #[error("phase undefined at the origin of an element's phase plane")]
    PhaseUndefined,

    #[error("step size underflow at t = {t}")]
    StepSizeUnderflow { t: f64 },

    #[error("non-finite state at t = {t}")]
    Divergence { t: f64 },

    #[error("only {found} of {requested} section crossings before t = {t_end}")]
    SectionTimeout {
        found: usize,
        requested: usize,
        t_end: f64,
    },

    #[error("no periodic orbit confirmed within the time budget")]
    NotPeriodic,

    #[error("insufficient spikes for classification ({first} and {second})")]
    InsufficientData { first: usize, second: usize },

    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
