use thiserror::Error;

/// Errors reported by the solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid field: {0}")]
    InvalidField(String),

    /// Both ends of a shooting bracket fall in the same spectral band.
    #[error("invalid bracket [{lo}, {hi}]: both ends classify with {band} states above")]
    InvalidBracket { lo: f64, hi: f64, band: usize },

    /// Bisection converged onto a state with the wrong node count.
    #[error("converged to a state with {found} nodes, expected {expected}")]
    WrongState { expected: usize, found: usize },

    #[error("no shooting bracket found for n = {n}")]
    NoBracket { n: usize },

    #[error("solver did not converge: {0}")]
    NotConverged(String),

    /// The nonlinear corrector moved the potential too far within one step.
    #[error("step rejected at dt = {dt:e} (relative potential change {change:.3}); try dt = {suggested_dt:e}")]
    StepRejected { dt: f64, suggested_dt: f64, change: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
