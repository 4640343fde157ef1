use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("state must be strictly positive, got {0}")]
    NonPositiveState(f64),

    #[error("level {level} lies below the current state {state}")]
    LevelBelowState { state: f64, level: f64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("value iteration did not converge after {sweeps} sweeps (residual {residual:e})")]
    NonConvergence { sweeps: usize, residual: f64 },

    #[error("corrupt value oracle at x = {x}: {reason}")]
    CorruptOracle { x: f64, reason: &'static str },

    #[error("boundary b cannot be inverted at level {level}: {reason}")]
    NotInvertible { level: f64, reason: &'static str },

    #[error("belief {pi} exceeds the prior {prior}")]
    BeliefAbovePrior { pi: f64, prior: f64 },

    #[error("({p}, {x}) lies in the stopping region; no initial jump is defined there")]
    WrongRegion { p: f64, x: f64 },

    #[error(
        "no equilibrium for p1 = 0 < p2 = {p2}: player 1 plays the one-player rule and \
         player 2 would want to preempt it just before it fires, which no randomized \
         stopping time achieves"
    )]
    NoEquilibrium { p2: f64 },

    #[error("semi-analytic evaluation needs the closed-form GBM oracle")]
    NonGbmOracle,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
