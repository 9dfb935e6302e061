use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("graph is not strongly connected")]
    NotStronglyConnected,

    #[error("Lyapunov solve failed: {0}")]
    SolverFailure(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("pseudo-gradient is not strongly monotone (estimated mu = {mu})")]
    NonMonotone { mu: f64 },

    #[error("fixed-point iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("initial action of player {player} ({value}) lies outside its action set")]
    InfeasibleStart { player: usize, value: f64 },

    #[error("state diverged at t = {t} (|value| = {magnitude:e}); step sizes likely violate the convergence conditions")]
    NumericalDivergence { t: f64, magnitude: f64 },

    #[error("beta is too small for any admissible alpha (numerator {numerator})")]
    InfeasibleBeta { numerator: f64 },

    #[error("degenerate fit window: {0}")]
    DegenerateWindow(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid input: {0}")]
    Validation(String),

    #[error("parse error at {path} (line {line}, column {column}): {message}")]
    Parse {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
