use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameters: {}", .0.join("; "))]
    InvalidParams(Vec<String>),

    #[error("singular input: {0}")]
    SingularInput(String),

    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepSizeUnderflow { t: f64, h: f64 },

    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),

    #[error("ensemble degenerate: rejected weight {rejected:e} exceeds budget {budget:e}")]
    EnsembleDegenerate { rejected: f64, budget: f64 },

    #[error("quadrature did not converge: {0}")]
    QuadratureNonConvergence(String),

    #[error("not enough bound states: requested {requested}, found {found}")]
    NotEnoughStates { requested: usize, found: usize },

    #[error("asymptotic region not reached: {0}")]
    AsymptoticsNotReached(String),

    #[error("energy shell singular: |H| = {0:e}")]
    EnergyShellSingular(f64),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("numerical assertion failed: {0}")]
    Assertion(String),
}

pub type Result<T> = std::result::Result<T, Error>;
