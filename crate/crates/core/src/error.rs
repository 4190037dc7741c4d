use thiserror::Error;

/// Library error type. Payloads are stored as `f64` so the type stays
/// independent of the working scalar.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid material parameters: {0}")]
    InvalidMaterial(String),

    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("empty free-dof set: every vertex component is constrained")]
    EmptySystem,

    #[error("matrix not positive definite (pivot failure at row {row})")]
    NotPositiveDefinite { row: usize },

    #[error("{what} did not converge after {iterations} iterations (last = {last:e})")]
    NonConvergence {
        what: &'static str,
        iterations: usize,
        last: f64,
    },

    #[error(
        "implicit step {step} failed: Newton stalled after {iterations} iterations \
         (residual history {residuals:?})"
    )]
    StepFailure {
        step: usize,
        iterations: usize,
        residuals: Vec<f64>,
    },

    #[error("smallness condition violated: lhs = {lhs} > rhs = {rhs}")]
    SmallnessViolated { lhs: f64, rhs: f64 },

    #[error("inadmissible displacement: gap {gap:e} < 0 at contact vertex {vertex}")]
    Inadmissible { vertex: usize, gap: f64 },

    #[error("decay-rate fit refused: {0}")]
    FitRefused(String),

    #[error("invalid time grid: {0}")]
    InvalidTimeGrid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
