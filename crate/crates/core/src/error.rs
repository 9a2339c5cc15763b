use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("elements are tied to different deformation matrices")]
    ThetaMismatch,

    #[error("invalid deformation matrix: {0}")]
    InvalidTheta(String),

    #[error("generator index {index} out of range 1..={dim}")]
    GeneratorOutOfRange { index: usize, dim: usize },

    #[error("parameter `{name}` = {value} outside its domain: {domain}")]
    Domain {
        name: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("representation dimension {dim} exceeds the cap {cap}")]
    TooLarge { dim: usize, cap: usize },

    #[error("matrix is not Hermitian (defect {defect:e})")]
    NotHermitian { defect: f64 },

    #[error("quadrature did not converge at {at}: estimate {estimate:e}, error {error:e} after {evaluations} evaluations")]
    Quadrature {
        at: f64,
        estimate: f64,
        error: f64,
        evaluations: usize,
    },

    #[error("truncation tail {tail:e} exceeds tolerance {tolerance:e}")]
    Tail { tail: f64, tolerance: f64 },

    #[error("evaluation paths disagree: |{a} - {b}| > {bound:e}")]
    PathMismatch { a: f64, b: f64, bound: f64 },

    #[error("quadrature needs {needed} evaluations, budget is {cap}")]
    Budget { needed: u64, cap: u64 },

    #[error("invalid schedule: {0}")]
    Schedule(String),

    #[error("malformed element: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
