use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("no roots of zero polynomial")]
    ZeroPolynomial,
    #[error("zero step")]
    ZeroStep,
    #[error("empty function list")]
    Empty,
    #[error("dependent members")]
    DependentMembers,
    #[error("reality test undefined for non-real bases")]
    NonRealBase,
    #[error("degenerate base: Q^h = Q^-h")]
    DegenerateBase,
    #[error("pole at x = {0}")]
    Pole(num_complex::Complex64),
    #[error("shape error: {0}")]
    Shape(String),
    #[error("interpolation failed: {0}")]
    Interpolation(String),
    #[error("linear algebra failure: {0}")]
    Linalg(&'static str),
    #[error("non-generic setup, perturb z: {0}")]
    NonGeneric(String),
    #[error("non-generic eigenvector or degree bound too low: kernel dimension {found}, expected {expected}")]
    KernelDimension { found: usize, expected: usize },
    #[error("no solution found after {restarts} restarts (best residual {best_residual:e})")]
    NoSolution { restarts: usize, best_residual: f64 },
    #[error("lambda_{i} - lambda_{j} lies in pi*Z")]
    LambdaCollision { i: usize, j: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
