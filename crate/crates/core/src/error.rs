use std::path::PathBuf;

use thiserror::Error;

/// Errors raised while building meshes, spaces and operators, or while running
/// a solver.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}:{line}: {msg}")]
    Parse { path: PathBuf, line: usize, msg: String },

    #[error("mesh conformity violated at edge ({0}, {1}): {2}")]
    Conformity(usize, usize, String),

    #[error("degenerate triangle {0} (signed area {1:e})")]
    DegenerateTriangle(usize, f64),

    #[error("boundary edge ({0}, {1}) has no periodic partner")]
    DanglingBoundary(usize, usize),

    #[error("inconsistent periodic pairing: {0}")]
    Periodic(String),

    #[error("unsupported polynomial degree {0} (supported: 0..={1})")]
    UnsupportedDegree(usize, usize),

    #[error("unsupported quadrature exactness {0} (supported: 0..={1})")]
    UnsupportedExactness(usize, usize),

    #[error("singular DG mass block on element {0}")]
    SingularMassBlock(usize),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("conjugate gradient did not converge in {iterations} iterations (relative residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("conjugate gradient produced a non-finite value at iteration {0}")]
    NonFinite(usize),

    #[error("unknown exact solution `{0}`")]
    UnknownSolution(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
