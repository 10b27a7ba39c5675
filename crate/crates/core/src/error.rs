use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(&'static str),

    #[error("non-finite value at node {node} in {context}")]
    NonFinite { context: &'static str, node: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("Dirichlet eigenvalue proximity: condition estimate {condition:.3e} exceeds {threshold:.1e}")]
    DirichletEigenvalue { condition: f64, threshold: f64 },

    #[error("singular pivot at row {0} in banded factorization")]
    SingularPivot(usize),

    #[error("no contraction: measured ratio {ratio:.4} >= {limit} (|lambda| too small for this potential)")]
    NoContraction { ratio: f64, limit: f64 },

    #[error("Neumann series not converged after {iterations} iterations (last increment {increment:.3e})")]
    IterationLimit { iterations: usize, increment: f64 },

    #[error("under-resolved phase: |lambda| = {abs_lambda} needs n_angular >= {need_angular} and n_radial >= {need_radial}, grid has {n_angular} x {n_radial}")]
    UnderResolvedPhase {
        abs_lambda: f64,
        need_angular: usize,
        need_radial: usize,
        n_angular: usize,
        n_radial: usize,
    },

    #[error("mismatched CGO parameters: {0}")]
    ParamMismatch(String),

    #[error("config error at line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}
