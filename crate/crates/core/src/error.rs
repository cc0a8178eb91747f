use thiserror::Error;

/// Errors produced by field construction, calculus and transport.
#[derive(Debug, Error)]
pub enum SurfError {
    #[error("grid too small: need at least {min} nodes per axis, got {got}")]
    GridTooSmall { min: usize, got: usize },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("non-finite value at node ({i}, {j})")]
    NonFinite { i: usize, j: usize },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("field is fully masked")]
    FullyMasked,

    #[error("derivative order {0} not supported (1..=3)")]
    BadOrder(u32),

    #[error("{class} precondition failed: residual {residual:.3e} exceeds tolerance {tol:.3e}")]
    ClassPrecondition {
        class: String,
        residual: f64,
        tol: f64,
    },

    #[error("gauge map must be strictly monotone increasing: {0}")]
    NonMonotoneGauge(String),

    #[error("no convergence after {iters} iterations, defect {defect:.3e}")]
    NoConvergence { iters: usize, defect: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("singular data: {0}")]
    Singular(String),

    #[error("transport path leaves the grid")]
    PathOffGrid,

    #[error("masked node on transport path at ({i}, {j})")]
    MaskedPath { i: usize, j: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("malformed input file: {0}")]
    Malformed(String),
}

pub type Result<T> = std::result::Result<T, SurfError>;
