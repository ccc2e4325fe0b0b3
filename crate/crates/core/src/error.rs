use num_complex::Complex64;

/// Errors raised anywhere in the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("argument {z} lies on the relocated branch cut or at the origin")]
    OnBranchCut { z: Complex64 },

    #[error("order {order} exceeds the supported maximum {max}")]
    OrderTooLarge { order: usize, max: usize },

    #[error("scaled evaluation broke down: {0}")]
    ScaledBreakdown(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("{omega} is within {margin:e} of a lattice-shifted branch cut")]
    CutProximity { omega: Complex64, margin: f64 },

    #[error("geometry: {0}")]
    Geometry(String),

    #[error("quadrature did not converge for {kind} (row {row}, col {col}, lag {lag})")]
    Quadrature {
        kind: String,
        row: usize,
        col: usize,
        lag: usize,
    },

    #[error("step-0 system block is singular for formulation {0}")]
    SingularSystem(String),

    #[error("eigensolver: {0}")]
    Eigensolver(String),

    #[error("reference solution: {0}")]
    Reference(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
