use std::path::PathBuf;

/// Errors produced anywhere in the solver pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("matrix is singular (pivot {pivot:e} at step {step})")]
    Singular { step: usize, pivot: f64 },

    #[error("stencil centred at node {center}: {reason}")]
    Stencil { center: usize, reason: String },

    #[error("polynomial block has rank {rank} < {expected} on stencil centred at node {center}")]
    RankDeficient {
        center: usize,
        rank: usize,
        expected: usize,
    },

    #[error("need {needed} active nodes for a stencil but only {available} exist")]
    TooFewNodes { needed: usize, available: usize },

    #[error("node generation reached only {achieved} interior nodes (target at least {target})")]
    NodeGeneration { achieved: usize, target: usize },

    #[error("boundary fit failed: {0}")]
    BoundaryFit(String),

    #[error("embedded boundary {index} is under-resolved: {nodes} nodes at spacing {h}")]
    UnderResolved { index: usize, nodes: usize, h: f64 },

    #[error("embedded boundary {0} intersects the outer boundary")]
    BoundaryIntersection(usize),

    #[error("GMRES did not converge in {iterations} iterations (relative residual {residual:e})")]
    NoConvergence {
        iterations: usize,
        residual: f64,
        best: Vec<f64>,
    },

    #[error("eigenvalue iteration did not converge after {0} QR sweeps")]
    EigenNoConvergence(usize),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("zero {what} {index} in matrix")]
    ZeroLine { what: &'static str, index: usize },

    #[error("zero diagonal entry {0} in preconditioner")]
    ZeroDiagonal(usize),

    #[error("exact solution has zero norm")]
    ZeroNorm,

    #[error("unknown problem `{0}`")]
    UnknownProblem(String),

    #[error("invalid config {path}: {reason}")]
    Config { path: PathBuf, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
