use std::path::PathBuf;
use thiserror::Error;

/// Errors surfaced by the solver and analysis layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate grid: no interior cell centers at spacing {h}")]
    DegenerateGrid { h: f64 },

    #[error("invalid domain spec: {0}")]
    InvalidSpec(String),

    #[error("failed to read mask file {path}: {source}")]
    MaskIo {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("invalid mask file {path}: {reason}")]
    MaskFormat { path: PathBuf, reason: String },

    #[error("subset references cell index {index} outside the interior (N = {n})")]
    SubsetOutOfDomain { index: usize, n: usize },

    #[error("fields live on different grids")]
    DomainMismatch,

    #[error("zero field")]
    ZeroField,

    #[error("degenerate area fraction: k = {k} of {n} interior cells")]
    DegenerateAreaFraction { k: usize, n: usize },

    #[error("eigensolver did not converge: residual {residual:.3e} after {iterations} sweeps")]
    NoConvergence { residual: f64, iterations: usize },

    #[error(
        "non-Perron eigenvector: component {value:.3e} below clamp threshold -{threshold:.3e}"
    )]
    NonPerron { value: f64, threshold: f64 },

    #[error("inner linear solve stalled at relative residual {residual:.3e}")]
    InnerSolveStalled { residual: f64 },

    #[error("no sign change for Lambda(alpha) - alpha after {doublings} doublings")]
    BracketNotFound { doublings: usize },

    #[error("bisection stalled: |Lambda(alpha) - alpha| = {residual:.3e} > tol")]
    BisectionStalled { residual: f64 },

    #[error("all {restarts} restarts failed; first error: {first}")]
    AllRestartsFailed { restarts: usize, first: Box<Error> },

    #[error("empty complement: D covers every interior cell")]
    EmptyComplement,

    #[error("sublevel nesting violated: {lower} cells below psi <= t - eps outside D, {upper} cells of D above psi <= t + eps")]
    NestingViolation { lower: usize, upper: usize },

    #[error("epsilon level {eps} under-resolved for spacing {h} (need >= 2h)")]
    UnderResolvedEps { eps: f64, h: f64 },

    #[error("domain carries no region labels")]
    NoLabels,

    #[error("configuration carries no threshold")]
    NoThreshold,
}

pub type Result<T> = std::result::Result<T, Error>;
