//! Grid sweeps over (E_JS2, E_C, dphi) with checkpointed, parallel
//! evaluation, limiting-mechanism tags and a T2 optimizer.

pub mod classify;
pub mod grid;
pub mod optimize;
pub mod run;

pub use classify::{classify_limiting_mechanism, Limits};
pub use grid::{LogAxis, SweepGrid};
pub use optimize::{optimize_t2, OptimizeSpec, Optimum};
pub use run::{run_sweep, RunOptions, SweepResult, SweepRow};

#[derive(Debug, thiserror::Error)]
pub enum SweepError {
    #[error("invalid grid: {0}")]
    Grid(String),
    #[error(transparent)]
    Core(#[from] cos2phi::Error),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("thread pool: {0}")]
    Pool(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = SweepError> = std::result::Result<T, E>;
