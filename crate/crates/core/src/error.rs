use thiserror::Error;

/// Errors produced by graphon evaluation, the solvers and the phase analysis.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid graphon: {0}")]
    InvalidGraphon(String),

    #[error("value {value} outside the open interval required by {what}")]
    Domain { what: &'static str, value: f64 },

    #[error("block index {index} out of range for {n_blocks} blocks")]
    BlockIndex { index: usize, n_blocks: usize },

    #[error("graphon value {value} outside [0, 1] for {what}")]
    OutOfRange { what: &'static str, value: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("no admissible sample found for target ({edge}, {triangle}) within the rejection budget")]
    Infeasible { edge: f64, triangle: f64 },

    #[error("cannot restore feasibility for target ({edge}, {triangle}) from the given start")]
    InfeasibleStart { edge: f64, triangle: f64 },

    #[error("no multistart run converged for target ({edge}, {triangle})")]
    EmptyResult { edge: f64, triangle: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
