use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is numerically singular (pivot {pivot:.3e} at column {column})")]
    Singular { column: usize, pivot: f64 },

    #[error("matrix is not symmetric (max |S - S^T| = {0:.3e})")]
    Asymmetry(f64),

    #[error("feasible set is empty")]
    EmptyFeasible,

    #[error(
        "point is not complementary at index {index} (lambda = {lambda:.3e}, w = {slack:.3e})"
    )]
    Partition {
        index: usize,
        lambda: f64,
        slack: f64,
    },

    #[error("step size violates the discretization bound: {0}")]
    StepSize(String),

    #[error("complementarity problem has no solution at step {step}")]
    NoSolution { step: usize },

    #[error("complementarity problem has no solution in trajectory {trajectory} at step {step}")]
    TrajectoryNoSolution { trajectory: usize, step: usize },

    #[error("no complementarity pattern admits an equilibrium")]
    EmptyResult,

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("multiplier matrix {name} has a negative entry {value:.3e} at ({row}, {col})")]
    Negativity {
        name: &'static str,
        row: usize,
        col: usize,
        value: f64,
    },

    #[error("enumeration budget exceeded: {0}")]
    Budget(String),
}
