use thiserror::Error;

/// Errors shared by every operation in this crate (and re-used downstream).
///
/// Degenerate metrics fail loudly with the offending grid index; no
/// regularization is ever applied, because loss of positivity is itself a
/// meaningful event for the flow layers built on top.
#[derive(Debug, Error)]
pub enum GridError {
    #[error("axis {axis} out of range for {dims}-dimensional grid")]
    AxisOutOfRange { axis: usize, dims: usize },

    #[error("resolution {got} on axis {axis}: must be even and at least 8")]
    BadResolution { axis: usize, got: usize },

    #[error("period on axis {axis} must be positive and finite")]
    BadPeriod { axis: usize },

    #[error("derivative order {0} unsupported (only 1 and 2)")]
    BadOrder(u8),

    #[error("field shape {got:?} does not match expected shape {expected:?}")]
    ShapeMismatch { got: Vec<usize>, expected: Vec<usize> },

    #[error("grids differ between operands")]
    GridMismatch,

    #[error("tensor is not symmetric at grid index {index:?}: T[{i}{j}] != T[{j}{i}]")]
    NotSymmetric { index: Vec<usize>, i: usize, j: usize },

    #[error("metric not positive definite at grid index {index:?} (Cholesky pivot {pivot:.6e})")]
    NotPositiveDefinite { index: Vec<usize>, pivot: f64 },

    #[error("eigenvalue iteration did not converge after {iters} iterations")]
    NoConvergence { iters: usize },

    #[error("linear solver stagnated at relative residual {residual:.3e} after {iters} iterations")]
    SolverStagnation { residual: f64, iters: usize },

    #[error("malformed dump: {0}")]
    Dump(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, GridError>;
