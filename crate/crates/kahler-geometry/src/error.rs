use thiserror::Error;

#[derive(Debug, Error)]
pub enum KahlerError {
    /// The real grid under a complex torus must have an even number of axes
    /// (pairs `(x_j, y_j)`) and unit periods.
    #[error("a complex torus needs an even number of real axes, got {0}")]
    OddRealAxes(usize),

    #[error("complex torus axes must have unit period, axis {axis} has {period}")]
    BadPeriod { axis: usize, period: f64 },

    #[error("complex dimension must be at least 1")]
    ZeroDimension,

    #[error("field lives on a different grid than the operation expects")]
    GridMismatch,

    #[error("matrix field is not Hermitian at grid index {index:?}, entry ({i},{j})")]
    NotHermitian { index: Vec<usize>, i: usize, j: usize },

    /// Admissibility failure: the candidate metric has a non-positive
    /// pivot in its Cholesky factorization at this grid point.
    #[error("metric loses positive definiteness at grid index {index:?} (pivot {pivot:.3e})")]
    NotAdmissible { index: Vec<usize>, pivot: f64 },

    /// Potentials are gauge-fixed to grid mean zero.
    #[error("potential has nonzero mean {0:.3e}; recenter it first")]
    NotMeanZero(f64),

    #[error("expected {expected} serialized components, found {got}")]
    ComponentCount { got: usize, expected: usize },

    #[error(transparent)]
    Grid(#[from] grid_tensor::GridError),
}

pub type Result<T> = std::result::Result<T, KahlerError>;
