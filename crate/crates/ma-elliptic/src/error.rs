use thiserror::Error;

#[derive(Debug, Error)]
pub enum MaError {
    #[error("bad configuration: {0}")]
    BadConfig(String),

    /// Backtracking hit the damping floor (1/64): either the step kept
    /// leaving the admissible cone or the residual refused to decrease.
    /// Carries the path parameter and the residual of the last accepted
    /// iterate so the caller can tell how far the solve got.
    #[error("Newton damping floored at t = {t} with residual {residual:.3e}")]
    DampingFloor { t: f64, residual: f64 },

    #[error("Newton did not reach tolerance at t = {t}: residual {residual:.3e} after {iterations} iterations")]
    NewtonStalled {
        t: f64,
        iterations: usize,
        residual: f64,
    },

    #[error("linear solver stagnated at relative residual {residual:.3e} after {iterations} iterations")]
    SolverStagnation { residual: f64, iterations: usize },

    /// The reference-metric trace bound `n + Lap u > 0` failed — the
    /// solution claimed by the caller is not admissible.
    #[error("trace positivity violated: min over grid is {min:.3e}")]
    TraceNotPositive { min: f64 },

    #[error(transparent)]
    Kahler(#[from] kahler_geometry::KahlerError),

    #[error(transparent)]
    Grid(#[from] grid_tensor::GridError),
}

pub type Result<T> = std::result::Result<T, MaError>;
