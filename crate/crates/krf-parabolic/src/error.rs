use thiserror::Error;

#[derive(Debug, Error)]
pub enum FlowError {
    #[error("operands live on different grids")]
    GridMismatch,

    #[error("invalid flow configuration: {0}")]
    BadConfig(String),

    /// The candidate metric `g0 + dd-bar u` left the positive cone. The flow
    /// cannot continue past this state; the diagnostics say where and by how
    /// much it failed.
    #[error(
        "metric lost positivity at t = {t:.6}: grid index {index:?}, min eigenvalue {min_eig:.6e}"
    )]
    AdmissibilityLoss {
        t: f64,
        index: Vec<usize>,
        min_eig: f64,
    },

    /// The stability budget collapsed (degenerating metric drives
    /// `tr g~^{-1}` to infinity); no usable step size remains.
    #[error("time step underflow at t = {t:.6}: budget dt = {dt:.3e}")]
    StepUnderflow { t: f64, dt: f64 },

    #[error(
        "flow did not reach osc(F) < {stop_tol:.3e} within {max_steps} steps (osc = {osc:.3e})"
    )]
    MaxSteps {
        max_steps: usize,
        stop_tol: f64,
        osc: f64,
    },

    /// The trace inequality's exponent `n/(n-1)` needs at least two complex
    /// dimensions.
    #[error("the n/(n-1) trace exponent requires n >= 2, got n = {n}")]
    DimensionTooLow { n: usize },

    #[error("decay fit needs at least {need} post-transient samples above the positivity floor, found {found}")]
    TooFewSamples { need: usize, found: usize },

    #[error("non-finite {what} at t = {t:.6}")]
    NonFinite { what: &'static str, t: f64 },

    #[error("could not write checkpoint: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Geometry(#[from] kahler_geometry::KahlerError),

    #[error(transparent)]
    Grid(#[from] grid_tensor::GridError),
}

pub type Result<T> = std::result::Result<T, FlowError>;
