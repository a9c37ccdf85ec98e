use thiserror::Error;

pub type Result<T> = std::result::Result<T, FlowError>;

#[derive(Debug, Error)]
pub enum FlowError {
    #[error("t = {t} is at or past the extinction time {extinction}")]
    PastExtinction { t: f64, extinction: f64 },
    #[error("dimension n = {0} must be at least 2")]
    BadDimension(u32),
    #[error("negative time {0} for an expanding solution")]
    NegativeTime(f64),
    #[error("step size {dt} exceeds the stability bound {bound} at step {step}")]
    StabilityBound { dt: f64, bound: f64, step: usize },
    #[error("blow-up guard tripped at step {step}: sup|w| = {sup_w} (t = {t})")]
    BlowUp { step: usize, t: f64, sup_w: f64 },
    #[error("non-positive volume {0} in a rescaling trajectory")]
    NonPositiveVolume(f64),
    #[error("stored trace differs from g^{{pq}} h_{{pq}} by {discrepancy}")]
    TraceMismatch { discrepancy: f64 },
    #[error("probe metric g + s h leaves the positive cone at s = {s}: {source}")]
    ProbeNotPositive {
        s: f64,
        #[source]
        source: grid_tensor::GridError,
    },
    #[error(transparent)]
    Grid(#[from] grid_tensor::GridError),
}
