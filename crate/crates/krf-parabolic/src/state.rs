use grid_tensor::ScalarField;
use kahler_geometry::{
    complex_hessian, potential_to_metric, ComplexTorusGrid, HermitianMetricField, KahlerError,
    KahlerPotential,
};

use crate::error::{FlowError, Result};

/// One snapshot of the potential flow.
///
/// `u` is kept at grid mean zero: the evolution equation only sees `u`
/// through its complex Hessian, so the spatially constant part of the update
/// is pure gauge. It is not discarded — each step moves the removed mean into
/// `drift`, whose growth rate is exactly the constant the normalized
/// derivative converges to.
#[derive(Debug, Clone)]
pub struct FlowState {
    t: f64,
    dt: f64,
    drift: f64,
    u: ScalarField,
    metric: HermitianMetricField,
}

impl FlowState {
    /// The flow's canonical start: `u(x, 0) = 0` over the flat background.
    pub fn initial(grid: &ComplexTorusGrid) -> FlowState {
        FlowState {
            t: 0.0,
            dt: 0.0,
            drift: 0.0,
            u: ScalarField::zeros(grid.real_grid()),
            metric: HermitianMetricField::flat(grid),
        }
    }

    /// Wrap an arbitrary admissible potential as a flow state. The potential
    /// is recentered to mean zero; inadmissibility is reported with the
    /// failing grid index and the global minimum eigenvalue.
    pub fn from_potential(u: &ScalarField, t: f64, dt: f64, drift: f64) -> Result<FlowState> {
        let u = u.recentered();
        let metric = admissible_metric(&u, t)?;
        Ok(FlowState {
            t,
            dt,
            drift,
            u,
            metric,
        })
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    /// Step size used to reach this state (0 before the first step).
    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Accumulated spatial mean of the updates, i.e. the gauge constant
    /// removed from `u` so far.
    pub fn drift(&self) -> f64 {
        self.drift
    }

    /// Mean-zero potential.
    pub fn u(&self) -> &ScalarField {
        &self.u
    }

    /// Cached candidate metric `g0 + dd-bar u` (validated positive definite).
    pub fn metric(&self) -> &HermitianMetricField {
        &self.metric
    }

    pub fn grid(&self) -> &ComplexTorusGrid {
        self.metric.grid()
    }
}

/// Build the candidate metric of `u` over the flat background, mapping loss
/// of positivity to the flow's diagnostic error.
pub(crate) fn admissible_metric(u: &ScalarField, t: f64) -> Result<HermitianMetricField> {
    let p = KahlerPotential::over_flat(u.clone())?;
    match potential_to_metric(&p) {
        Ok(m) => Ok(m),
        Err(KahlerError::NotAdmissible { index, .. }) => {
            // The pivot from the failed factorization is only a proxy;
            // diagnose with the true minimum eigenvalue over the whole grid.
            let grid = p.grid().clone();
            let h = complex_hessian(&grid, u)?;
            let flat = HermitianMetricField::flat(&grid);
            let candidate = flat.field().add(&h)?;
            Err(FlowError::AdmissibilityLoss {
                t,
                index,
                min_eig: candidate.min_eigenvalue(),
            })
        }
        Err(e) => Err(e.into()),
    }
}
