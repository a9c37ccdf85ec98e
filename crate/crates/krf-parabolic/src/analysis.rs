//! Post-processing and pointwise-inequality checks: the second Yau
//! inequality margin, exponential decay-rate fits, and the limit identity
//! between the final Ricci curvature and the prescribed form.

use grid_tensor::{ScalarField, Spectrum};
use kahler_geometry::{
    complex_hessian, kahler_laplacian, potential_to_metric, ricci, ComplexTorusGrid,
    HermitianMetricField, KahlerPotential,
};

use crate::error::{FlowError, Result};
use crate::state::FlowState;

/// Minimum pointwise margin of the second Yau differential inequality on the
/// flat background,
///
/// `T * L(log T - c u) <= A + B T - C T^{n/(n-1)}`
///
/// with `T = n + Lap_a u` the relative trace, `L` the geometer-convention
/// Laplacian of the evolving metric (the negative of the analyst one used in
/// this workspace), and constants instantiated for the flat torus: the
/// curvature infimum vanishes, so any `c` with `c > 1` is admissible,
/// `A = sup(-Lap_a f)`, `B = c n`, and `C = exp(-sup f / (n-1))`.
///
/// Returns `min(RHS - LHS)` over all grid points; a correct discretization
/// of an actual flow state observes a nonnegative value up to rounding. The
/// exponent `n/(n-1)` requires `n >= 2`.
pub fn yau2_margin(state: &FlowState, f: &ScalarField, c: f64) -> Result<f64> {
    let grid = ComplexTorusGrid::from_real(state.grid().clone())?;
    let n = grid.n();
    if n < 2 {
        return Err(FlowError::DimensionTooLow { n });
    }
    if f.grid() != state.grid() {
        return Err(FlowError::GridMismatch);
    }
    let nf = n as f64;
    let metric = state.metric();
    let npts = grid.len();

    // Relative trace from the metric diagonal (the background is flat).
    let mut trace = Vec::with_capacity(npts);
    for p in 0..npts {
        let pt = metric.field().point(p);
        let mut tr = 0.0;
        for i in 0..n {
            tr += pt[i * n + i].re;
        }
        trace.push(tr);
    }
    let trace = ScalarField::from_flat(state.grid(), trace)?;

    let arg = trace.map(f64::ln).sub(&state.u().scaled(c))?;
    let lap = kahler_laplacian(metric, &arg)?;

    let a_const = Spectrum::of(f).filtered(|k2| 0.25 * k2).max();
    let b_const = c * nf;
    let c_const = (-f.max() / (nf - 1.0)).exp();
    let expo = nf / (nf - 1.0);

    let mut margin = f64::INFINITY;
    for (&t, &l) in trace.as_slice().iter().zip(lap.as_slice()) {
        let lhs = t * (-l);
        let rhs = a_const + b_const * t - c_const * t.powf(expo);
        margin = margin.min(rhs - lhs);
    }
    if !margin.is_finite() {
        return Err(FlowError::NonFinite {
            what: "yau2_margin",
            t: state.t(),
        });
    }
    Ok(margin)
}

/// Exponential decay fit of a positive time series.
#[derive(Debug, Clone, Copy)]
pub struct DecayFit {
    /// Fitted rate `a` in `v(t) ~ prefactor * exp(-a t)`.
    pub rate: f64,
    /// Fitted value at `t = 0`.
    pub prefactor: f64,
    /// Coefficient of determination of the log-linear fit.
    pub r_squared: f64,
}

/// Least-squares fit of `log v` against `t` over the window `t > transient`,
/// restricted to values above the `1e-13` numerical floor. Needs at least 10
/// usable samples.
pub fn decay_fit(times: &[f64], values: &[f64], transient: f64) -> Result<DecayFit> {
    if times.len() != values.len() {
        return Err(FlowError::BadConfig(format!(
            "decay fit got {} times but {} values",
            times.len(),
            values.len()
        )));
    }
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(values)
        .filter(|(&t, &v)| t > transient && v > 1e-13 && v.is_finite())
        .map(|(&t, &v)| (t, v.ln()))
        .collect();
    if pts.len() < 10 {
        return Err(FlowError::TooFewSamples {
            need: 10,
            found: pts.len(),
        });
    }
    let m = pts.len() as f64;
    let t_mean = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let y_mean = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let mut stt = 0.0;
    let mut sty = 0.0;
    let mut syy = 0.0;
    for &(t, y) in &pts {
        let dt = t - t_mean;
        let dy = y - y_mean;
        stt += dt * dt;
        sty += dt * dy;
        syy += dy * dy;
    }
    if stt == 0.0 {
        return Err(FlowError::BadConfig(
            "decay fit needs at least two distinct sample times".into(),
        ));
    }
    let slope = sty / stt;
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        let ss_res = syy - slope * sty;
        1.0 - ss_res / syy
    };
    Ok(DecayFit {
        rate: if slope == 0.0 { 0.0 } else { -slope },
        prefactor: (y_mean - slope * t_mean).exp(),
        r_squared,
    })
}

/// Supremum over points and matrix components of
/// `| Ric(g~) - Ric(g0) - dd-bar f |` at the potential `u`.
///
/// At the flow's limit this is the main convergence statement: the limiting
/// Ricci form equals the prescribed representative. Algebraically the
/// residual equals `sup |dd-bar (F - const)|` for the flow's right-hand side
/// `F` at the same potential, so the check is meaningful away from the limit
/// too.
pub fn limit_ricci_check(
    u: &ScalarField,
    f: &ScalarField,
    g0: &HermitianMetricField,
) -> Result<f64> {
    let grid = g0.grid().clone();
    let p = KahlerPotential::new(u.clone(), g0.clone())?;
    let gt = potential_to_metric(&p)?;
    let target = ricci(g0)?.add(&complex_hessian(&grid, f)?)?;
    Ok(ricci(&gt)?.sup_distance(&target)?)
}
