//! The continuity method: damped Newton iteration on
//! `log YC(u) = t f + log A` over the flat complex torus, marched along a
//! path in `t` with warm starts.

use grid_tensor::ScalarField;
use kahler_geometry::{
    potential_to_metric, HermitianMetricField, KahlerError, KahlerPotential,
};

use crate::config::ContinuityConfig;
use crate::error::{MaError, Result};
use crate::linear::{solve_mean_zero, MetricLaplacian};

/// Per-path-step summary; a direct Newton solve produces a single entry.
#[derive(Debug, Clone, Copy)]
pub struct NewtonStats {
    pub t: f64,
    pub iterations: usize,
    pub residual: f64,
}

/// A solved Monge–Ampère instance: mean-zero potential, normalization
/// constant, and the sup-norm residual `sup |log YC(u) - (t f + log A)|`.
#[derive(Debug, Clone)]
pub struct MASolution {
    potential: KahlerPotential,
    a: f64,
    residual: f64,
    t: f64,
    iter_residuals: Vec<f64>,
    path: Vec<NewtonStats>,
}

impl MASolution {
    pub fn potential(&self) -> &KahlerPotential {
        &self.potential
    }

    /// The mean-zero solution field.
    pub fn u(&self) -> &ScalarField {
        self.potential.u()
    }

    /// Normalization constant `A`.
    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    /// Residual sup-norms of the accepted iterates, starting at the
    /// initialization — nonincreasing by the acceptance rule.
    pub fn iter_residuals(&self) -> &[f64] {
        &self.iter_residuals
    }

    /// One entry per solved path parameter.
    pub fn path(&self) -> &[NewtonStats] {
        &self.path
    }
}

/// `A = Vol / ∫ e^{t f} dV` over the background volume form; with this
/// constant `∫ (A e^{t f} - 1) dV = 0` identically, the compatibility the
/// equation needs to be solvable at all.
pub fn normalization_constant(f: &ScalarField, t: f64, g0: &HermitianMetricField) -> Result<f64> {
    if f.grid() != g0.grid().real_grid() {
        return Err(KahlerError::GridMismatch.into());
    }
    let det = g0.det();
    let mut vol = 0.0;
    let mut weighted = 0.0;
    for (fv, dv) in f.as_slice().iter().zip(det.as_slice()) {
        vol += dv;
        weighted += (t * fv).exp() * dv;
    }
    Ok(vol / weighted)
}

/// The per-iteration normalization update: the value of `log A` that zeroes
/// the `dV~`-weighted mean of `log YC - t f`. A mean-free residual (w.r.t.
/// the volume of the current iterate's metric) is the solvability condition
/// for the linearized equation on a closed manifold.
pub(crate) fn consistent_log_a(
    log_yc: &ScalarField,
    f: &ScalarField,
    t: f64,
    det_gt: &ScalarField,
) -> f64 {
    let mut wsum = 0.0;
    let mut acc = 0.0;
    for ((ly, fv), w) in log_yc
        .as_slice()
        .iter()
        .zip(f.as_slice())
        .zip(det_gt.as_slice())
    {
        wsum += w;
        acc += (ly - t * fv) * w;
    }
    acc / wsum
}

/// Everything recomputed per accepted iterate.
struct IterState {
    potential: KahlerPotential,
    gt: HermitianMetricField,
    log_a: f64,
    residual: ScalarField,
    sup: f64,
}

fn assemble(f: &ScalarField, t: f64, u: ScalarField) -> Result<IterState> {
    let potential = KahlerPotential::over_flat(u)?;
    let gt = potential_to_metric(&potential)?;
    let det = gt.det();
    let log_yc = det.map(f64::ln); // flat background: YC is det g~ itself
    let log_a = consistent_log_a(&log_yc, f, t, &det);
    let residual = log_yc.zip_map(f, |ly, fv| ly - t * fv - log_a)?;
    let sup = residual.sup_norm();
    Ok(IterState {
        potential,
        gt,
        log_a,
        residual,
        sup,
    })
}

/// Damped Newton iteration at fixed path parameter `t` from `u_init`.
///
/// Each step solves `Lap_{g~} du = -(log YC - t f - log A)` on the mean-zero
/// subspace (conjugate gradients, flat spectral preconditioner), then
/// backtracks `u + damping * du` until the trial is admissible and the
/// residual decreased; `log A` is recomputed for every trial iterate.
pub fn newton_solve(
    f: &ScalarField,
    t: f64,
    u_init: &ScalarField,
    cfg: &ContinuityConfig,
) -> Result<MASolution> {
    cfg.validate_newton()?;
    if u_init.grid() != f.grid() {
        return Err(KahlerError::GridMismatch.into());
    }
    if !t.is_finite() || !(0.0..=1.0).contains(&t) {
        return Err(MaError::BadConfig(format!(
            "path parameter t = {t} outside [0, 1]"
        )));
    }

    let mut state = assemble(f, t, u_init.recentered())?;
    let mut iter_residuals = vec![state.sup];
    let mut iterations = 0;
    while state.sup >= cfg.newton_tol {
        if iterations >= cfg.newton_max_iters {
            return Err(MaError::NewtonStalled {
                t,
                iterations,
                residual: state.sup,
            });
        }
        let lap = MetricLaplacian::new(&state.gt);
        // (-Lap) du = residual  <=>  Lap du = -residual
        let du = solve_mean_zero(&lap, &state.residual, cfg.linear_tol, cfg.linear_max_iters)?;

        let mut damping = cfg.damping;
        state = loop {
            let trial_u = state
                .potential
                .u()
                .zip_map(&du, |a, b| a + damping * b)?
                .recentered();
            match assemble(f, t, trial_u) {
                Ok(trial) if trial.sup < state.sup => break trial,
                // Rejected: inadmissible, or the residual failed to decrease.
                _ => {
                    damping *= 0.5;
                    if damping < 1.0 / 64.0 - 1e-12 {
                        return Err(MaError::DampingFloor {
                            t,
                            residual: state.sup,
                        });
                    }
                }
            }
        };
        iterations += 1;
        iter_residuals.push(state.sup);
    }

    Ok(MASolution {
        a: state.log_a.exp(),
        residual: state.sup,
        t,
        iter_residuals,
        path: vec![NewtonStats {
            t,
            iterations,
            residual: state.sup,
        }],
        potential: state.potential,
    })
}

/// March `t` through `cfg.t_steps`, warm-starting every Newton solve from
/// the previous solution; returns the `t = 1` solution carrying the whole
/// path's iteration statistics. Failures propagate with their `t`.
pub fn continuity_solve(f: &ScalarField, cfg: &ContinuityConfig) -> Result<MASolution> {
    cfg.validate()?;
    let mut u = ScalarField::zeros(f.grid());
    let mut path = Vec::with_capacity(cfg.t_steps.len());
    let mut last = None;
    for &t in &cfg.t_steps {
        let sol = newton_solve(f, t, &u, cfg)?;
        u = sol.u().clone();
        path.extend_from_slice(sol.path());
        last = Some(sol);
    }
    let mut sol = last.expect("config validated: path has endpoints");
    sol.path = path;
    Ok(sol)
}
