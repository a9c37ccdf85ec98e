use grid_tensor::{ScalarField, Spectrum};
use kahler_geometry::{ComplexTorusGrid, HermitianMetricField, KahlerPotential, ma_operator};

use crate::config::{FlowConfig, Scheme};
use crate::error::Result;
use crate::kernel::StepKernel;
use crate::state::FlowState;

/// Right-hand side of the potential flow,
/// `F(u) = log( det(g0 + dd-bar u) / det g0 ) + f`.
///
/// The flow `du/dt = F(u)` decreases the oscillation of `F`; its stationary
/// points are exactly the solutions of the complex Monge-Ampere equation with
/// datum `f - const`.
pub fn flow_rhs(
    u: &ScalarField,
    f: &ScalarField,
    g0: &HermitianMetricField,
) -> Result<ScalarField> {
    let p = KahlerPotential::new(u.clone(), g0.clone())?;
    let ratio = ma_operator(&p)?;
    let mut vals = Vec::with_capacity(ratio.as_slice().len());
    for (&r, &fv) in ratio.as_slice().iter().zip(f.as_slice()) {
        vals.push(r.ln() + fv);
    }
    Ok(ScalarField::from_flat(u.grid(), vals)?)
}

/// Advance the flow by one step of the requested scheme, choosing the step
/// size from the current stiffness (or honouring a smaller one already stored
/// in the state). Intended for experimentation; long runs should go through
/// [`crate::run_flow`], which reuses spectral data across steps.
pub fn step(state: &FlowState, f: &ScalarField, scheme: Scheme) -> Result<FlowState> {
    let grid = ComplexTorusGrid::from_real(state.grid().clone())?;
    let kernel = StepKernel::new(&grid, f)?;
    let cfg = FlowConfig::default();
    let s = Spectrum::of(state.u());
    let eval = kernel.rhs(&s, state.t())?;
    let budget = kernel.dt_budget(eval.max_inv_trace, scheme, cfg.dt_safety, cfg.imex_factor);
    let dt = if state.dt() > 0.0 {
        state.dt().min(budget)
    } else {
        budget
    };
    let (u_next, mean_inc) = match scheme {
        Scheme::Imex => {
            let (s_next, inc) = kernel.imex_advance(&s, &eval, dt)?;
            (s_next.field().recentered(), inc)
        }
        Scheme::ExplicitRk4 => kernel.rk4_advance(state.u(), &eval, state.t(), dt)?,
    };
    FlowState::from_potential(u_next, state.t() + dt, dt, state.drift() + mean_inc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use kahler_geometry::ComplexTorusGrid;

    fn trig(grid: &ComplexTorusGrid, a: f64) -> ScalarField {
        ScalarField::from_fn(grid.real_grid(), |x| {
            let tau = 2.0 * std::f64::consts::PI;
            a * (tau * x[0]).cos() * (tau * x[1]).cos()
        })
        .recentered()
    }

    #[test]
    fn rhs_at_zero_potential_is_the_forcing() {
        let grid = ComplexTorusGrid::new(2, 8).unwrap();
        let f = trig(&grid, 0.3);
        let u = ScalarField::zeros(grid.real_grid());
        let g0 = HermitianMetricField::flat(&grid);
        let rhs = flow_rhs(&u, &f, &g0).unwrap();
        assert!(rhs.sup_distance(&f).unwrap() < 1e-14);
    }

    #[test]
    fn rhs_closed_form_in_one_complex_dimension() {
        // With the flat background, F = ln(1 + quarter-Laplacian of u) + f.
        let grid = ComplexTorusGrid::new(1, 16).unwrap();
        let u = trig(&grid, 0.02);
        let f = trig(&grid, 0.1).scaled(-1.0);
        let g0 = HermitianMetricField::flat(&grid);
        let rhs = flow_rhs(&u, &f, &g0).unwrap();
        let tau = 2.0 * std::f64::consts::PI;
        let want = ScalarField::from_fn(grid.real_grid(), |x| {
            let lap = -0.25 * 2.0 * tau * tau * 0.02 * (tau * x[0]).cos() * (tau * x[1]).cos();
            (1.0 + lap).ln() - 0.1 * (tau * x[0]).cos() * (tau * x[1]).cos()
        });
        assert!(rhs.sup_distance(&want).unwrap() < 1e-12);
    }

    #[test]
    fn zero_forcing_is_a_fixed_point_for_both_schemes() {
        let grid = ComplexTorusGrid::new(1, 16).unwrap();
        let f = ScalarField::zeros(grid.real_grid());
        for scheme in [Scheme::Imex, Scheme::ExplicitRk4] {
            let next = step(&FlowState::initial(&grid), &f, scheme).unwrap();
            assert!(next.u().sup_norm() < 1e-15);
            assert!(next.t() > 0.0);
            assert!(next.drift().abs() < 1e-15);
        }
    }

    #[test]
    fn one_explicit_step_moves_by_dt_times_the_centered_forcing() {
        let grid = ComplexTorusGrid::new(1, 16).unwrap();
        let f = trig(&grid, 0.05);
        let state = FlowState::initial(&grid);
        let next = step(&state, &f, Scheme::ExplicitRk4).unwrap();
        let dt = next.dt();
        // First step from u = 0: du = dt * f + O(dt^2) after recentering.
        let predicted = f.scaled(dt);
        let err = next.u().sup_distance(&predicted).unwrap();
        assert!(err < 10.0 * dt * dt, "err = {err}, dt = {dt}");
        assert!((next.drift()).abs() < 1e-12);
    }
}
