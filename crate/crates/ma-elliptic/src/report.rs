//! A-priori diagnostics and a key–value text report for a solved instance.

use std::fmt;

use grid_tensor::ScalarField;
use kahler_geometry::{
    potential_to_metric, relative_eigenvalue_range, relative_trace, HermitianMetricField,
};

use crate::error::{MaError, Result};
use crate::solve::MASolution;

/// Pointwise bounds a solution must satisfy: the relative trace
/// `n + Lap u` (positive on the admissible cone), the oscillation of `u`,
/// and the extreme eigenvalues of `g~` relative to the background.
#[derive(Debug, Clone, Copy)]
pub struct AprioriReport {
    pub t: f64,
    pub a: f64,
    /// `sup |log YC(u) - (t f + log A)|`, recomputed from scratch.
    pub residual: f64,
    pub trace_min: f64,
    pub trace_max: f64,
    pub u_oscillation: f64,
    pub eigenvalue_min: f64,
    pub eigenvalue_max: f64,
}

impl fmt::Display for AprioriReport {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(out, "t: {}", self.t)?;
        writeln!(out, "normalization_a: {:.15}", self.a)?;
        writeln!(out, "residual_sup: {:.3e}", self.residual)?;
        writeln!(out, "trace_min: {:.12}", self.trace_min)?;
        writeln!(out, "trace_max: {:.12}", self.trace_max)?;
        writeln!(out, "u_oscillation: {:.12}", self.u_oscillation)?;
        writeln!(out, "eigenvalue_min: {:.12}", self.eigenvalue_min)?;
        writeln!(out, "eigenvalue_max: {:.12}", self.eigenvalue_max)
    }
}

/// Recompute the diagnostics of `sol` for the forcing `f` from scratch
/// (nothing is trusted from the solve itself). Errors if the relative trace
/// is not strictly positive somewhere — the solution would have left the
/// admissible cone.
pub fn a_priori_report(sol: &MASolution, f: &ScalarField) -> Result<AprioriReport> {
    let p = sol.potential();
    let flat = HermitianMetricField::flat(p.grid());
    let trace = relative_trace(&flat, p)?;
    let trace_min = trace.min();
    if !(trace_min > 0.0) {
        return Err(MaError::TraceNotPositive { min: trace_min });
    }
    let gt = potential_to_metric(p)?;
    let (eigenvalue_min, eigenvalue_max) = relative_eigenvalue_range(&flat, &gt)?;
    let log_a = sol.a().ln();
    let t = sol.t();
    let residual = gt
        .det()
        .map(f64::ln)
        .zip_map(f, |ly, fv| ly - t * fv - log_a)?
        .sup_norm();
    Ok(AprioriReport {
        t,
        a: sol.a(),
        residual,
        trace_min,
        trace_max: trace.max(),
        u_oscillation: p.u().oscillation(),
        eigenvalue_min,
        eigenvalue_max,
    })
}

/// Full text report: the final solution block, per-step Newton statistics,
/// and the a-priori bounds.
pub fn solution_report(sol: &MASolution, f: &ScalarField) -> Result<String> {
    use fmt::Write;
    let apriori = a_priori_report(sol, f)?;
    let mut out = String::new();
    let _ = writeln!(out, "final_t: {}", sol.t());
    let _ = writeln!(out, "final_residual: {:.3e}", sol.residual());
    let _ = writeln!(out, "normalization_a: {:.15}", sol.a());
    let _ = writeln!(out, "newton_steps: {}", sol.path().len());
    for step in sol.path() {
        let _ = writeln!(
            out,
            "step: t = {:.6} iterations = {} residual = {:.3e}",
            step.t, step.iterations, step.residual
        );
    }
    let _ = writeln!(out, "a_priori:");
    for line in apriori.to_string().lines() {
        let _ = writeln!(out, "  {line}");
    }
    Ok(out)
}
