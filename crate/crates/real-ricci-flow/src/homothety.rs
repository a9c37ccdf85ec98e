//! Closed-form homothetic Ricci-flow solutions: Einstein metrics scale by
//! `rho^2(t)`, round spheres shrink, hyperbolic space expands.

use crate::error::{FlowError, Result};

/// Scale factor squared of an Einstein metric (`Ric = lambda g`) under Ricci
/// flow: `g(t) = rho^2(t) g(0)` with `rho^2 = 1 - 2 lambda t`. Positive
/// `lambda` shrinks to a point at `T = 1/(2 lambda)`; nonpositive `lambda`
/// lives forever.
pub fn einstein_homothety(lambda: f64, t: f64) -> Result<f64> {
    if lambda > 0.0 {
        let extinction = 1.0 / (2.0 * lambda);
        if t >= extinction {
            return Err(FlowError::PastExtinction { t, extinction });
        }
    }
    Ok(1.0 - 2.0 * lambda * t)
}

/// Radius of the round n-sphere at flow time `t`:
/// `r(t) = sqrt(R0^2 - 2 (n-1) t)`, extinct at `T = R0^2 / (2(n-1))`.
pub fn sphere_radius(r0: f64, n: u32, t: f64) -> Result<f64> {
    if n < 2 {
        return Err(FlowError::BadDimension(n));
    }
    let extinction = r0 * r0 / (2.0 * (n - 1) as f64);
    if t > extinction {
        return Err(FlowError::PastExtinction { t, extinction });
    }
    Ok((r0 * r0 - 2.0 * (n - 1) as f64 * t).max(0.0).sqrt())
}

/// Extinction time of the shrinking round n-sphere.
pub fn sphere_extinction_time(r0: f64, n: u32) -> Result<f64> {
    if n < 2 {
        return Err(FlowError::BadDimension(n));
    }
    Ok(r0 * r0 / (2.0 * (n - 1) as f64))
}

/// Radius of hyperbolic space at flow time `t >= 0`:
/// `r(t) = sqrt(R0^2 + 2 (n-1) t)`, expanding forever.
pub fn hyperbolic_radius(r0: f64, n: u32, t: f64) -> Result<f64> {
    if n < 2 {
        return Err(FlowError::BadDimension(n));
    }
    if t < 0.0 {
        return Err(FlowError::NegativeTime(t));
    }
    Ok((r0 * r0 + 2.0 * (n - 1) as f64 * t).sqrt())
}

/// A homothetic solution together with its lifespan.
#[derive(Debug, Clone, PartialEq)]
pub enum HomothetySolution {
    /// `Ric = lambda g`, `lambda > 0`: shrinks, extinct at `1/(2 lambda)`.
    EinsteinPositive { lambda: f64 },
    /// `Ric = -lambda g`, `lambda > 0`: expands forever, `rho^2 = 1 + 2 lambda t`.
    EinsteinNegative { lambda: f64 },
    /// Round n-sphere of initial radius `r0`.
    Sphere { r0: f64, n: u32 },
    /// Hyperbolic n-space scaled to initial radius `r0`.
    Hyperbolic { r0: f64, n: u32 },
}

impl HomothetySolution {
    pub fn extinction_time(&self) -> Option<f64> {
        match *self {
            HomothetySolution::EinsteinPositive { lambda } => Some(1.0 / (2.0 * lambda)),
            HomothetySolution::EinsteinNegative { .. } => None,
            HomothetySolution::Sphere { r0, n } => Some(r0 * r0 / (2.0 * (n - 1) as f64)),
            HomothetySolution::Hyperbolic { .. } => None,
        }
    }

    /// The scale observable: `rho^2(t)` for Einstein metrics, `r(t)` for the
    /// sphere and hyperbolic families.
    pub fn eval(&self, t: f64) -> Result<f64> {
        match *self {
            HomothetySolution::EinsteinPositive { lambda } => einstein_homothety(lambda, t),
            HomothetySolution::EinsteinNegative { lambda } => einstein_homothety(-lambda, t),
            HomothetySolution::Sphere { r0, n } => sphere_radius(r0, n, t),
            HomothetySolution::Hyperbolic { r0, n } => hyperbolic_radius(r0, n, t),
        }
    }
}
