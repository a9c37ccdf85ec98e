//! Ricci flow on real Riemannian tori: exact homothetic solutions, soliton
//! residuals, first-variation checks, and a spectral conformal flow on
//! surfaces.
//!
//! The flow convention throughout is `d/dt g_{ij} = -2 R_{ij}`, so round
//! spheres shrink (`sphere_radius`) and hyperbolic metrics expand
//! (`hyperbolic_radius`). The normalized variant rescales to fixed volume;
//! [`normalized_rescale`] converts an unnormalized volume history into the
//! matching scale factors.
//!
//! On a flat torus every conformal factor evolves by
//! `dw/dt = e^{-2w} lap w` ([`run_surface_flow`]); Gauss–Bonnet makes the
//! average curvature vanish identically there, so the unnormalized and
//! normalized flows coincide and the total area is a conserved quantity —
//! the monitors track it as a discretization diagnostic.
//!
//! [`variation_check`] validates the standard first-variation formulas
//! (inverse metric through total scalar curvature) against central
//! differences in an artificial deformation parameter, which is the
//! foundation the evolution equations above rest on.

mod error;
mod homothety;
mod rescale;
mod soliton;
mod surface;
mod variation;

pub use error::{FlowError, Result};
pub use homothety::{
    einstein_homothety, hyperbolic_radius, sphere_extinction_time, sphere_radius,
    HomothetySolution,
};
pub use rescale::normalized_rescale;
pub use soliton::soliton_residual;
pub use surface::{
    conformal_scalar_curvature, conformal_surface_flow, run_surface_flow, SurfaceFlowOptions,
    SurfaceFlowRun, SurfaceMonitors, SurfaceRow, SurfaceScheme,
};
pub use variation::{variation_check, VariationFormula, VariationInput, ALL_FORMULAS};
