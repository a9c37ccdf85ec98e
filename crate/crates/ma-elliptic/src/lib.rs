//! Elliptic complex Monge–Ampère solver on the flat torus background.
//!
//! Solves `log det(g0 + dd-bar u) - log det g0 = t f + log A` for the
//! mean-zero potential `u` by a damped Newton iteration, marched along the
//! one-parameter family `t in [0, 1]` with warm starts (the classical
//! continuity method, discretized). The pieces:
//!
//! - [`normalization_constant`]: the compatibility constant
//!   `A = Vol / int e^{t f} dV` that the equation needs to admit a solution.
//! - [`newton_solve`]: one damped Newton solve at fixed `t`; each linear
//!   step is a preconditioned conjugate-gradient solve of the metric
//!   Laplacian on the mean-zero subspace, and `log A` is re-fitted to the
//!   iterate so the linearized equation stays solvable.
//! - [`continuity_solve`]: the full path march.
//! - [`a_priori_report`] / [`solution_report`]: recomputed pointwise bounds
//!   (relative trace, oscillation, eigenvalue range) and a text summary.
//!
//! Only the zero-slope branch of the equation is implemented: the constant
//! in front of `u` inside the exponential is fixed to zero, which is the
//! Ricci-flat (Calabi) case; positive slopes make the problem strictly
//! easier (the linearization gains a zeroth-order term) and are not needed
//! here.
//!
//! Admissibility — positivity of `g0 + dd-bar u` — is enforced at every
//! trial iterate by the Cholesky factorization inside the metric
//! constructor; a trial that leaves the cone is rejected and the step is
//! backtracked, halving the damping factor down to a floor of 1/64 before
//! giving up.

mod config;
mod error;
mod linear;
mod report;
mod solve;

pub use config::{uniform_steps, ContinuityConfig};
pub use error::{MaError, Result};
pub use report::{a_priori_report, solution_report, AprioriReport};
pub use solve::{continuity_solve, newton_solve, normalization_constant, MASolution, NewtonStats};
