//! Kähler geometry on complex tori, spectral and exact.
//!
//! The torus `C^n / (Z + iZ)^n` is sampled as a real periodic grid with `2n`
//! unit-period axes interleaved as `(x_j, y_j)`, `z_j = x_j + i y_j`. On it
//! this crate provides:
//!
//! * [`HermitianMatrixField`] / [`HermitianMetricField`] — per-point complex
//!   matrix fields with validated Hermiticity and (for metrics) positive
//!   definiteness; failures report the offending grid index, because losing
//!   admissibility is a meaningful event for the solvers built on top.
//! * [`complex_hessian`] — the Wirtinger Hessian `u_{i j-bar}` via FFT
//!   differentiation, exactly Hermitian because mixed spectral partials
//!   commute.
//! * [`KahlerPotential`] and its operators: candidate metric assembly
//!   `g0 + u_{i j-bar}` ([`potential_to_metric`]), the Monge–Ampère density
//!   `det g~ / det g0` ([`ma_operator`]), the metric Laplacian
//!   ([`kahler_laplacian`]), and the Ricci tensor `-dd-bar log det g`
//!   ([`ricci`]).
//! * [`real_metric`] — the induced real Riemannian metric on the `2n` real
//!   axes, connecting to the real tensor machinery (Laplace–Beltrami,
//!   spectral-gap estimates); the flat Hermitian metric doubles to `2 I`.
//! * [`fubini`] — closed-form Fubini–Study geometry on the standard chart of
//!   `CP^n` plus a high-order finite-difference Wirtinger engine, used as an
//!   independent oracle for the spectral pipeline.
//! * [`dump`] — a total parser/serializer for Hermitian fields, and
//!   [`synth`] — seeded admissible potentials.
//!
//! # Sign convention
//!
//! Every Laplacian here is the analyst's one, `Lap f = g^{i j-bar} f_{i j-bar}`
//! (non-positive spectrum; `(1/4) * d^2/dx^2`-like on the flat background).
//! A-priori-estimate literature often writes the operator with the opposite
//! sign; callers translating bounds from that convention negate once at the
//! boundary, never inside this crate.

pub mod dump;
mod error;
pub mod fubini;
mod grid;
mod herm;
mod hessian;
mod potential;
pub mod synth;

pub use error::{KahlerError, Result};
pub use grid::ComplexTorusGrid;
pub use herm::{dense_c, HermitianMatrixField, HermitianMetricField};
pub use hessian::{complex_hessian, hessian_multiplier, hessian_of_spectrum};
pub use potential::{
    admissibility_margin, kahler_laplacian, ma_operator, potential_to_metric, real_metric,
    relative_eigenvalue_range, relative_trace, ricci, KahlerPotential,
};
