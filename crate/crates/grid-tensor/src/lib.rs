//! Real tensor calculus on periodic grids.
//!
//! Flat-torus discretizations of Riemannian quantities: scalar and tensor
//! fields sampled on an even periodic grid, spectrally accurate derivatives,
//! Christoffel symbols and curvature, Laplace-Beltrami, volume integration,
//! and the first nonzero Laplace eigenvalue. Everything is a pure function of
//! immutable field data; metrics are validated (symmetric, positive definite
//! pointwise) when constructed, and any operation that would need to invert a
//! degenerate metric fails with the offending grid index instead of
//! regularizing.
//!
//! Sign conventions are fixed once here: eigenvalues are reported for
//! `-Lap_g` (so they are nonnegative, `0 = lambda_0 < lambda_1 <= ...`), and
//! the curvature sign is chosen so that the round sphere has positive scalar
//! curvature; see [`curvature`] for the index convention.

mod curvature;
pub mod dump;
mod eigen;
mod error;
mod field;
mod grid;
mod integrate;
mod ode;
mod spectral;
mod synth;
mod tensor;

pub use curvature::{curvature, laplace_beltrami};
pub use eigen::{lambda1, lambda1_warm};
pub use error::{GridError, Result};
pub use field::ScalarField;
pub use grid::PeriodicGrid;
pub use integrate::{integrate, total_volume, volume_element};
pub use ode::rk4_field_step;
pub use spectral::{
    derivative as spectral_derivative, fft_axis_inplace, fft_nd, ifft_nd, ifft_real_pair,
    multiplier_pair_table, solve_poisson_flat, Spectrum,
};
pub use synth::{band_limited_scalar, band_limited_symmetric, random_analytic_metric};
pub use tensor::{christoffel, covariant_derivative, metric_inverse, MetricField, TensorField};

// The small dense per-point solvers are shared with the complex-geometry
// crates, which run the same Cholesky logic over doubled real dimensions.
pub use tensor::linalg as dense;
