//! Riemannian volume elements and integration over the periodic grid.
//!
//! The trapezoid rule on a periodic grid is spectrally accurate, so
//! `integrate` is just `sum f sqrt(det g)` times the cell volume.

use crate::error::{GridError, Result};
use crate::field::ScalarField;
use crate::grid::unravel;
use crate::tensor::{linalg, MetricField};

/// `sqrt(det g)` as a scalar field.
pub fn volume_element(g: &MetricField) -> Result<ScalarField> {
    let d = g.dim();
    let ct = d * d;
    let grid = g.grid().clone();
    let src = g.as_slice();
    let mut out = Vec::with_capacity(grid.len());
    for (p, chunk) in src.chunks_exact(ct).enumerate() {
        match linalg::spd_sqrt_det(chunk, d) {
            Ok(v) => out.push(v),
            Err(pivot) => {
                return Err(GridError::NotPositiveDefinite {
                    index: unravel(grid.shape(), p),
                    pivot,
                })
            }
        }
    }
    ScalarField::from_values(
        &grid,
        ndarray::ArrayD::from_shape_vec(ndarray::IxDyn(grid.shape()), out).expect("length"),
    )
}

/// `Int f dmu = sum f sqrt(det g) * cell_volume`.
pub fn integrate(f: &ScalarField, g: &MetricField) -> Result<f64> {
    if f.grid() != g.grid() {
        return Err(GridError::GridMismatch);
    }
    let vol = volume_element(g)?;
    let cell = f.grid().cell_volume();
    let mut acc = 0.0;
    for (a, b) in f.as_slice().iter().zip(vol.as_slice()) {
        acc += a * b;
    }
    Ok(acc * cell)
}

/// Total Riemannian volume of the grid torus.
pub fn total_volume(g: &MetricField) -> Result<f64> {
    let one = ScalarField::constant(g.grid(), 1.0);
    integrate(&one, g)
}
