//! Ricci-soliton residuals: how far `(g, X, lambda)` is from satisfying
//! `-2 R_{ij} = 2 lambda g_{ij} + nabla_i X_j + nabla_j X_i`.

use grid_tensor::{christoffel, covariant_derivative, curvature, MetricField, TensorField};

use crate::error::{FlowError, Result};

/// Pointwise residual `2 R_{ij} + 2 lambda g_{ij} + nabla_i X_j + nabla_j X_i`
/// (zero exactly when the triple is a soliton). `x` is a contravariant vector
/// field; it is lowered with `g` before differentiating.
pub fn soliton_residual(g: &MetricField, x: &TensorField, lambda: f64) -> Result<TensorField> {
    if x.contra() != 1 || x.co() != 0 || x.grid() != g.grid() {
        return Err(FlowError::Grid(grid_tensor::GridError::GridMismatch));
    }
    let d = g.dim();
    let grid = g.grid().clone();
    let npts = grid.len();
    let gs = g.tensor().values().as_slice().expect("standard layout");

    // Lower the index: X_j = g_{jk} X^k.
    let xs = x.values().as_slice().expect("standard layout");
    let mut lowered = vec![0.0; npts * d];
    for p in 0..npts {
        for j in 0..d {
            let mut acc = 0.0;
            for k in 0..d {
                acc += gs[p * d * d + j * d + k] * xs[p * d + k];
            }
            lowered[p * d + j] = acc;
        }
    }
    let xl = TensorField::from_flat(&grid, 0, 1, lowered)?;

    let gamma = christoffel(g)?;
    let grad_x = covariant_derivative(&gamma, &xl)?; // (grad_x)_{ij} = nabla_i X_j
    let (_, ricci, _) = curvature(g)?;

    let r = ricci.values().as_slice().expect("standard layout");
    let dx = grad_x.values().as_slice().expect("standard layout");
    let dd = d * d;
    let mut out = vec![0.0; npts * dd];
    for p in 0..npts {
        for i in 0..d {
            for j in 0..d {
                out[p * dd + i * d + j] = 2.0 * r[p * dd + i * d + j]
                    + 2.0 * lambda * gs[p * dd + i * d + j]
                    + dx[p * dd + i * d + j]
                    + dx[p * dd + j * d + i];
            }
        }
    }
    Ok(TensorField::from_flat(&grid, 0, 2, out)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use grid_tensor::{PeriodicGrid, ScalarField};
    use std::f64::consts::PI;

    #[test]
    fn flat_steady_soliton_has_zero_residual() {
        let grid = PeriodicGrid::unit(&[8, 8]).unwrap();
        let g = MetricField::flat(&grid);
        let x = TensorField::zeros(&grid, 1, 0);
        let res = soliton_residual(&g, &x, 0.0).unwrap();
        assert!(res.sup_norm() < 1e-12);
    }

    #[test]
    fn flat_metric_with_shrinker_constant_forces_2g() {
        let grid = PeriodicGrid::unit(&[8, 8]).unwrap();
        let g = MetricField::flat(&grid);
        let x = TensorField::zeros(&grid, 1, 0);
        let res = soliton_residual(&g, &x, 1.0).unwrap();
        assert!((res.sup_norm() - 2.0).abs() < 1e-12);
        assert!(res.sup_distance(&g.tensor().scaled(2.0)).unwrap() < 1e-12);
    }

    #[test]
    fn vanishing_vector_field_reduces_to_twice_ricci() {
        let grid = PeriodicGrid::unit(&[16, 16]).unwrap();
        let w = ScalarField::from_fn(&grid, |p| 0.1 * (2.0 * PI * p[0]).cos() * (2.0 * PI * p[1]).sin());
        let g = MetricField::conformal_2d(&w).unwrap();
        let x = TensorField::zeros(&grid, 1, 0);
        let res = soliton_residual(&g, &x, 0.0).unwrap();
        let (_, ricci, _) = curvature(&g).unwrap();
        assert!(res.sup_distance(&ricci.scaled(2.0)).unwrap() < 1e-11);
    }

    #[test]
    fn constant_vector_field_on_flat_torus_is_killing() {
        // nabla X = 0 for constant components on the flat torus, so only the
        // 2 lambda g term survives.
        let grid = PeriodicGrid::unit(&[8, 8]).unwrap();
        let g = MetricField::flat(&grid);
        let x = TensorField::from_fn(&grid, 1, 0, |_, c| if c[0] == 0 { 0.7 } else { -0.2 });
        let res = soliton_residual(&g, &x, 0.5).unwrap();
        assert!(res.sup_distance(&g.tensor().scaled(1.0)).unwrap() < 1e-11);
    }
}
