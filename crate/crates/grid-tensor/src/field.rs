use ndarray::{ArrayD, IxDyn};

use crate::error::{GridError, Result};
use crate::grid::{for_each_index, PeriodicGrid};

/// Real-valued samples on a [`PeriodicGrid`], stored row-major over the axes
/// in declaration order. Values are immutable by convention once a field has
/// been handed to an operation; the combinators here all allocate fresh
/// output.
#[derive(Debug, Clone)]
pub struct ScalarField {
    grid: PeriodicGrid,
    values: ArrayD<f64>,
}

impl ScalarField {
    pub fn zeros(grid: &PeriodicGrid) -> Self {
        ScalarField {
            grid: grid.clone(),
            values: ArrayD::zeros(IxDyn(grid.shape())),
        }
    }

    pub fn constant(grid: &PeriodicGrid, c: f64) -> Self {
        ScalarField {
            grid: grid.clone(),
            values: ArrayD::from_elem(IxDyn(grid.shape()), c),
        }
    }

    /// Sample an analytic function of the coordinates.
    pub fn from_fn(grid: &PeriodicGrid, f: impl Fn(&[f64]) -> f64) -> Self {
        let coords: Vec<Vec<f64>> = (0..grid.dims()).map(|a| grid.coords(a)).collect();
        let mut values = ArrayD::zeros(IxDyn(grid.shape()));
        let slice = values.as_slice_mut().expect("fresh array is standard layout");
        let mut x = vec![0.0; grid.dims()];
        for_each_index(grid.shape(), |idx, flat| {
            for (a, &i) in idx.iter().enumerate() {
                x[a] = coords[a][i];
            }
            slice[flat] = f(&x);
        });
        ScalarField { grid: grid.clone(), values }
    }

    /// Build from a flat row-major value vector.
    pub fn from_flat(grid: &PeriodicGrid, data: Vec<f64>) -> Result<Self> {
        if data.len() != grid.len() {
            return Err(GridError::ShapeMismatch {
                got: vec![data.len()],
                expected: vec![grid.len()],
            });
        }
        Ok(ScalarField {
            grid: grid.clone(),
            values: ArrayD::from_shape_vec(IxDyn(grid.shape()), data).expect("length checked"),
        })
    }

    pub fn from_values(grid: &PeriodicGrid, values: ArrayD<f64>) -> Result<Self> {
        if values.shape() != grid.shape() {
            return Err(GridError::ShapeMismatch {
                got: values.shape().to_vec(),
                expected: grid.shape().to_vec(),
            });
        }
        let values = if values.is_standard_layout() {
            values
        } else {
            values.as_standard_layout().to_owned()
        };
        Ok(ScalarField { grid: grid.clone(), values })
    }

    pub fn grid(&self) -> &PeriodicGrid {
        &self.grid
    }

    pub fn values(&self) -> &ArrayD<f64> {
        &self.values
    }

    pub fn into_values(self) -> ArrayD<f64> {
        self.values
    }

    /// Contiguous storage in row-major order.
    pub fn as_slice(&self) -> &[f64] {
        self.values.as_slice().expect("fields are standard layout")
    }

    pub(crate) fn as_mut_slice(&mut self) -> &mut [f64] {
        self.values.as_slice_mut().expect("fields are standard layout")
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Arithmetic mean over the grid (equals the normalized integral against
    /// the flat measure, exactly, by the trapezoid rule on a torus).
    pub fn mean(&self) -> f64 {
        self.as_slice().iter().sum::<f64>() / self.len() as f64
    }

    pub fn sup_norm(&self) -> f64 {
        self.as_slice().iter().fold(0.0, |m, &v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.as_slice().iter().fold(f64::INFINITY, |m, &v| m.min(v))
    }

    pub fn max(&self) -> f64 {
        self.as_slice().iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v))
    }

    /// `max - min`.
    pub fn oscillation(&self) -> f64 {
        self.max() - self.min()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        ScalarField {
            grid: self.grid.clone(),
            values: self.values.mapv(|v| f(v)),
        }
    }

    pub fn zip_map(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if self.grid != other.grid {
            return Err(GridError::GridMismatch);
        }
        let mut out = self.clone();
        let o = other.as_slice();
        for (i, v) in out.as_mut_slice().iter_mut().enumerate() {
            *v = f(*v, o[i]);
        }
        Ok(out)
    }

    pub fn scaled(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    pub fn shifted(&self, c: f64) -> Self {
        self.map(|v| v + c)
    }

    /// Subtract the grid mean (projection onto the mean-zero subspace).
    pub fn recentered(&self) -> Self {
        let m = self.mean();
        self.map(|v| v - m)
    }

    pub fn add(&self, other: &ScalarField) -> Result<Self> {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &ScalarField) -> Result<Self> {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &ScalarField) -> Result<Self> {
        self.zip_map(other, |a, b| a * b)
    }

    /// Largest absolute difference against another field.
    pub fn sup_distance(&self, other: &ScalarField) -> Result<f64> {
        Ok(self.sub(other)?.sup_norm())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn from_fn_samples_coordinates() {
        let g = PeriodicGrid::unit(&[8, 8]).unwrap();
        let f = ScalarField::from_fn(&g, |x| x[0] + 10.0 * x[1]);
        assert_eq!(f.values()[[2, 3]], 2.0 / 8.0 + 10.0 * 3.0 / 8.0);
    }

    #[test]
    fn mean_of_resolved_mode_vanishes() {
        let g = PeriodicGrid::unit(&[16]).unwrap();
        let tau = 2.0 * std::f64::consts::PI;
        let f = ScalarField::from_fn(&g, |x| (tau * x[0]).cos());
        assert!(f.mean().abs() < 1e-15);
        assert!((f.recentered().sup_norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn shape_mismatch_is_reported() {
        let g = PeriodicGrid::unit(&[8, 8]).unwrap();
        let bad = ArrayD::zeros(IxDyn(&[8, 10]));
        assert!(ScalarField::from_values(&g, bad).is_err());
    }
}
