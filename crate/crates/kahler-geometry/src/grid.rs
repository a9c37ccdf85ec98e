use grid_tensor::PeriodicGrid;

use crate::error::{KahlerError, Result};

/// A complex torus `C^n / (Z + iZ)^n` sampled on a real periodic grid with
/// `2n` axes of unit period, paired as `(x_j, y_j)` for `z_j = x_j + i y_j`.
///
/// All holomorphic derivatives are Wirtinger combinations of real spectral
/// derivatives along these axes:
/// `d/dz_j = (d/dx_j - i d/dy_j)/2`, `d/dzbar_j = (d/dx_j + i d/dy_j)/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexTorusGrid {
    n: usize,
    real: PeriodicGrid,
}

impl ComplexTorusGrid {
    /// Square grid: `resolution` points along each of the `2n` real axes.
    pub fn new(n: usize, resolution: usize) -> Result<Self> {
        if n == 0 {
            return Err(KahlerError::ZeroDimension);
        }
        let real = PeriodicGrid::unit(&vec![resolution; 2 * n])?;
        Ok(ComplexTorusGrid { n, real })
    }

    /// Adopt an existing real grid; it must have an even axis count and unit
    /// periods.
    pub fn from_real(real: PeriodicGrid) -> Result<Self> {
        let dims = real.dims();
        if dims == 0 || dims % 2 != 0 {
            return Err(KahlerError::OddRealAxes(dims));
        }
        for (axis, &period) in real.period().iter().enumerate() {
            if period != 1.0 {
                return Err(KahlerError::BadPeriod { axis, period });
            }
        }
        Ok(ComplexTorusGrid { n: dims / 2, real })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn real_grid(&self) -> &PeriodicGrid {
        &self.real
    }

    /// Number of grid points.
    pub fn len(&self) -> usize {
        self.real.len()
    }

    pub fn is_empty(&self) -> bool {
        self.real.len() == 0
    }

    /// Real axis carrying `Re z_j`.
    pub fn x_axis(&self, j: usize) -> usize {
        debug_assert!(j < self.n);
        2 * j
    }

    /// Real axis carrying `Im z_j`.
    pub fn y_axis(&self, j: usize) -> usize {
        debug_assert!(j < self.n);
        2 * j + 1
    }
}
