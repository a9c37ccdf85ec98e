use crate::error::{GridError, Result};

/// Discretization of the flat real d-torus `R^d / (L_1 Z x ... x L_d Z)`.
///
/// Sample points on axis `a` are `x_m = m * L_a / N_a` for `m = 0..N_a`.
/// Every resolution must be even and at least 8 so that the spectral
/// wavenumber set is symmetric and the Nyquist mode is isolated.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicGrid {
    resolution: Vec<usize>,
    period: Vec<f64>,
}

impl PeriodicGrid {
    pub fn new(resolution: &[usize], period: &[f64]) -> Result<Self> {
        if resolution.len() != period.len() {
            return Err(GridError::ShapeMismatch {
                got: vec![period.len()],
                expected: vec![resolution.len()],
            });
        }
        for (axis, &n) in resolution.iter().enumerate() {
            if n < 8 || n % 2 != 0 {
                return Err(GridError::BadResolution { axis, got: n });
            }
        }
        for (axis, &p) in period.iter().enumerate() {
            if !(p.is_finite() && p > 0.0) {
                return Err(GridError::BadPeriod { axis });
            }
        }
        Ok(PeriodicGrid {
            resolution: resolution.to_vec(),
            period: period.to_vec(),
        })
    }

    /// Unit-period torus (`L_a = 1` on every axis).
    pub fn unit(resolution: &[usize]) -> Result<Self> {
        Self::new(resolution, &vec![1.0; resolution.len()])
    }

    /// Square unit torus with `dims` axes at a common resolution.
    pub fn unit_square(dims: usize, n: usize) -> Result<Self> {
        Self::unit(&vec![n; dims])
    }

    pub fn dims(&self) -> usize {
        self.resolution.len()
    }

    pub fn resolution(&self) -> &[usize] {
        &self.resolution
    }

    pub fn period(&self) -> &[f64] {
        &self.period
    }

    pub fn shape(&self) -> &[usize] {
        &self.resolution
    }

    /// Total number of sample points.
    pub fn len(&self) -> usize {
        self.resolution.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.period[axis] / self.resolution[axis] as f64
    }

    /// Volume of one grid cell, `prod_a L_a / N_a`.
    pub fn cell_volume(&self) -> f64 {
        (0..self.dims()).map(|a| self.spacing(a)).product()
    }

    /// Coordinate samples along one axis.
    pub fn coords(&self, axis: usize) -> Vec<f64> {
        let h = self.spacing(axis);
        (0..self.resolution[axis]).map(|m| m as f64 * h).collect()
    }

    /// Spectral wavenumbers along one axis in FFT storage order:
    /// `k_m = 2 pi m / L` for `m < N/2`, `2 pi (m - N) / L` for `m >= N/2`.
    /// The Nyquist slot `m = N/2` carries `+pi N / L`; derivative operators
    /// decide per order what to do with it (see `spectral`).
    pub fn wavenumbers(&self, axis: usize) -> Vec<f64> {
        let n = self.resolution[axis];
        let l = self.period[axis];
        let base = 2.0 * std::f64::consts::PI / l;
        (0..n)
            .map(|m| {
                let m = if m <= n / 2 { m as isize } else { m as isize - n as isize };
                base * m as f64
            })
            .collect()
    }

    pub(crate) fn check_axis(&self, axis: usize) -> Result<()> {
        if axis >= self.dims() {
            Err(GridError::AxisOutOfRange { axis, dims: self.dims() })
        } else {
            Ok(())
        }
    }

    /// Multi-index of a flat standard-layout point position (the inverse of
    /// row-major flattening); handy for reporting grid locations in errors.
    pub fn unravel(&self, flat: usize) -> Vec<usize> {
        unravel(self.shape(), flat)
    }
}

/// Row-major odometer over a multi-index shape; `f` receives the current
/// multi-index and the flat position (matching standard-layout storage).
pub(crate) fn for_each_index(shape: &[usize], mut f: impl FnMut(&[usize], usize)) {
    let total: usize = shape.iter().product();
    let mut idx = vec![0usize; shape.len()];
    for flat in 0..total {
        f(&idx, flat);
        for a in (0..shape.len()).rev() {
            idx[a] += 1;
            if idx[a] < shape[a] {
                break;
            }
            idx[a] = 0;
        }
    }
}

/// Decode a flat standard-layout position into a multi-index.
pub(crate) fn unravel(shape: &[usize], mut flat: usize) -> Vec<usize> {
    let mut idx = vec![0usize; shape.len()];
    for a in (0..shape.len()).rev() {
        idx[a] = flat % shape[a];
        flat /= shape[a];
    }
    idx
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_odd_and_small_resolutions() {
        assert!(PeriodicGrid::unit(&[7]).is_err());
        assert!(PeriodicGrid::unit(&[9]).is_err());
        assert!(PeriodicGrid::unit(&[4]).is_err());
        assert!(PeriodicGrid::unit(&[8]).is_ok());
    }

    #[test]
    fn rejects_bad_periods() {
        assert!(PeriodicGrid::new(&[8], &[0.0]).is_err());
        assert!(PeriodicGrid::new(&[8], &[-1.0]).is_err());
        assert!(PeriodicGrid::new(&[8], &[f64::NAN]).is_err());
    }

    #[test]
    fn spacing_is_period_over_resolution() {
        let g = PeriodicGrid::new(&[16, 32], &[2.0, 1.0]).unwrap();
        assert_eq!(g.spacing(0), 0.125);
        assert_eq!(g.spacing(1), 1.0 / 32.0);
        assert_eq!(g.cell_volume(), 0.125 / 32.0);
    }

    #[test]
    fn wavenumber_symmetry() {
        let g = PeriodicGrid::unit(&[8]).unwrap();
        let k = g.wavenumbers(0);
        let tau = 2.0 * std::f64::consts::PI;
        assert_eq!(k[0], 0.0);
        assert!((k[1] - tau).abs() < 1e-12);
        assert!((k[7] + tau).abs() < 1e-12);
        assert!((k[4] - 4.0 * tau).abs() < 1e-12); // Nyquist carries +pi N / L
    }

    #[test]
    fn odometer_matches_row_major() {
        let mut seen = Vec::new();
        for_each_index(&[2, 3], |idx, flat| seen.push((idx.to_vec(), flat)));
        assert_eq!(seen[0], (vec![0, 0], 0));
        assert_eq!(seen[1], (vec![0, 1], 1));
        assert_eq!(seen[3], (vec![1, 0], 3));
        assert_eq!(unravel(&[2, 3], 4), vec![1, 1]);
    }
}
