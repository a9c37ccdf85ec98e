//! Hermitian matrix fields over a complex torus and the small dense complex
//! routines (Cholesky, determinant, inverse) they need per point.

use num_complex::Complex64;

use grid_tensor::ScalarField;

use crate::error::{KahlerError, Result};
use crate::grid::ComplexTorusGrid;

/// Dense helpers for Hermitian positive definite matrices of dimension <= 4,
/// row-major `Complex64` storage.
pub mod dense_c {
    use num_complex::Complex64;

    /// Cholesky factorization `A = L L*` with real positive diagonal.
    /// On failure returns the offending pivot value (real part).
    pub fn cholesky(a: &[Complex64], d: usize, l: &mut [Complex64]) -> std::result::Result<(), f64> {
        l[..d * d].fill(Complex64::new(0.0, 0.0));
        for i in 0..d {
            for j in 0..=i {
                let mut s = a[i * d + j];
                for k in 0..j {
                    s -= l[i * d + k] * l[j * d + k].conj();
                }
                if i == j {
                    let pivot = s.re;
                    if !(pivot > 0.0) || !pivot.is_finite() {
                        return Err(pivot);
                    }
                    l[i * d + i] = Complex64::new(pivot.sqrt(), 0.0);
                } else {
                    l[i * d + j] = s / l[j * d + j].re;
                }
            }
        }
        Ok(())
    }

    /// Determinant of a Hermitian positive definite matrix (always real
    /// positive); fails with the offending pivot when not PD.
    pub fn hermitian_det(a: &[Complex64], d: usize) -> std::result::Result<f64, f64> {
        let mut l = [Complex64::new(0.0, 0.0); 16];
        cholesky(a, d, &mut l)?;
        let mut det = 1.0;
        for i in 0..d {
            let p = l[i * d + i].re;
            det *= p * p;
        }
        Ok(det)
    }

    /// Inverse of a Hermitian positive definite matrix via its Cholesky
    /// factor; the result is Hermitian.
    pub fn hermitian_inverse(
        a: &[Complex64],
        d: usize,
        out: &mut [Complex64],
    ) -> std::result::Result<(), f64> {
        let mut l = [Complex64::new(0.0, 0.0); 16];
        cholesky(a, d, &mut l)?;
        // Solve L L* X = e_k column by column.
        let mut col = [Complex64::new(0.0, 0.0); 4];
        for k in 0..d {
            for i in 0..d {
                col[i] = if i == k {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                };
            }
            // forward: L y = e_k
            for i in 0..d {
                let mut s = col[i];
                for j in 0..i {
                    s -= l[i * d + j] * col[j];
                }
                col[i] = s / l[i * d + i].re;
            }
            // backward: L* x = y
            for i in (0..d).rev() {
                let mut s = col[i];
                for j in i + 1..d {
                    s -= l[j * d + i].conj() * col[j];
                }
                col[i] = s / l[i * d + i].re;
            }
            for i in 0..d {
                out[i * d + k] = col[i];
            }
        }
        // Symmetrize away round-off so downstream traces are exactly real.
        for i in 0..d {
            for j in 0..i {
                let avg = 0.5 * (out[i * d + j] + out[j * d + i].conj());
                out[i * d + j] = avg;
                out[j * d + i] = avg.conj();
            }
            out[i * d + i] = Complex64::new(out[i * d + i].re, 0.0);
        }
        Ok(())
    }

    /// Smallest eigenvalue of a Hermitian matrix through its real symmetric
    /// embedding `[[Re A, -Im A], [Im A, Re A]]` (each complex eigenvalue
    /// appears twice; the minimum is unchanged).
    pub fn min_eigenvalue(a: &[Complex64], d: usize) -> f64 {
        let m = 2 * d;
        let mut real = vec![0.0; m * m];
        for i in 0..d {
            for j in 0..d {
                let v = a[i * d + j];
                real[i * m + j] = v.re;
                real[(i + d) * m + j + d] = v.re;
                real[i * m + j + d] = -v.im;
                real[(i + d) * m + j] = v.im;
            }
        }
        let (values, _) = grid_tensor::dense::sym_eigen(&real, m);
        values[0]
    }
}

/// A per-point `n x n` complex matrix field, Hermitian at every grid point.
///
/// Storage is point-major row-major: entry `(i,j)` of point `p` lives at
/// `p*n*n + i*n + j`.
#[derive(Debug, Clone)]
pub struct HermitianMatrixField {
    grid: ComplexTorusGrid,
    data: Vec<Complex64>,
}

impl HermitianMatrixField {
    /// Validate Hermiticity (`1e-12` relative to the sup of the data) and
    /// wrap. The error reports the first offending grid point and entry.
    pub fn new(grid: &ComplexTorusGrid, data: Vec<Complex64>) -> Result<Self> {
        let n = grid.n();
        let npts = grid.len();
        if data.len() != npts * n * n {
            return Err(KahlerError::GridMismatch);
        }
        let scale = data
            .iter()
            .map(|z| z.norm_sqr())
            .fold(0.0f64, f64::max)
            .sqrt()
            .max(1.0);
        for p in 0..npts {
            let m = &data[p * n * n..(p + 1) * n * n];
            for i in 0..n {
                for j in 0..=i {
                    let defect = (m[i * n + j] - m[j * n + i].conj()).norm();
                    if defect > 1e-12 * scale {
                        return Err(KahlerError::NotHermitian {
                            index: grid.real_grid().unravel(p),
                            i,
                            j,
                        });
                    }
                }
            }
        }
        Ok(HermitianMatrixField {
            grid: grid.clone(),
            data,
        })
    }

    /// Build from the upper triangle: `f(coords, i, j)` is consulted for
    /// `i <= j` and mirrored conjugately (diagonal imaginary parts dropped).
    pub fn from_fn(
        grid: &ComplexTorusGrid,
        mut f: impl FnMut(&[f64], usize, usize) -> Complex64,
    ) -> Self {
        let n = grid.n();
        let real = grid.real_grid();
        let npts = grid.len();
        let mut data = vec![Complex64::new(0.0, 0.0); npts * n * n];
        let tables: Vec<Vec<f64>> = (0..real.dims()).map(|a| real.coords(a)).collect();
        let mut x = vec![0.0; real.dims()];
        let shape = real.shape().to_vec();
        let mut idx = vec![0usize; shape.len()];
        for p in 0..npts {
            let mut rem = p;
            for a in (0..shape.len()).rev() {
                idx[a] = rem % shape[a];
                rem /= shape[a];
            }
            for (a, &i) in idx.iter().enumerate() {
                x[a] = tables[a][i];
            }
            for i in 0..n {
                for j in i..n {
                    let mut v = f(&x, i, j);
                    if i == j {
                        v = Complex64::new(v.re, 0.0);
                    }
                    data[p * n * n + i * n + j] = v;
                    data[p * n * n + j * n + i] = v.conj();
                }
            }
        }
        HermitianMatrixField {
            grid: grid.clone(),
            data,
        }
    }

    pub fn zeros(grid: &ComplexTorusGrid) -> Self {
        HermitianMatrixField {
            grid: grid.clone(),
            data: vec![Complex64::new(0.0, 0.0); grid.len() * grid.n() * grid.n()],
        }
    }

    pub fn grid(&self) -> &ComplexTorusGrid {
        &self.grid
    }

    pub fn n(&self) -> usize {
        self.grid.n()
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub(crate) fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    /// Matrix at grid point `p` (row-major slice of length `n*n`).
    pub fn point(&self, p: usize) -> &[Complex64] {
        let nn = self.grid.n() * self.grid.n();
        &self.data[p * nn..(p + 1) * nn]
    }

    /// Real part of entry `(i,j)` as a scalar field.
    pub fn comp_re(&self, i: usize, j: usize) -> Result<ScalarField> {
        self.comp_part(i, j, |z| z.re)
    }

    /// Imaginary part of entry `(i,j)` as a scalar field.
    pub fn comp_im(&self, i: usize, j: usize) -> Result<ScalarField> {
        self.comp_part(i, j, |z| z.im)
    }

    fn comp_part(&self, i: usize, j: usize, part: impl Fn(Complex64) -> f64) -> Result<ScalarField> {
        let n = self.grid.n();
        if i >= n || j >= n {
            return Err(KahlerError::GridMismatch);
        }
        let nn = n * n;
        let vals: Vec<f64> = (0..self.grid.len())
            .map(|p| part(self.data[p * nn + i * n + j]))
            .collect();
        Ok(ScalarField::from_flat(self.grid.real_grid(), vals)?)
    }

    pub fn add(&self, other: &HermitianMatrixField) -> Result<HermitianMatrixField> {
        if self.grid != other.grid {
            return Err(KahlerError::GridMismatch);
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + b)
            .collect();
        Ok(HermitianMatrixField {
            grid: self.grid.clone(),
            data,
        })
    }

    pub fn sub(&self, other: &HermitianMatrixField) -> Result<HermitianMatrixField> {
        if self.grid != other.grid {
            return Err(KahlerError::GridMismatch);
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a - b)
            .collect();
        Ok(HermitianMatrixField {
            grid: self.grid.clone(),
            data,
        })
    }

    pub fn scaled(&self, c: f64) -> HermitianMatrixField {
        HermitianMatrixField {
            grid: self.grid.clone(),
            data: self.data.iter().map(|z| z * c).collect(),
        }
    }

    pub fn sup_norm(&self) -> f64 {
        self.data
            .iter()
            .map(|z| z.norm_sqr())
            .fold(0.0f64, f64::max)
            .sqrt()
    }

    pub fn sup_distance(&self, other: &HermitianMatrixField) -> Result<f64> {
        if self.grid != other.grid {
            return Err(KahlerError::GridMismatch);
        }
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm_sqr())
            .fold(0.0f64, f64::max)
            .sqrt())
    }

    /// Smallest eigenvalue over all grid points.
    pub fn min_eigenvalue(&self) -> f64 {
        let n = self.grid.n();
        let nn = n * n;
        (0..self.grid.len())
            .map(|p| dense_c::min_eigenvalue(&self.data[p * nn..(p + 1) * nn], n))
            .fold(f64::INFINITY, f64::min)
    }
}

/// A Hermitian matrix field that is additionally positive definite at every
/// point — an admissible Kähler metric in components.
#[derive(Debug, Clone)]
pub struct HermitianMetricField {
    field: HermitianMatrixField,
}

impl HermitianMetricField {
    /// Validate positive definiteness per point (Cholesky, not determinant
    /// sign: `det > 0` does not imply PD for `n >= 2`).
    pub fn new(field: HermitianMatrixField) -> Result<Self> {
        let n = field.n();
        let nn = n * n;
        let mut l = [Complex64::new(0.0, 0.0); 16];
        for p in 0..field.grid().len() {
            if let Err(pivot) = dense_c::cholesky(&field.data()[p * nn..(p + 1) * nn], n, &mut l) {
                return Err(KahlerError::NotAdmissible {
                    index: field.grid().real_grid().unravel(p),
                    pivot,
                });
            }
        }
        Ok(HermitianMetricField { field })
    }

    /// The flat background `g = delta` (the `c_1 = 0` reference on the torus).
    pub fn flat(grid: &ComplexTorusGrid) -> Self {
        let n = grid.n();
        let mut field = HermitianMatrixField::zeros(grid);
        let nn = n * n;
        for p in 0..grid.len() {
            for i in 0..n {
                field.data_mut()[p * nn + i * n + i] = Complex64::new(1.0, 0.0);
            }
        }
        HermitianMetricField { field }
    }

    pub fn field(&self) -> &HermitianMatrixField {
        &self.field
    }

    pub fn grid(&self) -> &ComplexTorusGrid {
        self.field.grid()
    }

    pub fn n(&self) -> usize {
        self.field.n()
    }

    /// Pointwise determinant (real and strictly positive).
    pub fn det(&self) -> ScalarField {
        let n = self.n();
        let nn = n * n;
        let vals: Vec<f64> = (0..self.grid().len())
            .map(|p| {
                dense_c::hermitian_det(&self.field.data()[p * nn..(p + 1) * nn], n)
                    .expect("validated positive definite")
            })
            .collect();
        ScalarField::from_flat(self.grid().real_grid(), vals).expect("shape preserved")
    }

    /// Pointwise inverse `g^{ij-bar}` (Hermitian, positive definite).
    pub fn inverse(&self) -> HermitianMatrixField {
        let n = self.n();
        let nn = n * n;
        let mut data = vec![Complex64::new(0.0, 0.0); self.field.data().len()];
        for p in 0..self.grid().len() {
            dense_c::hermitian_inverse(
                &self.field.data()[p * nn..(p + 1) * nn],
                n,
                &mut data[p * nn..(p + 1) * nn],
            )
            .expect("validated positive definite");
        }
        HermitianMatrixField {
            grid: self.grid().clone(),
            data,
        }
    }
}
