//! Serialization for Hermitian matrix fields, layered on the scalar grid
//! dump format.
//!
//! Layout: the upper triangle (including the diagonal) in row-major pair
//! order `(0,0), (0,1), ..., (0,n-1), (1,1), ..., (n-1,n-1)`; each pair
//! contributes two scalar components, real part then imaginary part, so a
//! field of complex dimension `n` serializes as `n(n+1)` components. The
//! diagonal imaginary components are stored too (they are zero for valid
//! data) so that corrupted input fails the Hermiticity check instead of
//! being silently repaired.

use std::fs;
use std::path::Path;

use num_complex::Complex64;

use grid_tensor::dump as scalar_dump;

use crate::error::{KahlerError, Result};
use crate::grid::ComplexTorusGrid;
use crate::herm::HermitianMatrixField;

/// Serialize to bytes.
pub fn encode_hermitian(field: &HermitianMatrixField) -> Result<Vec<u8>> {
    let n = field.n();
    let nn = n * n;
    let npts = field.grid().len();
    let data = field.data();
    let mut components: Vec<Vec<f64>> = Vec::with_capacity(n * (n + 1));
    for i in 0..n {
        for j in i..n {
            let mut re = Vec::with_capacity(npts);
            let mut im = Vec::with_capacity(npts);
            for p in 0..npts {
                let v = data[p * nn + i * n + j];
                re.push(v.re);
                im.push(v.im);
            }
            components.push(re);
            components.push(im);
        }
    }
    let refs: Vec<&[f64]> = components.iter().map(|c| c.as_slice()).collect();
    Ok(scalar_dump::encode(field.grid().real_grid(), &refs)?)
}

/// Parse from raw bytes. Total on arbitrary input: malformed headers, bad
/// component counts, odd axis counts, non-unit periods, and non-Hermitian
/// payloads all come back as errors, never panics.
pub fn parse_hermitian(bytes: &[u8]) -> Result<HermitianMatrixField> {
    let (real, comps) = scalar_dump::parse(bytes)?;
    let grid = ComplexTorusGrid::from_real(real)?;
    let n = grid.n();
    let expected = n * (n + 1);
    if comps.len() != expected {
        return Err(KahlerError::ComponentCount {
            got: comps.len(),
            expected,
        });
    }
    let npts = grid.len();
    let nn = n * n;
    let mut data = vec![Complex64::new(0.0, 0.0); npts * nn];
    let mut q = 0;
    for i in 0..n {
        for j in i..n {
            let re = &comps[2 * q];
            let im = &comps[2 * q + 1];
            for p in 0..npts {
                let v = Complex64::new(re[p], im[p]);
                data[p * nn + i * n + j] = v;
                if i != j {
                    data[p * nn + j * n + i] = v.conj();
                }
            }
            q += 1;
        }
    }
    // `new` re-validates; a nonzero diagonal imaginary part lands here.
    HermitianMatrixField::new(&grid, data)
}

pub fn save_hermitian(path: impl AsRef<Path>, field: &HermitianMatrixField) -> Result<()> {
    fs::write(path, encode_hermitian(field)?).map_err(grid_tensor::GridError::from)?;
    Ok(())
}

pub fn load_hermitian(path: impl AsRef<Path>) -> Result<HermitianMatrixField> {
    parse_hermitian(&fs::read(path).map_err(grid_tensor::GridError::from)?)
}
