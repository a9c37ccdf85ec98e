//! Riemann, Ricci, and scalar curvature, plus the Laplace-Beltrami operator.
//!
//! Conventions: `R^l_{ijk} = d_i Gamma^l_{jk} - d_j Gamma^l_{ik}
//! + Gamma^l_{ip} Gamma^p_{jk} - Gamma^l_{jp} Gamma^p_{ik}` with component
//! order `[l][i][j][k]`, and `R_{jk} = R^i_{ijk}`. With this sign the round
//! sphere has positive scalar curvature, and in two dimensions
//! `R = -2 e^{-2w} Lap_euclid(w)` for `g = e^{2w} delta`.

use crate::error::Result;
use crate::field::ScalarField;
use crate::spectral::derivative;
use crate::tensor::{christoffel, metric_inverse, MetricField, TensorField};

/// Full curvature package of a metric: `(riemann, ricci, scalar)`.
pub fn curvature(g: &MetricField) -> Result<(TensorField, TensorField, ScalarField)> {
    let d = g.dim();
    let grid = g.grid().clone();
    let npts = grid.len();
    let gamma = christoffel(g)?;
    let ginv = metric_inverse(g)?;

    // dgamma[i][l][j][k] = d_i Gamma^l_{jk}; only j <= k stored (symmetry).
    let mut dgamma = vec![vec![vec![vec![None::<ScalarField>; d]; d]; d]; d];
    for l in 0..d {
        for j in 0..d {
            for k in j..d {
                let comp = gamma.comp_field(&[l, j, k])?;
                for i in 0..d {
                    dgamma[i][l][j][k] = Some(derivative(&comp, i, 1)?);
                }
            }
        }
    }
    let dg_at = |i: usize, l: usize, j: usize, k: usize| -> &[f64] {
        let (j, k) = if j <= k { (j, k) } else { (k, j) };
        dgamma[i][l][j][k].as_ref().expect("filled").as_slice()
    };

    let mut riemann = TensorField::zeros(&grid, 1, 3);
    let ct = d * d * d * d;
    {
        let gsl = gamma.values().as_slice().expect("standard layout");
        let dst = riemann.as_mut_slice();
        let d3 = d * d * d;
        for l in 0..d {
            for i in 0..d {
                for j in 0..d {
                    for k in 0..d {
                        let off = ((l * d + i) * d + j) * d + k;
                        let a = dg_at(i, l, j, k);
                        let b = dg_at(j, l, i, k);
                        for p in 0..npts {
                            let base = p * d3;
                            let mut quad = 0.0;
                            for q in 0..d {
                                quad += gsl[base + (l * d + i) * d + q] * gsl[base + (q * d + j) * d + k]
                                    - gsl[base + (l * d + j) * d + q] * gsl[base + (q * d + i) * d + k];
                            }
                            dst[p * ct + off] = a[p] - b[p] + quad;
                        }
                    }
                }
            }
        }
    }

    let ricci = riemann.trace(0, 0)?;

    let mut scalar_values = vec![0.0; npts];
    {
        let inv = ginv.tensor().values().as_slice().expect("standard layout");
        let ric = ricci.values().as_slice().expect("standard layout");
        let dd = d * d;
        for (p, out) in scalar_values.iter_mut().enumerate() {
            let mut acc = 0.0;
            for j in 0..d {
                for k in 0..d {
                    acc += inv[p * dd + j * d + k] * ric[p * dd + j * d + k];
                }
            }
            *out = acc;
        }
    }
    let scalar = ScalarField::from_values(
        &grid,
        ndarray::ArrayD::from_shape_vec(ndarray::IxDyn(grid.shape()), scalar_values).expect("length"),
    )?;

    Ok((riemann, ricci, scalar))
}

/// `Lap_g f = g^{ij} (d_i d_j f - Gamma^k_{ij} d_k f)`.
pub fn laplace_beltrami(g: &MetricField, f: &ScalarField) -> Result<ScalarField> {
    if g.grid() != f.grid() {
        return Err(crate::error::GridError::GridMismatch);
    }
    let d = g.dim();
    let grid = g.grid().clone();
    let npts = grid.len();
    let ginv = metric_inverse(g)?;
    let gamma = christoffel(g)?;

    let first: Vec<ScalarField> = (0..d).map(|a| derivative(f, a, 1)).collect::<Result<_>>()?;
    let mut hess = vec![vec![None::<ScalarField>; d]; d];
    for i in 0..d {
        for j in i..d {
            let h = derivative(&first[i], j, 1)?;
            hess[j][i] = Some(h.clone());
            hess[i][j] = Some(h);
        }
    }

    let mut out = vec![0.0; npts];
    {
        let inv = ginv.tensor().values().as_slice().expect("standard layout");
        let gsl = gamma.values().as_slice().expect("standard layout");
        let dd = d * d;
        let d3 = d * d * d;
        let firsts: Vec<&[f64]> = first.iter().map(|f| f.as_slice()).collect();
        let hs: Vec<Vec<&[f64]>> = hess
            .iter()
            .map(|row| row.iter().map(|h| h.as_ref().expect("filled").as_slice()).collect())
            .collect();
        for (p, acc) in out.iter_mut().enumerate() {
            let mut s = 0.0;
            for i in 0..d {
                for j in 0..d {
                    let h = hs[i][j][p];
                    let mut corr = 0.0;
                    for k in 0..d {
                        corr += gsl[p * d3 + (k * d + i) * d + j] * firsts[k][p];
                    }
                    s += inv[p * dd + i * d + j] * (h - corr);
                }
            }
            *acc = s;
        }
    }
    ScalarField::from_values(
        &grid,
        ndarray::ArrayD::from_shape_vec(ndarray::IxDyn(grid.shape()), out).expect("length"),
    )
}
