//! The linearized operator and its preconditioned conjugate-gradient solve.
//!
//! Each Newton step needs `Lap_{g~} du = -residual` on the mean-zero
//! subspace. The operator application is one spectral complex Hessian plus a
//! pointwise trace against the cached inverse metric; the preconditioner is
//! the exact inverse of the flat quarter-Laplacian (a single filtered FFT).
//!
//! The conjugate-gradient inner product is weighted by `det g~`: the metric
//! Laplacian is self-adjoint with respect to its own volume form (not the
//! flat one), and using the matching inner product keeps the iteration a
//! genuine CG — in the unweighted product the asymmetry is of the order of
//! the metric deviation and stalls the residual far above round-off. The
//! weighted formulation also makes the solvability condition exactly the
//! `dV~`-mean-zero bookkeeping the normalization update maintains.

use grid_tensor::{solve_poisson_flat, ScalarField};
use kahler_geometry::{
    complex_hessian, ComplexTorusGrid, HermitianMatrixField, HermitianMetricField,
};

use crate::error::{MaError, Result};

/// `Lap_{g~} h = g~^{i j-bar} h_{i j-bar}` with the inverse metric and the
/// volume weights computed once and reused across CG iterations.
pub(crate) struct MetricLaplacian {
    grid: ComplexTorusGrid,
    inv: HermitianMatrixField,
    weight: Vec<f64>,
    wsum: f64,
}

impl MetricLaplacian {
    pub fn new(g: &HermitianMetricField) -> MetricLaplacian {
        let weight = g.det().as_slice().to_vec();
        let wsum = weight.iter().sum();
        MetricLaplacian {
            grid: g.grid().clone(),
            inv: g.inverse(),
            weight,
            wsum,
        }
    }

    pub fn apply(&self, h: &ScalarField) -> Result<ScalarField> {
        let hess = complex_hessian(&self.grid, h)?;
        let n = self.grid.n();
        let nn = n * n;
        let iv = self.inv.data();
        let hv = hess.data();
        let vals: Vec<f64> = (0..self.grid.len())
            .map(|p| {
                let mut acc = 0.0;
                for i in 0..n {
                    for j in 0..n {
                        let a = iv[p * nn + i * n + j];
                        let b = hv[p * nn + j * n + i];
                        acc += a.re * b.re - a.im * b.im;
                    }
                }
                acc
            })
            .collect();
        Ok(ScalarField::from_flat(self.grid.real_grid(), vals)?)
    }

    fn wdot(&self, a: &[f64], b: &[f64]) -> f64 {
        a.iter()
            .zip(b)
            .zip(&self.weight)
            .map(|((x, y), w)| x * y * w)
            .sum()
    }

    /// Remove the `dV~`-weighted mean — the component along the kernel of
    /// the operator, orthogonal in the weighted product.
    fn project(&self, v: &mut [f64]) {
        let mean = self.wdot(v, &vec![1.0; v.len()]) / self.wsum;
        for x in v {
            *x -= mean;
        }
    }
}

/// Solve `(-Lap_{g~}) x = b`, conjugate gradients in the `dV~`-weighted
/// inner product, preconditioned by the flat inverse. `b` is projected to
/// weighted mean zero first (the solvability constant was already absorbed
/// by the normalization update; the projection removes its round-off
/// shadow). The returned `x` is recentered to plain mean zero — the gauge
/// the potential lives in.
pub(crate) fn solve_mean_zero(
    lap: &MetricLaplacian,
    b: &ScalarField,
    rel_tol: f64,
    max_iters: usize,
) -> Result<ScalarField> {
    let grid = b.grid().clone();
    let mut rhs = b.as_slice().to_vec();
    lap.project(&mut rhs);
    let norm_b = lap.wdot(&rhs, &rhs).sqrt();
    if norm_b == 0.0 {
        return Ok(ScalarField::zeros(&grid));
    }

    // M r = S(w r), with S the flat quarter-Laplacian inverse: self-adjoint
    // and positive in the weighted product on the projected subspace, and it
    // reduces to S itself as the metric flattens.
    let precond = |lap: &MetricLaplacian, r: &[f64]| -> Result<Vec<f64>> {
        let wr: Vec<f64> = r.iter().zip(&lap.weight).map(|(v, w)| v * w).collect();
        let field = ScalarField::from_flat(&grid, wr)?;
        let mut z = solve_poisson_flat(&field, -0.25).as_slice().to_vec();
        lap.project(&mut z);
        Ok(z)
    };

    let mut x = vec![0.0; rhs.len()];
    let mut r = rhs;
    let mut z = precond(lap, &r)?;
    let mut p = z.clone();
    let mut rz = lap.wdot(&r, &z);

    for iter in 0..max_iters {
        let rnorm = lap.wdot(&r, &r).sqrt();
        if rnorm <= rel_tol * norm_b {
            return Ok(ScalarField::from_flat(&grid, x)?.recentered());
        }
        let p_field = ScalarField::from_flat(&grid, p.clone())?;
        let mut q: Vec<f64> = lap
            .apply(&p_field)?
            .as_slice()
            .iter()
            .map(|v| -v)
            .collect();
        lap.project(&mut q);
        let pq = lap.wdot(&p, &q);
        if !(pq > 0.0) || !pq.is_finite() {
            // Curvature of the quadratic model lost positivity: the metric
            // is effectively on the cone boundary at this resolution.
            return Err(MaError::SolverStagnation {
                residual: rnorm / norm_b,
                iterations: iter,
            });
        }
        let alpha = rz / pq;
        for k in 0..x.len() {
            x[k] += alpha * p[k];
            r[k] -= alpha * q[k];
        }
        z = precond(lap, &r)?;
        let rz_new = lap.wdot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for k in 0..p.len() {
            p[k] = z[k] + beta * p[k];
        }
    }
    Err(MaError::SolverStagnation {
        residual: lap.wdot(&r, &r).sqrt() / norm_b,
        iterations: max_iters,
    })
}
