//! Kähler potentials over a reference metric and the operators built on
//! them: metric assembly, the Monge–Ampère density, the metric Laplacian,
//! the Ricci tensor, and the induced real Riemannian metric.

use num_complex::Complex64;

use grid_tensor::{MetricField, ScalarField, TensorField};

use crate::error::{KahlerError, Result};
use crate::grid::ComplexTorusGrid;
use crate::herm::{dense_c, HermitianMatrixField, HermitianMetricField};
use crate::hessian::complex_hessian;

/// A real potential `u` (grid mean zero, the gauge fixing) over a reference
/// metric `g0`; the candidate metric it induces is `g0 + u_{i j-bar}`.
#[derive(Debug, Clone)]
pub struct KahlerPotential {
    grid: ComplexTorusGrid,
    u: ScalarField,
    g0: HermitianMetricField,
}

impl KahlerPotential {
    /// Requires `u` mean-zero (to `1e-10` of its sup); see
    /// [`KahlerPotential::from_unnormalized`] for the recentering variant.
    pub fn new(u: ScalarField, g0: HermitianMetricField) -> Result<Self> {
        if u.grid() != g0.grid().real_grid() {
            return Err(KahlerError::GridMismatch);
        }
        let mean = u.mean();
        if mean.abs() > 1e-10 * u.sup_norm().max(1.0) {
            return Err(KahlerError::NotMeanZero(mean));
        }
        Ok(KahlerPotential {
            grid: g0.grid().clone(),
            u,
            g0,
        })
    }

    /// Subtract the grid mean, then wrap. The metric is unchanged by the
    /// shift (the Hessian kills constants); only the gauge is.
    pub fn from_unnormalized(u: ScalarField, g0: HermitianMetricField) -> Result<Self> {
        KahlerPotential::new(u.recentered(), g0)
    }

    /// Potential over the flat background.
    pub fn over_flat(u: ScalarField) -> Result<Self> {
        let grid = ComplexTorusGrid::from_real(u.grid().clone())?;
        KahlerPotential::new(u, HermitianMetricField::flat(&grid))
    }

    pub fn grid(&self) -> &ComplexTorusGrid {
        &self.grid
    }

    pub fn u(&self) -> &ScalarField {
        &self.u
    }

    pub fn background(&self) -> &HermitianMetricField {
        &self.g0
    }
}

/// `g~ = g0 + complex_hessian(u)`, failing with the first grid index where
/// the candidate leaves the positive cone (admissibility).
pub fn potential_to_metric(p: &KahlerPotential) -> Result<HermitianMetricField> {
    let h = complex_hessian(&p.grid, &p.u)?;
    let candidate = p.g0.field().add(&h)?;
    HermitianMetricField::new(candidate)
}

/// The Monge–Ampère density `det(g~) / det(g0)`, strictly positive for
/// admissible potentials.
pub fn ma_operator(p: &KahlerPotential) -> Result<ScalarField> {
    let g = potential_to_metric(p)?;
    Ok(g
        .det()
        .zip_map(&p.g0.det(), |num, den| num / den)
        .expect("same grid"))
}

/// The metric (analyst-sign) Laplacian `Lap_g f = g^{i j-bar} f_{i j-bar}`.
///
/// On the flat background this is one quarter of the real Laplacian. The
/// other sign convention (`-g^{i j-bar} d_i d_j-bar`) appears in a priori
/// estimates; every bound in this workspace is stated for the analyst sign.
pub fn kahler_laplacian(g: &HermitianMetricField, f: &ScalarField) -> Result<ScalarField> {
    if f.grid() != g.grid().real_grid() {
        return Err(KahlerError::GridMismatch);
    }
    let h = complex_hessian(g.grid(), f)?;
    let inv = g.inverse();
    let n = g.n();
    let nn = n * n;
    let hv = h.data();
    let iv = inv.data();
    // tr(g^{-1} H) with both factors Hermitian is real; the imaginary parts
    // cancel pairwise.
    let vals: Vec<f64> = (0..g.grid().len())
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
    Ok(ScalarField::from_flat(g.grid().real_grid(), vals)?)
}

/// Ricci tensor `R_{i j-bar} = -d_i d_j-bar log det g`, computed as the
/// complex Hessian of the (real) log-determinant field. Basis-invariant:
/// conjugating `g` by a constant unitary leaves `det g`, hence the result,
/// unchanged.
pub fn ricci(g: &HermitianMetricField) -> Result<HermitianMatrixField> {
    let log_det = g.det().map(f64::ln);
    Ok(complex_hessian(g.grid(), &log_det)?.scaled(-1.0))
}

/// The underlying real Riemannian metric of a Hermitian one, on the `2n`
/// real axes in `(x_j, y_j)` interleaving:
/// `G[2i,2j] = G[2i+1,2j+1] = 2 Re g_{i j-bar}`, `G[2i,2j+1] = 2 Im g_{i j-bar}`,
/// `G[2i+1,2j] = -2 Im g_{i j-bar}` (from `ds^2 = 2 Re(g_{i j-bar} dz_i dz-bar_j)`).
///
/// The flat Hermitian metric doubles to `2 * identity`, so the first real
/// Laplace eigenvalue of the unit complex torus is `2 pi^2`.
pub fn real_metric(g: &HermitianMetricField) -> Result<MetricField> {
    let n = g.n();
    let d = 2 * n;
    let nn = n * n;
    let npts = g.grid().len();
    let data = g.field().data();
    let mut vals = vec![0.0; npts * d * d];
    for p in 0..npts {
        let out = &mut vals[p * d * d..(p + 1) * d * d];
        for i in 0..n {
            for j in 0..n {
                let z = data[p * nn + i * n + j];
                out[(2 * i) * d + 2 * j] = 2.0 * z.re;
                out[(2 * i + 1) * d + 2 * j + 1] = 2.0 * z.re;
                out[(2 * i) * d + 2 * j + 1] = 2.0 * z.im;
                out[(2 * i + 1) * d + 2 * j] = -2.0 * z.im;
            }
        }
    }
    let tensor = TensorField::from_flat(g.grid().real_grid(), 0, 2, vals)
        .map_err(KahlerError::Grid)?;
    Ok(MetricField::new(tensor)?)
}

/// Smallest eigenvalue of `g~ - lower * g0` over the grid — a quantitative
/// admissibility margin used by flow monitors (`lower = 0` recovers plain
/// positive definiteness of the candidate).
pub fn admissibility_margin(p: &KahlerPotential) -> Result<f64> {
    let h = complex_hessian(&p.grid, &p.u)?;
    let candidate = p.g0.field().add(&h)?;
    Ok(candidate.min_eigenvalue())
}

/// Trace of `g~` with respect to `g`: `tr_g g~ = n + Lap_g u` pointwise (an
/// algebraic identity; both sides are computed from the same Hessian, so they
/// agree to round-off).
pub fn relative_trace(g: &HermitianMetricField, p: &KahlerPotential) -> Result<ScalarField> {
    if g.grid() != &p.grid {
        return Err(KahlerError::GridMismatch);
    }
    let gtilde = potential_to_metric(p)?;
    let inv = g.inverse();
    let n = g.n();
    let nn = n * n;
    let iv = inv.data();
    let tv = gtilde.field().data();
    let vals: Vec<f64> = (0..g.grid().len())
        .map(|pt| {
            let mut acc = 0.0;
            for i in 0..n {
                for j in 0..n {
                    let a = iv[pt * nn + i * n + j];
                    let b = tv[pt * nn + j * n + i];
                    acc += a.re * b.re - a.im * b.im;
                }
            }
            acc
        })
        .collect();
    Ok(ScalarField::from_flat(g.grid().real_grid(), vals)?)
}

/// Per-point extreme eigenvalues of `g~` relative to `g0` (the generalized
/// problem `g~ v = lambda g0 v`), reported as global (min, max). For flow
/// monitors.
pub fn relative_eigenvalue_range(
    g0: &HermitianMetricField,
    gt: &HermitianMetricField,
) -> Result<(f64, f64)> {
    if g0.grid() != gt.grid() {
        return Err(KahlerError::GridMismatch);
    }
    let n = g0.n();
    let nn = n * n;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut work = vec![Complex64::new(0.0, 0.0); nn];
    let mut prod = vec![Complex64::new(0.0, 0.0); nn];
    for p in 0..g0.grid().len() {
        // inv(g0) * gt has the generalized eigenvalues; symmetrize via
        // L^{-1} gt L^{-*} with g0 = L L* to keep the problem Hermitian.
        let a = &g0.field().data()[p * nn..(p + 1) * nn];
        let b = &gt.field().data()[p * nn..(p + 1) * nn];
        let mut l = [Complex64::new(0.0, 0.0); 16];
        dense_c::cholesky(a, n, &mut l).expect("validated positive definite");
        // solve L w = b column-wise, then L z = w* column-wise: z = L^{-1} b L^{-*}
        work.copy_from_slice(b);
        for col in 0..n {
            for i in 0..n {
                let mut s = work[i * n + col];
                for k in 0..i {
                    s -= l[i * n + k] * work[k * n + col];
                }
                work[i * n + col] = s / l[i * n + i].re;
            }
        }
        // right-multiply by L^{-*}: solve (L X*)* i.e. rows against conj(L)
        for row in 0..n {
            for j in 0..n {
                let mut s = work[row * n + j];
                for k in 0..j {
                    s -= prod[row * n + k] * l[j * n + k].conj();
                }
                prod[row * n + j] = s / l[j * n + j].re;
            }
        }
        let herm = HermitianProxy(&prod, n);
        let (pmin, pmax) = herm.eig_range();
        lo = lo.min(pmin);
        hi = hi.max(pmax);
    }
    Ok((lo, hi))
}

/// Minimal wrapper to reuse the real-embedding eigensolver.
struct HermitianProxy<'a>(&'a [Complex64], usize);

impl HermitianProxy<'_> {
    fn eig_range(&self) -> (f64, f64) {
        let n = self.1;
        let m = 2 * n;
        let mut real = vec![0.0; m * m];
        for i in 0..n {
            for j in 0..n {
                let v = self.0[i * n + j];
                real[i * m + j] = v.re;
                real[(i + n) * m + j + n] = v.re;
                real[i * m + j + n] = -v.im;
                real[(i + n) * m + j] = v.im;
            }
        }
        let (values, _) = grid_tensor::dense::sym_eigen(&real, m);
        (values[0], values[m - 1])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{PI, TAU};

    fn small_potential(grid: &ComplexTorusGrid, eps: f64) -> KahlerPotential {
        let u = ScalarField::from_fn(grid.real_grid(), |x| eps * (TAU * x[0]).cos());
        KahlerPotential::over_flat(u).unwrap()
    }

    #[test]
    fn zero_potential_returns_the_background() {
        let grid = ComplexTorusGrid::new(2, 8).unwrap();
        let p = KahlerPotential::over_flat(ScalarField::zeros(grid.real_grid())).unwrap();
        let g = potential_to_metric(&p).unwrap();
        assert!(g.field().sup_distance(HermitianMetricField::flat(&grid).field()).unwrap() < 1e-15);
        let yc = ma_operator(&p).unwrap();
        assert!((yc.min() - 1.0).abs() < 1e-15 && (yc.max() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn one_dimensional_cosine_metric_is_the_closed_form() {
        let grid = ComplexTorusGrid::new(1, 16).unwrap();
        let eps = 0.01;
        let p = small_potential(&grid, eps);
        let g = potential_to_metric(&p).unwrap();
        let want = ScalarField::from_fn(grid.real_grid(), |x| {
            1.0 - eps * PI * PI * (TAU * x[0]).cos()
        });
        assert!(g.field().comp_re(0, 0).unwrap().sup_distance(&want).unwrap() < 1e-12);
    }

    #[test]
    fn admissibility_fails_at_the_cosine_maximum() {
        let grid = ComplexTorusGrid::new(1, 16).unwrap();
        // 1 - eps pi^2 cos goes negative at cos = 1 once eps pi^2 > 1.
        let p = small_potential(&grid, 0.2);
        match potential_to_metric(&p).unwrap_err() {
            KahlerError::NotAdmissible { index, pivot } => {
                assert_eq!(index[0], 0, "most negative value sits at x = 0");
                assert!(pivot < 0.0);
            }
            other => panic!("wrong error {other:?}"),
        }
    }

    #[test]
    fn mean_zero_gauge_is_enforced() {
        let grid = ComplexTorusGrid::new(1, 8).unwrap();
        let u = ScalarField::constant(grid.real_grid(), 0.3);
        assert!(matches!(
            KahlerPotential::over_flat(u.clone()),
            Err(KahlerError::NotMeanZero(_))
        ));
        let p = KahlerPotential::from_unnormalized(
            u,
            HermitianMetricField::flat(&grid),
        )
        .unwrap();
        assert!(p.u().mean().abs() < 1e-14);
    }

    #[test]
    fn one_dimensional_density_is_the_forced_identity() {
        // n = 1: YC = 1 + u_{z z-bar} / g0 exactly.
        let grid = ComplexTorusGrid::new(1, 16).unwrap();
        let p = small_potential(&grid, 0.02);
        let yc = ma_operator(&p).unwrap();
        let hess = complex_hessian(&grid, p.u()).unwrap();
        let direct = hess
            .comp_re(0, 0)
            .unwrap()
            .map(|v| 1.0 + v);
        assert!(yc.sup_distance(&direct).unwrap() < 1e-14);
    }

    #[test]
    fn two_dimensional_density_matches_a_cofactor_oracle() {
        let grid = ComplexTorusGrid::new(2, 8).unwrap();
        let u = grid_tensor::band_limited_scalar(grid.real_grid(), 5, 1, 0.02);
        let p = KahlerPotential::over_flat(u).unwrap();
        let yc = ma_operator(&p).unwrap();
        let g = potential_to_metric(&p).unwrap();
        // Independent 2x2 determinant: ad - bc on the raw complex entries.
        for q in [0usize, 17, 333, grid.len() - 1] {
            let m = g.field().point(q);
            let det = (m[0] * m[3] - m[1] * m[2]).re;
            assert!((yc.as_slice()[q] - det).abs() < 1e-12);
        }
    }

    #[test]
    fn laplacian_is_a_quarter_of_the_flat_one() {
        let grid = ComplexTorusGrid::new(1, 16).unwrap();
        let f = ScalarField::from_fn(grid.real_grid(), |x| (TAU * x[0]).cos());
        let g = HermitianMetricField::flat(&grid);
        let lap = kahler_laplacian(&g, &f).unwrap();
        assert!(lap.sup_distance(&f.scaled(-(PI * PI))).unwrap() < 1e-12);
        let zero = kahler_laplacian(&g, &ScalarField::constant(grid.real_grid(), 4.0)).unwrap();
        assert!(zero.sup_norm() < 1e-14);
    }

    #[test]
    fn trace_identity_holds_pointwise() {
        // tr_g g~ = n + Lap_g u for an admissible potential over a curved g.
        let grid = ComplexTorusGrid::new(2, 8).unwrap();
        let v = grid_tensor::band_limited_scalar(grid.real_grid(), 7, 1, 0.015);
        let g = potential_to_metric(&KahlerPotential::over_flat(v).unwrap()).unwrap();
        let u = grid_tensor::band_limited_scalar(grid.real_grid(), 8, 1, 0.015);
        let p = KahlerPotential::new(u.clone(), g.clone()).unwrap();
        let lhs = relative_trace(&g, &p).unwrap();
        let rhs = kahler_laplacian(&g, &u).unwrap().shifted(2.0);
        assert!(lhs.sup_distance(&rhs).unwrap() < 1e-10);
        // PD of both factors forces positivity of the trace.
        assert!(lhs.min() > 0.0);
    }

    #[test]
    fn flat_metric_has_zero_ricci() {
        let grid = ComplexTorusGrid::new(2, 8).unwrap();
        let r = ricci(&HermitianMetricField::flat(&grid)).unwrap();
        assert!(r.sup_norm() < 1e-13);
    }

    #[test]
    fn one_dimensional_ricci_matches_a_log_series_oracle() {
        // g = 1 + w with w = -eps pi^2 cos(2 pi x):
        // R = -dd-bar log(1+w) = -dd-bar (w - w^2/2) + O(eps^3).
        let grid = ComplexTorusGrid::new(1, 32).unwrap();
        let mut errs = Vec::new();
        for eps in [0.02, 0.01] {
            let p = small_potential(&grid, eps);
            let g = potential_to_metric(&p).unwrap();
            let r = ricci(&g).unwrap().comp_re(0, 0).unwrap();
            let w = ScalarField::from_fn(grid.real_grid(), |x| {
                -eps * PI * PI * (TAU * x[0]).cos()
            });
            let series = w.zip_map(&w, |a, b| a - 0.5 * a * b).unwrap();
            let oracle = complex_hessian(&grid, &series)
                .unwrap()
                .scaled(-1.0)
                .comp_re(0, 0)
                .unwrap();
            errs.push(r.sup_distance(&oracle).unwrap());
        }
        // remainder is O(eps^3): halving eps divides the error by ~8. The
        // prefactor carries the mode-3 derivative weight (~9 pi^2 / eps-unit),
        // so only the ratio pins the order cleanly.
        assert!(errs[0] < 0.1, "series residual {}", errs[0]);
        let ratio = errs[0] / errs[1];
        assert!(ratio > 5.5 && ratio < 11.0, "observed order ratio {ratio}");
    }

    #[test]
    fn ricci_is_invariant_under_constant_unitary_conjugation() {
        let grid = ComplexTorusGrid::new(2, 8).unwrap();
        let u = grid_tensor::band_limited_scalar(grid.real_grid(), 11, 1, 0.015);
        let g = potential_to_metric(&KahlerPotential::over_flat(u).unwrap()).unwrap();
        // U = [[c, s], [-s, c]] * phase — constant unitary
        let c = Complex64::new(0.6, 0.0);
        let s = Complex64::new(0.0, 0.8);
        let uni = [c, s, -s.conj(), c];
        let n = 2;
        let nn = 4;
        let mut data = vec![Complex64::new(0.0, 0.0); g.field().data().len()];
        for p in 0..grid.len() {
            let m = g.field().point(p);
            // U* M U
            for i in 0..n {
                for j in 0..n {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for a in 0..n {
                        for b in 0..n {
                            acc += uni[a * n + i].conj() * m[a * n + b] * uni[b * n + j];
                        }
                    }
                    data[p * nn + i * n + j] = acc;
                }
            }
        }
        let conj =
            HermitianMetricField::new(HermitianMatrixField::new(&grid, data).unwrap()).unwrap();
        let r1 = ricci(&g).unwrap();
        let r2 = ricci(&conj).unwrap();
        assert!(r1.sup_distance(&r2).unwrap() < 1e-12 * r1.sup_norm().max(1.0));
    }

    #[test]
    fn doubling_the_flat_metric_gives_twice_identity() {
        let grid = ComplexTorusGrid::new(2, 8).unwrap();
        let real = real_metric(&HermitianMetricField::flat(&grid)).unwrap();
        let (lo, hi) = real.eigenvalue_range();
        assert!((lo - 2.0).abs() < 1e-14 && (hi - 2.0).abs() < 1e-14);
    }

    #[test]
    fn doubled_laplacian_is_twice_the_complex_one() {
        // Lap_LB f = 2 Lap_a f on a Kähler manifold; check on a curved metric
        // with nonzero imaginary components.
        let grid = ComplexTorusGrid::new(2, 8).unwrap();
        let u = grid_tensor::band_limited_scalar(grid.real_grid(), 13, 1, 0.015);
        let g = potential_to_metric(&KahlerPotential::over_flat(u).unwrap()).unwrap();
        let f = grid_tensor::band_limited_scalar(grid.real_grid(), 14, 1, 1.0);
        let real = real_metric(&g).unwrap();
        let lb = grid_tensor::laplace_beltrami(&real, &f).unwrap();
        let ka = kahler_laplacian(&g, &f).unwrap();
        let dist = lb.sup_distance(&ka.scaled(2.0)).unwrap();
        assert!(dist < 1e-8 * ka.sup_norm().max(1.0), "identity off by {dist}");
    }

    #[test]
    fn relative_eigenvalues_bracket_the_trace() {
        let grid = ComplexTorusGrid::new(2, 8).unwrap();
        let u = grid_tensor::band_limited_scalar(grid.real_grid(), 15, 1, 0.015);
        let p = KahlerPotential::over_flat(u).unwrap();
        let g0 = HermitianMetricField::flat(&grid);
        let gt = potential_to_metric(&p).unwrap();
        let (lo, hi) = relative_eigenvalue_range(&g0, &gt).unwrap();
        assert!(lo > 0.0 && hi >= lo);
        let tr = relative_trace(&g0, &p).unwrap();
        assert!(tr.min() >= 2.0 * lo - 1e-12 && tr.max() <= 2.0 * hi + 1e-12);
    }
}
