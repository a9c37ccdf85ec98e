use grid_tensor::{multiplier_pair_table, ScalarField, Spectrum};
use kahler_geometry::{dense_c, hessian_multiplier, ComplexTorusGrid};
use ndarray::ArrayD;
use num_complex::Complex64;

use crate::config::Scheme;
use crate::error::{FlowError, Result};

/// Reusable machinery for evaluating the flow's right-hand side many times on
/// one grid.
///
/// The candidate metric needs every independent real component of the complex
/// Hessian; each component is one real-multiplier transform, and two of them
/// ride in each inverse FFT. The multiplier tables are baked once here, so a
/// step costs `ceil(n^2/2)` inverse transforms plus one forward transform of
/// `F` — at a million points the transforms dominate everything else.
pub(crate) struct StepKernel {
    grid: ComplexTorusGrid,
    f: ScalarField,
    /// Hessian component multipliers, two components per table, in slot
    /// order: for `i <= j`, `Re H_ij` then (when `i < j`) `Im H_ij`.
    tables: Vec<Vec<Complex64>>,
    /// `0.25 |k|^2` per mode — the negated symbol of the flat
    /// quarter-Laplacian, Nyquist kept. Identical to the sum of the diagonal
    /// Hessian tables, so the implicit/explicit splitting of the semi-implicit
    /// scheme is exact mode by mode.
    sym: Vec<f64>,
    /// Largest squared wavenumber of any single axis, `(pi N / L)^2`.
    kmax2: f64,
    n_components: usize,
}

/// One right-hand-side evaluation: `F = log det(g0 + dd-bar u) + f` plus the
/// by-products every step needs anyway.
pub(crate) struct RhsEval {
    pub f_field: ScalarField,
    /// `det(g0 + dd-bar u)` — the volume density of the candidate metric.
    pub det: ScalarField,
    /// `max_x tr g~^{-1}`, the coefficient of the step-size budget.
    pub max_inv_trace: f64,
}

impl StepKernel {
    pub fn new(grid: &ComplexTorusGrid, f: &ScalarField) -> Result<StepKernel> {
        if f.grid() != grid.real_grid() {
            return Err(FlowError::GridMismatch);
        }
        let n = grid.n();
        let mut slots = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in i..n {
                slots.push((i, j, true));
                if i != j {
                    slots.push((i, j, false));
                }
            }
        }
        let rg = grid.real_grid();
        let tables = slots
            .chunks(2)
            .map(|pair| match *pair {
                [(i, j, re), (i2, j2, re2)] => multiplier_pair_table(
                    rg,
                    hessian_multiplier(grid, i, j, re),
                    hessian_multiplier(grid, i2, j2, re2),
                ),
                [(i, j, re)] => {
                    multiplier_pair_table(rg, hessian_multiplier(grid, i, j, re), |_, _| 0.0)
                }
                _ => unreachable!("chunks of two"),
            })
            .collect();
        let sym: Vec<f64> = multiplier_pair_table(
            rg,
            |_, k| 0.25 * k.iter().map(|v| v * v).sum::<f64>(),
            |_, _| 0.0,
        )
        .into_iter()
        .map(|c| c.re)
        .collect();
        let kmax2 = (0..rg.dims())
            .map(|a| {
                rg.wavenumbers(a)
                    .iter()
                    .fold(0.0f64, |m, &k| m.max(k * k))
            })
            .fold(0.0f64, f64::max);
        Ok(StepKernel {
            grid: grid.clone(),
            f: f.clone(),
            tables,
            sym,
            kmax2,
            n_components: n * n,
        })
    }

    pub fn grid(&self) -> &ComplexTorusGrid {
        &self.grid
    }

    pub fn forcing(&self) -> &ScalarField {
        &self.f
    }

    /// The independent real Hessian components of the potential whose
    /// spectrum is `s`, in slot order.
    pub fn hessian_components(&self, s: &Spectrum) -> Result<Vec<ScalarField>> {
        let mut out = Vec::with_capacity(self.n_components + 1);
        for table in &self.tables {
            let (a, b) = s.real_pair_tabled(table)?;
            out.push(a);
            out.push(b);
        }
        out.truncate(self.n_components);
        Ok(out)
    }

    /// Evaluate `F`, the metric determinant, and the inverse-trace maximum at
    /// the potential whose spectrum is `s`. `t` only labels diagnostics.
    pub fn rhs(&self, s: &Spectrum, t: f64) -> Result<RhsEval> {
        let h = self.hessian_components(s)?;
        let n = self.grid.n();
        let npts = self.grid.len();
        let fv = self.f.as_slice();
        let mut det = Vec::with_capacity(npts);
        let mut big_f = Vec::with_capacity(npts);
        let mut max_inv_trace = 0.0f64;

        match n {
            1 => {
                let h00 = h[0].as_slice();
                for p in 0..npts {
                    let g = 1.0 + h00[p];
                    if !(g > 0.0) {
                        return Err(self.diagnose(t, p, &[Complex64::new(g, 0.0)]));
                    }
                    det.push(g);
                    big_f.push(g.ln() + fv[p]);
                    max_inv_trace = max_inv_trace.max(1.0 / g);
                }
            }
            2 => {
                let (h00, re01, im01, h11) =
                    (h[0].as_slice(), h[1].as_slice(), h[2].as_slice(), h[3].as_slice());
                for p in 0..npts {
                    let g00 = 1.0 + h00[p];
                    let g11 = 1.0 + h11[p];
                    let d = g00 * g11 - (re01[p] * re01[p] + im01[p] * im01[p]);
                    // For a 2x2 Hermitian matrix, a positive leading entry
                    // and a positive determinant are exactly positive
                    // definiteness.
                    if !(g00 > 0.0 && d > 0.0) {
                        let a = [
                            Complex64::new(g00, 0.0),
                            Complex64::new(re01[p], im01[p]),
                            Complex64::new(re01[p], -im01[p]),
                            Complex64::new(g11, 0.0),
                        ];
                        return Err(self.diagnose(t, p, &a));
                    }
                    det.push(d);
                    big_f.push(d.ln() + fv[p]);
                    max_inv_trace = max_inv_trace.max((g00 + g11) / d);
                }
            }
            _ => {
                // General dimension: per-point Cholesky. Off the acceptance
                // path; kept for completeness.
                let slices: Vec<&[f64]> = h.iter().map(|c| c.as_slice()).collect();
                let nn = n * n;
                let mut a = vec![Complex64::new(0.0, 0.0); nn];
                let mut l = vec![Complex64::new(0.0, 0.0); nn];
                let mut col = vec![Complex64::new(0.0, 0.0); n];
                for p in 0..npts {
                    self.assemble_point(&slices, p, &mut a);
                    if dense_c::cholesky(&a, n, &mut l).is_err() {
                        let a_owned = a.clone();
                        return Err(self.diagnose(t, p, &a_owned));
                    }
                    let mut d = 1.0;
                    let mut inv_trace = 0.0;
                    for i in 0..n {
                        let piv = l[i * n + i].re;
                        d *= piv * piv;
                        // tr A^{-1} = sum of squared norms of the rows of
                        // L^{-1}; solve L y = e_i and accumulate |y|^2.
                        for c in col.iter_mut() {
                            *c = Complex64::new(0.0, 0.0);
                        }
                        col[i] = Complex64::new(1.0, 0.0);
                        for r in i..n {
                            let mut sum = col[r];
                            for k in i..r {
                                sum -= l[r * n + k] * col[k];
                            }
                            col[r] = sum / l[r * n + r].re;
                            inv_trace += col[r].norm_sqr();
                        }
                    }
                    det.push(d);
                    big_f.push(d.ln() + fv[p]);
                    max_inv_trace = max_inv_trace.max(inv_trace);
                }
            }
        }

        Ok(RhsEval {
            f_field: ScalarField::from_flat(self.grid.real_grid(), big_f)?,
            det: ScalarField::from_flat(self.grid.real_grid(), det)?,
            max_inv_trace,
        })
    }

    fn assemble_point(&self, slices: &[&[f64]], p: usize, a: &mut [Complex64]) {
        let n = self.grid.n();
        let mut slot = 0;
        for i in 0..n {
            for j in i..n {
                let re = slices[slot][p] + if i == j { 1.0 } else { 0.0 };
                slot += 1;
                let im = if i == j {
                    0.0
                } else {
                    let v = slices[slot][p];
                    slot += 1;
                    v
                };
                a[i * n + j] = Complex64::new(re, im);
                a[j * n + i] = Complex64::new(re, -im);
            }
        }
    }

    fn diagnose(&self, t: f64, p: usize, a: &[Complex64]) -> FlowError {
        FlowError::AdmissibilityLoss {
            t,
            index: self.grid.real_grid().unravel(p),
            min_eig: dense_c::min_eigenvalue(a, self.grid.n()),
        }
    }

    /// Largest stable step at the current stiffness, per scheme.
    pub fn dt_budget(
        &self,
        max_inv_trace: f64,
        scheme: Scheme,
        safety: f64,
        imex_factor: f64,
    ) -> f64 {
        let h2w = 1.0 / (4.0 * max_inv_trace * self.kmax2);
        match scheme {
            Scheme::ExplicitRk4 => safety * h2w,
            Scheme::Imex => imex_factor * safety * h2w,
        }
    }

    /// One semi-implicit Euler update in coefficient space:
    /// `u_hat <- u_hat + dt F_hat_k / (1 + dt s_k)` with `s_k` the flat
    /// quarter-Laplacian symbol. Returns the new spectrum (zero mode cleared)
    /// and the spatial mean of the update, which the caller moves into the
    /// drift account.
    pub fn imex_advance(&self, s: &Spectrum, eval: &RhsEval, dt: f64) -> Result<(Spectrum, f64)> {
        let fhat = Spectrum::of(&eval.f_field);
        let src = s.data().as_slice().expect("standard layout");
        let fh = fhat.data().as_slice().expect("standard layout");
        let mut next = Vec::with_capacity(src.len());
        for ((&u, &g), &sk) in src.iter().zip(fh).zip(&self.sym) {
            next.push(u + g * (dt / (1.0 + dt * sk)));
        }
        let mean_inc = next[0].re / src.len() as f64;
        next[0] = Complex64::new(0.0, 0.0);
        let arr = ArrayD::from_shape_vec(s.data().raw_dim(), next).expect("same shape");
        Ok((Spectrum::from_data(s.grid(), arr)?, mean_inc))
    }

    /// One classical four-stage Runge-Kutta update in real space, reusing an
    /// already-evaluated right-hand side as the first stage. Returns the
    /// recentered new potential and the removed mean.
    pub fn rk4_advance(
        &self,
        u: &ScalarField,
        eval: &RhsEval,
        t: f64,
        dt: f64,
    ) -> Result<(ScalarField, f64)> {
        let k1 = &eval.f_field;
        let k2 = self
            .rhs(&Spectrum::of(&u.add(&k1.scaled(0.5 * dt))?), t)?
            .f_field;
        let k3 = self
            .rhs(&Spectrum::of(&u.add(&k2.scaled(0.5 * dt))?), t)?
            .f_field;
        let k4 = self.rhs(&Spectrum::of(&u.add(&k3.scaled(dt))?), t)?.f_field;
        let du = k1
            .add(&k4)?
            .add(&k2.scaled(2.0))?
            .add(&k3.scaled(2.0))?
            .scaled(dt / 6.0);
        let mean_inc = du.mean();
        Ok((u.add(&du)?.recentered(), mean_inc))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cos2d(grid: &ComplexTorusGrid, a: f64) -> ScalarField {
        ScalarField::from_fn(grid.real_grid(), |x| {
            let tau = 2.0 * std::f64::consts::PI;
            a * (tau * x[0]).cos() * (tau * x[1]).cos()
        })
        .recentered()
    }

    #[test]
    fn hessian_components_match_the_assembled_hessian() {
        // Kernel slots against the validated matrix-field path.
        let grid = ComplexTorusGrid::new(2, 8).unwrap();
        let u = kahler_geometry::synth::seeded_potential(&grid, 11, 2, 0.05);
        let kernel = StepKernel::new(&grid, &ScalarField::zeros(grid.real_grid())).unwrap();
        let h = kernel.hessian_components(&Spectrum::of(&u)).unwrap();
        let full = kahler_geometry::complex_hessian(&grid, &u).unwrap();
        let pairs = [
            (&h[0], full.comp_re(0, 0).unwrap()),
            (&h[1], full.comp_re(0, 1).unwrap()),
            (&h[2], full.comp_im(0, 1).unwrap()),
            (&h[3], full.comp_re(1, 1).unwrap()),
        ];
        for (got, want) in pairs {
            assert!(got.sup_distance(&want).unwrap() < 1e-13);
        }
    }

    #[test]
    fn rhs_of_zero_potential_is_the_forcing() {
        for n in [1usize, 2, 3] {
            let grid = ComplexTorusGrid::new(n, 8).unwrap();
            let f = cos2d(&grid, 0.4);
            let kernel = StepKernel::new(&grid, &f).unwrap();
            let eval = kernel
                .rhs(&Spectrum::of(&ScalarField::zeros(grid.real_grid())), 0.0)
                .unwrap();
            assert!(eval.f_field.sup_distance(&f).unwrap() < 1e-14);
            assert!((eval.max_inv_trace - n as f64).abs() < 1e-13);
            assert!(eval.det.sup_distance(&ScalarField::constant(grid.real_grid(), 1.0)).unwrap() < 1e-14);
        }
    }

    #[test]
    fn general_dimension_rhs_matches_the_metric_path() {
        // n = 3 exercises the per-point Cholesky branch; compare against the
        // validated metric determinant.
        let grid = ComplexTorusGrid::new(3, 8).unwrap();
        let p = kahler_geometry::synth::admissible_potential(&grid, 5, 1, 0.05).unwrap();
        let kernel = StepKernel::new(&grid, &ScalarField::zeros(grid.real_grid())).unwrap();
        let eval = kernel.rhs(&Spectrum::of(p.u()), 0.0).unwrap();
        let metric = kahler_geometry::potential_to_metric(&p).unwrap();
        assert!(eval.det.sup_distance(&metric.det()).unwrap() < 1e-12);
        // Inverse-trace maximum against the assembled inverse.
        let inv = metric.inverse();
        let n = 3;
        let mut want = 0.0f64;
        for p in 0..grid.len() {
            let mut tr = 0.0;
            for i in 0..n {
                tr += inv.point(p)[i * n + i].re;
            }
            want = want.max(tr);
        }
        assert!((eval.max_inv_trace - want).abs() < 1e-12 * want);
    }

    #[test]
    fn inadmissible_points_are_reported_with_location() {
        let grid = ComplexTorusGrid::new(1, 16).unwrap();
        let u = ScalarField::from_fn(grid.real_grid(), |x| {
            0.2 * (2.0 * std::f64::consts::PI * x[0]).cos()
        })
        .recentered();
        let kernel = StepKernel::new(&grid, &ScalarField::zeros(grid.real_grid())).unwrap();
        match kernel.rhs(&Spectrum::of(&u), 0.75) {
            Err(FlowError::AdmissibilityLoss { t, index, min_eig }) => {
                assert_eq!(t, 0.75);
                assert_eq!(index.len(), 2);
                assert!(min_eig <= 0.0);
            }
            other => panic!("expected admissibility loss, got {other:?}"),
        }
    }

    #[test]
    fn budgets_scale_as_documented() {
        let grid = ComplexTorusGrid::new(1, 16).unwrap();
        let kernel = StepKernel::new(&grid, &ScalarField::zeros(grid.real_grid())).unwrap();
        let explicit = kernel.dt_budget(1.0, Scheme::ExplicitRk4, 0.2, 50.0);
        let imex = kernel.dt_budget(1.0, Scheme::Imex, 0.2, 50.0);
        let kmax2 = (std::f64::consts::PI * 16.0).powi(2);
        assert!((explicit - 0.2 / (4.0 * kmax2)).abs() < 1e-18);
        assert!((imex / explicit - 50.0).abs() < 1e-12);
        // Stiffer metric, smaller budget.
        assert!(kernel.dt_budget(10.0, Scheme::Imex, 0.2, 50.0) < imex);
    }
}
