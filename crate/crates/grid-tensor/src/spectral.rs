//! Trigonometric (Fourier) differentiation and flat-Laplacian solves.
//!
//! All derivatives in this crate differentiate the trigonometric interpolant
//! of periodic grid data, which is exact for resolved Fourier modes. The
//! wavenumber convention is `k_m = 2 pi m / L` with negative frequencies in
//! the upper half of the spectrum; the Nyquist mode is zeroed by odd-order
//! derivative multipliers and kept (as `+pi N / L`) by even orders, the usual
//! choice for real signals. Mixed partials compose two odd multipliers, so
//! `d_x d_y = d_y d_x` holds exactly on the grid.
//!
//! Transforms along a non-contiguous axis go through a small cache-resident
//! tile buffer (gather, batched FFT, scatter), which keeps the 4-axis
//! million-point transforms used by the flow solvers memory-bandwidth bound
//! rather than latency bound.

use ndarray::ArrayD;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{GridError, Result};
use crate::field::ScalarField;
use crate::grid::{for_each_index, PeriodicGrid};

fn planner() -> &'static Mutex<FftPlanner<f64>> {
    static PLANNER: OnceLock<Mutex<FftPlanner<f64>>> = OnceLock::new();
    PLANNER.get_or_init(|| Mutex::new(FftPlanner::new()))
}

fn plan(len: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    let mut p = planner().lock().expect("fft planner poisoned");
    if inverse {
        p.plan_fft_inverse(len)
    } else {
        p.plan_fft_forward(len)
    }
}

/// Number of lanes gathered per tile when transforming a strided axis.
const TILE: usize = 64;

/// In-place FFT along `axis` of a standard-layout complex array.
pub fn fft_axis_inplace(data: &mut ArrayD<Complex64>, axis: usize, inverse: bool) {
    let shape = data.shape().to_vec();
    let l = shape[axis];
    let inner: usize = shape[axis + 1..].iter().product();
    let outer: usize = shape[..axis].iter().product();
    let fft = plan(l, inverse);
    let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
    let buf = data.as_slice_mut().expect("spectral buffers are standard layout");

    if inner == 1 {
        // Lanes are contiguous rows; rustfft batches over the whole block.
        for chunk in buf.chunks_exact_mut(l) {
            fft.process_with_scratch(chunk, &mut scratch);
        }
        return;
    }

    let mut tile = vec![Complex64::default(); l * TILE];
    for o in 0..outer {
        let base = o * l * inner;
        let mut i0 = 0;
        while i0 < inner {
            let bw = TILE.min(inner - i0);
            for j in 0..l {
                let row = base + j * inner + i0;
                for b in 0..bw {
                    tile[b * l + j] = buf[row + b];
                }
            }
            fft.process_with_scratch(&mut tile[..bw * l], &mut scratch);
            for j in 0..l {
                let row = base + j * inner + i0;
                for b in 0..bw {
                    buf[row + b] = tile[b * l + j];
                }
            }
            i0 += bw;
        }
    }
}

/// Forward FFT over every axis (unnormalized).
pub fn fft_nd(values: &ArrayD<f64>) -> ArrayD<Complex64> {
    let mut data = values.mapv(|v| Complex64::new(v, 0.0));
    for axis in 0..values.ndim() {
        fft_axis_inplace(&mut data, axis, false);
    }
    data
}

/// Inverse FFT over every axis, including the `1/N_total` normalization.
pub fn ifft_nd(mut spec: ArrayD<Complex64>) -> ArrayD<Complex64> {
    let ndim = spec.ndim();
    for axis in 0..ndim {
        fft_axis_inplace(&mut spec, axis, true);
    }
    let scale = 1.0 / spec.len() as f64;
    spec.mapv_inplace(|v| v * scale);
    spec
}

fn ifft_real(spec: ArrayD<Complex64>) -> ArrayD<f64> {
    ifft_nd(spec).mapv(|v| v.re)
}

/// Two real inverse transforms packed into one complex FFT:
/// returns `(Re, Im)` of the inverse of `a + i b`.
pub fn ifft_real_pair(a: &ArrayD<Complex64>, b: &ArrayD<Complex64>) -> (ArrayD<f64>, ArrayD<f64>) {
    let mut z = a.clone();
    ndarray::Zip::from(&mut z).and(b).for_each(|za, &zb| {
        *za += Complex64::new(0.0, 1.0) * zb;
    });
    let out = ifft_nd(z);
    (out.mapv(|v| v.re), out.mapv(|v| v.im))
}

/// Derivative multiplier `(i k)^p` for one axis, with the Nyquist slot zeroed
/// for odd `p`.
fn mult_table(grid: &PeriodicGrid, axis: usize, power: u8) -> Vec<Complex64> {
    let k = grid.wavenumbers(axis);
    let n = k.len();
    (0..n)
        .map(|m| {
            if power == 0 {
                return Complex64::new(1.0, 0.0);
            }
            if power % 2 == 1 && m == n / 2 {
                return Complex64::new(0.0, 0.0);
            }
            Complex64::new(0.0, k[m]).powu(power as u32)
        })
        .collect()
}

fn scale_axis(data: &mut ArrayD<Complex64>, axis: usize, table: &[Complex64]) {
    let shape = data.shape().to_vec();
    let l = shape[axis];
    let inner: usize = shape[axis + 1..].iter().product();
    let outer: usize = shape[..axis].iter().product();
    let buf = data.as_slice_mut().expect("standard layout");
    for o in 0..outer {
        for j in 0..l {
            let t = table[j];
            let row = (o * l + j) * inner;
            for v in &mut buf[row..row + inner] {
                *v *= t;
            }
        }
    }
}

/// Trigonometric-interpolant derivative of `field` along `axis`.
///
/// Exact for resolved Fourier modes; `order` is 1 or 2.
pub fn derivative(field: &ScalarField, axis: usize, order: u8) -> Result<ScalarField> {
    let grid = field.grid();
    grid.check_axis(axis)?;
    if order != 1 && order != 2 {
        return Err(GridError::BadOrder(order));
    }
    let mut data = field.values().mapv(|v| Complex64::new(v, 0.0));
    fft_axis_inplace(&mut data, axis, false);
    scale_axis(&mut data, axis, &mult_table(grid, axis, order));
    fft_axis_inplace(&mut data, axis, true);
    let scale = 1.0 / grid.resolution()[axis] as f64;
    let values = data.mapv(|v| v.re * scale);
    ScalarField::from_values(grid, values)
}

/// Full spectrum of a real field, for batching many derivative extractions
/// from a single forward transform.
#[derive(Debug, Clone)]
pub struct Spectrum {
    grid: PeriodicGrid,
    data: ArrayD<Complex64>,
}

impl Spectrum {
    pub fn of(field: &ScalarField) -> Self {
        Spectrum {
            grid: field.grid().clone(),
            data: fft_nd(field.values()),
        }
    }

    pub fn grid(&self) -> &PeriodicGrid {
        &self.grid
    }

    pub fn data(&self) -> &ArrayD<Complex64> {
        &self.data
    }

    /// Spectrum multiplied by `prod_a (i k_a)^{p_a}` (Nyquist policy per order,
    /// as in [`derivative`]).
    pub fn derivative_spectrum(&self, powers: &[u8]) -> ArrayD<Complex64> {
        let mut out = self.data.clone();
        for (axis, &p) in powers.iter().enumerate() {
            if p > 0 {
                scale_axis(&mut out, axis, &mult_table(&self.grid, axis, p));
            }
        }
        out
    }

    /// Real-space derivative field for a multi-index of per-axis orders.
    pub fn derivative(&self, powers: &[u8]) -> ScalarField {
        let values = ifft_real(self.derivative_spectrum(powers));
        ScalarField::from_values(&self.grid, values).expect("shape preserved")
    }

    /// Spectrum multiplied by an arbitrary function of the wavenumber vector.
    /// `w` receives the raw per-axis wavenumbers (Nyquist carries `+pi N/L`).
    pub fn weighted_spectrum(&self, w: impl Fn(&[f64]) -> Complex64) -> ArrayD<Complex64> {
        let tables: Vec<Vec<f64>> = (0..self.grid.dims()).map(|a| self.grid.wavenumbers(a)).collect();
        let mut out = self.data.clone();
        let slice = out.as_slice_mut().expect("standard layout");
        let mut k = vec![0.0; self.grid.dims()];
        for_each_index(self.grid.shape(), |idx, flat| {
            for (a, &i) in idx.iter().enumerate() {
                k[a] = tables[a][i];
            }
            slice[flat] *= w(&k);
        });
        out
    }

    /// Real-space field for an isotropic multiplier `f(|k|^2)`.
    pub fn filtered(&self, f: impl Fn(f64) -> f64) -> ScalarField {
        let spec = self.weighted_spectrum(|k| {
            let k2: f64 = k.iter().map(|v| v * v).sum();
            Complex64::new(f(k2), 0.0)
        });
        ScalarField::from_values(&self.grid, ifft_real(spec)).expect("shape preserved")
    }

    /// Wrap an already-computed coefficient array (e.g. the state of a
    /// spectral time stepper) as a spectrum over `grid`.
    pub fn from_data(grid: &PeriodicGrid, data: ArrayD<Complex64>) -> Result<Self> {
        if data.shape() != grid.shape() {
            return Err(GridError::ShapeMismatch {
                expected: grid.shape().to_vec(),
                got: data.shape().to_vec(),
            });
        }
        Ok(Spectrum {
            grid: grid.clone(),
            data,
        })
    }

    /// Two real-multiplier inverse transforms packed into one complex FFT,
    /// with the multipliers applied while the packed buffer is built (no
    /// intermediate spectrum copies). Each closure maps the mode multi-index
    /// and raw wavenumber vector to a real multiplier; both multipliers must
    /// be even under `k -> -k` — true of any product of an even number of
    /// derivative factors — so that the two outputs are real fields.
    ///
    /// Any Nyquist policy is the caller's: the closures see the index, so an
    /// odd-factor multiplier can zero its own Nyquist slots exactly as the
    /// [`derivative`] tables do.
    pub fn real_pair(
        &self,
        wa: impl Fn(&[usize], &[f64]) -> f64,
        wb: impl Fn(&[usize], &[f64]) -> f64,
    ) -> (ScalarField, ScalarField) {
        let table = multiplier_pair_table(&self.grid, wa, wb);
        self.real_pair_tabled(&table).expect("table built on own grid")
    }

    /// [`real_pair`](Self::real_pair) with the multipliers already evaluated
    /// into a flat table (see [`multiplier_pair_table`]). Time steppers that
    /// apply the same multipliers thousands of times build the table once;
    /// the per-application work is then a streaming multiply plus one FFT.
    pub fn real_pair_tabled(&self, table: &[Complex64]) -> Result<(ScalarField, ScalarField)> {
        let src = self.data.as_slice().expect("standard layout");
        if table.len() != src.len() {
            return Err(GridError::ShapeMismatch {
                expected: self.grid.shape().to_vec(),
                got: vec![table.len()],
            });
        }
        let packed: Vec<Complex64> = src.iter().zip(table).map(|(s, m)| s * m).collect();
        let packed = ArrayD::from_shape_vec(self.data.raw_dim(), packed).expect("same shape");
        let out = ifft_nd(packed);
        let flat = out.as_slice().expect("standard layout");
        let mut a = Vec::with_capacity(flat.len());
        let mut b = Vec::with_capacity(flat.len());
        for v in flat {
            a.push(v.re);
            b.push(v.im);
        }
        Ok((
            ScalarField::from_flat(&self.grid, a).expect("same grid"),
            ScalarField::from_flat(&self.grid, b).expect("same grid"),
        ))
    }

    /// Plain inverse transform (round-trip).
    pub fn field(&self) -> ScalarField {
        ScalarField::from_values(&self.grid, ifft_real(self.data.clone())).expect("shape preserved")
    }

    /// The `k = 0` coefficient divided by the point count: the grid mean.
    pub fn mean(&self) -> f64 {
        self.data.as_slice().expect("standard layout")[0].re / self.grid.len() as f64
    }
}

/// Evaluate a pair of real mode multipliers over every mode of `grid`, packed
/// as `(re, im)` for [`Spectrum::real_pair_tabled`]. The closures receive the
/// mode multi-index and the raw wavenumber vector, same as
/// [`Spectrum::real_pair`].
pub fn multiplier_pair_table(
    grid: &PeriodicGrid,
    wa: impl Fn(&[usize], &[f64]) -> f64,
    wb: impl Fn(&[usize], &[f64]) -> f64,
) -> Vec<Complex64> {
    let dims = grid.dims();
    let tables: Vec<Vec<f64>> = (0..dims).map(|a| grid.wavenumbers(a)).collect();
    let mut out = Vec::with_capacity(grid.len());
    let mut k = vec![0.0; dims];
    for_each_index(grid.shape(), |idx, _| {
        for (a, &i) in idx.iter().enumerate() {
            k[a] = tables[a][i];
        }
        out.push(Complex64::new(wa(idx, &k), wb(idx, &k)));
    });
    out
}

/// Solve `coeff * Laplacian(u) = rhs - mean(rhs)` on the flat torus with
/// `mean(u) = 0`. (The mean of the right-hand side is projected out; on a
/// closed manifold the equation is only solvable up to that constant.)
pub fn solve_poisson_flat(rhs: &ScalarField, coeff: f64) -> ScalarField {
    let spec = Spectrum::of(rhs);
    spec.filtered(|k2| if k2 == 0.0 { 0.0 } else { -1.0 / (coeff * k2) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn derivative_of_resolved_mode_is_exact() {
        let g = PeriodicGrid::unit(&[32]).unwrap();
        let f = ScalarField::from_fn(&g, |x| (2.0 * PI * x[0]).sin());
        let d = derivative(&f, 0, 1).unwrap();
        let expect = ScalarField::from_fn(&g, |x| 2.0 * PI * (2.0 * PI * x[0]).cos());
        assert!(d.sup_distance(&expect).unwrap() < 1e-12);
    }

    #[test]
    fn derivative_of_constant_vanishes() {
        let g = PeriodicGrid::unit(&[8, 8]).unwrap();
        let f = ScalarField::constant(&g, 3.5);
        assert!(derivative(&f, 0, 1).unwrap().sup_norm() < 1e-14);
        assert!(derivative(&f, 1, 2).unwrap().sup_norm() < 1e-14);
    }

    #[test]
    fn axis_out_of_range_is_an_error() {
        let g = PeriodicGrid::unit(&[8]).unwrap();
        let f = ScalarField::zeros(&g);
        assert!(derivative(&f, 1, 1).is_err());
        assert!(derivative(&f, 0, 3).is_err());
    }

    #[test]
    fn second_derivative_on_nonunit_period() {
        let g = PeriodicGrid::new(&[64], &[2.0]).unwrap();
        let f = ScalarField::from_fn(&g, |x| (PI * x[0]).cos()); // one period over L=2
        let d2 = derivative(&f, 0, 2).unwrap();
        let expect = f.scaled(-PI * PI);
        assert!(d2.sup_distance(&expect).unwrap() < 1e-11);
    }

    #[test]
    fn spectrum_batches_match_single_derivatives() {
        let g = PeriodicGrid::unit(&[16, 16]).unwrap();
        let tau = 2.0 * PI;
        let f = ScalarField::from_fn(&g, |x| (tau * x[0]).sin() * (2.0 * tau * x[1]).cos());
        let s = Spectrum::of(&f);
        let dx = derivative(&f, 0, 1).unwrap();
        let dxy = derivative(&dx, 1, 1).unwrap();
        let batched = s.derivative(&[1, 1]);
        assert!(batched.sup_distance(&dxy).unwrap() < 1e-11);
        assert!((s.mean() - f.mean()).abs() < 1e-13);
    }

    #[test]
    fn poisson_solve_inverts_laplacian() {
        let g = PeriodicGrid::unit(&[32, 32]).unwrap();
        let tau = 2.0 * PI;
        let u = ScalarField::from_fn(&g, |x| (tau * x[0]).cos() * (tau * x[1]).sin());
        let lap = derivative(&u, 0, 2).unwrap().add(&derivative(&u, 1, 2).unwrap()).unwrap();
        let back = solve_poisson_flat(&lap.scaled(0.25), 0.25);
        assert!(back.sup_distance(&u).unwrap() < 1e-11);
    }

    #[test]
    #[ignore = "timing probe for the million-point configurations; run with --ignored --nocapture"]
    fn bench_four_axis_transforms() {
        let g = PeriodicGrid::unit(&[32, 32, 32, 32]).unwrap();
        let f = ScalarField::from_fn(&g, |x| {
            (2.0 * PI * x[0]).sin() + (2.0 * PI * (x[1] + x[2])).cos() * (2.0 * PI * x[3]).sin()
        });
        let t0 = std::time::Instant::now();
        let s = Spectrum::of(&f);
        let t_fwd = t0.elapsed();
        let t0 = std::time::Instant::now();
        let _ = s.field();
        let t_inv = t0.elapsed();
        let t0 = std::time::Instant::now();
        let _ = derivative(&f, 2, 1).unwrap();
        let t_axis = t0.elapsed();
        let t0 = std::time::Instant::now();
        let sa = s.derivative_spectrum(&[2, 0, 0, 0]);
        let sb = s.derivative_spectrum(&[0, 2, 0, 0]);
        let _ = ifft_real_pair(&sa, &sb);
        let t_pair = t0.elapsed();
        println!(
            "32^4: forward {t_fwd:?}, inverse {t_inv:?}, single-axis derivative {t_axis:?}, packed pair {t_pair:?}"
        );
    }

    #[test]
    fn fused_multiplier_pair_matches_table_derivatives() {
        let g = PeriodicGrid::unit(&[16, 8]).unwrap();
        let f = ScalarField::from_fn(&g, |x| {
            (2.0 * PI * x[0]).cos() * (2.0 * PI * x[1]).sin() + (2.0 * PI * 4.0 * x[1]).cos()
        });
        let s = Spectrum::of(&f);
        // d_xx via an even multiplier (Nyquist kept), d_xy via odd factors
        // (each zeroed at its own Nyquist slot), exactly the table policy.
        let nyq = [8usize, 4usize];
        let (dxx, dxy) = s.real_pair(
            |_, k| -k[0] * k[0],
            |idx, k| {
                let a = if idx[0] == nyq[0] { 0.0 } else { k[0] };
                let b = if idx[1] == nyq[1] { 0.0 } else { k[1] };
                -a * b
            },
        );
        assert!(dxx.sup_distance(&s.derivative(&[2, 0])).unwrap() < 1e-10);
        assert!(dxy.sup_distance(&s.derivative(&[1, 1])).unwrap() < 1e-10);

        let rebuilt = Spectrum::from_data(&g, s.data().clone()).unwrap();
        assert!(rebuilt.field().sup_distance(&f).unwrap() < 1e-12);
        let bad = PeriodicGrid::unit(&[8, 8]).unwrap();
        assert!(Spectrum::from_data(&bad, s.data().clone()).is_err());
    }

    #[test]
    fn packed_pair_inverse_matches_separate() {
        let g = PeriodicGrid::unit(&[16, 8]).unwrap();
        let tau = 2.0 * PI;
        let f = ScalarField::from_fn(&g, |x| (tau * x[0]).cos() + 0.3 * (tau * x[1]).sin());
        let s = Spectrum::of(&f);
        let sa = s.derivative_spectrum(&[1, 0]);
        let sb = s.derivative_spectrum(&[0, 1]);
        let (pa, pb) = ifft_real_pair(&sa, &sb);
        let da = s.derivative(&[1, 0]);
        let db = s.derivative(&[0, 1]);
        let pa = ScalarField::from_values(&g, pa).unwrap();
        let pb = ScalarField::from_values(&g, pb).unwrap();
        assert!(pa.sup_distance(&da).unwrap() < 1e-11);
        assert!(pb.sup_distance(&db).unwrap() < 1e-11);
    }
}
