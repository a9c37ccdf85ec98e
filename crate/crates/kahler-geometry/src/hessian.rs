//! The complex Hessian `u_{i j-bar}` of a real potential, assembled from
//! real spectral derivatives through the Wirtinger identities.

use grid_tensor::{ScalarField, Spectrum};

use crate::error::{KahlerError, Result};
use crate::grid::ComplexTorusGrid;
use crate::herm::HermitianMatrixField;

/// Index (into the output matrix) and part selector for one assembled real
/// field.
#[derive(Clone, Copy)]
enum Slot {
    /// `Re u_{i j-bar}` for `i <= j` (mirrored conjugately).
    Re(usize, usize),
    /// `Im u_{i j-bar}` for `i < j`.
    Im(usize, usize),
}

/// `H_{i j-bar} = (u_{x_i x_j} + u_{y_i y_j})/4 + i (u_{x_i y_j} - u_{y_i x_j})/4`.
///
/// Mixed spectral partials commute exactly, which makes the result Hermitian
/// to round-off. Equivalent to [`hessian_of_spectrum`] after one forward
/// transform of `u`.
pub fn complex_hessian(grid: &ComplexTorusGrid, u: &ScalarField) -> Result<HermitianMatrixField> {
    if u.grid() != grid.real_grid() {
        return Err(KahlerError::GridMismatch);
    }
    hessian_of_spectrum(grid, &Spectrum::of(u))
}

/// The spectral multiplier of one real component of the complex Hessian:
/// `Re H_{i j-bar}` when `re` is set, `Im H_{i j-bar}` otherwise. Multiplying
/// the coefficients of `u` by this (real, even) function and inverting the
/// transform yields the component field.
///
/// First-order derivative factors zero their own Nyquist slot and squared
/// factors keep it, exactly the policy of the spectral derivative tables.
/// Exposed so time steppers can bake the multipliers into reusable tables
/// (see `multiplier_pair_table` in the grid crate).
pub fn hessian_multiplier(
    grid: &ComplexTorusGrid,
    i: usize,
    j: usize,
    re: bool,
) -> impl Fn(&[usize], &[f64]) -> f64 + '_ {
    assert!(i < grid.n() && j < grid.n(), "component out of range");
    let nyquist: Vec<usize> = grid
        .real_grid()
        .resolution()
        .iter()
        .map(|r| r / 2)
        .collect();
    move |idx: &[usize], k: &[f64]| -> f64 {
        let odd = |axis: usize| if idx[axis] == nyquist[axis] { 0.0 } else { k[axis] };
        let (xi, yi) = (grid.x_axis(i), grid.y_axis(i));
        let (xj, yj) = (grid.x_axis(j), grid.y_axis(j));
        if re && i == j {
            -0.25 * (k[xi] * k[xi] + k[yi] * k[yi])
        } else if re {
            -0.25 * (odd(xi) * odd(xj) + odd(yi) * odd(yj))
        } else {
            -0.25 * (odd(xi) * odd(yj) - odd(yi) * odd(xj))
        }
    }
}

/// The complex Hessian evaluated directly from a cached spectrum — the hot
/// path of the iterative solvers, which keep the potential in coefficient
/// space between applications.
///
/// Each Hermitian component is one fused real-multiplier transform (the
/// Wirtinger combination is folded into the multiplier), and two components
/// ride in each inverse FFT.
pub fn hessian_of_spectrum(
    grid: &ComplexTorusGrid,
    spectrum: &Spectrum,
) -> Result<HermitianMatrixField> {
    if spectrum.grid() != grid.real_grid() {
        return Err(KahlerError::GridMismatch);
    }
    let n = grid.n();
    let nn = n * n;
    let npts = grid.len();

    let mut slots = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in i..n {
            slots.push(Slot::Re(i, j));
            if i != j {
                slots.push(Slot::Im(i, j));
            }
        }
    }

    let multiplier = |slot: Slot| {
        let (i, j, re) = match slot {
            Slot::Re(i, j) => (i, j, true),
            Slot::Im(i, j) => (i, j, false),
        };
        hessian_multiplier(grid, i, j, re)
    };

    let mut data = vec![num_complex::Complex64::new(0.0, 0.0); npts * nn];
    let mut write = |slot: Slot, field: &ScalarField| {
        let flat = field.as_slice();
        match slot {
            Slot::Re(i, j) => {
                for (p, &v) in flat.iter().enumerate() {
                    data[p * nn + i * n + j].re = v;
                    data[p * nn + j * n + i].re = v;
                }
            }
            Slot::Im(i, j) => {
                for (p, &v) in flat.iter().enumerate() {
                    data[p * nn + i * n + j].im = v;
                    data[p * nn + j * n + i].im = -v;
                }
            }
        }
    };

    for pair in slots.chunks(2) {
        match *pair {
            [sa, sb] => {
                let (a, b) = spectrum.real_pair(multiplier(sa), multiplier(sb));
                write(sa, &a);
                write(sb, &b);
            }
            [sa] => {
                let (a, _) = spectrum.real_pair(multiplier(sa), |_, _| 0.0);
                write(sa, &a);
            }
            _ => unreachable!("chunks of two"),
        }
    }

    HermitianMatrixField::new(grid, data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{PI, TAU};

    #[test]
    fn zero_potential_has_zero_hessian() {
        let grid = ComplexTorusGrid::new(2, 8).unwrap();
        let h = complex_hessian(&grid, &ScalarField::zeros(grid.real_grid())).unwrap();
        assert_eq!(h.sup_norm(), 0.0);
    }

    #[test]
    fn one_dimensional_cosine_matches_quarter_laplacian() {
        // u = cos(2 pi x): u_{z z-bar} = Lap u / 4 = -pi^2 cos(2 pi x)
        let grid = ComplexTorusGrid::new(1, 16).unwrap();
        let u = ScalarField::from_fn(grid.real_grid(), |x| (TAU * x[0]).cos());
        let h = complex_hessian(&grid, &u).unwrap();
        let want = u.scaled(-(PI * PI));
        assert!(h.comp_re(0, 0).unwrap().sup_distance(&want).unwrap() < 1e-12);
        assert_eq!(h.comp_im(0, 0).unwrap().sup_norm(), 0.0);
    }

    #[test]
    fn hermitian_to_roundoff_on_rough_data() {
        let grid = ComplexTorusGrid::new(2, 8).unwrap();
        let u = grid_tensor::band_limited_scalar(grid.real_grid(), 3, 3, 1.0);
        // `new` inside complex_hessian enforces 1e-12; symmetry is exact by
        // construction, so just exercise the path.
        let h = complex_hessian(&grid, &u).unwrap();
        // Trace of the complex Hessian is a quarter of the flat Laplacian.
        let quarter_lap = Spectrum::of(&u).filtered(|k2| -0.25 * k2);
        let trace = h
            .comp_re(0, 0)
            .unwrap()
            .add(&h.comp_re(1, 1).unwrap())
            .unwrap();
        assert!(trace.sup_distance(&quarter_lap).unwrap() < 1e-10 * quarter_lap.sup_norm().max(1.0));
    }

    #[test]
    fn matches_a_finite_difference_wirtinger_oracle() {
        // n = 2 trigonometric potential, checked entry by entry against
        // high-order central differences evaluated from the closed form.
        let grid = ComplexTorusGrid::new(2, 16).unwrap();
        let f = |x: &[f64]| -> f64 {
            (TAU * x[0]).cos() * (TAU * x[2]).sin()
                + 0.5 * (TAU * (x[1] + x[3])).cos()
                + 0.25 * (TAU * x[2]).cos() * (TAU * x[3]).sin()
        };
        let u = ScalarField::from_fn(grid.real_grid(), f);
        let h = complex_hessian(&grid, &u).unwrap();

        let sample = [3usize, 7, 11, 2];
        let x0: Vec<f64> = sample
            .iter()
            .enumerate()
            .map(|(a, &i)| grid.real_grid().coords(a)[i])
            .collect();
        let p = ((sample[0] * 16 + sample[1]) * 16 + sample[2]) * 16 + sample[3];
        let oracle = crate::fubini::wirtinger_hessian_fd(&f, &x0, 1e-2);
        let got = h.point(p);
        for (a, b) in got.iter().zip(oracle.iter()) {
            assert!((a - b).norm() < 1e-8, "hessian {a} vs oracle {b}");
        }
    }
}
