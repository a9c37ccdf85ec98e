//! Closed-form Fubini–Study geometry on the standard chart of CP^n, plus a
//! high-order finite-difference Wirtinger engine used as an independent
//! oracle against the closed forms (and against the spectral Hessian).
//!
//! Everything here is analytic pointwise evaluation — no grids.

use num_complex::Complex64;

/// `phi(z) = log(1 + |z|^2)`, the potential on the chart `U_0`.
pub fn fs_potential(z: &[Complex64]) -> f64 {
    (1.0 + z.iter().map(|w| w.norm_sqr()).sum::<f64>()).ln()
}

/// `g_{i j-bar} = delta_ij / (1+|z|^2) - z-bar_i z_j / (1+|z|^2)^2`,
/// row-major `n x n`.
pub fn fs_metric(z: &[Complex64]) -> Vec<Complex64> {
    let n = z.len();
    let s = 1.0 + z.iter().map(|w| w.norm_sqr()).sum::<f64>();
    let mut g = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for j in 0..n {
            let mut v = -z[i].conj() * z[j] / (s * s);
            if i == j {
                v += 1.0 / s;
            }
            g[i * n + j] = v;
        }
    }
    g
}

/// `det g = (1 + |z|^2)^{-(n+1)}` on the chart.
pub fn fs_det(z: &[Complex64]) -> f64 {
    let n = z.len();
    let s = 1.0 + z.iter().map(|w| w.norm_sqr()).sum::<f64>();
    s.powi(-(n as i32) - 1)
}

/// The Einstein property in closed form: `Ric = (n+1) g`.
pub fn fs_ricci(z: &[Complex64]) -> Vec<Complex64> {
    let n = z.len();
    fs_metric(z)
        .into_iter()
        .map(|v| v * (n as f64 + 1.0))
        .collect()
}

/// Curvature components at the origin, flattened `[i][j][k][l]`:
/// `R_{i j-bar k l-bar}(0) = delta_ij delta_kl + delta_il delta_kj`
/// (constant holomorphic bisectional curvature; diagonal entries are 2,
/// mixed polarizations 1).
pub fn fs_origin_curvature(n: usize) -> Vec<f64> {
    let mut r = vec![0.0; n * n * n * n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let mut v = 0.0;
                    if i == j && k == l {
                        v += 1.0;
                    }
                    if i == l && k == j {
                        v += 1.0;
                    }
                    r[((i * n + j) * n + k) * n + l] = v;
                }
            }
        }
    }
    r
}

/// One-call bundle: metric and Ricci at `z`, plus the origin curvature
/// components (which are constants of the geometry, independent of `z`).
pub fn fubini_study(z: &[Complex64]) -> (Vec<Complex64>, Vec<Complex64>, Vec<f64>) {
    (fs_metric(z), fs_ricci(z), fs_origin_curvature(z.len()))
}

// ---------------------------------------------------------------------------
// High-order finite-difference Wirtinger oracle
// ---------------------------------------------------------------------------

/// 8th-order central first-derivative stencil (offsets 1..=4, antisymmetric).
const D1: [f64; 4] = [4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0];
/// 8th-order central second-derivative stencil; `D2_0` is the center weight.
const D2: [f64; 4] = [8.0 / 5.0, -1.0 / 5.0, 8.0 / 315.0, -1.0 / 560.0];
const D2_0: f64 = -205.0 / 72.0;

fn d2_same(f: &impl Fn(&[f64]) -> f64, x: &[f64], axis: usize, h: f64) -> f64 {
    let mut p = x.to_vec();
    let mut acc = D2_0 * f(x);
    for (k, w) in D2.iter().enumerate() {
        let off = (k + 1) as f64 * h;
        p[axis] = x[axis] + off;
        let plus = f(&p);
        p[axis] = x[axis] - off;
        let minus = f(&p);
        p[axis] = x[axis];
        acc += w * (plus + minus);
    }
    acc / (h * h)
}

fn d2_mixed(f: &impl Fn(&[f64]) -> f64, x: &[f64], a: usize, b: usize, h: f64) -> f64 {
    // Tensor product of two first-derivative stencils.
    let mut p = x.to_vec();
    let mut acc = 0.0;
    for (ka, wa) in D1.iter().enumerate() {
        for (kb, wb) in D1.iter().enumerate() {
            let oa = (ka + 1) as f64 * h;
            let ob = (kb + 1) as f64 * h;
            let mut sum = 0.0;
            for (sa, sb) in [(1.0, 1.0), (-1.0, -1.0), (1.0, -1.0), (-1.0, 1.0)] {
                p[a] = x[a] + sa * oa;
                p[b] = x[b] + sb * ob;
                sum += sa * sb * f(&p);
            }
            p[a] = x[a];
            p[b] = x[b];
            acc += wa * wb * sum;
        }
    }
    acc / (h * h)
}

/// Second real partial `d_a d_b f` at `x` (8th order).
pub fn second_partial_fd(f: &impl Fn(&[f64]) -> f64, x: &[f64], a: usize, b: usize, h: f64) -> f64 {
    if a == b {
        d2_same(f, x, a, h)
    } else {
        d2_mixed(f, x, a, b, h)
    }
}

/// Complex Hessian `H_{i j-bar}` of a real function of `2n` interleaved real
/// coordinates `(x_0, y_0, x_1, y_1, ...)`, by 8th-order central differences:
///
/// `H_{i j-bar} = (f_{x_i x_j} + f_{y_i y_j})/4 + i (f_{x_i y_j} - f_{y_i x_j})/4`.
pub fn wirtinger_hessian_fd(f: &impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<Complex64> {
    assert!(x.len() % 2 == 0, "interleaved coordinates come in pairs");
    let n = x.len() / 2;
    let mut out = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for j in i..n {
            let (xi, yi) = (2 * i, 2 * i + 1);
            let (xj, yj) = (2 * j, 2 * j + 1);
            let re = 0.25
                * (second_partial_fd(f, x, xi, xj, h) + second_partial_fd(f, x, yi, yj, h));
            let im = if i == j {
                0.0
            } else {
                0.25 * (second_partial_fd(f, x, xi, yj, h) - second_partial_fd(f, x, yi, xj, h))
            };
            out[i * n + j] = Complex64::new(re, im);
            out[j * n + i] = Complex64::new(re, -im);
        }
    }
    out
}

/// Fourth-order Wirtinger derivative `d_i d_j-bar d_k d_l-bar f` at `x` for a
/// real `f`, as needed for curvature at a critical point of the metric: two
/// nested complex Hessians (the outer one differentiates the closed-form
/// inner evaluation).
pub fn wirtinger_fourth_fd(
    f: &(impl Fn(&[f64]) -> f64 + Sync),
    x: &[f64],
    i: usize,
    j: usize,
    k: usize,
    l: usize,
    h: f64,
) -> Complex64 {
    // d_k d_l-bar of the scalar function  x -> Re/Im parts of H_{i j-bar}(x).
    let n = x.len() / 2;
    let re_inner = |p: &[f64]| -> f64 {
        let hmat = wirtinger_hessian_fd(f, p, h);
        hmat[i * n + j].re
    };
    let im_inner = |p: &[f64]| -> f64 {
        let hmat = wirtinger_hessian_fd(f, p, h);
        hmat[i * n + j].im
    };
    let outer_re = wirtinger_hessian_fd(&re_inner, x, h);
    let outer_im = wirtinger_hessian_fd(&im_inner, x, h);
    outer_re[k * n + l] + Complex64::new(0.0, 1.0) * outer_im[k * n + l]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn origin_metric_is_the_identity() {
        for n in 1..=3 {
            let z = vec![c(0.0, 0.0); n];
            let g = fs_metric(&z);
            for i in 0..n {
                for j in 0..n {
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((g[i * n + j] - c(want, 0.0)).norm() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn determinant_closed_form_matches_the_matrix() {
        // n = 2: det of the 2x2 closed form vs (1+|z|^2)^{-3}.
        let z = [c(0.3, -0.4), c(-0.1, 0.7)];
        let g = fs_metric(&z);
        let det = (g[0] * g[3] - g[1] * g[2]).re;
        assert!((det - fs_det(&z)).abs() < 1e-14);
    }

    #[test]
    fn stencils_reproduce_polynomial_derivatives() {
        // Single first-derivative stencil, for checking the D1 weights alone.
        let d1 = |f: &dyn Fn(&[f64]) -> f64, x: &[f64], axis: usize, h: f64| -> f64 {
            let mut p = x.to_vec();
            let mut acc = 0.0;
            for (k, w) in D1.iter().enumerate() {
                let off = (k + 1) as f64 * h;
                p[axis] = x[axis] + off;
                let plus = f(&p);
                p[axis] = x[axis] - off;
                let minus = f(&p);
                p[axis] = x[axis];
                acc += w * (plus - minus);
            }
            acc / h
        };
        let f = |x: &[f64]| x[0].powi(3) * x[1] + 2.0 * x[1] * x[1] - x[0];
        let x = [0.4, -0.3];
        assert!((second_partial_fd(&f, &x, 0, 0, 0.05) - 6.0 * 0.4 * -0.3).abs() < 1e-9);
        assert!((second_partial_fd(&f, &x, 1, 1, 0.05) - 4.0).abs() < 1e-9);
        assert!((second_partial_fd(&f, &x, 0, 1, 0.05) - 3.0 * 0.4 * 0.4).abs() < 1e-9);
        assert!((d1(&f, &x, 0, 0.05) - (3.0 * 0.4 * 0.4 * -0.3 - 1.0)).abs() < 1e-10);
    }

    #[test]
    fn fd_hessian_of_the_potential_is_the_metric() {
        // Differentiating log(1+|z|^2) recovers the closed-form metric.
        for n in [1usize, 2, 3] {
            let z: Vec<Complex64> = (0..n)
                .map(|k| c(0.2 + 0.1 * k as f64, -0.3 + 0.05 * k as f64))
                .collect();
            let x: Vec<f64> = z.iter().flat_map(|w| [w.re, w.im]).collect();
            let f = |p: &[f64]| {
                let zz: Vec<Complex64> =
                    (0..n).map(|k| c(p[2 * k], p[2 * k + 1])).collect();
                fs_potential(&zz)
            };
            let fd = wirtinger_hessian_fd(&f, &x, 0.02);
            let exact = fs_metric(&z);
            for (a, b) in fd.iter().zip(exact.iter()) {
                assert!((a - b).norm() < 1e-10, "n={n}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn ricci_from_log_det_matches_einstein_closed_form() {
        // -dd-bar log det g (computed by FD from the matrix closed form,
        // with no use of Ric = (n+1) g) equals (n+1) g.
        for n in [1usize, 2, 3] {
            let z: Vec<Complex64> = (0..n)
                .map(|k| c(-0.25 + 0.15 * k as f64, 0.2 - 0.1 * k as f64))
                .collect();
            let x: Vec<f64> = z.iter().flat_map(|w| [w.re, w.im]).collect();
            let f = |p: &[f64]| {
                let zz: Vec<Complex64> =
                    (0..n).map(|k| c(p[2 * k], p[2 * k + 1])).collect();
                -fs_det(&zz).ln()
            };
            let ric_fd = wirtinger_hessian_fd(&f, &x, 0.02);
            let want = fs_ricci(&z);
            for (a, b) in ric_fd.iter().zip(want.iter()) {
                assert!((a - b).norm() < 1e-9, "n={n}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn origin_curvature_components_match_the_quartic_differentiation() {
        // R_{i j-bar k l-bar}(0) = -d_k d_l-bar g_{i j-bar}(0) because the
        // metric is critical at the origin; check (1,1,1,1) -> 2 and
        // (1,1,2,2) -> 1 for n = 2 against FD of the closed-form metric.
        let n = 2usize;
        let x0 = vec![0.0; 2 * n];
        let cases = [((0, 0, 0, 0), 2.0), ((0, 0, 1, 1), 1.0), ((0, 1, 0, 1), 0.0)];
        for ((i, j, k, l), want) in cases {
            let re_g = |p: &[f64]| {
                let zz: Vec<Complex64> = (0..n).map(|q| c(p[2 * q], p[2 * q + 1])).collect();
                fs_metric(&zz)[i * n + j].re
            };
            let im_g = |p: &[f64]| {
                let zz: Vec<Complex64> = (0..n).map(|q| c(p[2 * q], p[2 * q + 1])).collect();
                fs_metric(&zz)[i * n + j].im
            };
            let hre = wirtinger_hessian_fd(&re_g, &x0, 0.02);
            let him = wirtinger_hessian_fd(&im_g, &x0, 0.02);
            let got = -(hre[k * n + l] + Complex64::new(0.0, 1.0) * him[k * n + l]);
            assert!(
                (got - c(want, 0.0)).norm() < 1e-9,
                "R[{i}{j}{k}{l}] = {got}, want {want}"
            );
            let table = fs_origin_curvature(n);
            assert_eq!(table[((i * n + j) * n + k) * n + l], want);
        }
    }
}
