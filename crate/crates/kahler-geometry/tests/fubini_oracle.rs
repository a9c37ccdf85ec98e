//! The closed-form chart geometry checked against pure finite differences:
//! no spectral machinery, no reuse of the identity under test.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use kahler_geometry::dense_c;
use kahler_geometry::fubini::{
    fs_metric, fs_origin_curvature, fs_potential, fs_ricci, wirtinger_fourth_fd,
    wirtinger_hessian_fd,
};

fn chart_point(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|_| Complex64::new(rng.gen_range(-0.6..0.6), rng.gen_range(-0.6..0.6)))
        .collect()
}

#[test]
fn einstein_property_holds_at_random_chart_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for n in [1usize, 2, 3] {
        for _ in 0..20 {
            let z = chart_point(&mut rng, n);
            let x: Vec<f64> = z.iter().flat_map(|w| [w.re, w.im]).collect();
            // Ricci from scratch: -dd-bar log det of the closed-form matrix,
            // determinant by Cholesky, derivatives by central differences.
            let f = |p: &[f64]| {
                let zz: Vec<Complex64> =
                    (0..n).map(|k| Complex64::new(p[2 * k], p[2 * k + 1])).collect();
                -dense_c::hermitian_det(&fs_metric(&zz), n).unwrap().ln()
            };
            let ric = wirtinger_hessian_fd(&f, &x, 0.02);
            let want = fs_ricci(&z);
            for (a, b) in ric.iter().zip(want.iter()) {
                assert!((a - b).norm() < 1e-8, "n = {n}, z = {z:?}: {a} vs {b}");
            }
        }
    }
}

#[test]
fn origin_curvature_table_matches_nested_differentiation() {
    // At the origin the metric is critical, so the curvature reduces to the
    // fourth Wirtinger derivative of the potential with a sign.
    let n = 2usize;
    let x0 = vec![0.0; 2 * n];
    let phi = |p: &[f64]| {
        let zz: Vec<Complex64> = (0..n).map(|k| Complex64::new(p[2 * k], p[2 * k + 1])).collect();
        fs_potential(&zz)
    };
    let table = fs_origin_curvature(n);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let got = -wirtinger_fourth_fd(&phi, &x0, i, j, k, l, 0.02);
                    let want = table[((i * n + j) * n + k) * n + l];
                    assert!(
                        (got - Complex64::new(want, 0.0)).norm() < 1e-5,
                        "R[{i}{j}{k}{l}] = {got}, want {want}"
                    );
                }
            }
        }
    }
    // Diagonal polarization is twice the mixed one — the constant-curvature
    // signature of the geometry.
    assert_eq!(table[0], 2.0);
    assert_eq!(table[((0 * n + 0) * n + 1) * n + 1], 1.0);
}
