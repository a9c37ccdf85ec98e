//! The closed-form homothety solutions against a generic time integrator and
//! against their defining algebraic identities.

use grid_tensor::{rk4_field_step, PeriodicGrid, ScalarField};
use proptest::prelude::*;
use real_ricci_flow::{sphere_extinction_time, sphere_radius};

/// Integrate `d(r^2)/dt = -2(n-1)` with the field RK4 stepper (a constant
/// field makes it a plain scalar ODE) and compare with the closed form.
fn rk4_sphere_radius(r0: f64, n: u32, t: f64, steps: usize) -> f64 {
    let grid = PeriodicGrid::unit(&[8]).unwrap();
    let mut u = ScalarField::constant(&grid, r0 * r0);
    let dt = t / steps as f64;
    let slope = -2.0 * (n as f64 - 1.0);
    let mut rhs = |_: &ScalarField| ScalarField::constant(&grid, slope);
    for _ in 0..steps {
        u = rk4_field_step(&u, dt, &mut rhs);
    }
    u.mean().sqrt()
}

#[test]
fn rk4_integration_matches_the_closed_form() {
    for &(r0, n) in &[(1.0, 2u32), (2.5, 3), (0.7, 4), (10.0, 7)] {
        let extinction = sphere_extinction_time(r0, n).unwrap();
        for frac in [0.1, 0.5, 0.9, 0.99] {
            let t = frac * extinction;
            let numeric = rk4_sphere_radius(r0, n, t, 200);
            let exact = sphere_radius(r0, n, t).unwrap();
            assert!(
                (numeric - exact).abs() <= 1e-10,
                "r0={r0} n={n} t={t}: rk4 {numeric} vs closed form {exact}"
            );
        }
    }
}

proptest! {
    /// `sphere_radius(r0,n,t)^2 + 2(n-1)t = r0^2` up to floating-point
    /// round-off (one square root and one square away from exact).
    #[test]
    fn sphere_radius_satisfies_its_algebraic_identity(
        r0 in 0.1f64..10.0,
        n in 2u32..7,
        frac in 0.0f64..0.999,
    ) {
        let t = frac * sphere_extinction_time(r0, n).unwrap();
        let r = sphere_radius(r0, n, t).unwrap();
        let lhs = r * r + 2.0 * (n as f64 - 1.0) * t;
        prop_assert!((lhs - r0 * r0).abs() <= 1e-14 * r0 * r0.max(1.0));
    }

    /// Radii past the extinction time are refused, never NaN.
    #[test]
    fn sphere_radius_is_total_up_to_extinction(
        r0 in 0.1f64..10.0,
        n in 2u32..7,
        frac in 1.0001f64..3.0,
    ) {
        let t = frac * sphere_extinction_time(r0, n).unwrap();
        prop_assert!(sphere_radius(r0, n, t).is_err());
    }
}
