//! Classical Runge-Kutta stepping for field-valued evolution equations.

use crate::field::ScalarField;

/// One RK4 step of `du/dt = rhs(u)` for a scalar field.
pub fn rk4_field_step(u: &ScalarField, dt: f64, rhs: &mut impl FnMut(&ScalarField) -> ScalarField) -> ScalarField {
    let k1 = rhs(u);
    let k2 = rhs(&axpy(u, &k1, dt / 2.0));
    let k3 = rhs(&axpy(u, &k2, dt / 2.0));
    let k4 = rhs(&axpy(u, &k3, dt));
    let mut out = u.clone();
    let n = out.len();
    let (s1, s2, s3, s4) = (k1.as_slice(), k2.as_slice(), k3.as_slice(), k4.as_slice());
    let dst = out.as_mut_slice();
    for i in 0..n {
        dst[i] += dt / 6.0 * (s1[i] + 2.0 * s2[i] + 2.0 * s3[i] + s4[i]);
    }
    out
}

fn axpy(u: &ScalarField, k: &ScalarField, h: f64) -> ScalarField {
    let mut out = u.clone();
    let n = out.len();
    let src = k.as_slice();
    let dst = out.as_mut_slice();
    for i in 0..n {
        dst[i] += h * src[i];
    }
    out
}
