//! Volume-normalizing rescale factors for flow trajectories.

use crate::error::{FlowError, Result};

/// `psi(t) = (Vol(t)/Vol(0))^{-2/n}`: the conformal factor that pins the
/// volume of `psi(t) g(t)` to its initial value, since
/// `Vol(psi g) = psi^{n/2} Vol(g)`.
pub fn normalized_rescale(volumes: &[f64], n: u32) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(FlowError::BadDimension(0));
    }
    let v0 = *volumes.first().ok_or(FlowError::NonPositiveVolume(0.0))?;
    if !(v0 > 0.0) {
        return Err(FlowError::NonPositiveVolume(v0));
    }
    volumes
        .iter()
        .map(|&v| {
            if v > 0.0 {
                Ok((v / v0).powf(-2.0 / n as f64))
            } else {
                Err(FlowError::NonPositiveVolume(v))
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::homothety::sphere_radius;

    #[test]
    fn constant_volume_gives_unit_factor() {
        let psi = normalized_rescale(&[2.0, 2.0, 2.0], 3).unwrap();
        assert!(psi.iter().all(|&p| (p - 1.0).abs() < 1e-15));
    }

    #[test]
    fn quadrupled_volume_in_two_dimensions() {
        let psi = normalized_rescale(&[1.0, 4.0], 2).unwrap();
        assert!((psi[1] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn rescale_pins_the_volume_exactly() {
        let vols = [1.0, 0.8, 0.64, 0.3, 0.11];
        for n in [2u32, 3, 4] {
            let psi = normalized_rescale(&vols, n).unwrap();
            for (v, p) in vols.iter().zip(&psi) {
                assert!((p.powf(n as f64 / 2.0) * v - vols[0]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn sphere_trajectory_rescales_to_a_constant_metric() {
        // Vol(S^n of radius r) = r^n * Vol(unit); psi must equal (r0/r)^2 so
        // that psi * g(t) = psi r^2 g_unit is constant.
        let n = 2u32;
        let r0 = 1.0;
        let times = [0.0, 0.1, 0.2, 0.3, 0.4];
        let vols: Vec<f64> = times
            .iter()
            .map(|&t| sphere_radius(r0, n, t).unwrap().powi(n as i32))
            .collect();
        let psi = normalized_rescale(&vols, n).unwrap();
        for (&t, &p) in times.iter().zip(&psi) {
            let r = sphere_radius(r0, n, t).unwrap();
            assert!((p * r * r - r0 * r0).abs() < 1e-12, "t = {t}");
        }
    }

    #[test]
    fn nonpositive_volume_is_an_error() {
        assert!(normalized_rescale(&[1.0, 0.0], 2).is_err());
        assert!(normalized_rescale(&[1.0, -3.0], 2).is_err());
        assert!(normalized_rescale(&[], 2).is_err());
    }
}
