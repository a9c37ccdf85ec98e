//! Seeded synthetic potentials: deterministic inputs for tests, experiment
//! drivers, and serialization corpora.

use grid_tensor::{band_limited_scalar, ScalarField};

use crate::error::Result;
use crate::grid::ComplexTorusGrid;
use crate::herm::HermitianMetricField;
use crate::potential::{potential_to_metric, KahlerPotential};

/// Band-limited real potential candidate with grid mean exactly zero;
/// the same `(seed, max_mode, amp)` always reproduces the same field.
pub fn seeded_potential(
    grid: &ComplexTorusGrid,
    seed: u64,
    max_mode: usize,
    amp: f64,
) -> ScalarField {
    band_limited_scalar(grid.real_grid(), seed, max_mode, amp).recentered()
}

/// Seeded admissible potential over the flat background. The amplitude
/// starts at `amp` and halves until `delta + Hess u` stays inside the
/// positive cone; the Hessian scales linearly with the amplitude, so for a
/// fixed band this always terminates.
pub fn admissible_potential(
    grid: &ComplexTorusGrid,
    seed: u64,
    max_mode: usize,
    amp: f64,
) -> Result<KahlerPotential> {
    let base = seeded_potential(grid, seed, max_mode, 1.0);
    let mut scale = amp;
    let mut last = None;
    for _ in 0..40 {
        let p = KahlerPotential::over_flat(base.scaled(scale))?;
        match potential_to_metric(&p) {
            Ok(_) => return Ok(p),
            Err(e) => last = Some(e),
        }
        scale *= 0.5;
    }
    Err(last.expect("loop ran at least once"))
}

/// Seeded admissible metric (the metric induced by [`admissible_potential`]),
/// for tests that need a curved but valid reference geometry.
pub fn admissible_metric(
    grid: &ComplexTorusGrid,
    seed: u64,
    max_mode: usize,
    amp: f64,
) -> Result<HermitianMetricField> {
    potential_to_metric(&admissible_potential(grid, seed, max_mode, amp)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeding_is_deterministic_and_distinct() {
        let grid = ComplexTorusGrid::new(1, 16).unwrap();
        let a = seeded_potential(&grid, 42, 2, 0.1);
        let b = seeded_potential(&grid, 42, 2, 0.1);
        let c = seeded_potential(&grid, 43, 2, 0.1);
        assert_eq!(a.as_slice(), b.as_slice());
        assert!(a.sup_distance(&c).unwrap() > 1e-6);
        assert!(a.mean().abs() < 1e-15);
        assert!(a.sup_norm() > 0.0);
    }

    #[test]
    fn oversized_amplitudes_are_halved_into_the_cone() {
        let grid = ComplexTorusGrid::new(1, 16).unwrap();
        // amp = 5 is far outside the cone for mode-1 bands (Hessian ~ pi^2 amp)
        let p = admissible_potential(&grid, 9, 1, 5.0).unwrap();
        assert!(potential_to_metric(&p).is_ok());
        assert!(p.u().sup_norm() < 5.0, "amplitude was not reduced");
    }

    #[test]
    fn admissible_metric_is_positive_definite() {
        let grid = ComplexTorusGrid::new(2, 8).unwrap();
        let g = admissible_metric(&grid, 3, 1, 0.02).unwrap();
        assert!(g.field().min_eigenvalue() > 0.0);
    }
}
