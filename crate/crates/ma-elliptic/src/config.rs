use crate::error::{MaError, Result};

/// Solver configuration for both the single Newton solve and the continuity
/// path. The path fields are ignored by [`crate::newton_solve`].
#[derive(Debug, Clone)]
pub struct ContinuityConfig {
    /// Monotone path parameters; must start at 0 and end at 1.
    pub t_steps: Vec<f64>,
    /// Newton termination: residual sup-norm below this value.
    pub newton_tol: f64,
    pub newton_max_iters: usize,
    /// Initial step fraction in `(0, 1]`; halved on rejection, floor 1/64.
    pub damping: f64,
    /// Relative L2 tolerance for the inner linear solves.
    pub linear_tol: f64,
    pub linear_max_iters: usize,
}

/// `k` evenly spaced parameters covering `[0, 1]` (`k >= 2`).
pub fn uniform_steps(k: usize) -> Vec<f64> {
    assert!(k >= 2, "a path needs at least its two endpoints");
    (0..k).map(|i| i as f64 / (k - 1) as f64).collect()
}

impl Default for ContinuityConfig {
    fn default() -> Self {
        ContinuityConfig {
            t_steps: uniform_steps(11),
            newton_tol: 1e-11,
            newton_max_iters: 40,
            damping: 1.0,
            linear_tol: 1e-10,
            linear_max_iters: 400,
        }
    }
}

impl ContinuityConfig {
    /// Checks the fields used by a single Newton solve.
    pub fn validate_newton(&self) -> Result<()> {
        if !(self.newton_tol > 0.0 && self.newton_tol.is_finite()) {
            return Err(MaError::BadConfig("newton_tol must be positive".into()));
        }
        if self.newton_max_iters == 0 {
            return Err(MaError::BadConfig("newton_max_iters must be >= 1".into()));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(MaError::BadConfig("damping must lie in (0, 1]".into()));
        }
        if !(self.linear_tol > 0.0 && self.linear_tol.is_finite()) {
            return Err(MaError::BadConfig("linear_tol must be positive".into()));
        }
        if self.linear_max_iters == 0 {
            return Err(MaError::BadConfig("linear_max_iters must be >= 1".into()));
        }
        Ok(())
    }

    /// Checks everything, including the path discretization.
    pub fn validate(&self) -> Result<()> {
        self.validate_newton()?;
        let steps = &self.t_steps;
        if steps.len() < 2 {
            return Err(MaError::BadConfig("t_steps needs at least [0, 1]".into()));
        }
        if steps[0] != 0.0 || *steps.last().expect("nonempty") != 1.0 {
            return Err(MaError::BadConfig(
                "t_steps must start at 0 and end at 1".into(),
            ));
        }
        if steps.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(MaError::BadConfig(
                "t_steps must be strictly increasing".into(),
            ));
        }
        Ok(())
    }
}
