use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{FlowError, Result};

/// Time-stepping scheme.
///
/// Both schemes share the right-hand side and the gauge bookkeeping; they
/// differ only in how the stiff flat-Laplacian part of the linearization is
/// treated, and therefore in the step-size budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// Classical four-stage Runge-Kutta, fully explicit. Step size capped at
    /// `dt_safety * h2w` where `h2w = 1 / (4 * max tr g~^{-1} * max k^2)`.
    ExplicitRk4,
    /// Implicit-explicit Euler: the flat quarter-Laplacian is solved
    /// implicitly per mode (a diagonal spectral division), the curved
    /// remainder explicitly. Removes the stiffness of the highest modes and
    /// allows `imex_factor` times the explicit budget.
    Imex,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scheme::ExplicitRk4 => write!(f, "explicit-rk4"),
            Scheme::Imex => write!(f, "imex"),
        }
    }
}

impl FromStr for Scheme {
    type Err = FlowError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "explicit-rk4" | "rk4" => Ok(Scheme::ExplicitRk4),
            "imex" => Ok(Scheme::Imex),
            other => Err(FlowError::BadConfig(format!(
                "unknown scheme {other:?} (expected explicit-rk4 or imex)"
            ))),
        }
    }
}

/// Knobs of [`run_flow`](crate::run_flow). `Default` gives the documented
/// defaults; [`validate`](FlowConfig::validate) rejects inconsistent values.
#[derive(Debug, Clone)]
pub struct FlowConfig {
    pub scheme: Scheme,
    /// Fraction of the linearized-stability budget `h2w` an explicit step may
    /// use.
    pub dt_safety: f64,
    /// How much further the semi-implicit scheme may stretch the explicit
    /// budget.
    pub imex_factor: f64,
    /// Terminate once `osc(F) = sup F - inf F` falls below this.
    pub stop_tol: f64,
    /// Required bound on `sup |log YC(u) + f - c|` at exit. Implied by the
    /// stopping rule whenever `stop_tol <= residual_tol`, which `validate`
    /// enforces.
    pub residual_tol: f64,
    pub max_steps: usize,
    /// Record a monitor row every this many steps (plus the initial and
    /// final states).
    pub record_every: usize,
    /// Refresh the spectral-gap estimate every this many recordings; rows in
    /// between carry the latest estimate forward. The eigensolve is by far
    /// the costliest monitor, and the metric moves little between nearby
    /// recordings.
    pub lambda1_every: usize,
    /// Relative tolerance handed to the spectral-gap estimator.
    pub lambda1_tol: f64,
    /// Constant `c` in the trace differential inequality; the flat-background
    /// instantiation needs `c > 1`.
    pub yau2_c: f64,
    /// Decay fits ignore recordings before this time.
    pub transient: f64,
    /// Write a potential checkpoint every this many steps (0 disables).
    pub checkpoint_every: usize,
    /// Where checkpoints go; required when `checkpoint_every > 0`.
    pub checkpoint_dir: Option<PathBuf>,
}

impl Default for FlowConfig {
    fn default() -> Self {
        FlowConfig {
            scheme: Scheme::Imex,
            dt_safety: 0.2,
            imex_factor: 50.0,
            stop_tol: 1e-9,
            residual_tol: 1e-6,
            max_steps: 400_000,
            record_every: 10,
            lambda1_every: 10,
            lambda1_tol: 1e-9,
            yau2_c: 2.0,
            transient: 0.25,
            checkpoint_every: 0,
            checkpoint_dir: None,
        }
    }
}

impl FlowConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(FlowError::BadConfig(msg));
        if !(self.dt_safety > 0.0 && self.dt_safety <= 1.0) {
            return bad(format!("dt_safety must lie in (0, 1], got {}", self.dt_safety));
        }
        if !(self.imex_factor >= 1.0) {
            return bad(format!("imex_factor must be >= 1, got {}", self.imex_factor));
        }
        if !(self.stop_tol > 0.0) {
            return bad(format!("stop_tol must be positive, got {}", self.stop_tol));
        }
        if !(self.residual_tol > 0.0) {
            return bad(format!(
                "residual_tol must be positive, got {}",
                self.residual_tol
            ));
        }
        if self.stop_tol > self.residual_tol {
            return bad(format!(
                "stop_tol ({}) must not exceed residual_tol ({}): the exit residual \
                 sup|F - mean F| is bounded by the stopping oscillation",
                self.stop_tol, self.residual_tol
            ));
        }
        if self.max_steps == 0 {
            return bad("max_steps must be at least 1".to_string());
        }
        if self.record_every == 0 || self.lambda1_every == 0 {
            return bad("record_every and lambda1_every must be at least 1".to_string());
        }
        if !(self.lambda1_tol > 0.0) {
            return bad(format!(
                "lambda1_tol must be positive, got {}",
                self.lambda1_tol
            ));
        }
        if !(self.yau2_c > 1.0) {
            return bad(format!(
                "yau2_c must exceed 1 (flat background needs T2 + c > 1 with T2 = 0), got {}",
                self.yau2_c
            ));
        }
        if !(self.transient >= 0.0) {
            return bad(format!("transient must be >= 0, got {}", self.transient));
        }
        if self.checkpoint_every > 0 && self.checkpoint_dir.is_none() {
            return bad("checkpoint_every > 0 requires checkpoint_dir".to_string());
        }
        Ok(())
    }
}
