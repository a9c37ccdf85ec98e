//! The a-priori-estimate monitor suite.
//!
//! Each recorded row tracks every quantity the continuity-of-estimates
//! argument bounds along the flow: the time derivative `F` and its
//! oscillation, the normalized derivative `phi` and its energy, the first
//! nonzero Laplace eigenvalue of the evolving metric, trace and relative
//! eigenvalue extremes, the third-order quantity `S`, and the pointwise
//! margin of the second Yau inequality.

use grid_tensor::{lambda1_warm, multiplier_pair_table, ScalarField, Spectrum};
use kahler_geometry::{
    real_metric, relative_eigenvalue_range, ComplexTorusGrid, HermitianMatrixField,
};
use num_complex::Complex64;

use crate::analysis::yau2_margin;
use crate::config::FlowConfig;
use crate::error::{FlowError, Result};
use crate::state::FlowState;

/// One recorded snapshot of the monitored quantities.
#[derive(Debug, Clone)]
pub struct MonitorRow {
    pub t: f64,
    /// `sup |F|` with `F = log det(g~)/det(g0) + f`.
    pub sup_abs_f: f64,
    pub inf_f: f64,
    pub sup_f: f64,
    /// `omega = sup F - inf F`, exactly, by construction.
    pub osc_f: f64,
    /// Plain grid mean of `F` (the quantity that converges to `c_bar`).
    pub mean_f: f64,
    /// `E = 1/2 integral phi^2 dV~` with `phi = F - mean_{dV~} F`.
    pub energy: f64,
    /// First nonzero eigenvalue of the Laplacian of the evolving real metric.
    pub lambda1: f64,
    pub min_trace: f64,
    pub max_trace: f64,
    /// Extremes over all points of the eigenvalues of `g~` relative to `g0`.
    pub min_eig: f64,
    pub max_eig: f64,
    /// `sup S` for the nonnegative third-order quantity built from `u`.
    pub s_sup: f64,
    /// Minimum margin of the second Yau inequality; absent when `n = 1`
    /// (the exponent `n/(n-1)` is undefined there).
    pub yau2_margin: Option<f64>,
    /// `integral dV~` — constant along the flow on a closed manifold.
    pub volume: f64,
    /// `integral |grad phi|^2 dV~` in the evolving metric.
    pub grad_energy: f64,
    /// `integral phi^2 dV~` (twice the energy; kept for the Poincare check).
    pub phi_l2: f64,
    pub sup_phi: f64,
}

impl MonitorRow {
    fn csv_line(&self) -> String {
        let y = self
            .yau2_margin
            .map(|v| v.to_string())
            .unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            self.t,
            self.sup_abs_f,
            self.mean_f,
            self.osc_f,
            self.energy,
            self.lambda1,
            self.min_trace,
            self.max_trace,
            self.min_eig,
            self.max_eig,
            self.s_sup,
            y
        )
    }

    fn check_finite(&self) -> Result<()> {
        let entries = [
            ("sup_absF", self.sup_abs_f),
            ("inf_F", self.inf_f),
            ("sup_F", self.sup_f),
            ("osc_F", self.osc_f),
            ("meanF", self.mean_f),
            ("E", self.energy),
            ("lambda1", self.lambda1),
            ("min_trace", self.min_trace),
            ("max_trace", self.max_trace),
            ("min_eig", self.min_eig),
            ("max_eig", self.max_eig),
            ("S_sup", self.s_sup),
            ("yau2_margin", self.yau2_margin.unwrap_or(0.0)),
            ("volume", self.volume),
            ("grad_energy", self.grad_energy),
            ("phi_l2", self.phi_l2),
            ("sup_phi", self.sup_phi),
        ];
        for (what, v) in entries {
            if !v.is_finite() {
                return Err(FlowError::NonFinite { what, t: self.t });
            }
        }
        Ok(())
    }
}

pub const CSV_HEADER: &str =
    "t,sup_absF,meanF,osc_F,E,lambda1,min_trace,max_trace,min_eig,max_eig,S_sup,yau2_margin";

/// The time-indexed collection of monitor rows for one run.
#[derive(Debug, Clone, Default)]
pub struct MonitorSeries {
    rows: Vec<MonitorRow>,
}

impl MonitorSeries {
    pub fn new() -> Self {
        MonitorSeries { rows: Vec::new() }
    }

    pub fn push(&mut self, row: MonitorRow) {
        self.rows.push(row);
    }

    pub fn rows(&self) -> &[MonitorRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.t).collect()
    }

    pub fn omega(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.osc_f).collect()
    }

    pub fn energy(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.energy).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.csv_line());
            out.push('\n');
        }
        out
    }
}

/// Compute one monitor row for `state` under forcing `f`, with a fresh
/// eigenvalue solve. Long runs should record through the flow driver, which
/// amortizes the eigenvalue work across snapshots.
pub fn monitors_update(state: &FlowState, f: &ScalarField) -> Result<MonitorRow> {
    let cfg = FlowConfig::default();
    let mut engine = MonitorEngine::new(state.grid(), f, &cfg)?;
    engine.record(state)
}

/// Reusable monitor machinery: derivative multiplier tables baked once, the
/// eigenvalue estimate refreshed every `lambda1_every` recordings and
/// warm-started from the previous solve.
pub(crate) struct MonitorEngine {
    grid: ComplexTorusGrid,
    f: ScalarField,
    yau2_c: f64,
    lambda1_tol: f64,
    lambda1_every: usize,
    /// Gradient-pair tables: per complex axis, the packed multipliers of
    /// `(d/dx_a, d/dy_a)`.
    grad_tables: Vec<Vec<Complex64>>,
    /// Third-derivative multiplier tables for `i <= k`, in triple order.
    third_tables: Vec<Vec<Complex64>>,
    recordings: usize,
    lambda1_last: f64,
    ritz_warm: Option<Vec<ScalarField>>,
}

impl MonitorEngine {
    pub fn new(
        real_grid: &grid_tensor::PeriodicGrid,
        f: &ScalarField,
        cfg: &FlowConfig,
    ) -> Result<MonitorEngine> {
        let grid = ComplexTorusGrid::from_real(real_grid.clone())?;
        if f.grid() != real_grid {
            return Err(FlowError::GridMismatch);
        }
        let n = grid.n();
        let nyq: Vec<usize> = real_grid.resolution().iter().map(|&r| r / 2).collect();
        let odd = move |idx: &[usize], k: &[f64], axis: usize| -> f64 {
            if idx[axis] == nyq[axis] {
                0.0
            } else {
                k[axis]
            }
        };

        let mut grad_tables = Vec::with_capacity(n);
        for a in 0..n {
            let (x, y) = (2 * a, 2 * a + 1);
            // Table for the pair (d/dx_a, d/dy_a): the packed multiplier is
            // i k_x + i (i k_y) = -k_y + i k_x.
            grad_tables.push(multiplier_pair_table(
                real_grid,
                |idx, k| -odd(idx, k, y),
                |idx, k| odd(idx, k, x),
            ));
        }

        // Wirtinger derivative symbols: holomorphic d_a has multiplier
        // (k_y + i k_x)/2 on axis pair a, anti-holomorphic the conjugate
        // with flipped real part.
        let hol = |idx: &[usize], k: &[f64], a: usize| -> Complex64 {
            Complex64::new(0.5 * odd(idx, k, 2 * a + 1), 0.5 * odd(idx, k, 2 * a))
        };
        let ahol = |idx: &[usize], k: &[f64], a: usize| -> Complex64 {
            Complex64::new(-0.5 * odd(idx, k, 2 * a + 1), 0.5 * odd(idx, k, 2 * a))
        };
        let mut third_tables = Vec::new();
        for i in 0..n {
            for j in 0..n {
                for kk in i..n {
                    let m = |idx: &[usize], kv: &[f64]| -> Complex64 {
                        hol(idx, kv, i) * ahol(idx, kv, j) * hol(idx, kv, kk)
                    };
                    third_tables.push(multiplier_pair_table(
                        real_grid,
                        |idx, kv| m(idx, kv).re,
                        |idx, kv| m(idx, kv).im,
                    ));
                }
            }
        }

        Ok(MonitorEngine {
            grid,
            f: f.clone(),
            yau2_c: cfg.yau2_c,
            lambda1_tol: cfg.lambda1_tol,
            lambda1_every: cfg.lambda1_every,
            grad_tables,
            third_tables,
            recordings: 0,
            lambda1_last: f64::NAN,
            ritz_warm: None,
        })
    }

    pub fn record(&mut self, state: &FlowState) -> Result<MonitorRow> {
        if state.grid() != self.grid.real_grid() {
            return Err(FlowError::GridMismatch);
        }
        let n = self.grid.n();
        let npts = self.grid.len();
        let metric = state.metric();
        let det = metric.det();

        // F = log det ratio + f; the background is flat, so det(g0) = 1.
        let f_field = det.map(f64::ln).add(&self.f)?;
        let sup_f = f_field.max();
        let inf_f = f_field.min();
        let mean_f = f_field.mean();

        // Volume weights of dV~ = det(g~) dV.
        let cellvol = self.grid.real_grid().cell_volume();
        let dv = det.as_slice();
        let fv = f_field.as_slice();
        let mut volume = 0.0;
        let mut f_dv = 0.0;
        for (&d, &v) in dv.iter().zip(fv) {
            volume += d;
            f_dv += v * d;
        }
        volume *= cellvol;
        f_dv *= cellvol;
        let phi = f_field.shifted(-f_dv / volume);
        let pv = phi.as_slice();
        let mut phi_l2 = 0.0;
        for (&p, &d) in pv.iter().zip(dv) {
            phi_l2 += p * p * d;
        }
        phi_l2 *= cellvol;
        let energy = 0.5 * phi_l2;

        // Dirichlet energy of phi in the evolving metric.
        let inv = metric.inverse();
        let grad_energy = self.dirichlet(&phi, &inv, dv, cellvol)?;

        // Trace field n + Lap_a u directly from the metric diagonal.
        let (mut min_trace, mut max_trace) = (f64::INFINITY, f64::NEG_INFINITY);
        for p in 0..npts {
            let pt = metric.field().point(p);
            let mut tr = 0.0;
            for i in 0..n {
                tr += pt[i * n + i].re;
            }
            min_trace = min_trace.min(tr);
            max_trace = max_trace.max(tr);
        }

        let flat = kahler_geometry::HermitianMetricField::flat(&self.grid);
        let (min_eig, max_eig) = relative_eigenvalue_range(&flat, metric)?;

        let s_sup = self.third_order_sup(&Spectrum::of(state.u()), &inv)?;

        let yau2 = if n >= 2 {
            Some(yau2_margin(state, &self.f, self.yau2_c)?)
        } else {
            None
        };

        if self.recordings % self.lambda1_every == 0 || !self.lambda1_last.is_finite() {
            let rm = real_metric(metric)?;
            let (l1, ritz) = lambda1_warm(&rm, self.lambda1_tol, self.ritz_warm.as_deref())?;
            self.lambda1_last = l1;
            self.ritz_warm = Some(ritz);
        }
        self.recordings += 1;

        let row = MonitorRow {
            t: state.t(),
            sup_abs_f: sup_f.abs().max(inf_f.abs()),
            inf_f,
            sup_f,
            osc_f: sup_f - inf_f,
            mean_f,
            energy,
            lambda1: self.lambda1_last,
            min_trace,
            max_trace,
            min_eig,
            max_eig,
            s_sup,
            yau2_margin: yau2,
            volume,
            grad_energy,
            phi_l2,
            sup_phi: phi.max(),
        };
        row.check_finite()?;
        Ok(row)
    }

    /// `integral |grad phi|^2 dV~` where the squared gradient is taken in
    /// the real Riemannian metric of `g~`:
    /// `|grad phi|^2 = 2 g^{i jbar} d_i phi d_jbar phi`.
    fn dirichlet(
        &self,
        phi: &ScalarField,
        inv: &HermitianMatrixField,
        det: &[f64],
        cellvol: f64,
    ) -> Result<f64> {
        let n = self.grid.n();
        let s = Spectrum::of(phi);
        let mut dx = Vec::with_capacity(n);
        let mut dy = Vec::with_capacity(n);
        for table in &self.grad_tables {
            let (a, b) = s.real_pair_tabled(table)?;
            dx.push(a);
            dy.push(b);
        }
        let dxs: Vec<&[f64]> = dx.iter().map(|f| f.as_slice()).collect();
        let dys: Vec<&[f64]> = dy.iter().map(|f| f.as_slice()).collect();
        let mut acc = 0.0;
        for p in 0..self.grid.len() {
            let pt = inv.point(p);
            let mut q = 0.0;
            for i in 0..n {
                for j in 0..n {
                    // b = g^{i jbar} is the (j, i) entry of the stored
                    // matrix inverse.
                    let b = pt[j * n + i];
                    q += b.re * (dxs[i][p] * dxs[j][p] + dys[i][p] * dys[j][p])
                        - b.im * (dxs[i][p] * dys[j][p] - dys[i][p] * dxs[j][p]);
                }
            }
            acc += 0.5 * q * det[p];
        }
        Ok(acc * cellvol)
    }

    /// Pointwise supremum of the nonnegative third-order quantity
    /// `S = g^{i rbar} g^{jbar s} g^{k tbar} u_{i jbar k} conj(u_{r sbar t})`,
    /// computed from the spectrum of `u` and the inverse metric.
    fn third_order_sup(&self, s: &Spectrum, inv: &HermitianMatrixField) -> Result<f64> {
        let n = self.grid.n();
        let npts = self.grid.len();

        // Materialize the distinct third derivatives (symmetric in the two
        // holomorphic slots).
        let mut fields = Vec::with_capacity(self.third_tables.len());
        for table in &self.third_tables {
            fields.push(s.real_pair_tabled(table)?);
        }
        // Map a full (i, j, k) triple to its stored representative.
        let slot = |i: usize, j: usize, k: usize| -> usize {
            let (lo, hi) = if i <= k { (i, k) } else { (k, i) };
            // Triples are stored for lo <= hi: index of (lo, j, hi) in
            // the i-major, j-middle, k-in-tail-range order.
            let mut idx = 0;
            for ii in 0..lo {
                idx += n * (n - ii);
            }
            idx + j * (n - lo) + (hi - lo)
        };
        let res: Vec<&[f64]> = fields.iter().map(|(a, _)| a.as_slice()).collect();
        let ims: Vec<&[f64]> = fields.iter().map(|(_, b)| b.as_slice()).collect();

        if n == 1 {
            let (re, im) = (res[0], ims[0]);
            let mut sup = 0.0f64;
            for p in 0..npts {
                let b = inv.point(p)[0].re;
                sup = sup.max((re[p] * re[p] + im[p] * im[p]) * b * b * b);
            }
            return Ok(sup);
        }

        let nn = n * n;
        let n3 = n * nn;
        let mut v = vec![Complex64::new(0.0, 0.0); n3];
        let mut x1 = vec![Complex64::new(0.0, 0.0); n3];
        let mut x2 = vec![Complex64::new(0.0, 0.0); n3];
        let mut x3 = vec![Complex64::new(0.0, 0.0); n3];
        let mut b = vec![Complex64::new(0.0, 0.0); nn];
        let mut sup = 0.0f64;
        for p in 0..npts {
            let pt = inv.point(p);
            for i in 0..n {
                for j in 0..n {
                    // b[i][j] = g^{i jbar} = (j, i) entry of the inverse.
                    b[i * n + j] = pt[j * n + i];
                    for k in 0..n {
                        let t = slot(i, j, k);
                        v[(i * n + j) * n + k] = Complex64::new(res[t][p], ims[t][p]);
                    }
                }
            }
            // Contract one index at a time: x1 over i, x2 over k, x3 over j.
            for r in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        let mut acc = Complex64::new(0.0, 0.0);
                        for i in 0..n {
                            acc += v[(i * n + j) * n + k] * b[i * n + r];
                        }
                        x1[(r * n + j) * n + k] = acc;
                    }
                }
            }
            for r in 0..n {
                for j in 0..n {
                    for t in 0..n {
                        let mut acc = Complex64::new(0.0, 0.0);
                        for k in 0..n {
                            acc += x1[(r * n + j) * n + k] * b[k * n + t];
                        }
                        x2[(r * n + j) * n + t] = acc;
                    }
                }
            }
            for r in 0..n {
                for ss in 0..n {
                    for t in 0..n {
                        let mut acc = Complex64::new(0.0, 0.0);
                        for j in 0..n {
                            acc += x2[(r * n + j) * n + t] * b[j * n + ss].conj();
                        }
                        x3[(r * n + ss) * n + t] = acc;
                    }
                }
            }
            let mut sp = 0.0;
            for (va, xa) in v.iter().zip(&x3) {
                sp += (va.conj() * xa).re;
            }
            sup = sup.max(sp);
        }
        Ok(sup)
    }
}
