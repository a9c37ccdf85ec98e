//! Tensor fields on periodic grids and the pointwise algebra on them.
//!
//! Components are stored in one dense array of shape `grid ++ [d; rank]`,
//! contravariant slots first, so the per-point component block is contiguous.
//! Metric validation (symmetry, positive definiteness) happens on
//! construction: a metric that degenerates anywhere fails loudly with the
//! offending grid index rather than being regularized, since in the flow
//! solvers loss of positivity is itself a monitored event.

use ndarray::{ArrayD, IxDyn};

use crate::error::{GridError, Result};
use crate::field::ScalarField;
use crate::grid::{for_each_index, unravel, PeriodicGrid};
use crate::spectral::derivative;

/// Dense symmetric / general matrix helpers for the small (d <= 4 in
/// practice) per-point systems. Row-major `d x d` slices.
pub mod linalg {
    /// Lower-triangular Cholesky factor of a symmetric matrix, or the failing
    /// pivot value.
    pub fn cholesky(a: &[f64], d: usize, out: &mut [f64]) -> std::result::Result<(), f64> {
        out[..d * d].fill(0.0);
        for i in 0..d {
            for j in 0..=i {
                let mut s = a[i * d + j];
                for k in 0..j {
                    s -= out[i * d + k] * out[j * d + k];
                }
                if i == j {
                    if s <= 0.0 {
                        return Err(s);
                    }
                    out[i * d + i] = s.sqrt();
                } else {
                    out[i * d + j] = s / out[j * d + j];
                }
            }
        }
        Ok(())
    }

    /// Solve `L L^T x = b` in place given the Cholesky factor.
    pub fn cholesky_solve(l: &[f64], d: usize, b: &mut [f64]) {
        for i in 0..d {
            let mut s = b[i];
            for k in 0..i {
                s -= l[i * d + k] * b[k];
            }
            b[i] = s / l[i * d + i];
        }
        for i in (0..d).rev() {
            let mut s = b[i];
            for k in i + 1..d {
                s -= l[k * d + i] * b[k];
            }
            b[i] = s / l[i * d + i];
        }
    }

    /// Inverse of a symmetric positive-definite matrix via its Cholesky factor.
    pub fn spd_inverse(a: &[f64], d: usize, out: &mut [f64]) -> std::result::Result<(), f64> {
        let mut l = [0.0; 16];
        cholesky(a, d, &mut l[..d * d])?;
        let mut col = [0.0; 4];
        for j in 0..d {
            let col = &mut col[..d];
            col.fill(0.0);
            col[j] = 1.0;
            cholesky_solve(&l[..d * d], d, col);
            for i in 0..d {
                out[i * d + j] = col[i];
            }
        }
        Ok(())
    }

    /// sqrt(det a) for symmetric positive-definite `a`.
    pub fn spd_sqrt_det(a: &[f64], d: usize) -> std::result::Result<f64, f64> {
        let mut l = [0.0; 16];
        cholesky(a, d, &mut l[..d * d])?;
        Ok((0..d).map(|i| l[i * d + i]).product())
    }

    /// Full eigendecomposition of a small symmetric matrix by cyclic Jacobi
    /// sweeps: eigenvalues ascending, eigenvectors as the COLUMNS of `v`.
    pub fn sym_eigen(a: &[f64], d: usize) -> (Vec<f64>, Vec<f64>) {
        let mut m = a[..d * d].to_vec();
        let mut v = vec![0.0; d * d];
        for i in 0..d {
            v[i * d + i] = 1.0;
        }
        for _ in 0..100 {
            let mut off = 0.0;
            for p in 0..d {
                for q in p + 1..d {
                    off += m[p * d + q] * m[p * d + q];
                }
            }
            if off < 1e-32 {
                break;
            }
            for p in 0..d {
                for q in p + 1..d {
                    let apq = m[p * d + q];
                    if apq.abs() < 1e-300 {
                        continue;
                    }
                    let theta = 0.5 * (m[q * d + q] - m[p * d + p]) / apq;
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for k in 0..d {
                        let akp = m[k * d + p];
                        let akq = m[k * d + q];
                        m[k * d + p] = c * akp - s * akq;
                        m[k * d + q] = s * akp + c * akq;
                    }
                    for k in 0..d {
                        let apk = m[p * d + k];
                        let aqk = m[q * d + k];
                        m[p * d + k] = c * apk - s * aqk;
                        m[q * d + k] = s * apk + c * aqk;
                    }
                    for k in 0..d {
                        let vkp = v[k * d + p];
                        let vkq = v[k * d + q];
                        v[k * d + p] = c * vkp - s * vkq;
                        v[k * d + q] = s * vkp + c * vkq;
                    }
                }
            }
        }
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&i, &j| m[i * d + i].partial_cmp(&m[j * d + j]).expect("finite"));
        let values: Vec<f64> = order.iter().map(|&i| m[i * d + i]).collect();
        let mut vectors = vec![0.0; d * d];
        for (new_col, &old_col) in order.iter().enumerate() {
            for k in 0..d {
                vectors[k * d + new_col] = v[k * d + old_col];
            }
        }
        (values, vectors)
    }

    /// Eigenvalue range of a small symmetric matrix by cyclic Jacobi sweeps.
    pub fn sym_eigen_range(a: &[f64], d: usize) -> (f64, f64) {
        let mut m = [0.0; 16];
        m[..d * d].copy_from_slice(&a[..d * d]);
        for _ in 0..64 {
            let mut off = 0.0;
            for p in 0..d {
                for q in p + 1..d {
                    off += m[p * d + q] * m[p * d + q];
                }
            }
            if off < 1e-30 {
                break;
            }
            for p in 0..d {
                for q in p + 1..d {
                    let apq = m[p * d + q];
                    if apq.abs() < 1e-300 {
                        continue;
                    }
                    let theta = 0.5 * (m[q * d + q] - m[p * d + p]) / apq;
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for k in 0..d {
                        let akp = m[k * d + p];
                        let akq = m[k * d + q];
                        m[k * d + p] = c * akp - s * akq;
                        m[k * d + q] = s * akp + c * akq;
                    }
                    for k in 0..d {
                        let apk = m[p * d + k];
                        let aqk = m[q * d + k];
                        m[p * d + k] = c * apk - s * aqk;
                        m[q * d + k] = s * apk + c * aqk;
                    }
                }
            }
        }
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..d {
            lo = lo.min(m[i * d + i]);
            hi = hi.max(m[i * d + i]);
        }
        (lo, hi)
    }
}

/// A tensor field: one `d^rank` component block per grid point, contravariant
/// slots stored before covariant ones.
#[derive(Debug, Clone)]
pub struct TensorField {
    grid: PeriodicGrid,
    contra: usize,
    co: usize,
    values: ArrayD<f64>,
}

impl TensorField {
    pub fn zeros(grid: &PeriodicGrid, contra: usize, co: usize) -> Self {
        let d = grid.dims();
        let mut shape = grid.shape().to_vec();
        shape.extend(std::iter::repeat(d).take(contra + co));
        TensorField {
            grid: grid.clone(),
            contra,
            co,
            values: ArrayD::zeros(IxDyn(&shape)),
        }
    }

    /// Build from a function of the point coordinates and component
    /// multi-index (contravariant indices first).
    pub fn from_fn(
        grid: &PeriodicGrid,
        contra: usize,
        co: usize,
        mut f: impl FnMut(&[f64], &[usize]) -> f64,
    ) -> Self {
        let mut t = TensorField::zeros(grid, contra, co);
        let d = grid.dims();
        let rank = contra + co;
        let comp_total = d.pow(rank as u32);
        let coords: Vec<Vec<f64>> = (0..d).map(|a| grid.coords(a)).collect();
        let mut x = vec![0.0; d];
        let mut cidx = vec![0; rank];
        let slice = t.values.as_slice_mut().expect("standard layout");
        for_each_index(grid.shape(), |idx, flat| {
            for (a, &i) in idx.iter().enumerate() {
                x[a] = coords[a][i];
            }
            let base = flat * comp_total;
            for c in 0..comp_total {
                unravel_comp(c, d, &mut cidx);
                slice[base + c] = f(&x, &cidx);
            }
        });
        t
    }

    /// Build from the flat per-point component-major layout (the storage
    /// order of [`TensorField::values`]): point-major, each point a
    /// `d^rank` row-major component block.
    pub fn from_flat(grid: &PeriodicGrid, contra: usize, co: usize, data: Vec<f64>) -> Result<Self> {
        let d = grid.dims();
        let mut shape = grid.shape().to_vec();
        shape.extend(std::iter::repeat(d).take(contra + co));
        let expected: usize = shape.iter().product();
        if data.len() != expected {
            return Err(GridError::ShapeMismatch {
                got: vec![data.len()],
                expected: vec![expected],
            });
        }
        Ok(TensorField {
            grid: grid.clone(),
            contra,
            co,
            values: ArrayD::from_shape_vec(IxDyn(&shape), data).expect("length checked"),
        })
    }

    pub fn from_values(grid: &PeriodicGrid, contra: usize, co: usize, values: ArrayD<f64>) -> Result<Self> {
        let d = grid.dims();
        let mut shape = grid.shape().to_vec();
        shape.extend(std::iter::repeat(d).take(contra + co));
        if values.shape() != shape.as_slice() {
            return Err(GridError::ShapeMismatch {
                got: values.shape().to_vec(),
                expected: shape,
            });
        }
        let values = if values.is_standard_layout() {
            values
        } else {
            values.as_standard_layout().to_owned()
        };
        Ok(TensorField {
            grid: grid.clone(),
            contra,
            co,
            values,
        })
    }

    pub fn grid(&self) -> &PeriodicGrid {
        &self.grid
    }

    pub fn contra(&self) -> usize {
        self.contra
    }

    pub fn co(&self) -> usize {
        self.co
    }

    pub fn rank(&self) -> usize {
        self.contra + self.co
    }

    /// Matrix dimension of each slot (the number of grid axes).
    pub fn dim(&self) -> usize {
        self.grid.dims()
    }

    pub fn values(&self) -> &ArrayD<f64> {
        &self.values
    }

    pub(crate) fn comp_total(&self) -> usize {
        self.dim().pow(self.rank() as u32)
    }

    pub(crate) fn as_slice(&self) -> &[f64] {
        self.values.as_slice().expect("standard layout")
    }

    pub(crate) fn as_mut_slice(&mut self) -> &mut [f64] {
        self.values.as_slice_mut().expect("standard layout")
    }

    pub(crate) fn comp_offset(&self, comp: &[usize]) -> usize {
        let d = self.dim();
        comp.iter().fold(0, |acc, &c| acc * d + c)
    }

    /// One component as a standalone scalar field (copies).
    pub fn comp_field(&self, comp: &[usize]) -> Result<ScalarField> {
        if comp.len() != self.rank() || comp.iter().any(|&c| c >= self.dim()) {
            return Err(GridError::AxisOutOfRange {
                axis: *comp.iter().max().unwrap_or(&0),
                dims: self.dim(),
            });
        }
        let ct = self.comp_total();
        let off = self.comp_offset(comp);
        let src = self.as_slice();
        let mut out = Vec::with_capacity(self.grid.len());
        for p in 0..self.grid.len() {
            out.push(src[p * ct + off]);
        }
        let values = ArrayD::from_shape_vec(IxDyn(self.grid.shape()), out).expect("length matches");
        ScalarField::from_values(&self.grid, values)
    }

    pub fn sup_norm(&self) -> f64 {
        self.as_slice().iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn add(&self, other: &TensorField) -> Result<TensorField> {
        self.check_same_signature(other)?;
        let mut out = self.clone();
        ndarray::Zip::from(&mut out.values).and(&other.values).for_each(|a, &b| *a += b);
        Ok(out)
    }

    pub fn sub(&self, other: &TensorField) -> Result<TensorField> {
        self.check_same_signature(other)?;
        let mut out = self.clone();
        ndarray::Zip::from(&mut out.values).and(&other.values).for_each(|a, &b| *a -= b);
        Ok(out)
    }

    pub fn scaled(&self, c: f64) -> TensorField {
        let mut out = self.clone();
        out.values.mapv_inplace(|v| v * c);
        out
    }

    pub fn sup_distance(&self, other: &TensorField) -> Result<f64> {
        Ok(self.sub(other)?.sup_norm())
    }

    fn check_same_signature(&self, other: &TensorField) -> Result<()> {
        if self.grid != *other.grid() || self.contra != other.contra || self.co != other.co {
            return Err(GridError::GridMismatch);
        }
        Ok(())
    }

    /// Trace over one contravariant and one covariant slot (slot positions
    /// count contravariant slots first).
    pub fn trace(&self, contra_slot: usize, co_slot: usize) -> Result<TensorField> {
        if contra_slot >= self.contra || co_slot >= self.co {
            return Err(GridError::AxisOutOfRange {
                axis: contra_slot.max(co_slot),
                dims: self.rank(),
            });
        }
        let d = self.dim();
        let rank = self.rank();
        let s1 = contra_slot;
        let s2 = self.contra + co_slot;
        let mut out = TensorField::zeros(&self.grid, self.contra - 1, self.co - 1);
        let ct_in = self.comp_total();
        let ct_out = out.comp_total();
        let src = self.as_slice();
        let npts = self.grid.len();
        let mut keep = vec![0usize; rank.saturating_sub(2)];
        let mut full = vec![0usize; rank];
        {
            let dst = out.as_mut_slice();
            for c_out in 0..ct_out {
                unravel_comp(c_out, d, &mut keep);
                // distribute kept indices around the two traced slots
                let mut kept_iter = keep.iter();
                for (s, slot) in full.iter_mut().enumerate() {
                    if s != s1 && s != s2 {
                        *slot = *kept_iter.next().expect("arity");
                    }
                }
                for p in 0..npts {
                    let mut acc = 0.0;
                    for t in 0..d {
                        full[s1] = t;
                        full[s2] = t;
                        let off = full.iter().fold(0, |a, &c| a * d + c);
                        acc += src[p * ct_in + off];
                    }
                    dst[p * ct_out + c_out] = acc;
                }
            }
        }
        Ok(out)
    }
}

pub(crate) fn unravel_comp(mut flat: usize, d: usize, out: &mut [usize]) {
    for slot in out.iter_mut().rev() {
        *slot = flat % d;
        flat /= d;
    }
}

/// A rank-(0,2) symmetric positive-definite tensor field. Symmetry and
/// positivity are verified pointwise on construction.
#[derive(Debug, Clone)]
pub struct MetricField {
    tensor: TensorField,
}

impl MetricField {
    pub fn new(tensor: TensorField) -> Result<Self> {
        if tensor.contra() != 0 || tensor.co() != 2 {
            return Err(GridError::GridMismatch);
        }
        let d = tensor.dim();
        let ct = tensor.comp_total();
        let src = tensor.as_slice();
        let shape = tensor.grid().shape().to_vec();
        let mut l = [0.0; 16];
        for p in 0..tensor.grid().len() {
            let m = &src[p * ct..(p + 1) * ct];
            let scale = m.iter().fold(1.0f64, |a, v| a.max(v.abs()));
            for i in 0..d {
                for j in 0..i {
                    if (m[i * d + j] - m[j * d + i]).abs() > 1e-12 * scale {
                        return Err(GridError::NotSymmetric {
                            index: unravel(&shape, p),
                            i,
                            j,
                        });
                    }
                }
            }
            if let Err(pivot) = linalg::cholesky(m, d, &mut l[..d * d]) {
                return Err(GridError::NotPositiveDefinite {
                    index: unravel(&shape, p),
                    pivot,
                });
            }
        }
        Ok(MetricField { tensor })
    }

    pub fn from_fn(grid: &PeriodicGrid, f: impl Fn(&[f64], usize, usize) -> f64) -> Result<Self> {
        MetricField::new(TensorField::from_fn(grid, 0, 2, |x, c| f(x, c[0], c[1])))
    }

    /// The Euclidean metric `delta_{ij}`.
    pub fn flat(grid: &PeriodicGrid) -> Self {
        MetricField::from_fn(grid, |_, i, j| if i == j { 1.0 } else { 0.0 }).expect("identity is SPD")
    }

    /// Homothety `c * delta_{ij}` of the flat metric.
    pub fn scaled_flat(grid: &PeriodicGrid, c: f64) -> Result<Self> {
        MetricField::from_fn(grid, |_, i, j| if i == j { c } else { 0.0 })
    }

    /// The 2-D conformal metric `exp(2 w) delta_{ij}`.
    pub fn conformal_2d(w: &ScalarField) -> Result<Self> {
        if w.grid().dims() != 2 {
            return Err(GridError::GridMismatch);
        }
        let grid = w.grid().clone();
        let mut t = TensorField::zeros(&grid, 0, 2);
        {
            let src = w.as_slice();
            let dst = t.as_mut_slice();
            for (p, &wv) in src.iter().enumerate() {
                let e = (2.0 * wv).exp();
                dst[p * 4] = e;
                dst[p * 4 + 3] = e;
            }
        }
        MetricField::new(t)
    }

    pub fn grid(&self) -> &PeriodicGrid {
        self.tensor.grid()
    }

    pub fn dim(&self) -> usize {
        self.tensor.dim()
    }

    pub fn tensor(&self) -> &TensorField {
        &self.tensor
    }

    pub fn comp_field(&self, i: usize, j: usize) -> Result<ScalarField> {
        self.tensor.comp_field(&[i, j])
    }

    pub(crate) fn as_slice(&self) -> &[f64] {
        self.tensor.as_slice()
    }

    /// Pointwise eigenvalue extremes over the whole grid.
    pub fn eigenvalue_range(&self) -> (f64, f64) {
        let d = self.dim();
        let ct = d * d;
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for chunk in self.as_slice().chunks_exact(ct) {
            let (a, b) = linalg::sym_eigen_range(chunk, d);
            lo = lo.min(a);
            hi = hi.max(b);
        }
        (lo, hi)
    }
}

/// Pointwise inverse of a positive-definite metric; the result satisfies
/// `g * g^{-1} = I` to 1e-12.
pub fn metric_inverse(g: &MetricField) -> Result<MetricField> {
    let d = g.dim();
    let ct = d * d;
    let grid = g.grid().clone();
    let shape = grid.shape().to_vec();
    let mut out = TensorField::zeros(&grid, 0, 2);
    {
        let src = g.as_slice();
        let dst = out.as_mut_slice();
        for p in 0..grid.len() {
            if let Err(pivot) = linalg::spd_inverse(&src[p * ct..(p + 1) * ct], d, &mut dst[p * ct..(p + 1) * ct]) {
                return Err(GridError::NotPositiveDefinite {
                    index: unravel(&shape, p),
                    pivot,
                });
            }
        }
    }
    MetricField::new(out)
}

/// Christoffel symbols of the Levi-Civita connection,
/// `Gamma^k_{ij} = 1/2 g^{kl} (d_i g_{jl} + d_j g_{il} - d_l g_{ij})`,
/// returned with component order `[k][i][j]`.
pub fn christoffel(g: &MetricField) -> Result<TensorField> {
    let d = g.dim();
    let grid = g.grid().clone();
    let ginv = metric_inverse(g)?;

    // dg[l][i][j] = d_l g_{ij}, exploiting g symmetry.
    let mut dg = vec![vec![vec![None::<ScalarField>; d]; d]; d];
    for i in 0..d {
        for j in i..d {
            let gij = g.comp_field(i, j)?;
            for l in 0..d {
                let der = derivative(&gij, l, 1)?;
                dg[l][j][i] = Some(der.clone());
                dg[l][i][j] = Some(der);
            }
        }
    }
    let dg_at = |l: usize, i: usize, j: usize| dg[l][i][j].as_ref().expect("filled").as_slice();

    let mut out = TensorField::zeros(&grid, 1, 2);
    let ct = d * d * d;
    let npts = grid.len();
    {
        let inv = ginv.as_slice();
        let dst = out.as_mut_slice();
        for i in 0..d {
            for j in i..d {
                // lower-index bracket: d_i g_{jl} + d_j g_{il} - d_l g_{ij}
                for l in 0..d {
                    let a = dg_at(i, j, l);
                    let b = dg_at(j, i, l);
                    let c = dg_at(l, i, j);
                    for k in 0..d {
                        let o1 = (k * d + i) * d + j;
                        let o2 = (k * d + j) * d + i;
                        for p in 0..npts {
                            let v = 0.5 * inv[p * d * d + k * d + l] * (a[p] + b[p] - c[p]);
                            dst[p * ct + o1] += v;
                            if i != j {
                                dst[p * ct + o2] += v;
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Covariant derivative of a tensor field, adding one covariant slot in
/// front: `(nabla t)_{i A} = d_i t_A + Gamma-corrections` for each slot of
/// `t`. `gamma` must be Christoffel symbols on the same grid.
pub fn covariant_derivative(gamma: &TensorField, t: &TensorField) -> Result<TensorField> {
    if gamma.contra() != 1 || gamma.co() != 2 || gamma.grid() != t.grid() {
        return Err(GridError::GridMismatch);
    }
    let d = t.dim();
    let rank = t.rank();
    let grid = t.grid().clone();
    let npts = grid.len();
    let ct_in = t.comp_total();
    let mut out = TensorField::zeros(&grid, t.contra(), t.co() + 1);

    // Layout of the output block: contravariant slots of t first, then the
    // new derivative index i, then the covariant slots of t.
    let out_offset = |i: usize, comp: &[usize], contra: usize| -> usize {
        let mut acc = 0;
        for &c in &comp[..contra] {
            acc = acc * d + c;
        }
        acc = acc * d + i;
        for &c in &comp[contra..] {
            acc = acc * d + c;
        }
        acc
    };

    // Partial-derivative part, component by component.
    let mut cidx = vec![0usize; rank];
    for c in 0..ct_in {
        unravel_comp(c, d, &mut cidx);
        let comp = t.comp_field(&cidx)?;
        for i in 0..d {
            let der = derivative(&comp, i, 1)?;
            let src = der.as_slice();
            let off = out_offset(i, &cidx, t.contra());
            let ct_out = out.comp_total();
            let dst = out.as_mut_slice();
            for p in 0..npts {
                dst[p * ct_out + off] += src[p];
            }
        }
    }

    // Connection corrections, pointwise.
    let gsl = gamma.as_slice();
    let tsl = t.as_slice();
    let ct_out = out.comp_total();
    let contra = t.contra();
    let dst = out.as_mut_slice();
    let mut comp = vec![0usize; rank];
    let mut probe = vec![0usize; rank];
    for c in 0..ct_in {
        unravel_comp(c, d, &mut comp);
        for i in 0..d {
            let off_out = out_offset(i, &comp, contra);
            for s in 0..rank {
                probe.copy_from_slice(&comp);
                for q in 0..d {
                    probe[s] = q;
                    let off_probe = probe.iter().fold(0, |a, &x| a * d + x);
                    let (gi, sign) = if s < contra {
                        // +Gamma^{a_s}_{i q} t^{... q ...}
                        ((comp[s] * d + i) * d + q, 1.0)
                    } else {
                        // -Gamma^{q}_{i a_s} t_{... q ...}
                        ((q * d + i) * d + comp[s], -1.0)
                    };
                    for p in 0..npts {
                        dst[p * ct_out + off_out] +=
                            sign * gsl[p * d * d * d + gi] * tsl[p * ct_in + off_probe];
                    }
                }
            }
        }
    }
    Ok(out)
}
