//! Moving-frame transport: the linear systems satisfied by the Wilczynski
//! tetrahedral and its line-geometry images, their zero-curvature test,
//! and RK4 transport over the grid.

use crate::calculus::{log_deriv, Axis};
use crate::coeffs::{Coeffs, Derived};
use crate::error::{Result, SurfError};
use crate::grid::{GridSpec, ScalarField};
use crate::report::ResidualReport;
use crate::stencil::segment_midpoint_weights;

/// Which linear system to assemble; spectral variants carry λ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SystemSelector {
    /// 4x4 system for (r, r₁, r₂, η).
    Wilczynski4,
    /// 6x6 system for (U, A, P, V, B, Q) in Plücker coordinates.
    Plucker6,
    /// 6x6 spectral system of the isothermally asymptotic reduction.
    Plucker6Mvn,
    /// 6x6 spectral system of the projectively minimal reduction.
    Plucker6Projmin,
    /// 8x8 spectral system of the Jonas reduction, coupling (H, K).
    Jonas8,
}

impl SystemSelector {
    pub fn dim(&self) -> usize {
        match self {
            SystemSelector::Wilczynski4 => 4,
            SystemSelector::Jonas8 => 8,
            _ => 6,
        }
    }

    pub fn is_spectral(&self) -> bool {
        matches!(
            self,
            SystemSelector::Plucker6Mvn | SystemSelector::Plucker6Projmin | SystemSelector::Jonas8
        )
    }

    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "wilczynski4" => Ok(SystemSelector::Wilczynski4),
            "plucker6" => Ok(SystemSelector::Plucker6),
            "plucker6-mvn" => Ok(SystemSelector::Plucker6Mvn),
            "plucker6-projmin" => Ok(SystemSelector::Plucker6Projmin),
            "jonas8" => Ok(SystemSelector::Jonas8),
            other => Err(SurfError::InvalidParam(format!(
                "unknown system selector '{other}'"
            ))),
        }
    }
}

/// A d x d matrix per grid node, row-major nodes, row-major entries.
#[derive(Debug, Clone)]
pub struct MatrixField {
    pub grid: GridSpec,
    pub dim: usize,
    data: Vec<f64>,
    mask: Vec<bool>,
}

impl MatrixField {
    pub fn zeros(grid: GridSpec, dim: usize) -> Self {
        MatrixField {
            grid,
            dim,
            data: vec![0.0; grid.len() * dim * dim],
            mask: vec![true; grid.len()],
        }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> &[f64] {
        let d2 = self.dim * self.dim;
        let p = self.grid.idx(i, j) * d2;
        &self.data[p..p + d2]
    }

    #[inline]
    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut [f64] {
        let d2 = self.dim * self.dim;
        let p = self.grid.idx(i, j) * d2;
        &mut self.data[p..p + d2]
    }

    #[inline]
    pub fn valid(&self, i: usize, j: usize) -> bool {
        self.mask[self.grid.idx(i, j)]
    }

    pub fn set_valid(&mut self, i: usize, j: usize, ok: bool) {
        let p = self.grid.idx(i, j);
        self.mask[p] = ok;
    }

    /// Extract one entry as a scalar field (for differentiation).
    pub fn entry_field(&self, r: usize, c: usize) -> ScalarField {
        let mut f = ScalarField::zeros(self.grid);
        for j in 0..self.grid.ny {
            for i in 0..self.grid.nx {
                if self.mask[self.grid.idx(i, j)] {
                    f.set(i, j, self.at(i, j)[r * self.dim + c]);
                } else {
                    f.set_mask(i, j, false);
                }
            }
        }
        f
    }
}

/// A d-vector per grid node.
#[derive(Debug, Clone)]
pub struct VectorField {
    pub grid: GridSpec,
    pub dim: usize,
    data: Vec<f64>,
    mask: Vec<bool>,
}

impl VectorField {
    pub fn zeros(grid: GridSpec, dim: usize) -> Self {
        VectorField {
            grid,
            dim,
            data: vec![0.0; grid.len() * dim],
            mask: vec![true; grid.len()],
        }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> &[f64] {
        let p = self.grid.idx(i, j) * self.dim;
        &self.data[p..p + self.dim]
    }

    pub fn set(&mut self, i: usize, j: usize, v: &[f64]) {
        let p = self.grid.idx(i, j) * self.dim;
        self.data[p..p + self.dim].copy_from_slice(v);
    }

    #[inline]
    pub fn valid(&self, i: usize, j: usize) -> bool {
        self.mask[self.grid.idx(i, j)]
    }

    pub fn set_valid(&mut self, i: usize, j: usize, ok: bool) {
        let p = self.grid.idx(i, j);
        self.mask[p] = ok;
    }

    pub fn component(&self, c: usize) -> ScalarField {
        let mut f = ScalarField::zeros(self.grid);
        for j in 0..self.grid.ny {
            for i in 0..self.grid.nx {
                if self.valid(i, j) {
                    f.set(i, j, self.at(i, j)[c]);
                } else {
                    f.set_mask(i, j, false);
                }
            }
        }
        f
    }
}

/// Frame state: `dim` transported rows of `m` components each.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameState {
    pub dim: usize,
    pub m: usize,
    pub rows: Vec<f64>,
}

impl FrameState {
    pub fn identity(dim: usize) -> Self {
        let mut rows = vec![0.0; dim * dim];
        for i in 0..dim {
            rows[i * dim + i] = 1.0;
        }
        FrameState { dim, m: dim, rows }
    }

    pub fn column(dim: usize, v: &[f64]) -> Self {
        assert_eq!(v.len(), dim);
        FrameState {
            dim,
            m: 1,
            rows: v.to_vec(),
        }
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[f64] {
        &self.rows[r * self.m..(r + 1) * self.m]
    }

    /// Determinant (square states only).
    pub fn det(&self) -> f64 {
        assert_eq!(self.dim, self.m);
        let n = self.dim;
        let mut a = self.rows.clone();
        let mut det = 1.0;
        for col in 0..n {
            let piv = (col..n)
                .max_by(|&p, &q| {
                    a[p * n + col]
                        .abs()
                        .partial_cmp(&a[q * n + col].abs())
                        .unwrap()
                })
                .unwrap();
            if a[piv * n + col] == 0.0 {
                return 0.0;
            }
            if piv != col {
                for c in 0..n {
                    a.swap(col * n + c, piv * n + c);
                }
                det = -det;
            }
            det *= a[col * n + col];
            for r in col + 1..n {
                let f = a[r * n + col] / a[col * n + col];
                for c in col..n {
                    a[r * n + c] -= f * a[col * n + c];
                }
            }
        }
        det
    }

    /// Rescale (and if necessary flip the first row) so that det = 1.
    pub fn normalized(&self) -> Result<FrameState> {
        let d = self.det();
        if d == 0.0 || !d.is_finite() {
            return Err(SurfError::Singular("frame determinant vanishes".into()));
        }
        let s = d.abs().powf(-1.0 / self.dim as f64);
        let mut rows: Vec<f64> = self.rows.iter().map(|v| v * s).collect();
        if d < 0.0 {
            for c in 0..self.m {
                rows[c] = -rows[c];
            }
        }
        Ok(FrameState {
            dim: self.dim,
            m: self.m,
            rows,
        })
    }
}

struct CoeffFields {
    beta: ScalarField,
    gamma: ScalarField,
    gx: ScalarField,
    by: ScalarField,
    bx: ScalarField,
    k: ScalarField,
    l: ScalarField,
    a: ScalarField,
    b: ScalarField,
}

fn coeff_fields(c: &Coeffs, d: &Derived) -> Result<CoeffFields> {
    Ok(CoeffFields {
        beta: c.beta.clone(),
        gamma: c.gamma.clone(),
        gx: log_deriv(&c.gamma, Axis::X)?,
        by: log_deriv(&c.beta, Axis::Y)?,
        bx: log_deriv(&c.beta, Axis::X)?,
        k: d.k.clone(),
        l: d.l.clone(),
        a: d.a.clone(),
        b: d.b.clone(),
    })
}

fn class_gate(name: &str, lhs: &ScalarField, rhs: &ScalarField, tol: f64) -> Result<()> {
    let diff = lhs.zip(rhs, |p, q| p - q)?;
    let scale = lhs.sup_norm().max(rhs.sup_norm()).max(1e-300);
    if diff.sup_norm() > tol * scale {
        return Err(SurfError::ClassPrecondition {
            class: name.into(),
            residual: diff.sup_norm() / scale,
            tol,
        });
    }
    Ok(())
}

/// Assemble the transport matrices (X, Y) of the selected system.
/// λ is required by spectral variants and rejected otherwise.
pub fn system_matrices(
    c: &Coeffs,
    d: &Derived,
    sel: SystemSelector,
    lambda: Option<f64>,
    tol: f64,
) -> Result<(MatrixField, MatrixField)> {
    match (sel.is_spectral(), lambda) {
        (true, None) => {
            return Err(SurfError::InvalidParam(format!(
                "{sel:?} needs a spectral parameter"
            )))
        }
        (false, Some(_)) => {
            return Err(SurfError::InvalidParam(format!(
                "{sel:?} does not accept a spectral parameter"
            )))
        }
        _ => {}
    }
    let lam = lambda.unwrap_or(0.0);
    match sel {
        SystemSelector::Plucker6Mvn => class_gate(
            "isothermally-asymptotic (beta = gamma)",
            &c.beta,
            &c.gamma,
            tol,
        )?,
        SystemSelector::Jonas8 => class_gate(
            "jonas (beta_x = gamma_y)",
            &crate::calculus::dx(&c.beta)?,
            &crate::calculus::dy(&c.gamma)?,
            tol,
        )?,
        SystemSelector::Plucker6Projmin => {
            if lam == 0.0 {
                return Err(SurfError::InvalidParam(
                    "the projectively minimal system needs lambda != 0".into(),
                ));
            }
        }
        _ => {}
    }

    let f = coeff_fields(c, d)?;
    let g = *c.grid();
    let dim = sel.dim();
    let mut xm = MatrixField::zeros(g, dim);
    let mut ym = MatrixField::zeros(g, dim);
    for j in 0..g.ny {
        for i in 0..g.nx {
            let ok = f.gx.valid(i, j)
                && f.by.valid(i, j)
                && f.bx.valid(i, j)
                && f.k.valid(i, j)
                && f.l.valid(i, j)
                && f.a.valid(i, j)
                && f.b.valid(i, j);
            if !ok {
                xm.set_valid(i, j, false);
                ym.set_valid(i, j, false);
                continue;
            }
            let beta = f.beta.get(i, j);
            let gamma = f.gamma.get(i, j);
            let gx = f.gx.get(i, j);
            let by = f.by.get(i, j);
            let bx = f.bx.get(i, j);
            let (k, l, a, b) = (
                f.k.get(i, j),
                f.l.get(i, j),
                f.a.get(i, j),
                f.b.get(i, j),
            );
            let x = xm.at_mut(i, j);
            match sel {
                SystemSelector::Wilczynski4 => {
                    #[rustfmt::skip]
                    let rows = [
                        0.5 * gx,       1.0,       0.0,      0.0,
                        0.5 * b,       -0.5 * gx,  beta,     0.0,
                        0.5 * k,        0.0,       0.5 * gx, 1.0,
                        0.5 * beta * a, 0.5 * k,   0.5 * b, -0.5 * gx,
                    ];
                    x.copy_from_slice(&rows);
                }
                SystemSelector::Plucker6 => {
                    #[rustfmt::skip]
                    let rows = [
                        0.0,       0.0, 0.0,  beta,      0.0, 0.0,
                        k,         0.0, 0.0,  0.0,       0.0, 0.0,
                        0.0,       k,   0.0, -beta * a,  0.0, 0.0,
                        0.0,       0.0, 0.0,  gx,        1.0, 0.0,
                        0.0,       0.0, 0.0,  b,         0.0, 1.0,
                        -beta * a, 0.0, beta, 0.0,       b,  -gx,
                    ];
                    x.copy_from_slice(&rows);
                }
                SystemSelector::Plucker6Mvn => {
                    #[rustfmt::skip]
                    let rows = [
                        0.0,       0.0, 0.0,  beta,      0.0, 0.0,
                        k,         0.0, 0.0,  0.0,       0.0, 0.0,
                        0.0,       k,   0.0, -beta * a,  0.0, 0.0,
                        0.0,       0.0, 0.0,  bx,        1.0, 0.0,
                        0.0,       0.0, 0.0,  b,         0.0, 1.0,
                        -beta * a, 0.0, beta, lam,       b,  -bx,
                    ];
                    x.copy_from_slice(&rows);
                }
                SystemSelector::Plucker6Projmin => {
                    let lb = lam * beta;
                    #[rustfmt::skip]
                    let rows = [
                        0.0,     0.0, 0.0,  lb,     0.0, 0.0,
                        k,       0.0, 0.0,  0.0,    0.0, 0.0,
                        0.0,     k,   0.0, -lb * a, 0.0, 0.0,
                        0.0,     0.0, 0.0,  gx,     1.0, 0.0,
                        0.0,     0.0, 0.0,  b,      0.0, 1.0,
                        -lb * a, 0.0, lb,   0.0,    b,  -gx,
                    ];
                    x.copy_from_slice(&rows);
                }
                SystemSelector::Jonas8 => {
                    #[rustfmt::skip]
                    let rows = [
                        0.0,       0.0, 0.0,  beta,     0.0, 0.0,  0.0,    0.0,
                        k,         0.0, 0.0,  0.0,      0.0, 0.0,  0.0,    0.0,
                        0.0,       k,   0.0, -beta * a, 0.0, 0.0,  0.0,    0.0,
                        0.0,       0.0, 0.0,  gx,       1.0, 0.0,  0.0,    0.0,
                        0.0,       0.0, 0.0,  b,        0.0, 1.0,  0.0,    0.0,
                        -beta * a, 0.0, beta, 0.0,      b,  -gx,   1.0,    0.0,
                        0.0,       0.0, 0.0,  lam,      0.0, 0.0,  0.0,   -gamma,
                        0.0,       0.0, 0.0,  0.0,      0.0, 0.0, -gamma,  0.0,
                    ];
                    x.copy_from_slice(&rows);
                }
            }
            let yv = ym.at_mut(i, j);
            match sel {
                SystemSelector::Wilczynski4 => {
                    #[rustfmt::skip]
                    let rows = [
                        0.5 * by,        0.0,      1.0,      0.0,
                        0.5 * l,         0.5 * by, 0.0,      1.0,
                        0.5 * a,         gamma,   -0.5 * by, 0.0,
                        0.5 * gamma * b, 0.5 * a,  0.5 * l, -0.5 * by,
                    ];
                    yv.copy_from_slice(&rows);
                }
                SystemSelector::Plucker6 => {
                    #[rustfmt::skip]
                    let rows = [
                        by,         1.0, 0.0,  0.0,       0.0, 0.0,
                        a,          0.0, 1.0,  0.0,       0.0, 0.0,
                        0.0,        a,  -by,  -gamma * b, 0.0, gamma,
                        gamma,      0.0, 0.0,  0.0,       0.0, 0.0,
                        0.0,        0.0, 0.0,  l,         0.0, 0.0,
                        -gamma * b, 0.0, 0.0,  0.0,       l,   0.0,
                    ];
                    yv.copy_from_slice(&rows);
                }
                SystemSelector::Plucker6Mvn => {
                    #[rustfmt::skip]
                    let rows = [
                        by,        1.0, 0.0,  0.0,      0.0, 0.0,
                        a,         0.0, 1.0,  0.0,      0.0, 0.0,
                        -lam,      a,  -by,  -beta * b, 0.0, beta,
                        beta,      0.0, 0.0,  0.0,      0.0, 0.0,
                        0.0,       0.0, 0.0,  l,        0.0, 0.0,
                        -beta * b, 0.0, 0.0,  0.0,      l,   0.0,
                    ];
                    yv.copy_from_slice(&rows);
                }
                SystemSelector::Plucker6Projmin => {
                    let gl = gamma / lam;
                    #[rustfmt::skip]
                    let rows = [
                        by,      1.0, 0.0,  0.0,    0.0, 0.0,
                        a,       0.0, 1.0,  0.0,    0.0, 0.0,
                        0.0,     a,  -by,  -gl * b, 0.0, gl,
                        gl,      0.0, 0.0,  0.0,    0.0, 0.0,
                        0.0,     0.0, 0.0,  l,      0.0, 0.0,
                        -gl * b, 0.0, 0.0,  0.0,    l,   0.0,
                    ];
                    yv.copy_from_slice(&rows);
                }
                SystemSelector::Jonas8 => {
                    #[rustfmt::skip]
                    let rows = [
                        by,         1.0, 0.0,  0.0,       0.0, 0.0,   0.0,   0.0,
                        a,          0.0, 1.0,  0.0,       0.0, 0.0,   0.0,   0.0,
                        0.0,        a,  -by,  -gamma * b, 0.0, gamma, 0.0,   1.0,
                        gamma,      0.0, 0.0,  0.0,       0.0, 0.0,   0.0,   0.0,
                        0.0,        0.0, 0.0,  l,         0.0, 0.0,   0.0,   0.0,
                        -gamma * b, 0.0, 0.0,  0.0,       l,   0.0,   0.0,   0.0,
                        0.0,        0.0, 0.0,  0.0,       0.0, 0.0,   0.0,  -beta,
                        lam,        0.0, 0.0,  0.0,       0.0, 0.0,  -beta,  0.0,
                    ];
                    yv.copy_from_slice(&rows);
                }
            }
        }
    }
    Ok((xm, ym))
}

/// X_y - Y_x + XY - YX, reported as the per-node entrywise maximum.
pub fn zero_curvature_residual(xm: &MatrixField, ym: &MatrixField) -> Result<ResidualReport> {
    if xm.grid != ym.grid || xm.dim != ym.dim {
        return Err(SurfError::GridMismatch);
    }
    let d = xm.dim;
    let g = xm.grid;
    let mut xy = Vec::with_capacity(d * d);
    let mut yx = Vec::with_capacity(d * d);
    for r in 0..d {
        for c in 0..d {
            xy.push(crate::calculus::dy(&xm.entry_field(r, c))?);
            yx.push(crate::calculus::dx(&ym.entry_field(r, c))?);
        }
    }
    let mut out = ScalarField::zeros(g);
    for j in 0..g.ny {
        for i in 0..g.nx {
            let ok = xm.valid(i, j)
                && ym.valid(i, j)
                && xy.iter().all(|f| f.valid(i, j))
                && yx.iter().all(|f| f.valid(i, j));
            if !ok {
                out.set_mask(i, j, false);
                continue;
            }
            let x = xm.at(i, j);
            let y = ym.at(i, j);
            let mut worst = 0.0f64;
            for r in 0..d {
                for c in 0..d {
                    let mut comm = 0.0;
                    for q in 0..d {
                        comm += x[r * d + q] * y[q * d + c] - y[r * d + q] * x[q * d + c];
                    }
                    let z = xy[r * d + c].get(i, j) - yx[r * d + c].get(i, j) + comm;
                    worst = worst.max(z.abs());
                }
            }
            out.set(i, j, worst);
        }
    }
    let mut rep = ResidualReport::new(g);
    rep.push("zero-curvature", &out);
    Ok(rep)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepOrder {
    XThenY,
    YThenX,
}

fn matrix_at(m: &MatrixField, i: usize, j: usize) -> Result<Vec<f64>> {
    if !m.valid(i, j) {
        return Err(SurfError::MaskedPath { i, j });
    }
    Ok(m.at(i, j).to_vec())
}

/// Matrix at the midpoint of the segment from (i,j) one step along `axis`
/// in direction `dir`, by cubic interpolation of entries along the line.
fn matrix_mid(m: &MatrixField, i: usize, j: usize, axis: Axis, dir: isize) -> Result<Vec<f64>> {
    let (n, pos) = match axis {
        Axis::X => (m.grid.nx, i),
        Axis::Y => (m.grid.ny, j),
    };
    let seg = if dir > 0 { pos } else { pos - 1 };
    let (s, w) = segment_midpoint_weights(n, seg);
    let d2 = m.dim * m.dim;
    let mut out = vec![0.0; d2];
    for (kk, &wk) in w.iter().enumerate() {
        let (ii, jj) = match axis {
            Axis::X => (s + kk, j),
            Axis::Y => (i, s + kk),
        };
        if !m.valid(ii, jj) {
            return Err(SurfError::MaskedPath { i: ii, j: jj });
        }
        let slab = m.at(ii, jj);
        for q in 0..d2 {
            out[q] += wk * slab[q];
        }
    }
    Ok(out)
}

fn mat_apply(dim: usize, m: &[f64], state: &FrameState) -> Vec<f64> {
    let cols = state.m;
    let mut out = vec![0.0; dim * cols];
    for r in 0..dim {
        for q in 0..dim {
            let a = m[r * dim + q];
            if a != 0.0 {
                let row = state.row(q);
                for c in 0..cols {
                    out[r * cols + c] += a * row[c];
                }
            }
        }
    }
    out
}

/// One RK4 step S' = M(t) S over a signed step h, with M sampled at the
/// segment start, midpoint and end.
fn rk4_step(state: &FrameState, h: f64, m0: &[f64], mm: &[f64], m1: &[f64]) -> FrameState {
    let dim = state.dim;
    let cols = state.m;
    let add = |base: &FrameState, k: &[f64], f: f64| FrameState {
        dim,
        m: cols,
        rows: base
            .rows
            .iter()
            .zip(k.iter())
            .map(|(s, kk)| s + f * kk)
            .collect(),
    };
    let k1 = mat_apply(dim, m0, state);
    let k2 = mat_apply(dim, mm, &add(state, &k1, 0.5 * h));
    let k3 = mat_apply(dim, mm, &add(state, &k2, 0.5 * h));
    let k4 = mat_apply(dim, m1, &add(state, &k3, h));
    let mut rows = state.rows.clone();
    for q in 0..rows.len() {
        rows[q] += h / 6.0 * (k1[q] + 2.0 * k2[q] + 2.0 * k3[q] + k4[q]);
    }
    FrameState { dim, m: cols, rows }
}

/// Transport `state` by `steps` lattice steps along `axis` (signed).
pub fn transport(
    xm: &MatrixField,
    ym: &MatrixField,
    state: &FrameState,
    from: (usize, usize),
    axis: Axis,
    steps: isize,
) -> Result<FrameState> {
    let g = xm.grid;
    let (mut i, mut j) = from;
    if i >= g.nx || j >= g.ny {
        return Err(SurfError::PathOffGrid);
    }
    let dir: isize = if steps >= 0 { 1 } else { -1 };
    let n = steps.unsigned_abs();
    let (m, h) = match axis {
        Axis::X => (xm, g.hx),
        Axis::Y => (ym, g.hy),
    };
    let mut s = state.clone();
    for _ in 0..n {
        let (ni, nj) = match axis {
            Axis::X => (i as isize + dir, j as isize),
            Axis::Y => (i as isize, j as isize + dir),
        };
        if ni < 0 || nj < 0 || ni as usize >= g.nx || nj as usize >= g.ny {
            return Err(SurfError::PathOffGrid);
        }
        let m0 = matrix_at(m, i, j)?;
        let mm = matrix_mid(m, i, j, axis, dir)?;
        let m1 = matrix_at(m, ni as usize, nj as usize)?;
        s = rk4_step(&s, h * dir as f64, &m0, &mm, &m1);
        i = ni as usize;
        j = nj as usize;
    }
    Ok(s)
}

/// Transport once around the rectangle with corners (i0,j0) and (i1,j1).
pub fn transport_loop(
    xm: &MatrixField,
    ym: &MatrixField,
    state: &FrameState,
    lo: (usize, usize),
    hi: (usize, usize),
) -> Result<FrameState> {
    let dx = hi.0 as isize - lo.0 as isize;
    let dy = hi.1 as isize - lo.1 as isize;
    let s = transport(xm, ym, state, lo, Axis::X, dx)?;
    let s = transport(xm, ym, &s, (hi.0, lo.1), Axis::Y, dy)?;
    let s = transport(xm, ym, &s, hi, Axis::X, -dx)?;
    transport(xm, ym, &s, (lo.0, hi.1), Axis::Y, -dy)
}

/// Frame states over the whole grid.
#[derive(Debug, Clone)]
pub struct FrameField {
    pub grid: GridSpec,
    pub dim: usize,
    pub m: usize,
    data: Vec<f64>,
}

impl FrameField {
    pub fn state(&self, i: usize, j: usize) -> FrameState {
        let len = self.dim * self.m;
        let p = self.grid.idx(i, j) * len;
        FrameState {
            dim: self.dim,
            m: self.m,
            rows: self.data[p..p + len].to_vec(),
        }
    }

    /// Scalar field of one (row, component) slot.
    pub fn row_component(&self, r: usize, c: usize) -> ScalarField {
        let mut f = ScalarField::zeros(self.grid);
        let len = self.dim * self.m;
        for j in 0..self.grid.ny {
            for i in 0..self.grid.nx {
                let p = self.grid.idx(i, j) * len;
                f.set(i, j, self.data[p + r * self.m + c]);
            }
        }
        f
    }

    /// One row over the grid as a vector field.
    pub fn row_vectors(&self, r: usize) -> VectorField {
        let mut v = VectorField::zeros(self.grid, self.m);
        let len = self.dim * self.m;
        for j in 0..self.grid.ny {
            for i in 0..self.grid.nx {
                let p = self.grid.idx(i, j) * len;
                v.set(i, j, &self.data[p + r * self.m..p + (r + 1) * self.m]);
            }
        }
        v
    }
}

/// Integrate the frame over the grid: one sweep along the first axis from
/// the origin, then sweeps along the other axis from every node of that
/// line.
pub fn integrate_frame_from(
    xm: &MatrixField,
    ym: &MatrixField,
    init: &FrameState,
    order: SweepOrder,
) -> Result<FrameField> {
    let g = xm.grid;
    let dim = init.dim;
    if dim != xm.dim {
        return Err(SurfError::InvalidParam(
            "frame dimension does not match the system".into(),
        ));
    }
    let len = dim * init.m;
    let mut data = vec![0.0; g.len() * len];
    let put = |i: usize, j: usize, s: &FrameState, data: &mut Vec<f64>| {
        let p = g.idx(i, j) * len;
        data[p..p + len].copy_from_slice(&s.rows);
    };
    match order {
        SweepOrder::XThenY => {
            let mut row_state = init.clone();
            put(0, 0, &row_state, &mut data);
            for i in 0..g.nx {
                if i > 0 {
                    row_state = transport(xm, ym, &row_state, (i - 1, 0), Axis::X, 1)?;
                    put(i, 0, &row_state, &mut data);
                }
                let mut s = row_state.clone();
                for j in 1..g.ny {
                    s = transport(xm, ym, &s, (i, j - 1), Axis::Y, 1)?;
                    put(i, j, &s, &mut data);
                }
            }
        }
        SweepOrder::YThenX => {
            let mut col_state = init.clone();
            put(0, 0, &col_state, &mut data);
            for j in 0..g.ny {
                if j > 0 {
                    col_state = transport(xm, ym, &col_state, (0, j - 1), Axis::Y, 1)?;
                    put(0, j, &col_state, &mut data);
                }
                let mut s = col_state.clone();
                for i in 1..g.nx {
                    s = transport(xm, ym, &s, (i - 1, j), Axis::X, 1)?;
                    put(i, j, &s, &mut data);
                }
            }
        }
    }
    Ok(FrameField {
        grid: g,
        dim,
        m: init.m,
        data,
    })
}

/// Assemble the system for `sel` and integrate from `init` at the origin.
/// Quadric data (β = γ = 0) is rejected here; use
/// [`integrate_separable_quadric`] for that case.
pub fn integrate_frame(
    c: &Coeffs,
    d: &Derived,
    sel: SystemSelector,
    lambda: Option<f64>,
    init: &FrameState,
    order: SweepOrder,
    tol: f64,
) -> Result<FrameField> {
    let scale = c.v.sup_norm().max(c.w.sup_norm()).max(1.0);
    if c.beta.sup_norm() <= 1e-14 * scale && c.gamma.sup_norm() <= 1e-14 * scale {
        return Err(SurfError::ClassPrecondition {
            class: "nondegenerate (quadric data: use the separable integrator)".into(),
            residual: 0.0,
            tol,
        });
    }
    let (xm, ym) = system_matrices(c, d, sel, lambda, tol)?;
    integrate_frame_from(&xm, &ym, init, order)
}

/// Initial data for the separable system r_xx = ½V(x) r, r_yy = ½W(y) r:
/// the values of (r, r_x, r_y, r_xy) at the grid origin, per component.
#[derive(Debug, Clone, Copy)]
pub struct QuadricInit {
    pub r: [f64; 4],
    pub rx: [f64; 4],
    pub ry: [f64; 4],
    pub rxy: [f64; 4],
}

impl QuadricInit {
    /// r = (1, x-x0, y-y0, (x-x0)(y-y0)) when V = W = 0.
    pub fn bilinear() -> Self {
        QuadricInit {
            r: [1.0, 0.0, 0.0, 0.0],
            rx: [0.0, 1.0, 0.0, 0.0],
            ry: [0.0, 0.0, 1.0, 0.0],
            rxy: [0.0, 0.0, 0.0, 1.0],
        }
    }
}

/// 1-D fundamental pair of u'' = ½ q(t) u sampled on the nodes:
/// (u1, u1') = (1, 0) and (u2, u2') = (0, 1) at t0.
fn fundamental_pair(q: &dyn Fn(f64) -> f64, t0: f64, h: f64, n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut u1 = Vec::with_capacity(n);
    let mut u2 = Vec::with_capacity(n);
    let mut s1 = (1.0, 0.0);
    let mut s2 = (0.0, 1.0);
    u1.push(s1.0);
    u2.push(s2.0);
    let f = |t: f64, s: (f64, f64)| (s.1, 0.5 * q(t) * s.0);
    let step = |t: f64, s: (f64, f64)| {
        let k1 = f(t, s);
        let k2 = f(t + 0.5 * h, (s.0 + 0.5 * h * k1.0, s.1 + 0.5 * h * k1.1));
        let k3 = f(t + 0.5 * h, (s.0 + 0.5 * h * k2.0, s.1 + 0.5 * h * k2.1));
        let k4 = f(t + h, (s.0 + h * k3.0, s.1 + h * k3.1));
        (
            s.0 + h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0),
            s.1 + h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1),
        )
    };
    for i in 1..n {
        let t = t0 + (i - 1) as f64 * h;
        s1 = step(t, s1);
        s2 = step(t, s2);
        u1.push(s1.0);
        u2.push(s2.0);
    }
    (u1, u2)
}

/// Integrate the β = γ = 0 system r_xx = ½V(x) r, r_yy = ½W(y) r as a
/// product of 1-D solutions. The mixed derivative at the origin is free
/// initial data and stays consistent with both equations.
pub fn integrate_separable_quadric(
    v: &dyn Fn(f64) -> f64,
    w: &dyn Fn(f64) -> f64,
    init: QuadricInit,
    grid: GridSpec,
) -> Result<VectorField> {
    grid.validate()?;
    let (u1, u2) = fundamental_pair(v, grid.x0, grid.hx, grid.nx);
    let (v1, v2) = fundamental_pair(w, grid.y0, grid.hy, grid.ny);
    let mut out = VectorField::zeros(grid, 4);
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            let mut point = [0.0; 4];
            for (c, p) in point.iter_mut().enumerate() {
                *p = init.r[c] * u1[i] * v1[j]
                    + init.rx[c] * u2[i] * v1[j]
                    + init.ry[c] * u1[i] * v2[j]
                    + init.rxy[c] * u2[i] * v2[j];
            }
            out.set(i, j, &point);
        }
    }
    Ok(out)
}

/// The four vertices of the frame at one node, as rows (r, r₁, r₂, η).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame4(pub [[f64; 4]; 4]);

impl Frame4 {
    pub fn from_state(s: &FrameState) -> Result<Frame4> {
        if s.dim != 4 || s.m != 4 {
            return Err(SurfError::InvalidParam("expected a 4x4 frame".into()));
        }
        let mut rows = [[0.0; 4]; 4];
        for (r, row) in rows.iter_mut().enumerate() {
            row.copy_from_slice(s.row(r));
        }
        Ok(Frame4(rows))
    }

    pub fn standard_basis() -> Frame4 {
        let mut rows = [[0.0; 4]; 4];
        for (r, row) in rows.iter_mut().enumerate() {
            row[r] = 1.0;
        }
        Frame4(rows)
    }
}

/// Point of the tangent Lie quadric: η + μ r₁ + ν r₂ + μν r.
pub fn lie_quadric(f: &Frame4, mu: f64, nu: f64) -> [f64; 4] {
    let [r, r1, r2, eta] = f.0;
    let mut out = [0.0; 4];
    for c in 0..4 {
        out[c] = eta[c] + mu * r1[c] + nu * r2[c] + mu * nu * r[c];
    }
    out
}

/// Per-node determinant of a square frame field.
pub fn determinant_field(ff: &FrameField) -> Result<ScalarField> {
    if ff.dim != ff.m {
        return Err(SurfError::InvalidParam(
            "determinant needs square frames".into(),
        ));
    }
    let mut out = ScalarField::zeros(ff.grid);
    for j in 0..ff.grid.ny {
        for i in 0..ff.grid.nx {
            out.set(i, j, ff.state(i, j).det());
        }
    }
    Ok(out)
}
