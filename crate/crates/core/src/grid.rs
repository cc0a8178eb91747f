//! Rectangular grids and masked scalar fields.
//!
//! All field data is stored row-major with y varying slowest: the node
//! (i, j) lives at index `j * nx + i` and carries the coordinates
//! (x0 + i·hx, y0 + j·hy).

use crate::error::{Result, SurfError};
use serde::{Deserialize, Serialize};

/// Minimum node count per axis required by the derivative stencils.
pub const MIN_NODES: usize = 7;

/// Relative threshold below which a field value counts as zero in divisions.
pub const EPS_DIV_FACTOR: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub nx: usize,
    pub ny: usize,
    pub x0: f64,
    pub y0: f64,
    pub hx: f64,
    pub hy: f64,
}

impl GridSpec {
    pub fn new(nx: usize, ny: usize, x0: f64, y0: f64, hx: f64, hy: f64) -> Result<Self> {
        let g = GridSpec {
            nx,
            ny,
            x0,
            y0,
            hx,
            hy,
        };
        g.validate()?;
        Ok(g)
    }

    /// Square-spacing grid covering [x0, x0+(n-1)h] x [y0, y0+(n-1)h].
    pub fn square(n: usize, origin: f64, h: f64) -> Result<Self> {
        GridSpec::new(n, n, origin, origin, h, h)
    }

    pub fn validate(&self) -> Result<()> {
        let min = self.nx.min(self.ny);
        if min < MIN_NODES {
            return Err(SurfError::GridTooSmall {
                min: MIN_NODES,
                got: min,
            });
        }
        if !(self.hx > 0.0 && self.hy > 0.0) || !self.hx.is_finite() || !self.hy.is_finite() {
            return Err(SurfError::InvalidGrid(format!(
                "spacings must be positive and finite, got hx={} hy={}",
                self.hx, self.hy
            )));
        }
        if !self.x0.is_finite() || !self.y0.is_finite() {
            return Err(SurfError::InvalidGrid("non-finite origin".into()));
        }
        Ok(())
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        self.x0 + i as f64 * self.hx
    }

    #[inline]
    pub fn y(&self, j: usize) -> f64 {
        self.y0 + j as f64 * self.hy
    }
}

/// A real-valued field on a [`GridSpec`] with a per-node validity mask.
///
/// Masked nodes hold the value 0 and are excluded from every norm.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: GridSpec,
    values: Vec<f64>,
    mask: Vec<bool>,
}

impl ScalarField {
    pub fn constant(grid: GridSpec, v: f64) -> Self {
        ScalarField {
            grid,
            values: vec![v; grid.len()],
            mask: vec![true; grid.len()],
        }
    }

    pub fn zeros(grid: GridSpec) -> Self {
        Self::constant(grid, 0.0)
    }

    /// Sample an analytic function on the grid nodes.
    pub fn sample(grid: GridSpec, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                values.push(f(grid.x(i), grid.y(j)));
            }
        }
        ScalarField {
            grid,
            values,
            mask: vec![true; grid.len()],
        }
    }

    pub fn from_values(grid: GridSpec, values: Vec<f64>, mask: Option<Vec<bool>>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(SurfError::InvalidGrid(format!(
                "value count {} does not match grid {}x{}",
                values.len(),
                grid.nx,
                grid.ny
            )));
        }
        let mask = match mask {
            Some(m) if m.len() == grid.len() => m,
            Some(_) => {
                return Err(SurfError::InvalidGrid(
                    "mask length does not match grid".into(),
                ))
            }
            None => vec![true; grid.len()],
        };
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                let p = grid.idx(i, j);
                if mask[p] && !values[p].is_finite() {
                    return Err(SurfError::NonFinite { i, j });
                }
            }
        }
        Ok(ScalarField { grid, values, mask })
    }

    #[inline]
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.idx(i, j)]
    }

    #[inline]
    pub fn valid(&self, i: usize, j: usize) -> bool {
        self.mask[self.grid.idx(i, j)]
    }

    pub fn valid_count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    /// Apply `f` nodewise; the mask is carried over.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> ScalarField {
        let mut out = self.clone();
        for p in 0..out.values.len() {
            if out.mask[p] {
                out.values[p] = f(out.values[p]);
                if !out.values[p].is_finite() {
                    out.mask[p] = false;
                    out.values[p] = 0.0;
                }
            }
        }
        out
    }

    /// Combine two fields nodewise; masks intersect.
    pub fn zip(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> Result<ScalarField> {
        if self.grid != other.grid {
            return Err(SurfError::GridMismatch);
        }
        let mut values = vec![0.0; self.values.len()];
        let mut mask = vec![false; self.values.len()];
        for p in 0..values.len() {
            if self.mask[p] && other.mask[p] {
                let v = f(self.values[p], other.values[p]);
                if v.is_finite() {
                    values[p] = v;
                    mask[p] = true;
                }
            }
        }
        Ok(ScalarField {
            grid: self.grid,
            values,
            mask,
        })
    }

    /// Mask every node within `width` of the grid boundary.
    pub fn mask_frame(&self, width: usize) -> ScalarField {
        let mut out = self.clone();
        let g = self.grid;
        for j in 0..g.ny {
            for i in 0..g.nx {
                if i < width || j < width || i + width >= g.nx || j + width >= g.ny {
                    out.set_mask(i, j, false);
                }
            }
        }
        out
    }

    /// Mask every node where `|v| < threshold`.
    pub fn mask_below(&self, threshold: f64) -> ScalarField {
        let mut out = self.clone();
        for p in 0..out.values.len() {
            if out.mask[p] && out.values[p].abs() < threshold {
                out.mask[p] = false;
                out.values[p] = 0.0;
            }
        }
        out
    }

    /// Division threshold for this field: `EPS_DIV_FACTOR * sup|f|`.
    pub fn eps_div(&self) -> f64 {
        EPS_DIV_FACTOR * self.sup_norm()
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let p = self.grid.idx(i, j);
        self.values[p] = v;
        self.mask[p] = v.is_finite();
        if !self.mask[p] {
            self.values[p] = 0.0;
        }
    }

    pub fn set_mask(&mut self, i: usize, j: usize, valid: bool) {
        let p = self.grid.idx(i, j);
        self.mask[p] = valid;
        if !valid {
            self.values[p] = 0.0;
        }
    }

    /// Sup-norm over valid nodes (0 for a fully masked field).
    pub fn sup_norm(&self) -> f64 {
        let mut m = 0.0f64;
        for p in 0..self.values.len() {
            if self.mask[p] {
                m = m.max(self.values[p].abs());
            }
        }
        m
    }

    /// Root-mean-square over valid nodes, pairwise-summed so the result does
    /// not depend on traversal chunking.
    pub fn rms(&self) -> f64 {
        let sq: Vec<f64> = self
            .values
            .iter()
            .zip(self.mask.iter())
            .filter(|(_, &m)| m)
            .map(|(v, _)| v * v)
            .collect();
        if sq.is_empty() {
            return 0.0;
        }
        (pairwise_sum(&sq) / sq.len() as f64).sqrt()
    }
}

/// Pairwise (cascade) summation: the reduction tree is fixed by the slice
/// layout, so the result is independent of any outer parallel split.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    match v.len() {
        0 => 0.0,
        1 => v[0],
        2 => v[0] + v[1],
        n => {
            let mid = n / 2;
            pairwise_sum(&v[..mid]) + pairwise_sum(&v[mid..])
        }
    }
}
