//! Goursat problems: u_xy = F(u) with data on the characteristics
//! x = x0 and y = y0, solved by Picard iteration of
//!
//! ```text
//! u(x,y) = u(x,y0) + u(x0,y) - u(x0,y0) + ∬ F(u)
//! ```
//!
//! The double integral is built from cumulative 1-D integrals using
//! 5-point interval rules (degree-4 exact), which keeps the fixed point
//! accurate to O(h⁵) — closed-form solutions restricted to the boundary
//! are reproduced to ~1e-10 on 65x65 unit-diameter domains.

use crate::error::{Result, SurfError};
use crate::grid::{GridSpec, ScalarField};

/// Right-hand sides u_xy = F(u). `CoupledTzitzeica` acts on the pair
/// (p, q) = (ln|β|, ln|γ|) of the Demoulin system; all others are scalar.
pub enum GoursatRhs {
    /// u_xy = e^u
    Liouville,
    /// u_xy = e^{2u} + c e^{-u} (β = e^u in the affine-sphere reduction)
    Tzitzeica { c: f64 },
    /// p_xy = e^{p+q} - e^{-p}, q_xy = e^{p+q} - e^{-q} (β = -e^p, γ = -e^q)
    CoupledTzitzeica,
    /// φ_xy = -sin φ
    SineGordon,
    /// φ_xy = -sinh φ
    SinhGordon,
    /// φ_ξη = cosh φ (period-4 R-net equation in characteristic coordinates)
    CoshRnet4,
    Custom {
        dim: usize,
        f: Box<dyn Fn(&[f64], &mut [f64]) + Send + Sync>,
    },
}

impl GoursatRhs {
    pub fn dim(&self) -> usize {
        match self {
            GoursatRhs::CoupledTzitzeica => 2,
            GoursatRhs::Custom { dim, .. } => *dim,
            _ => 1,
        }
    }

    pub fn eval(&self, u: &[f64], out: &mut [f64]) {
        match self {
            GoursatRhs::Liouville => out[0] = u[0].exp(),
            GoursatRhs::Tzitzeica { c } => out[0] = (2.0 * u[0]).exp() + c * (-u[0]).exp(),
            GoursatRhs::CoupledTzitzeica => {
                let e = (u[0] + u[1]).exp();
                out[0] = e - (-u[0]).exp();
                out[1] = e - (-u[1]).exp();
            }
            GoursatRhs::SineGordon => out[0] = -u[0].sin(),
            GoursatRhs::SinhGordon => out[0] = -u[0].sinh(),
            GoursatRhs::CoshRnet4 => out[0] = u[0].cosh(),
            GoursatRhs::Custom { f, .. } => f(u, out),
        }
    }
}

pub struct GoursatProblem {
    pub rhs: GoursatRhs,
    /// Per component: u on the bottom edge y = y0, length nx.
    pub bottom: Vec<Vec<f64>>,
    /// Per component: u on the left edge x = x0, length ny.
    pub left: Vec<Vec<f64>>,
    pub tol: f64,
    pub max_iters: usize,
}

impl GoursatProblem {
    pub fn new(rhs: GoursatRhs, bottom: Vec<Vec<f64>>, left: Vec<Vec<f64>>) -> Self {
        GoursatProblem {
            rhs,
            bottom,
            left,
            tol: 1e-12,
            max_iters: 200,
        }
    }

    /// Sample scalar boundary data from an analytic solution.
    pub fn from_fn(rhs: GoursatRhs, grid: &GridSpec, u: impl Fn(f64, f64) -> f64) -> Self {
        let bottom = (0..grid.nx).map(|i| u(grid.x(i), grid.y(0))).collect();
        let left = (0..grid.ny).map(|j| u(grid.x(0), grid.y(j))).collect();
        GoursatProblem::new(rhs, vec![bottom], vec![left])
    }
}

/// Per-interval quadrature: integrate the degree-4 interpolant of f over
/// [i, i+1] from the 5-node window starting at the returned index.
/// Numerators over the common denominator 720.
fn interval_rule(n: usize, i: usize) -> (usize, [f64; 5]) {
    debug_assert!(n >= 5);
    if i == 0 {
        (0, [251.0, 646.0, -264.0, 106.0, -19.0])
    } else if i + 2 == n {
        (n - 5, [-19.0, 106.0, -264.0, 646.0, 251.0])
    } else if i + 3 >= n {
        // window i-2 .. i+2 viewed from the right end
        (i - 2, [11.0, -74.0, 456.0, 346.0, -19.0])
    } else {
        // window i-1 .. i+3
        (i - 1, [-19.0, 346.0, 456.0, -74.0, 11.0])
    }
}

/// Cumulative integral along a line: out[0] = 0,
/// out[i+1] = out[i] + ∫_{x_i}^{x_{i+1}} f.
pub fn cumulative_integral(f: &[f64], h: f64) -> Vec<f64> {
    let n = f.len();
    let mut out = vec![0.0; n];
    let scale = h / 720.0;
    for i in 0..n - 1 {
        let (s, w) = interval_rule(n, i);
        let inc: f64 = (0..5).map(|k| w[k] * f[s + k]).sum();
        out[i + 1] = out[i] + scale * inc;
    }
    out
}

/// Cumulative 2-D integral I(i,j) = ∬_{[x0,xi]x[y0,yj]} f, row-major.
pub fn cumulative_integral_2d(f: &[f64], grid: &GridSpec) -> Vec<f64> {
    let (nx, ny) = (grid.nx, grid.ny);
    let mut gx = vec![0.0; nx * ny];
    for j in 0..ny {
        let c = cumulative_integral(&f[j * nx..(j + 1) * nx], grid.hx);
        gx[j * nx..(j + 1) * nx].copy_from_slice(&c);
    }
    let mut out = vec![0.0; nx * ny];
    let mut col = vec![0.0; ny];
    for i in 0..nx {
        for j in 0..ny {
            col[j] = gx[j * nx + i];
        }
        let c = cumulative_integral(&col, grid.hy);
        for j in 0..ny {
            out[j * nx + i] = c[j];
        }
    }
    out
}

/// Solve the Goursat problem on `grid`; one field per component.
pub fn solve_goursat(p: &GoursatProblem, grid: &GridSpec) -> Result<Vec<ScalarField>> {
    Ok(solve_goursat_counted(p, grid)?.0)
}

/// Like [`solve_goursat`] but also reports the Picard iteration count.
pub fn solve_goursat_counted(
    p: &GoursatProblem,
    grid: &GridSpec,
) -> Result<(Vec<ScalarField>, usize)> {
    grid.validate()?;
    let dim = p.rhs.dim();
    if p.bottom.len() != dim || p.left.len() != dim {
        return Err(SurfError::InvalidParam(format!(
            "boundary data must supply {dim} component(s)"
        )));
    }
    for c in 0..dim {
        if p.bottom[c].len() != grid.nx || p.left[c].len() != grid.ny {
            return Err(SurfError::InvalidParam(
                "boundary data length does not match the grid".into(),
            ));
        }
        let gap = (p.bottom[c][0] - p.left[c][0]).abs();
        let scale = p.bottom[c][0].abs().max(p.left[c][0].abs()).max(1.0);
        if gap > 1e-9 * scale {
            return Err(SurfError::InvalidParam(format!(
                "boundary data disagree at the corner: {} vs {}",
                p.bottom[c][0], p.left[c][0]
            )));
        }
    }

    let len = grid.len();
    // d'Alembert extension of the boundary data.
    let mut u: Vec<Vec<f64>> = (0..dim)
        .map(|c| {
            let corner = p.bottom[c][0];
            let mut v = vec![0.0; len];
            for j in 0..grid.ny {
                for i in 0..grid.nx {
                    v[grid.idx(i, j)] = p.bottom[c][i] + p.left[c][j] - corner;
                }
            }
            v
        })
        .collect();
    let ext = u.clone();

    let mut fval = vec![vec![0.0; len]; dim];
    let mut point = vec![0.0; dim];
    let mut fpoint = vec![0.0; dim];
    let mut last_defect = f64::INFINITY;
    for iter in 1..=p.max_iters {
        for q in 0..len {
            for c in 0..dim {
                point[c] = u[c][q];
            }
            p.rhs.eval(&point, &mut fpoint);
            for c in 0..dim {
                if !fpoint[c].is_finite() {
                    return Err(SurfError::Singular(
                        "right-hand side blew up during Picard iteration".into(),
                    ));
                }
                fval[c][q] = fpoint[c];
            }
        }
        let mut defect = 0.0f64;
        for c in 0..dim {
            let integral = cumulative_integral_2d(&fval[c], grid);
            for q in 0..len {
                let next = ext[c][q] + integral[q];
                defect = defect.max((next - u[c][q]).abs());
                u[c][q] = next;
            }
        }
        let scale = u
            .iter()
            .flat_map(|v| v.iter())
            .fold(0.0f64, |m, &x| m.max(x.abs()))
            .max(1.0);
        if defect <= p.tol * scale {
            let fields = u
                .into_iter()
                .map(|v| ScalarField::from_values(*grid, v, None))
                .collect::<Result<Vec<_>>>()?;
            return Ok((fields, iter));
        }
        last_defect = defect;
    }
    Err(SurfError::NoConvergence {
        iters: p.max_iters,
        defect: last_defect,
    })
}
