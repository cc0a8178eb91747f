//! Projectively invariant forms attached to the coefficient data, and the
//! projective area functional ∬ βγ dx dy.

use crate::coeffs::{Coeffs, Derived};
use crate::error::{Result, SurfError};
use crate::grid::ScalarField;

/// Densities of the invariant forms:
/// the projective metric 2βγ dx dy, the Darboux cubic β dx³ + γ dy³,
/// the invariant differentials ω¹ = (γβ²)^⅓ dx, ω² = (βγ²)^⅓ dy,
/// the quadratic form b dx² + a dy² and the quartic aβ² dx⁴ + bγ² dy⁴.
#[derive(Debug, Clone)]
pub struct InvariantForms {
    pub metric: ScalarField,
    pub cubic_x: ScalarField,
    pub cubic_y: ScalarField,
    pub omega1: ScalarField,
    pub omega2: ScalarField,
    pub quadratic_x: ScalarField,
    pub quadratic_y: ScalarField,
    pub quartic_x: ScalarField,
    pub quartic_y: ScalarField,
}

pub fn projective_invariants(c: &Coeffs, d: &Derived) -> Result<InvariantForms> {
    let metric = c.beta.zip(&c.gamma, |b, g| 2.0 * b * g)?;
    // f64::cbrt is the real, sign-preserving branch.
    let omega1 = c.gamma.zip(&c.beta, |g, b| (g * b * b).cbrt())?;
    let omega2 = c.beta.zip(&c.gamma, |b, g| (b * g * g).cbrt())?;
    let quartic_x = d.a.zip(&c.beta, |a, b| a * b * b)?;
    let quartic_y = d.b.zip(&c.gamma, |b, g| b * g * g)?;
    Ok(InvariantForms {
        metric,
        cubic_x: c.beta.clone(),
        cubic_y: c.gamma.clone(),
        omega1,
        omega2,
        quadratic_x: d.b.clone(),
        quadratic_y: d.a.clone(),
        quartic_x,
        quartic_y,
    })
}

/// Trapezoidal quadrature of βγ over the valid cells (all four corners
/// valid). For constants this is exact.
pub fn projective_area(c: &Coeffs) -> Result<f64> {
    let g = c.grid();
    let prod = c.beta.zip(&c.gamma, |b, gm| b * gm)?;
    let mut cells: Vec<f64> = Vec::new();
    for j in 0..g.ny - 1 {
        for i in 0..g.nx - 1 {
            if prod.valid(i, j)
                && prod.valid(i + 1, j)
                && prod.valid(i, j + 1)
                && prod.valid(i + 1, j + 1)
            {
                let avg = 0.25
                    * (prod.get(i, j)
                        + prod.get(i + 1, j)
                        + prod.get(i, j + 1)
                        + prod.get(i + 1, j + 1));
                cells.push(avg * g.hx * g.hy);
            }
        }
    }
    if cells.is_empty() {
        return Err(SurfError::FullyMasked);
    }
    Ok(crate::grid::pairwise_sum(&cells))
}
