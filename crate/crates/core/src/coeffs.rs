//! The coefficient quadruple (β, γ, V, W), the derived quantities
//! (k, l, a, b) and the projective Gauss–Codazzi residuals.
//!
//! A surface in P³ in asymptotic coordinates is encoded by
//!
//! ```text
//! r_xx = β r_y + ½(V - β_y) r
//! r_yy = γ r_x + ½(W - γ_x) r
//! ```
//!
//! and exists iff the compatibility conditions hold:
//!
//! ```text
//! β_yyy - 2β_y W - β W_y = γ_xxx - 2γ_x V - γ V_x
//! W_x = 2γ β_y + β γ_y
//! V_y = 2β γ_x + γ β_x
//! ```

use crate::calculus::{dx, dy, log_deriv, log_mixed_derivative, log_second, Axis};
use crate::error::{Result, SurfError};
use crate::grid::{GridSpec, ScalarField};
use crate::report::ResidualReport;

#[derive(Debug, Clone)]
pub struct Coeffs {
    pub beta: ScalarField,
    pub gamma: ScalarField,
    pub v: ScalarField,
    pub w: ScalarField,
}

impl Coeffs {
    pub fn new(
        beta: ScalarField,
        gamma: ScalarField,
        v: ScalarField,
        w: ScalarField,
    ) -> Result<Self> {
        let g = *beta.grid();
        if *gamma.grid() != g || *v.grid() != g || *w.grid() != g {
            return Err(SurfError::GridMismatch);
        }
        Ok(Coeffs { beta, gamma, v, w })
    }

    pub fn grid(&self) -> &GridSpec {
        self.beta.grid()
    }

    /// Mask a frame of `width` nodes along the boundary of all four
    /// fields. Generators whose V, W come from composed finite
    /// differences use this to drop the one-sided-stencil band, whose
    /// error profile is not smooth enough to differentiate again.
    pub fn trim(&self, width: usize) -> Coeffs {
        Coeffs {
            beta: self.beta.mask_frame(width),
            gamma: self.gamma.mask_frame(width),
            v: self.v.mask_frame(width),
            w: self.w.mask_frame(width),
        }
    }

    /// Joint validity mask of the four fields.
    pub fn joint_mask(&self) -> Vec<bool> {
        let mut m = self.beta.mask().to_vec();
        for (p, ok) in m.iter_mut().enumerate() {
            *ok =
                *ok && self.gamma.mask()[p] && self.v.mask()[p] && self.w.mask()[p];
        }
        m
    }
}

/// k = βγ - (ln β)_xy, l = βγ - (ln γ)_xy,
/// a = W - (ln β)_yy - ½(ln β)_y², b = V - (ln γ)_xx - ½(ln γ)_x²,
/// in sign-safe algebraic form (no logarithms are taken).
#[derive(Debug, Clone)]
pub struct Derived {
    pub k: ScalarField,
    pub l: ScalarField,
    pub a: ScalarField,
    pub b: ScalarField,
}

pub fn derived_quantities(c: &Coeffs) -> Result<Derived> {
    let bg = c.beta.zip(&c.gamma, |b, g| b * g)?;
    let k = bg.zip(&log_mixed_derivative(&c.beta)?, |p, l| p - l)?;
    let l = bg.zip(&log_mixed_derivative(&c.gamma)?, |p, l| p - l)?;

    let lyy_b = log_second(&c.beta, Axis::Y)?;
    let ly_b = log_deriv(&c.beta, Axis::Y)?;
    let a = c
        .w
        .zip(&lyy_b, |w, s| w - s)?
        .zip(&ly_b, |t, d| t - 0.5 * d * d)?;

    let lxx_g = log_second(&c.gamma, Axis::X)?;
    let lx_g = log_deriv(&c.gamma, Axis::X)?;
    let b = c
        .v
        .zip(&lxx_g, |v, s| v - s)?
        .zip(&lx_g, |t, d| t - 0.5 * d * d)?;

    Ok(Derived { k, l, a, b })
}

/// Invert the definitions of a and b:
/// V = b + (ln γ)_xx + ½(ln γ)_x², W = a + (ln β)_yy + ½(ln β)_y².
pub fn reconstruct_vw(c: &Coeffs, d: &Derived) -> Result<(ScalarField, ScalarField)> {
    let lxx_g = log_second(&c.gamma, Axis::X)?;
    let lx_g = log_deriv(&c.gamma, Axis::X)?;
    let v = d
        .b
        .zip(&lxx_g, |b, s| b + s)?
        .zip(&lx_g, |t, dv| t + 0.5 * dv * dv)?;
    let lyy_b = log_second(&c.beta, Axis::Y)?;
    let ly_b = log_deriv(&c.beta, Axis::Y)?;
    let w = d
        .a
        .zip(&lyy_b, |a, s| a + s)?
        .zip(&ly_b, |t, dv| t + 0.5 * dv * dv)?;
    Ok((v, w))
}

/// The three compatibility residuals of the linear system.
pub fn gc1_residual(c: &Coeffs) -> Result<ResidualReport> {
    let b_yyy = crate::calculus::partial_derivative(&c.beta, Axis::Y, 3)?;
    let g_xxx = crate::calculus::partial_derivative(&c.gamma, Axis::X, 3)?;
    let b_y = dy(&c.beta)?;
    let b_x = dx(&c.beta)?;
    let g_x = dx(&c.gamma)?;
    let g_y = dy(&c.gamma)?;
    let v_x = dx(&c.v)?;
    let v_y = dy(&c.v)?;
    let w_x = dx(&c.w)?;
    let w_y = dy(&c.w)?;

    let lhs = b_yyy
        .zip(&b_y.zip(&c.w, |a, b| 2.0 * a * b)?, |a, b| a - b)?
        .zip(&c.beta.zip(&w_y, |a, b| a * b)?, |a, b| a - b)?;
    let rhs = g_xxx
        .zip(&g_x.zip(&c.v, |a, b| 2.0 * a * b)?, |a, b| a - b)?
        .zip(&c.gamma.zip(&v_x, |a, b| a * b)?, |a, b| a - b)?;
    let r1 = lhs.zip(&rhs, |a, b| a - b)?;

    let r2 = w_x
        .zip(&c.gamma.zip(&b_y, |g, by| 2.0 * g * by)?, |a, b| a - b)?
        .zip(&c.beta.zip(&g_y, |b, gy| b * gy)?, |a, b| a - b)?;
    let r3 = v_y
        .zip(&c.beta.zip(&g_x, |b, gx| 2.0 * b * gx)?, |a, b| a - b)?
        .zip(&c.gamma.zip(&b_x, |g, bx| g * bx)?, |a, b| a - b)?;

    let mut rep = ResidualReport::new(*c.grid());
    rep.push("R1", &r1);
    rep.push("R2", &r2);
    rep.push("R3", &r3);
    Ok(rep)
}

/// The five residuals of the equivalent Gauss–Codazzi form in (k, l, a, b).
pub fn gc2_residual(c: &Coeffs, d: &Derived) -> Result<ResidualReport> {
    let bg = c.beta.zip(&c.gamma, |b, g| b * g)?;
    let g1 = log_mixed_derivative(&c.beta)?
        .zip(&bg, |l, p| l - p)?
        .zip(&d.k, |t, k| t + k)?;
    let g2 = log_mixed_derivative(&c.gamma)?
        .zip(&bg, |l, p| l - p)?
        .zip(&d.l, |t, l| t + l)?;

    let ly_b = log_deriv(&c.beta, Axis::Y)?;
    let lx_g = log_deriv(&c.gamma, Axis::X)?;
    let g3 = dx(&d.a)?
        .zip(&dy(&d.k)?, |ax, ky| ax - ky)?
        .zip(&ly_b.zip(&d.k, |s, k| s * k)?, |t, u| t - u)?;
    let g4 = dy(&d.b)?
        .zip(&dx(&d.l)?, |by, lx| by - lx)?
        .zip(&lx_g.zip(&d.l, |s, l| s * l)?, |t, u| t - u)?;

    let b_y = dy(&c.beta)?;
    let g_x = dx(&c.gamma)?;
    let lhs = c
        .beta
        .zip(&dy(&d.a)?, |b, ay| b * ay)?
        .zip(&d.a.zip(&b_y, |a, by| 2.0 * a * by)?, |t, u| t + u)?;
    let rhs = c
        .gamma
        .zip(&dx(&d.b)?, |g, bx| g * bx)?
        .zip(&d.b.zip(&g_x, |b, gx| 2.0 * b * gx)?, |t, u| t + u)?;
    let g5 = lhs.zip(&rhs, |a, b| a - b)?;

    let mut rep = ResidualReport::new(*c.grid());
    rep.push("G1", &g1);
    rep.push("G2", &g2);
    rep.push("G3", &g3);
    rep.push("G4", &g4);
    rep.push("G5", &g5);
    Ok(rep)
}

/// Residual of the stationary mVN system, the β = γ specialization of the
/// compatibility conditions:
/// β_yyy - 2β_y W - β W_y = β_xxx - 2β_x V - β V_x,
/// W_x = 3/2 (β²)_y, V_y = 3/2 (β²)_x.
pub fn smvn_residual(c: &Coeffs) -> Result<ResidualReport> {
    let iso = c.beta.zip(&c.gamma, |b, g| b - g)?;
    let scale = c.beta.sup_norm().max(c.gamma.sup_norm()).max(1e-300);
    if iso.sup_norm() > 1e-8 * scale {
        return Err(SurfError::ClassPrecondition {
            class: "isothermally-asymptotic (beta = gamma)".into(),
            residual: iso.sup_norm() / scale,
            tol: 1e-8,
        });
    }
    let b = &c.beta;
    let b2 = b.zip(b, |a, b| a * b)?;
    let r1 = {
        let lhs = crate::calculus::partial_derivative(b, Axis::Y, 3)?
            .zip(&dy(b)?.zip(&c.w, |a, w| 2.0 * a * w)?, |t, u| t - u)?
            .zip(&b.zip(&dy(&c.w)?, |bb, wy| bb * wy)?, |t, u| t - u)?;
        let rhs = crate::calculus::partial_derivative(b, Axis::X, 3)?
            .zip(&dx(b)?.zip(&c.v, |a, v| 2.0 * a * v)?, |t, u| t - u)?
            .zip(&b.zip(&dx(&c.v)?, |bb, vx| bb * vx)?, |t, u| t - u)?;
        lhs.zip(&rhs, |a, b| a - b)?
    };
    let r2 = dx(&c.w)?.zip(&dy(&b2)?, |wx, s| wx - 1.5 * s)?;
    let r3 = dy(&c.v)?.zip(&dx(&b2)?, |vy, s| vy - 1.5 * s)?;

    let mut rep = ResidualReport::new(*c.grid());
    rep.push("mVN1", &r1);
    rep.push("mVN2", &r2);
    rep.push("mVN3", &r3);
    Ok(rep)
}
