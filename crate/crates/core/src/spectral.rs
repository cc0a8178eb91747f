//! Scalar spectral problems evaluated as finite-difference residuals on
//! solved auxiliary fields. Each variant transcribes the displayed linear
//! system of its reduction; the class membership of the coefficients is a
//! precondition.

use crate::calculus::{d4, dx, dy, partial_derivative, Axis};
use crate::classify::classify;
use crate::coeffs::Coeffs;
use crate::error::{Result, SurfError};
use crate::frames::VectorField;
use crate::grid::ScalarField;
use crate::report::ResidualReport;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectralProblem {
    /// Stationary mVN linear problem (isothermally asymptotic, β = γ).
    Mvn,
    /// Stationary second flow of the KP hierarchy (surfaces R₀, β = 1).
    Kp,
    /// Stationary DS-type problem (surfaces R, β_y = γ_x).
    Ds,
    /// Fourth-order stationary DS flow (surfaces of Jonas, β_x = γ_y).
    Jonas,
    /// Second-order problem of the Demoulin reduction.
    Demoulin,
}

impl SpectralProblem {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "mvn" => Ok(SpectralProblem::Mvn),
            "kp" => Ok(SpectralProblem::Kp),
            "ds" => Ok(SpectralProblem::Ds),
            "jonas" => Ok(SpectralProblem::Jonas),
            "demoulin" => Ok(SpectralProblem::Demoulin),
            other => Err(SurfError::InvalidParam(format!(
                "unknown spectral problem '{other}'"
            ))),
        }
    }
}

/// Solution data the residuals are evaluated on.
pub enum SpectralData<'a> {
    /// Scalar U, V (mvn, jonas).
    UV {
        u: &'a ScalarField,
        v: &'a ScalarField,
    },
    /// Homogeneous coordinates r⁰..r³ (kp, ds).
    R4(&'a VectorField),
    /// Scalar A, B rows (demoulin).
    AB {
        a: &'a ScalarField,
        b: &'a ScalarField,
    },
}

/// The m, m̃, n, ñ coefficients of the fourth-order Jonas problem,
/// written through β = φ_y, γ = φ_x (every occurrence of φ is
/// differentiated, so no potential needs to be integrated).
#[derive(Debug, Clone)]
pub struct JonasAux {
    pub m: ScalarField,
    pub m_tilde: ScalarField,
    pub n: ScalarField,
    pub n_tilde: ScalarField,
}

pub fn jonas_aux(c: &Coeffs) -> Result<JonasAux> {
    let beta = &c.beta;
    let gamma = &c.gamma;
    let b_x = dx(beta)?;
    let b_y = dy(beta)?;
    let b_yy = partial_derivative(beta, Axis::Y, 2)?;
    let b_xxx = partial_derivative(beta, Axis::X, 3)?;
    let g_x = dx(gamma)?;
    let g_xx = partial_derivative(gamma, Axis::X, 2)?;
    let g_yyy = partial_derivative(gamma, Axis::Y, 3)?;
    let v_x = dx(&c.v)?;
    let v_xx = partial_derivative(&c.v, Axis::X, 2)?;
    let w_y = dy(&c.w)?;
    let w_yy = partial_derivative(&c.w, Axis::Y, 2)?;

    // 2Vγ² + 2Wβ², shared by m and m̃.
    let shared = c
        .v
        .zip(gamma, |v, g| 2.0 * v * g * g)?
        .zip(&c.w.zip(beta, |w, b| 2.0 * w * b * b)?, |p, q| p + q)?;

    let m = w_yy
        .map(|v| -v)
        .zip(&beta.zip(&b_yy, |b, d| b * d)?, |t, u| t - u)?
        .zip(&gamma.zip(&g_xx, |g, d| 2.0 * g * d)?, |t, u| t - u)?
        .zip(&g_x.zip(&g_x, |p, q| p * q)?, |t, u| t + u)?
        .zip(&shared, |t, u| t + u)?;
    let m_tilde = v_xx
        .map(|v| -v)
        .zip(&gamma.zip(&g_xx, |g, d| g * d)?, |t, u| t - u)?
        .zip(&beta.zip(&b_yy, |b, d| 2.0 * b * d)?, |t, u| t - u)?
        .zip(&b_y.zip(&b_y, |p, q| p * q)?, |t, u| t + u)?
        .zip(&shared, |t, u| t + u)?;
    let n = b_xxx
        .map(|v| -2.0 * v)
        .zip(&gamma.zip(&b_x, |g, bx| g * g * bx)?, |t, u| t + u)?
        .zip(
            &gamma.zip(&beta.zip(&g_x, |b, gx| b * gx)?, |g, t| 3.0 * g * t)?,
            |t, u| t + u,
        )?
        .zip(&c.v.zip(&b_x, |v, bx| 2.0 * v * bx)?, |t, u| t + u)?
        .zip(&beta.zip(&v_x, |b, vx| b * vx)?, |t, u| t - u)?;
    let n_tilde = g_yyy
        .map(|v| -2.0 * v)
        .zip(&beta.zip(&b_x, |b, bx| b * b * bx)?, |t, u| t + u)?
        .zip(
            &gamma.zip(&beta.zip(&b_y, |b, by| b * by)?, |g, t| 3.0 * g * t)?,
            |t, u| t + u,
        )?
        .zip(&c.w.zip(&b_x, |w, bx| 2.0 * w * bx)?, |t, u| t + u)?
        .zip(&gamma.zip(&w_y, |g, wy| g * wy)?, |t, u| t - u)?;
    Ok(JonasAux {
        m,
        m_tilde,
        n,
        n_tilde,
    })
}

fn require_class(ok: bool, residual: f64, name: &str, tol: f64) -> Result<()> {
    if !ok {
        return Err(SurfError::ClassPrecondition {
            class: name.into(),
            residual,
            tol,
        });
    }
    Ok(())
}

/// Evaluate the spectral problem residual at a fixed λ.
pub fn scalar_spectral_residual(
    c: &Coeffs,
    data: &SpectralData,
    problem: SpectralProblem,
    lambda: f64,
    tol: f64,
) -> Result<ResidualReport> {
    let mut rep = ResidualReport::new(*c.grid());
    match (problem, data) {
        (SpectralProblem::Mvn, SpectralData::UV { u, v }) => {
            // The scalar problem is written with β = γ literally.
            let dev = c.beta.zip(&c.gamma, |p, q| p - q)?.sup_norm();
            let scale = c.beta.sup_norm().max(1e-300);
            require_class(
                dev <= tol * scale,
                dev / scale,
                "isothermally-asymptotic (beta = gamma)",
                tol,
            )?;
            let beta = &c.beta;
            rep.push("U_x - beta V", &dx(u)?.zip(&beta.zip(v, |b, q| b * q)?, |p, q| p - q)?);
            rep.push("V_y - beta U", &dy(v)?.zip(&beta.zip(u, |b, q| b * q)?, |p, q| p - q)?);
            // λU = U_xxx - U_yyy + 2W U_y - 3β_x V_x + W_y U - 2βV V.
            let e3 = partial_derivative(u, Axis::X, 3)?
                .zip(&partial_derivative(u, Axis::Y, 3)?, |p, q| p - q)?
                .zip(&c.w.zip(&dy(u)?, |w, q| 2.0 * w * q)?, |t, q| t + q)?
                .zip(&dx(beta)?.zip(&dx(v)?, |p, q| 3.0 * p * q)?, |t, q| t - q)?
                .zip(&dy(&c.w)?.zip(u, |p, q| p * q)?, |t, q| t + q)?
                .zip(
                    &beta.zip(&c.v.zip(v, |p, q| p * q)?, |b, t| 2.0 * b * t)?,
                    |t, q| t - q,
                )?
                .zip(u, |t, q| t - lambda * q)?;
            rep.push("third-order U", &e3);
            let e4 = partial_derivative(v, Axis::X, 3)?
                .zip(&partial_derivative(v, Axis::Y, 3)?, |p, q| p - q)?
                .zip(&c.v.zip(&dx(v)?, |vv, q| 2.0 * vv * q)?, |t, q| t - q)?
                .zip(&dy(beta)?.zip(&dy(u)?, |p, q| 3.0 * p * q)?, |t, q| t + q)?
                .zip(&dx(&c.v)?.zip(v, |p, q| p * q)?, |t, q| t - q)?
                .zip(
                    &beta.zip(&c.w.zip(u, |p, q| p * q)?, |b, t| 2.0 * b * t)?,
                    |t, q| t + q,
                )?
                .zip(v, |t, q| t - lambda * q)?;
            rep.push("third-order V", &e4);
        }
        (SpectralProblem::Kp, SpectralData::R4(r)) => {
            // The scalar problem is written in the reduced gauge β = 1
            // (γ may vanish: ruled members of the family are admitted).
            let b_dev = c.beta.map(|b| b - 1.0).sup_norm();
            require_class(b_dev <= tol, b_dev, "r0 (reduced gauge beta = 1)", tol)?;
            for comp in 0..4 {
                let f = r.component(comp);
                let e1 = dy(&f)?
                    .zip(&partial_derivative(&f, Axis::X, 2)?, |p, q| p - q)?
                    .zip(&c.v.zip(&f, |v, q| 0.5 * v * q)?, |t, q| t + q)?;
                rep.push(&format!("r{comp}: r_y - r_xx + V r/2"), &e1);
                let coeff = c
                    .v
                    .zip(&partial_derivative(&f, Axis::X, 2)?, |v, q| v * q)?
                    .zip(
                        &dx(&c.v)?
                            .zip(&c.gamma, |p, q| p + q)?
                            .zip(&dx(&f)?, |t, q| t * q)?,
                        |t, q| t + q,
                    )?;
                let bracket = partial_derivative(&c.v, Axis::X, 2)?
                    .zip(&dx(&c.gamma)?, |p, q| p + q)?
                    .zip(&c.v, |t, v| t - 0.5 * v * v)?
                    .zip(&c.w, |t, w| t + w + lambda)?;
                let e2 = d4(&f, Axis::X)?
                    .zip(&coeff, |p, q| p - q)?
                    .zip(&bracket.zip(&f, |b, q| 0.5 * b * q)?, |t, q| t - q)?;
                rep.push(&format!("r{comp}: fourth-order"), &e2.mask_frame(6));
            }
        }
        (SpectralProblem::Ds, SpectralData::R4(r)) => {
            let dev = dy(&c.beta)?.zip(&dx(&c.gamma)?, |p, q| p - q)?.sup_norm();
            let scale = dy(&c.beta)?
                .sup_norm()
                .max(dx(&c.gamma)?.sup_norm())
                .max(1e-300);
            require_class(dev <= tol * scale.max(dev), dev / scale.max(dev), "r", tol)?;
            for comp in 0..4 {
                let f = r.component(comp);
                let rxx = partial_derivative(&f, Axis::X, 2)?;
                let ryy = partial_derivative(&f, Axis::Y, 2)?;
                let e1 = rxx
                    .zip(&ryy, |p, q| p - q)?
                    .zip(&c.beta.zip(&dy(&f)?, |b, q| b * q)?, |t, q| t - q)?
                    .zip(&c.gamma.zip(&dx(&f)?, |g, q| g * q)?, |t, q| t + q)?
                    .zip(
                        &c.v.zip(&c.w, |v, w| v - w)?.zip(&f, |d, q| 0.5 * d * q)?,
                        |t, q| t - q,
                    )?;
                rep.push(&format!("r{comp}: wave part"), &e1);
                let bracket = c
                    .v
                    .zip(&c.w, |v, w| v + w)?
                    .zip(&dy(&c.beta)?, |t, q| t - q)?
                    .zip(&dx(&c.gamma)?, |t, q| t - q)?;
                let e2 = rxx
                    .zip(&ryy, |p, q| p + q)?
                    .zip(&c.beta.zip(&dy(&f)?, |b, q| b * q)?, |t, q| t - q)?
                    .zip(&c.gamma.zip(&dx(&f)?, |g, q| g * q)?, |t, q| t - q)?
                    .zip(&bracket.zip(&f, |b, q| 0.5 * b * q)?, |t, q| t - q)?
                    .zip(&f, |t, q| t - lambda * q)?;
                rep.push(&format!("r{comp}: spectral part"), &e2);
            }
        }
        (SpectralProblem::Jonas, SpectralData::UV { u, v }) => {
            let dev = dx(&c.beta)?.zip(&dy(&c.gamma)?, |p, q| p - q)?.sup_norm();
            let scale = dx(&c.beta)?
                .sup_norm()
                .max(dy(&c.gamma)?.sup_norm())
                .max(1e-300);
            require_class(dev <= tol * scale.max(dev), dev / scale.max(dev), "jonas", tol)?;
            let aux = jonas_aux(c)?;
            let beta = &c.beta;
            let gamma = &c.gamma;
            rep.push(
                "U_x - beta V",
                &dx(u)?.zip(&beta.zip(v, |b, q| b * q)?, |p, q| p - q)?,
            );
            rep.push(
                "V_y - gamma U",
                &dy(v)?.zip(&gamma.zip(u, |g, q| g * q)?, |p, q| p - q)?,
            );
            // φ-derivatives through β = φ_y, γ = φ_x.
            let b_x = dx(beta)?;
            let b_y = dy(beta)?;
            let e3 = d4(u, Axis::X)?
                .zip(&d4(u, Axis::Y)?, |p, q| p + q)?
                .zip(
                    &beta
                        .zip(&c.w, |b, w| b * b + 2.0 * w)?
                        .zip(&partial_derivative(u, Axis::Y, 2)?, |t, q| t * q)?,
                    |t, q| t - q,
                )?
                .zip(
                    &b_x.zip(&partial_derivative(v, Axis::X, 2)?, |p, q| 4.0 * p * q)?,
                    |t, q| t - q,
                )?
                .zip(
                    &beta
                        .zip(&b_y, |b, q| b * q)?
                        .zip(&dy(&c.w)?, |t, q| t - 3.0 * q)?
                        .zip(&dy(u)?, |t, q| t * q)?,
                    |t, q| t + q,
                )?
                .zip(
                    &partial_derivative(beta, Axis::X, 2)?
                        .map(|q| 2.0 * q)
                        .zip(&beta.zip(gamma, |b, g| b * g * g)?, |t, q| t + q)?
                        .zip(&c.v.zip(beta, |vv, b| 2.0 * vv * b)?, |t, q| t + q)?
                        .zip(&dx(v)?, |t, q| t * q)?,
                    |t, q| t - q,
                )?
                .zip(&aux.m.zip(u, |p, q| p * q)?, |t, q| t + q)?
                .zip(&aux.n.zip(v, |p, q| p * q)?, |t, q| t + q)?
                .zip(u, |t, q| t - lambda * q)?;
            // Two nested second-derivative levels: drop the one-sided
            // composition band (see kummer_p_residual for the rationale).
            rep.push("fourth-order U", &e3.mask_frame(6));
            let g_y = dy(gamma)?;
            let g_x = dx(gamma)?;
            let e4 = d4(v, Axis::X)?
                .zip(&d4(v, Axis::Y)?, |p, q| p + q)?
                .zip(
                    &gamma
                        .zip(&c.v, |g, vv| g * g + 2.0 * vv)?
                        .zip(&partial_derivative(v, Axis::X, 2)?, |t, q| t * q)?,
                    |t, q| t - q,
                )?
                .zip(
                    &g_y.zip(&partial_derivative(u, Axis::Y, 2)?, |p, q| 4.0 * p * q)?,
                    |t, q| t - q,
                )?
                .zip(
                    &gamma
                        .zip(&g_x, |g, q| g * q)?
                        .zip(&dx(&c.v)?, |t, q| t - 3.0 * q)?
                        .zip(&dx(v)?, |t, q| t * q)?,
                    |t, q| t + q,
                )?
                .zip(
                    &partial_derivative(gamma, Axis::Y, 2)?
                        .map(|q| 2.0 * q)
                        .zip(&gamma.zip(beta, |g, b| g * b * b)?, |t, q| t + q)?
                        .zip(&c.w.zip(gamma, |ww, g| 2.0 * ww * g)?, |t, q| t + q)?
                        .zip(&dy(u)?, |t, q| t * q)?,
                    |t, q| t - q,
                )?
                .zip(&aux.m_tilde.zip(v, |p, q| p * q)?, |t, q| t + q)?
                .zip(&aux.n_tilde.zip(u, |p, q| p * q)?, |t, q| t + q)?
                .zip(v, |t, q| t - lambda * q)?;
            rep.push("fourth-order V", &e4.mask_frame(6));
        }
        (SpectralProblem::Demoulin, SpectralData::AB { a, b }) => {
            let cls = classify(c, tol)?;
            require_class(cls.demoulin.member, cls.demoulin.residual, "demoulin", tol)?;
            if lambda == 0.0 {
                return Err(SurfError::InvalidParam(
                    "the second-order Demoulin problem needs lambda != 0".into(),
                ));
            }
            let beta = &c.beta;
            let gamma = &c.gamma;
            let eps_b = beta.eps_div();
            let eps_g = gamma.eps_div();
            let bm = beta.mask_below(eps_b);
            let gm = gamma.mask_below(eps_g);
            rep.push(
                "B_xy + B/gamma",
                &crate::calculus::dxy(b)?.zip(&b.zip(&gm, |q, g| q / g)?, |p, q| p + q)?,
            );
            rep.push(
                "A_xy + A/beta",
                &crate::calculus::dxy(a)?.zip(&a.zip(&bm, |q, bb| q / bb)?, |p, q| p + q)?,
            );
            let gx_over = dx(gamma)?.zip(&gm, |p, q| p / q)?;
            let bx_over = dx(beta)?.zip(&bm, |p, q| p / q)?;
            let gy_over = dy(gamma)?.zip(&gm, |p, q| p / q)?;
            let by_over = dy(beta)?.zip(&bm, |p, q| p / q)?;
            rep.push(
                "B_xx - lam beta A_y + (g_x/g) B_x",
                &partial_derivative(b, Axis::X, 2)?
                    .zip(&beta.zip(&dy(a)?, |p, q| lambda * p * q)?, |t, q| t - q)?
                    .zip(&gx_over.zip(&dx(b)?, |p, q| p * q)?, |t, q| t + q)?,
            );
            rep.push(
                "A_xx - lam gamma B_y + (b_x/b) A_x",
                &partial_derivative(a, Axis::X, 2)?
                    .zip(&gamma.zip(&dy(b)?, |p, q| lambda * p * q)?, |t, q| t - q)?
                    .zip(&bx_over.zip(&dx(a)?, |p, q| p * q)?, |t, q| t + q)?,
            );
            rep.push(
                "B_yy - (beta/lam) A_x + (g_y/g) B_y",
                &partial_derivative(b, Axis::Y, 2)?
                    .zip(&beta.zip(&dx(a)?, |p, q| p * q / lambda)?, |t, q| t - q)?
                    .zip(&gy_over.zip(&dy(b)?, |p, q| p * q)?, |t, q| t + q)?,
            );
            rep.push(
                "A_yy - (gamma/lam) B_x + (b_y/b) A_y",
                &partial_derivative(a, Axis::Y, 2)?
                    .zip(&gamma.zip(&dx(b)?, |p, q| p * q / lambda)?, |t, q| t - q)?
                    .zip(&by_over.zip(&dy(a)?, |p, q| p * q)?, |t, q| t + q)?,
            );
        }
        _ => {
            return Err(SurfError::InvalidParam(
                "solution data does not match the spectral problem".into(),
            ))
        }
    }
    Ok(rep)
}
