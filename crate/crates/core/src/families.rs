//! Generators for the exact and ODE/Goursat-constructible surface
//! families, each gated by a residual check on its defining reduction.

use crate::calculus::{dx, dy, log_deriv, log_mixed_derivative, log_second, Axis};
use crate::classify::classify;
use crate::coeffs::Coeffs;
use crate::error::{Result, SurfError};
use crate::goursat::{solve_goursat, GoursatProblem, GoursatRhs};
use crate::grid::{GridSpec, ScalarField};
use crate::report::ResidualReport;
use crate::stencil::segment_midpoint_weights;

/// Default normalized tolerance for class gates inside generators.
pub const DEFAULT_CLASS_TOL: f64 = 1e-6;

/// Boundary band dropped by generators that build V, W from composed
/// finite differences: two FD levels of one-sided windows of radius 3.
pub const FD_TRIM: usize = 6;

pub fn make_constant(b0: f64, g0: f64, v0: f64, w0: f64, grid: GridSpec) -> Result<Coeffs> {
    grid.validate()?;
    Coeffs::new(
        ScalarField::constant(grid, b0),
        ScalarField::constant(grid, g0),
        ScalarField::constant(grid, v0),
        ScalarField::constant(grid, w0),
    )
}

/// Projective transform of a rotation surface:
/// β = γ = profile(x+y), V = W = 3/2 β² + c.
pub fn make_rotation(
    profile: &dyn Fn(f64) -> f64,
    c: f64,
    grid: GridSpec,
) -> Result<Coeffs> {
    grid.validate()?;
    let beta = ScalarField::sample(grid, |x, y| profile(x + y));
    let vw = beta.map(|b| 1.5 * b * b + c);
    Coeffs::new(beta.clone(), beta, vw.clone(), vw)
}

/// Residual of the Tzitzeica reduction (ln β)_xy = β² + c/β.
pub fn tzitzeica_residual(beta: &ScalarField, c: f64) -> Result<ResidualReport> {
    let eps = beta.eps_div();
    let rhs = beta
        .mask_below(eps)
        .map(|b| b * b + c / b);
    let r = log_mixed_derivative(beta)?.zip(&rhs, |l, t| l - t)?;
    let mut rep = ResidualReport::new(*beta.grid());
    rep.push("tzitzeica", &r);
    Ok(rep)
}

/// Affine sphere from a Tzitzeica solution β: γ = β,
/// V = (ln β)_xx + ½(ln β)_x², W = (ln β)_yy + ½(ln β)_y².
pub fn make_affine_sphere(beta: &ScalarField, c: f64, tol: f64) -> Result<Coeffs> {
    let rep = tzitzeica_residual(beta, c)?;
    let scale = beta.map(|b| b * b).sup_norm().max(1.0);
    if rep.max_sup() > tol * scale {
        return Err(SurfError::ClassPrecondition {
            class: "tzitzeica".into(),
            residual: rep.max_sup() / scale,
            tol,
        });
    }
    let v = log_second(beta, Axis::X)?.zip(&log_deriv(beta, Axis::X)?, |s, d| {
        s + 0.5 * d * d
    })?;
    let w = log_second(beta, Axis::Y)?.zip(&log_deriv(beta, Axis::Y)?, |s, d| {
        s + 0.5 * d * d
    })?;
    Ok(Coeffs::new(beta.clone(), beta.clone(), v, w)?.trim(FD_TRIM))
}

/// Proper affine sphere with constant β = (-c)^⅓, c < 0.
pub fn make_affine_sphere_const(c: f64, grid: GridSpec) -> Result<Coeffs> {
    if c >= 0.0 {
        return Err(SurfError::InvalidParam(
            "constant affine spheres need c < 0".into(),
        ));
    }
    make_constant((-c).cbrt(), (-c).cbrt(), 0.0, 0.0, grid)
}

/// Affine sphere with β = e^u from a Goursat solve of the Tzitzeica
/// equation u_xy = e^{2u} + c e^{-u}, boundary data from `u_edge`.
pub fn make_affine_sphere_goursat(
    c: f64,
    grid: GridSpec,
    u_edge: impl Fn(f64, f64) -> f64,
) -> Result<Coeffs> {
    let p = GoursatProblem::from_fn(GoursatRhs::Tzitzeica { c }, &grid, u_edge);
    let u = solve_goursat(&p, &grid)?;
    let beta = u[0].map(f64::exp);
    make_affine_sphere(&beta, c, 1e-4)
}

/// 1-D sampled solution of an autonomous ODE y' = rhs(y), classical RK4
/// with step h, `n` nodes.
fn rk4_scalar(y0: f64, h: f64, n: usize, rhs: impl Fn(f64) -> Result<f64>) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(n);
    let mut y = y0;
    out.push(y);
    for _ in 1..n {
        let k1 = rhs(y)?;
        let k2 = rhs(y + 0.5 * h * k1)?;
        let k3 = rhs(y + 0.5 * h * k2)?;
        let k4 = rhs(y + h * k3)?;
        y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        out.push(y);
    }
    Ok(out)
}

/// Sampled line data (f, f', f'', f''') for the isothermal f/g closed forms.
struct LineData {
    f: Vec<f64>,
    d1: Vec<f64>,
    d2: Vec<f64>,
    d3: Vec<f64>,
}

/// (ln β)_x and (ln β)_xx along the grid for β ~ sqrt(f'g')/(f+g).
fn log_derivs(fl: &LineData, i: usize, fg_sum: f64) -> (f64, f64) {
    let r = fl.d2[i] / fl.d1[i];
    let lx = 0.5 * r - fl.d1[i] / fg_sum;
    let lxx = 0.5 * (fl.d3[i] / fl.d1[i] - r * r) - fl.d2[i] / fg_sum
        + fl.d1[i] * fl.d1[i] / (fg_sum * fg_sum);
    (lx, lxx)
}

#[derive(Debug, Clone, Copy)]
pub struct RomanSpec {
    pub a0: f64,
    pub a1: f64,
    pub a2: f64,
    pub f0: f64,
    pub g0: f64,
    /// Branch signs of the cube roots in the f and g equations.
    pub sign_f: f64,
    pub sign_g: f64,
}

impl RomanSpec {
    pub fn new(a0: f64, a1: f64, a2: f64, f0: f64, g0: f64) -> Self {
        RomanSpec {
            a0,
            a1,
            a2,
            f0,
            g0,
            sign_f: 1.0,
            sign_g: 1.0,
        }
    }
}

fn roman_line(
    grid_n: usize,
    h: f64,
    y0: f64,
    sign: f64,
    poly: impl Fn(f64) -> f64 + Copy,
    dpoly: impl Fn(f64) -> f64 + Copy,
    a2: f64,
) -> Result<LineData> {
    let f = rk4_scalar(y0, h, grid_n, |v| {
        let u = poly(v);
        Ok(sign * (u * u).cbrt())
    })?;
    let mut d1 = Vec::with_capacity(grid_n);
    let mut d2 = Vec::with_capacity(grid_n);
    let mut d3 = Vec::with_capacity(grid_n);
    for &v in &f {
        let u = poly(v);
        let du = dpoly(v);
        d1.push(sign * (u * u).cbrt());
        d2.push((2.0 / 3.0) * du * u.signum() * u.abs().cbrt());
        d3.push(sign * ((4.0 / 3.0) * a2 * u + (2.0 / 9.0) * du * du));
    }
    Ok(LineData { f, d1, d2, d3 })
}

/// Assemble isothermal Coeffs from the two characteristic lines:
/// β = γ = amp·sqrt(f'g')/(f+g), with V, W supplied per node by `vw` from
/// ((ln β)_x, (ln β)_xx, (ln β)_y, (ln β)_yy, β_x, β_y).
fn assemble_isothermal(
    grid: GridSpec,
    fl: &LineData,
    gl: &LineData,
    amp: f64,
    vw: impl Fn(f64, f64, f64, f64, f64, f64) -> (f64, f64),
) -> Result<Coeffs> {
    let mut beta = ScalarField::zeros(grid);
    let mut v = ScalarField::zeros(grid);
    let mut w = ScalarField::zeros(grid);
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            let sum = fl.f[i] + gl.f[j];
            let prod = fl.d1[i] * gl.d1[j];
            if sum.abs() < 1e-12 || prod <= 0.0 {
                beta.set_mask(i, j, false);
                v.set_mask(i, j, false);
                w.set_mask(i, j, false);
                continue;
            }
            let b = amp * prod.sqrt() / sum;
            let (lx, lxx) = log_derivs(fl, i, sum);
            let (ly, lyy) = log_derivs(gl, j, sum);
            let (vv, ww) = vw(lx, lxx, ly, lyy, b * lx, b * ly);
            beta.set(i, j, b);
            v.set(i, j, vv);
            w.set(i, j, ww);
        }
    }
    Coeffs::new(beta.clone(), beta, v, w)
}

/// The Steiner-type quartic family: f, g integrate
/// (f')³ = (a0 + a1 f + a2 f²)², (g')³ = (a0 - a1 g + a2 g²)²,
/// β² = 9/4 f'g'/(f+g)², with V, W in the "minus 5/2" closed form.
pub fn make_roman(spec: &RomanSpec, grid: GridSpec) -> Result<Coeffs> {
    grid.validate()?;
    let (a0, a1, a2) = (spec.a0, spec.a1, spec.a2);
    let fl = roman_line(
        grid.nx,
        grid.hx,
        spec.f0,
        spec.sign_f,
        move |f| a0 + a1 * f + a2 * f * f,
        move |f| a1 + 2.0 * a2 * f,
        a2,
    )?;
    let gl = roman_line(
        grid.ny,
        grid.hy,
        spec.g0,
        spec.sign_g,
        move |g| a0 - a1 * g + a2 * g * g,
        move |g| -a1 + 2.0 * a2 * g,
        a2,
    )?;
    assemble_isothermal(grid, &fl, &gl, 1.5, |lx, lxx, ly, lyy, bx, by| {
        (
            -0.5 * lxx + 0.125 * lx * lx - 2.5 * by,
            -0.5 * lyy + 0.125 * ly * ly - 2.5 * bx,
        )
    })
}

/// Residual of the cubic-surface constraints (the "plus 5/2" form dual to
/// the Steiner quartic). Requires an isothermally asymptotic field.
pub fn cubic_constraint_residual(c: &Coeffs, tol: f64) -> Result<ResidualReport> {
    let rep = classify(c, tol)?;
    if !rep.isothermally_asymptotic.member {
        return Err(SurfError::ClassPrecondition {
            class: "isothermally-asymptotic".into(),
            residual: rep.isothermally_asymptotic.residual,
            tol,
        });
    }
    let lx = log_deriv(&c.beta, Axis::X)?;
    let lxx = log_second(&c.beta, Axis::X)?;
    let ly = log_deriv(&c.beta, Axis::Y)?;
    let lyy = log_second(&c.beta, Axis::Y)?;
    let bx = dx(&c.beta)?;
    let by = dy(&c.beta)?;
    let v_expect = lxx
        .zip(&lx, |s, d| -0.5 * s + 0.125 * d * d)?
        .zip(&by, |t, b| t + 2.5 * b)?;
    let w_expect = lyy
        .zip(&ly, |s, d| -0.5 * s + 0.125 * d * d)?
        .zip(&bx, |t, b| t + 2.5 * b)?;
    let rv = c.v.zip(&v_expect, |a, b| a - b)?;
    let rw = c.w.zip(&w_expect, |a, b| a - b)?;
    let mut out = ResidualReport::new(*c.grid());
    out.push("V-cubic", &rv);
    out.push("W-cubic", &rw);
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct KummerSpec {
    /// Coefficients of P, lowest degree first, degree <= 6.
    pub p: Vec<f64>,
    pub f0: f64,
    pub g0: f64,
    pub sign_f: f64,
    pub sign_g: f64,
    /// Curvature constant of the projective metric; the Kummer value is 8/9.
    pub c: f64,
}

impl KummerSpec {
    pub fn new(p: Vec<f64>, f0: f64, g0: f64) -> Self {
        KummerSpec {
            p,
            f0,
            g0,
            sign_f: 1.0,
            sign_g: 1.0,
            c: 8.0 / 9.0,
        }
    }
}

fn poly_eval(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

fn poly_deriv(coeffs: &[f64]) -> Vec<f64> {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, &c)| k as f64 * c)
        .collect()
}

fn kummer_line(
    n: usize,
    h: f64,
    y0: f64,
    sign: f64,
    p: &[f64],
    flip: bool,
) -> Result<LineData> {
    // For the g-line the polynomial argument is -g.
    let arg = |v: f64| if flip { -v } else { v };
    let darg = if flip { -1.0 } else { 1.0 };
    let p1 = poly_deriv(p);
    let p2 = poly_deriv(&p1);
    let eval = |v: f64| -> Result<(f64, f64, f64)> {
        let pv = poly_eval(p, arg(v));
        if pv <= 0.0 {
            return Err(SurfError::Singular(format!(
                "polynomial nonpositive along the integrated range: P({}) = {pv}",
                arg(v)
            )));
        }
        Ok((
            pv,
            poly_eval(&p1, arg(v)) * darg,
            poly_eval(&p2, arg(v)),
        ))
    };
    let f = rk4_scalar(y0, h, n, |v| Ok(sign * eval(v)?.0.cbrt()))?;
    let mut d1 = Vec::with_capacity(n);
    let mut d2 = Vec::with_capacity(n);
    let mut d3 = Vec::with_capacity(n);
    for &v in &f {
        let (pv, dp, ddp) = eval(v)?;
        d1.push(sign * pv.cbrt());
        d2.push(dp / (3.0 * pv.cbrt()));
        d3.push(sign * (ddp / 3.0 - dp * dp / (9.0 * pv)));
    }
    Ok(LineData { f, d1, d2, d3 })
}

/// Kummer-type quartic: (f')³ = P(f), (g')³ = P(-g), β² = (2/c) f'g'/(f+g)²
/// (c = 8/9 gives the 9/4 of the quartic family),
/// V = 11/8 (ln β)_xx + 2 (ln β)_x², W likewise in y.
pub fn make_kummer(spec: &KummerSpec, grid: GridSpec) -> Result<Coeffs> {
    grid.validate()?;
    if spec.p.len() > 7 {
        return Err(SurfError::InvalidParam(
            "polynomial degree must be at most 6".into(),
        ));
    }
    if spec.c <= 0.0 {
        return Err(SurfError::InvalidParam("curvature constant must be positive".into()));
    }
    let fl = kummer_line(grid.nx, grid.hx, spec.f0, spec.sign_f, &spec.p, false)?;
    let gl = kummer_line(grid.ny, grid.hy, spec.g0, spec.sign_g, &spec.p, true)?;
    let amp = (2.0 / spec.c).sqrt();
    assemble_isothermal(grid, &fl, &gl, amp, |lx, lxx, ly, lyy, _, _| {
        (
            11.0 / 8.0 * lxx + 2.0 * lx * lx,
            11.0 / 8.0 * lyy + 2.0 * ly * ly,
        )
    })
}

/// Residual of the sixth-order scalar condition satisfied by the Kummer
/// reduction: D_y[(1/β²)(β²(β²)_y)_y] = D_x[(1/β²)(β²(β²)_x)_x].
pub fn kummer_p_residual(c: &Coeffs) -> Result<ResidualReport> {
    let u = c.beta.zip(&c.beta, |a, b| a * b)?;
    let eps = u.eps_div();
    let um = u.mask_below(eps);
    let side = |axis: Axis| -> Result<ScalarField> {
        let t1 = crate::calculus::partial_derivative(&u, axis, 1)?;
        let t2 = u.zip(&t1, |a, b| a * b)?;
        let t3 = crate::calculus::partial_derivative(&t2, axis, 1)?;
        let t4 = t3.zip(&um, |a, b| a / b)?;
        crate::calculus::partial_derivative(&t4, axis, 1)
    };
    // Three nested derivative levels: only fully centered compositions
    // (9 nodes in from the boundary) carry a smooth error profile.
    let r = side(Axis::Y)?
        .zip(&side(Axis::X)?, |a, b| a - b)?
        .mask_frame(9);
    let mut rep = ResidualReport::new(*c.grid());
    rep.push("p-condition", &r);
    Ok(rep)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PseudosphericalKind {
    /// φ_xy = -sin φ: constant Gaussian curvature -1 in Euclidean 3-space.
    Trig,
    /// φ_xy = -sinh φ: constant curvature +1 in Lorentzian 3-space.
    Hyperbolic,
}

/// Surface-R data from a (sine/sinh)-Gordon solution φ:
/// β = -φ_x/s(φ), γ = -φ_y/s(φ), V = 1 + ½(βc(φ))² + (βc(φ))_x,
/// W = 1 + ½(γc(φ))² + (γc(φ))_y, with (s, c) = (sin, cos) or (sinh, cosh).
pub fn make_pseudospherical(
    kind: PseudosphericalKind,
    phi: &ScalarField,
    tol: f64,
) -> Result<Coeffs> {
    let s = |v: f64| match kind {
        PseudosphericalKind::Trig => v.sin(),
        PseudosphericalKind::Hyperbolic => v.sinh(),
    };
    let co = |v: f64| match kind {
        PseudosphericalKind::Trig => v.cos(),
        PseudosphericalKind::Hyperbolic => v.cosh(),
    };
    let sin_phi = phi.map(s);
    let residual = crate::calculus::dxy(phi)?.zip(&sin_phi, |p, q| p + q)?;
    let scale = sin_phi.sup_norm().max(1e-300);
    if residual.sup_norm() > tol * scale {
        return Err(SurfError::ClassPrecondition {
            class: "sine-gordon".into(),
            residual: residual.sup_norm() / scale,
            tol,
        });
    }
    let sm = sin_phi.mask_below(sin_phi.eps_div());
    let beta = dx(phi)?.zip(&sm, |p, s| -p / s)?;
    let gamma = dy(phi)?.zip(&sm, |p, s| -p / s)?;
    let cos_phi = phi.map(co);
    let tb = beta.zip(&cos_phi, |b, c| b * c)?;
    let tg = gamma.zip(&cos_phi, |g, c| g * c)?;
    let v = tb.zip(&dx(&tb)?, |t, d| 1.0 + 0.5 * t * t + d)?;
    let w = tg.zip(&dy(&tg)?, |t, d| 1.0 + 0.5 * t * t + d)?;
    Ok(Coeffs::new(beta, gamma, v, w)?.trim(FD_TRIM))
}

/// The one-soliton K = -1 family in closed form:
/// φ = 4 atan(exp(a x - y/a)). All derivatives are analytic, so the
/// output is valid on the whole grid and exact to round-off.
pub fn make_pseudospherical_kink(a: f64, grid: GridSpec) -> Result<Coeffs> {
    grid.validate()?;
    if a == 0.0 {
        return Err(SurfError::InvalidParam("kink slope must be nonzero".into()));
    }
    let z = move |x: f64, y: f64| a * x - y / a;
    let phi = move |x: f64, y: f64| 4.0 * (z(x, y).exp()).atan();
    let mut beta = ScalarField::zeros(grid);
    let mut gamma = ScalarField::zeros(grid);
    let mut v = ScalarField::zeros(grid);
    let mut w = ScalarField::zeros(grid);
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            let (x, y) = (grid.x(i), grid.y(j));
            let zz = z(x, y);
            let sech = 1.0 / zz.cosh();
            let tanh = zz.tanh();
            let p = phi(x, y);
            let (sp, cp) = (p.sin(), p.cos());
            if sp.abs() < 1e-12 {
                beta.set_mask(i, j, false);
                gamma.set_mask(i, j, false);
                v.set_mask(i, j, false);
                w.set_mask(i, j, false);
                continue;
            }
            let px = 2.0 * a * sech;
            let py = -2.0 / a * sech;
            let pxx = -2.0 * a * a * sech * tanh;
            let pyy = -2.0 / (a * a) * sech * tanh;
            let b = -px / sp;
            let g = -py / sp;
            let bx = -(pxx * sp - px * px * cp) / (sp * sp);
            let gy = -(pyy * sp - py * py * cp) / (sp * sp);
            // (β cos φ)_x = β_x cos φ - β φ_x sin φ, likewise in y.
            let tbx = bx * cp - b * px * sp;
            let tgy = gy * cp - g * py * sp;
            let tb = b * cp;
            let tg = g * cp;
            beta.set(i, j, b);
            gamma.set(i, j, g);
            v.set(i, j, 1.0 + 0.5 * tb * tb + tbx);
            w.set(i, j, 1.0 + 0.5 * tg * tg + tgy);
        }
    }
    Coeffs::new(beta, gamma, v, w)
}

/// Surface with an R-net of period four, from φ_xx - φ_yy = 4 cosh φ:
/// β = ½φ_x, γ = ½φ_y, V = ¼φ_x² + ⅛φ_y² + sinh φ,
/// W = ¼φ_y² + ⅛φ_x² - sinh φ.
pub fn make_rnet4_from_phi(phi: &ScalarField, tol: f64) -> Result<Coeffs> {
    let wave = crate::calculus::partial_derivative(phi, Axis::X, 2)?
        .zip(&crate::calculus::partial_derivative(phi, Axis::Y, 2)?, |a, b| a - b)?;
    let residual = wave.zip(&phi.map(|p| 4.0 * p.cosh()), |l, r| l - r)?;
    let scale = phi.map(|p| 4.0 * p.cosh()).sup_norm();
    if residual.sup_norm() > tol * scale {
        return Err(SurfError::ClassPrecondition {
            class: "rnet4 (cosh forcing)".into(),
            residual: residual.sup_norm() / scale,
            tol,
        });
    }
    let px = dx(phi)?;
    let py = dy(phi)?;
    let beta = px.map(|p| 0.5 * p);
    let gamma = py.map(|p| 0.5 * p);
    let sh = phi.map(f64::sinh);
    let v = px
        .zip(&py, |a, b| 0.25 * a * a + 0.125 * b * b)?
        .zip(&sh, |t, s| t + s)?;
    let w = py
        .zip(&px, |a, b| 0.25 * a * a + 0.125 * b * b)?
        .zip(&sh, |t, s| t - s)?;
    Ok(Coeffs::new(beta, gamma, v, w)?.trim(FD_TRIM))
}

/// Solve φ_ξη = cosh φ on the characteristic rectangle ξ = x+y, η = x-y
/// covering `grid` (requires hx = hy), then build the period-4 R-net data.
/// Boundary data: φ on the ξ- and η-edges of the characteristic grid
/// (length nx+ny-1 each), agreeing at the corner.
pub fn make_rnet4(
    bottom_xi: &[f64],
    left_eta: &[f64],
    grid: GridSpec,
    tol: f64,
) -> Result<Coeffs> {
    grid.validate()?;
    if (grid.hx - grid.hy).abs() > 1e-14 * grid.hx {
        return Err(SurfError::InvalidParam(
            "characteristic resampling requires hx = hy".into(),
        ));
    }
    let nc = grid.nx + grid.ny - 1;
    let cgrid = GridSpec::new(
        nc,
        nc,
        grid.x0 + grid.y0,
        grid.x0 - grid.y(grid.ny - 1),
        grid.hx,
        grid.hx,
    )?;
    let p = GoursatProblem::new(
        GoursatRhs::CoshRnet4,
        vec![bottom_xi.to_vec()],
        vec![left_eta.to_vec()],
    );
    let sol = solve_goursat(&p, &cgrid)?;
    let mut phi = ScalarField::zeros(grid);
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            // ξ index i+j, η index (i - j) + (ny - 1); both land on nodes.
            phi.set(i, j, sol[0].get(i + j, i + grid.ny - 1 - j));
        }
    }
    make_rnet4_from_phi(&phi, tol)
}

/// Projective transform of a Euclidean minimal surface from a Liouville
/// solution φ_xx + φ_yy = -e^{2φ}: β = φ_y, γ = φ_x,
/// V = ½φ_x² - φ_y² - e^{2φ}, W = ½φ_y² - φ_x² - e^{2φ}.
pub fn make_minimal(grid: GridSpec, phi: Option<ScalarField>, tol: f64) -> Result<Coeffs> {
    grid.validate()?;
    let phi = match phi {
        Some(p) => p,
        None => return make_minimal_default(grid),
    };
    let e2 = phi.map(|p| (2.0 * p).exp());
    let lap = crate::calculus::partial_derivative(&phi, Axis::X, 2)?
        .zip(&crate::calculus::partial_derivative(&phi, Axis::Y, 2)?, |a, b| a + b)?;
    let residual = lap.zip(&e2, |l, e| l + e)?;
    if residual.sup_norm() > tol * e2.sup_norm() {
        return Err(SurfError::ClassPrecondition {
            class: "liouville".into(),
            residual: residual.sup_norm() / e2.sup_norm(),
            tol,
        });
    }
    let px = dx(&phi)?;
    let py = dy(&phi)?;
    let v = px
        .zip(&py, |a, b| 0.5 * a * a - b * b)?
        .zip(&e2, |t, e| t - e)?;
    let w = py
        .zip(&px, |a, b| 0.5 * a * a - b * b)?
        .zip(&e2, |t, e| t - e)?;
    Ok(Coeffs::new(py, px, v, w)?.trim(FD_TRIM))
}

/// Minimal-surface data from the standard Liouville solution
/// φ = ln(2/(1+x²+y²)), with analytic derivatives (no trimming needed).
fn make_minimal_default(grid: GridSpec) -> Result<Coeffs> {
    let mut beta = ScalarField::zeros(grid);
    let mut gamma = ScalarField::zeros(grid);
    let mut v = ScalarField::zeros(grid);
    let mut w = ScalarField::zeros(grid);
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            let (x, y) = (grid.x(i), grid.y(j));
            let r2 = 1.0 + x * x + y * y;
            let px = -2.0 * x / r2;
            let py = -2.0 * y / r2;
            let e2 = 4.0 / (r2 * r2);
            beta.set(i, j, py);
            gamma.set(i, j, px);
            v.set(i, j, 0.5 * px * px - py * py - e2);
            w.set(i, j, 0.5 * py * py - px * px - e2);
        }
    }
    Coeffs::new(beta, gamma, v, w)
}

pub enum DemoulinSource {
    /// The exact constant solution β = γ = -1, V = W = 0.
    Constants,
    /// Goursat boundary data for (p, q) = (ln(-β), ln(-γ)) of the coupled
    /// Tzitzeica system.
    Goursat {
        bottom_p: Vec<f64>,
        left_p: Vec<f64>,
        bottom_q: Vec<f64>,
        left_q: Vec<f64>,
    },
}

/// Demoulin data: β, γ < 0 with (ln β)_xy = βγ + 1/β,
/// (ln γ)_xy = βγ + 1/γ; V, W from the a = b = 0 branch.
pub fn make_demoulin(source: DemoulinSource, grid: GridSpec, tol: f64) -> Result<Coeffs> {
    grid.validate()?;
    let (beta, gamma, trim) = match source {
        DemoulinSource::Constants => (
            ScalarField::constant(grid, -1.0),
            ScalarField::constant(grid, -1.0),
            false,
        ),
        DemoulinSource::Goursat {
            bottom_p,
            left_p,
            bottom_q,
            left_q,
        } => {
            let p = GoursatProblem::new(
                GoursatRhs::CoupledTzitzeica,
                vec![bottom_p, bottom_q],
                vec![left_p, left_q],
            );
            let sol = solve_goursat(&p, &grid)?;
            (sol[0].map(|v| -v.exp()), sol[1].map(|v| -v.exp()), true)
        }
    };
    let bg = beta.zip(&gamma, |b, g| b * g)?;
    let rb = log_mixed_derivative(&beta)?
        .zip(&bg, |l, p| l - p)?
        .zip(&beta.mask_below(beta.eps_div()), |t, b| t - 1.0 / b)?;
    let rg = log_mixed_derivative(&gamma)?
        .zip(&bg, |l, p| l - p)?
        .zip(&gamma.mask_below(gamma.eps_div()), |t, g| t - 1.0 / g)?;
    let scale = bg.sup_norm().max(1.0);
    if rb.sup_norm().max(rg.sup_norm()) > tol * scale {
        return Err(SurfError::ClassPrecondition {
            class: "demoulin (coupled tzitzeica)".into(),
            residual: rb.sup_norm().max(rg.sup_norm()) / scale,
            tol,
        });
    }
    let v = log_second(&gamma, Axis::X)?.zip(&log_deriv(&gamma, Axis::X)?, |s, d| {
        s + 0.5 * d * d
    })?;
    let w = log_second(&beta, Axis::Y)?.zip(&log_deriv(&beta, Axis::Y)?, |s, d| {
        s + 0.5 * d * d
    })?;
    let out = Coeffs::new(beta, gamma, v, w)?;
    Ok(if trim { out.trim(FD_TRIM) } else { out })
}

/// Godeaux–Rozet constants: (β0, -1/β0², β0⁴, 0).
pub fn make_godeaux_rozet_const(b0: f64, grid: GridSpec) -> Result<Coeffs> {
    if b0 == 0.0 {
        return Err(SurfError::InvalidParam("beta0 must be nonzero".into()));
    }
    make_constant(b0, -1.0 / (b0 * b0), b0.powi(4), 0.0, grid)
}

/// Projectively minimal constants with the φ = ψ = 1 normalization:
/// (β0, γ0, 1/γ0², 1/β0²).
pub fn make_projmin_const(b0: f64, g0: f64, grid: GridSpec) -> Result<Coeffs> {
    if b0 == 0.0 || g0 == 0.0 {
        return Err(SurfError::InvalidParam(
            "beta0 and gamma0 must be nonzero".into(),
        ));
    }
    make_constant(b0, g0, 1.0 / (g0 * g0), 1.0 / (b0 * b0), grid)
}

/// A field with both asymptotic-line families in linear complexes
/// (k = l = 0): β = γ = 1/(x+y) with the extension
/// V = 3/2 β² + p - q x + r x², W = 3/2 β² + p + q y + r y².
/// Non-trivial (q, r) keep the derived a(y), b(x) nonconstant.
pub fn make_linear_complex_pair(grid: GridSpec, p: f64, q: f64, r: f64) -> Result<Coeffs> {
    grid.validate()?;
    if grid.x0 + grid.y0 <= 0.0 {
        return Err(SurfError::InvalidParam(
            "domain must satisfy x + y > 0".into(),
        ));
    }
    let beta = ScalarField::sample(grid, |x, y| 1.0 / (x + y));
    let v = ScalarField::sample(grid, |x, y| {
        1.5 / ((x + y) * (x + y)) + p - q * x + r * x * x
    });
    let w = ScalarField::sample(grid, |x, y| {
        1.5 / ((x + y) * (x + y)) + p + q * y + r * y * y
    });
    Coeffs::new(beta.clone(), beta, v, w)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShiftKind {
    /// W → W + λ on surfaces R₀ reduced to β independent of y.
    R0,
    /// V → V + λ, W → W + λ on surfaces R (β_y = γ_x).
    R,
}

/// The one-parameter shift of projectively applicable surfaces.
pub fn lambda_shift(c: &Coeffs, lambda: f64, kind: ShiftKind, tol: f64) -> Result<Coeffs> {
    let rep = classify(c, tol)?;
    match kind {
        ShiftKind::R0 => {
            if !rep.r0_x.member {
                return Err(SurfError::ClassPrecondition {
                    class: "r0".into(),
                    residual: rep.r0_x.residual,
                    tol,
                });
            }
            // Exact residual invariance additionally needs the reduced
            // gauge in which β does not depend on y.
            let by = dy(&c.beta)?;
            let scale = c.beta.sup_norm().max(1e-300);
            if by.sup_norm() > tol * scale {
                return Err(SurfError::ClassPrecondition {
                    class: "r0 (reduced gauge beta = beta(x))".into(),
                    residual: by.sup_norm() / scale,
                    tol,
                });
            }
            Ok(Coeffs {
                beta: c.beta.clone(),
                gamma: c.gamma.clone(),
                v: c.v.clone(),
                w: c.w.map(|w| w + lambda),
            })
        }
        ShiftKind::R => {
            if !rep.r.member {
                return Err(SurfError::ClassPrecondition {
                    class: "r".into(),
                    residual: rep.r.residual,
                    tol,
                });
            }
            Ok(Coeffs {
                beta: c.beta.clone(),
                gamma: c.gamma.clone(),
                v: c.v.map(|v| v + lambda),
                w: c.w.map(|w| w + lambda),
            })
        }
    }
}

/// A, B, F fields of the constant-curvature extension sweeps.
#[derive(Debug, Clone)]
pub struct ExtensionState {
    pub a: ScalarField,
    pub b: ScalarField,
    pub f: ScalarField,
}

struct SweepCoeffs {
    /// (ln β²) derivative along the sweep axis.
    l2: Vec<f64>,
    /// β².
    b2: Vec<f64>,
    /// (β²) derivative along the other axis.
    b2_other: Vec<f64>,
    /// (1/β²)(β² (β²)_other)_other.
    t_other: Vec<f64>,
}

/// One RK4 step of the linear sweep system for (A, B, F); `which` selects
/// the x-form (A carries the log term) or the y-form (B carries it).
fn extension_step(
    u: [f64; 3],
    h: f64,
    c: f64,
    s0: [f64; 4],
    sm: [f64; 4],
    s1: [f64; 4],
    x_form: bool,
) -> [f64; 3] {
    let ch = 0.5 * c;
    let rhs = |u: [f64; 3], s: [f64; 4]| -> [f64; 3] {
        let [l2, b2, b2o, to] = s;
        let drive = 1.5 * (1.0 - ch);
        if x_form {
            [
                -u[0] * l2 + u[2],
                drive * b2o,
                2.0 * ch * u[1] * b2 + drive * to,
            ]
        } else {
            [
                drive * b2o,
                -u[1] * l2 + u[2],
                2.0 * ch * u[0] * b2 + drive * to,
            ]
        }
    };
    let add = |u: [f64; 3], k: [f64; 3], f: f64| [u[0] + f * k[0], u[1] + f * k[1], u[2] + f * k[2]];
    let k1 = rhs(u, s0);
    let k2 = rhs(add(u, k1, 0.5 * h), sm);
    let k3 = rhs(add(u, k2, 0.5 * h), sm);
    let k4 = rhs(add(u, k3, h), s1);
    [
        u[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        u[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        u[2] + h / 6.0 * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2]),
    ]
}

fn sweep_sample(line: &SweepCoeffs, k: usize) -> [f64; 4] {
    [line.l2[k], line.b2[k], line.b2_other[k], line.t_other[k]]
}

fn sweep_mid(line: &SweepCoeffs, i: usize) -> [f64; 4] {
    let n = line.l2.len();
    let (s, w) = segment_midpoint_weights(n, i);
    let mut out = [0.0; 4];
    for (k, &wk) in w.iter().enumerate() {
        let v = sweep_sample(line, s + k);
        for (o, vq) in out.iter_mut().zip(v.iter()) {
            *o += wk * vq;
        }
    }
    out
}

/// Build the 3-parameter family of projectively applicable surfaces over
/// a β whose projective metric has constant curvature, (ln β²)_xy = cβ²:
/// integrate the compatible first-order system for (A, B, F) from
/// (a0, b0, f0) at the grid origin and set
/// V = (ln β)_xx + ½(ln β)_x² + A, W = (ln β)_yy + ½(ln β)_y² + B.
///
/// The sweep coefficients live in the half-constant convention
/// (ln β)_xy = (c/2) β²; the Kummer value is c = 8/9.
pub fn constant_curvature_extension(
    beta: &ScalarField,
    c: f64,
    a0: f64,
    b0: f64,
    f0: f64,
    tol: f64,
) -> Result<(Coeffs, ExtensionState, ResidualReport)> {
    if c == 0.0 {
        return Err(SurfError::InvalidParam(
            "the curvature constant must be nonzero".into(),
        ));
    }
    let grid = *beta.grid();
    let b2 = beta.zip(beta, |a, b| a * b)?;
    // Gate: (ln β²)_xy = cβ².
    let gate = log_mixed_derivative(&b2)?.zip(&b2, |l, s| l - c * s)?;
    let scale = b2.sup_norm().max(1e-300);
    if gate.sup_norm() > tol * c.abs() * scale {
        return Err(SurfError::ClassPrecondition {
            class: "constant-curvature (ln beta^2)_xy = c beta^2".into(),
            residual: gate.sup_norm() / (c.abs() * scale),
            tol,
        });
    }

    let b2x = dx(&b2)?;
    let b2y = dy(&b2)?;
    let b2m = b2.mask_below(b2.eps_div());
    let l2x = b2x.zip(&b2m, |d, v| d / v)?;
    let l2y = b2y.zip(&b2m, |d, v| d / v)?;
    let tx = dx(&b2.zip(&b2x, |a, b| a * b)?)?.zip(&b2m, |d, v| d / v)?;
    let ty = dy(&b2.zip(&b2y, |a, b| a * b)?)?.zip(&b2m, |d, v| d / v)?;

    let mut a = ScalarField::zeros(grid);
    let mut bb = ScalarField::zeros(grid);
    let mut ff = ScalarField::zeros(grid);
    let set = |fld: &mut ScalarField, i: usize, j: usize, v: f64| fld.set(i, j, v);

    // Bottom row: x-sweep.
    let row = |f: &ScalarField, j: usize| (0..grid.nx).map(|i| f.get(i, j)).collect::<Vec<_>>();
    let xline = SweepCoeffs {
        l2: row(&l2x, 0),
        b2: row(&b2, 0),
        b2_other: row(&b2y, 0),
        t_other: row(&ty, 0),
    };
    let mut u = [a0, b0, f0];
    set(&mut a, 0, 0, u[0]);
    set(&mut bb, 0, 0, u[1]);
    set(&mut ff, 0, 0, u[2]);
    for i in 0..grid.nx - 1 {
        u = extension_step(
            u,
            grid.hx,
            c,
            sweep_sample(&xline, i),
            sweep_mid(&xline, i),
            sweep_sample(&xline, i + 1),
            true,
        );
        set(&mut a, i + 1, 0, u[0]);
        set(&mut bb, i + 1, 0, u[1]);
        set(&mut ff, i + 1, 0, u[2]);
    }

    // Columns: y-sweeps.
    let col = |f: &ScalarField, i: usize| (0..grid.ny).map(|j| f.get(i, j)).collect::<Vec<_>>();
    for i in 0..grid.nx {
        let yline = SweepCoeffs {
            l2: col(&l2y, i),
            b2: col(&b2, i),
            b2_other: col(&b2x, i),
            t_other: col(&tx, i),
        };
        let mut u = [a.get(i, 0), bb.get(i, 0), ff.get(i, 0)];
        for j in 0..grid.ny - 1 {
            u = extension_step(
                u,
                grid.hy,
                c,
                sweep_sample(&yline, j),
                sweep_mid(&yline, j),
                sweep_sample(&yline, j + 1),
                false,
            );
            set(&mut a, i, j + 1, u[0]);
            set(&mut bb, i, j + 1, u[1]);
            set(&mut ff, i, j + 1, u[2]);
        }
    }

    // Compatibility defects of the six sweep equations, by FD.
    let ch = 0.5 * c;
    let drive = 1.5 * (1.0 - ch);
    let mut defects = ResidualReport::new(grid);
    defects.push(
        "A_x + A(ln b2)_x - F",
        &dx(&a)?
            .zip(&a.zip(&l2x, |av, l| av * l)?, |d, t| d + t)?
            .zip(&ff, |t, f| t - f)?,
    );
    defects.push(
        "A_y - 3/2(1-c)(b2)_x",
        &dy(&a)?.zip(&b2x, |d, t| d - drive * t)?,
    );
    defects.push(
        "B_y + B(ln b2)_y - F",
        &dy(&bb)?
            .zip(&bb.zip(&l2y, |bv, l| bv * l)?, |d, t| d + t)?
            .zip(&ff, |t, f| t - f)?,
    );
    defects.push(
        "B_x - 3/2(1-c)(b2)_y",
        &dx(&bb)?.zip(&b2y, |d, t| d - drive * t)?,
    );
    defects.push(
        "F_x - cB b2 - drive Ty",
        &dx(&ff)?
            .zip(&bb.zip(&b2, |bv, s| 2.0 * ch * bv * s)?, |d, t| d - t)?
            .zip(&ty, |t, s| t - drive * s)?,
    );
    defects.push(
        "F_y - cA b2 - drive Tx",
        &dy(&ff)?
            .zip(&a.zip(&b2, |av, s| 2.0 * ch * av * s)?, |d, t| d - t)?
            .zip(&tx, |t, s| t - drive * s)?,
    );

    let v = log_second(beta, Axis::X)?
        .zip(&log_deriv(beta, Axis::X)?, |s, d| s + 0.5 * d * d)?
        .zip(&a, |t, av| t + av)?;
    let w = log_second(beta, Axis::Y)?
        .zip(&log_deriv(beta, Axis::Y)?, |s, d| s + 0.5 * d * d)?
        .zip(&bb, |t, bv| t + bv)?;
    let coeffs = Coeffs::new(beta.clone(), beta.clone(), v, w)?.trim(FD_TRIM);
    Ok((coeffs, ExtensionState { a, b: bb, f: ff }, defects))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffs::{derived_quantities, gc1_residual};
    use crate::symmetry::dual;

    fn unit_grid(n: usize, origin: f64) -> GridSpec {
        GridSpec::square(n, origin, 1.0 / (n - 1) as f64).unwrap()
    }

    #[test]
    fn rotation_cases_share_residual_behavior() {
        let g = unit_grid(49, 0.0);
        for &c in &[0.3, 0.0, -0.4] {
            let coeffs = make_rotation(&|s| 0.2 * s.sin(), c, g).unwrap();
            let rep = gc1_residual(&coeffs).unwrap();
            assert!(rep.max_sup() < 1e-6, "c={c}: {}", rep.max_sup());
            let cls = classify(&coeffs, 1e-5).unwrap();
            assert!(cls.isothermally_asymptotic.member);
        }
        // Constant profile reduces to make_constant.
        let coeffs = make_rotation(&|_| 0.7, 0.3, g).unwrap();
        let expect = make_constant(0.7, 0.7, 1.5 * 0.49 + 0.3, 1.5 * 0.49 + 0.3, g).unwrap();
        assert_eq!(coeffs.v.values(), expect.v.values());
    }

    #[test]
    fn roman_closed_form_a100() {
        // a = (1,0,0), f = x, g = y on [1,2]²: β = 3/(2(x+y)),
        // V (x+y)² = 27/8 and (ln β)_xy = 4/9 β².
        let n = 65;
        let g = unit_grid(n, 1.0);
        let spec = RomanSpec::new(1.0, 0.0, 0.0, 1.0, 1.0);
        let c = make_roman(&spec, g).unwrap();
        for j in 0..n {
            for i in 0..n {
                let (x, y) = (g.x(i), g.y(j));
                let s = x + y;
                assert!(
                    (c.beta.get(i, j) - 1.5 / s).abs() < 1e-12,
                    "beta at ({i},{j})"
                );
                assert!(
                    (c.v.get(i, j) * s * s - 27.0 / 8.0).abs() < 1e-10,
                    "V(x+y)^2 at ({i},{j}): {}",
                    c.v.get(i, j) * s * s
                );
            }
        }
        let rep = gc1_residual(&c).unwrap();
        assert!(rep.max_sup() < 5e-7, "gc1 {}", rep.max_sup());
        // The three second-order relations of the reduction.
        let bxx = crate::calculus::partial_derivative(&c.beta, Axis::X, 2).unwrap();
        let by = dy(&c.beta).unwrap();
        let r = bxx
            .zip(&c.beta.zip(&by, |b, d| -4.0 / 3.0 * b * d).unwrap(), |a, b| a - b)
            .unwrap();
        assert!(r.sup_norm() < 1e-8, "beta_xx relation {}", r.sup_norm());
        let lxy = log_mixed_derivative(&c.beta).unwrap();
        let r2 = lxy
            .zip(&c.beta, |l, b| l - 4.0 / 9.0 * b * b)
            .unwrap();
        assert!(r2.sup_norm() < 1e-8, "liouville relation {}", r2.sup_norm());
    }

    #[test]
    fn roman_dual_is_cubic() {
        let g = unit_grid(33, 1.0);
        let spec = RomanSpec::new(1.0, 0.3, 0.0, 1.0, 1.0);
        let c = make_roman(&spec, g).unwrap();
        assert!(gc1_residual(&c).unwrap().max_sup() < 1e-5);
        let d = dual(&c);
        let rep = cubic_constraint_residual(&d, 1e-5).unwrap();
        assert!(rep.max_sup() < 1e-7, "cubic {}", rep.max_sup());
        // The Roman field itself fails the cubic form (the 5/2 terms flip).
        let rep2 = cubic_constraint_residual(&c, 1e-5).unwrap();
        assert!(rep2.max_sup() > 1e-2, "sign flip {}", rep2.max_sup());
    }

    #[test]
    fn kummer_constant_polynomial() {
        // P ≡ 1: f = x + f0, g = y + g0, β² = 9/4 (x+y+f0+g0)^{-2}.
        let n = 49;
        let g = unit_grid(n, 1.0);
        let spec = KummerSpec::new(vec![1.0], 1.2, 1.0);
        let c = make_kummer(&spec, g).unwrap();
        let b = c.beta.get(10, 20);
        // f = 1.2 + (x - 1), g = 1.0 + (y - 1).
        let expect = 1.5 / (g.x(10) + g.y(20) + 0.2);
        assert!((b - expect).abs() < 1e-12, "{b} vs {expect}");
        assert!(gc1_residual(&c).unwrap().max_sup() < 1e-6);
        assert!(kummer_p_residual(&c).unwrap().max_sup() < 1e-6);
    }

    #[test]
    fn kummer_quadratic_polynomial_and_self_duality() {
        let n = 49;
        let g = unit_grid(n, 1.0);
        let spec = KummerSpec::new(vec![1.0, 0.4, 0.04], 1.0, 1.0);
        let c = make_kummer(&spec, g).unwrap();
        assert!(gc1_residual(&c).unwrap().max_sup() < 2e-6);
        assert!(kummer_p_residual(&c).unwrap().max_sup() < 1e-5);
        // Self-dual class: the dual satisfies the same V, W expressions.
        let d = dual(&c);
        assert!(gc1_residual(&d).unwrap().max_sup() < 2e-6);
        assert!(kummer_p_residual(&d).unwrap().max_sup() < 1e-5);
    }

    #[test]
    fn kummer_rejects_nonpositive_polynomial() {
        let g = unit_grid(9, 0.0);
        let spec = KummerSpec::new(vec![-1.0], 0.0, 0.0);
        assert!(make_kummer(&spec, g).is_err());
    }

    #[test]
    fn affine_sphere_constants() {
        let g = unit_grid(9, 0.0);
        let c = make_affine_sphere_const(-1.0, g).unwrap();
        assert_eq!(c.beta.get(4, 4), 1.0);
        let d = derived_quantities(&c).unwrap();
        assert!(d.a.sup_norm() < 1e-12 && d.b.sup_norm() < 1e-12);
        assert!((d.k.get(4, 4) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn affine_sphere_goursat_improper() {
        // c = 0: u_xy = e^{2u}, small boundary data on a small domain.
        let n = 33;
        let g = GridSpec::square(n, 0.0, 0.5 / (n - 1) as f64).unwrap();
        let c = make_affine_sphere_goursat(0.0, g, |x, y| 0.1 * (x + y)).unwrap();
        let rep = gc1_residual(&c).unwrap();
        assert!(rep.max_sup() < 1e-5, "gc1 {}", rep.max_sup());
    }

    #[test]
    fn affine_sphere_rejects_non_solution() {
        let g = unit_grid(17, 0.0);
        let beta = ScalarField::sample(g, |x, y| 1.0 + x + y);
        assert!(make_affine_sphere(&beta, -1.0, 1e-6).is_err());
    }

    #[test]
    fn pseudospherical_trig_kink() {
        // Domain centered where |sin φ| stays near 1; the high
        // derivatives of the quotient 1/sin φ grow factorially away
        // from it and drown fourth-order residuals otherwise.
        let n = 49;
        let a = 1.15;
        let g = GridSpec::new(n, n, 0.8, 0.0, 0.4 / (n - 1) as f64, 0.4 / (n - 1) as f64)
            .unwrap();
        // Analytic construction: exact fields on the whole grid.
        let ck = make_pseudospherical_kink(a, g).unwrap();
        let rep = gc1_residual(&ck).unwrap();
        assert!(rep.max_sup() < 2e-3, "gc1 (analytic) {}", rep.max_sup());
        // The residual is pure FD truncation: refining h must shrink it
        // at fourth order (the kink's eighth derivatives are huge, so the
        // absolute level at n = 49 stays coarse).
        let g2 = GridSpec::new(97, 97, 0.8, 0.0, 0.4 / 96.0, 0.4 / 96.0).unwrap();
        let ck2 = make_pseudospherical_kink(a, g2).unwrap();
        let rep2 = gc1_residual(&ck2).unwrap();
        assert!(
            rep.max_sup() / rep2.max_sup() > 10.0,
            "refinement ratio {}",
            rep.max_sup() / rep2.max_sup()
        );
        let cls = classify(&ck, 1e-5).unwrap();
        assert!(cls.r.member, "class R: {}", cls.r.residual);
        assert!(!cls.jonas.member, "jonas: {}", cls.jonas.residual);

        // FD construction from the sampled kink: trimmed but matching.
        let phi = ScalarField::sample(g, |x, y| 4.0 * ((a * x - y / a).exp()).atan());
        let c = make_pseudospherical(PseudosphericalKind::Trig, &phi, 1e-5).unwrap();
        assert!(c.beta.valid_count() < g.len());
        let rep = gc1_residual(&c).unwrap();
        assert!(rep.max_sup() < 2e-3, "gc1 (FD) {}", rep.max_sup());
        let diff = c.v.zip(&ck.v, |p, q| p - q).unwrap();
        assert!(diff.sup_norm() < 1e-6, "FD vs analytic V: {}", diff.sup_norm());
    }

    #[test]
    fn pseudospherical_masks_sin_zero() {
        // φ crossing π makes sin φ vanish along a band.
        let n = 33;
        let g = GridSpec::square(n, -1.0, 2.0 / (n - 1) as f64).unwrap();
        let phi = ScalarField::sample(g, |x, y| 4.0 * ((x - y).exp()).atan());
        let c = make_pseudospherical(PseudosphericalKind::Trig, &phi, 1e-4).unwrap();
        assert!(c.beta.valid_count() < g.len(), "zero set must be masked");
    }

    #[test]
    fn pseudospherical_rejects_non_solution() {
        let g = unit_grid(17, 0.0);
        let phi = ScalarField::sample(g, |x, y| x * x + y);
        assert!(make_pseudospherical(PseudosphericalKind::Trig, &phi, 1e-6).is_err());
    }

    #[test]
    fn rnet4_small_domain() {
        let n = 33;
        let g = GridSpec::square(n, 0.0, 0.5 / (n - 1) as f64).unwrap();
        let nc = 2 * n - 1;
        let c = make_rnet4(&vec![0.0; nc], &vec![0.0; nc], g, 1e-3).unwrap();
        let rep = gc1_residual(&c).unwrap();
        assert!(rep.max_sup() < 1e-3, "gc1 {}", rep.max_sup());
        let cls = classify(&c, 1e-3).unwrap();
        assert!(cls.r.member);
        assert!(!cls.projectively_minimal.member);
    }

    #[test]
    fn rnet4_rejects_constant_phi() {
        // No constant solves φ_xx - φ_yy = 4 cosh φ >= 4.
        let g = unit_grid(9, 0.0);
        let phi = ScalarField::constant(g, 0.3);
        assert!(make_rnet4_from_phi(&phi, 1e-6).is_err());
    }

    #[test]
    fn minimal_surface_default_phi() {
        let n = 49;
        let g = GridSpec::square(n, 0.5, 1.0 / (n - 1) as f64).unwrap();
        let c = make_minimal(g, None, 1e-8).unwrap();
        let rep = gc1_residual(&c).unwrap();
        assert!(rep.max_sup() < 2e-4, "gc1 {}", rep.max_sup());
        // Liouville residual of the closed form, away from one-sided
        // boundary stencils.
        let phi0 = ScalarField::sample(g, |x, y| (2.0 / (1.0 + x * x + y * y)).ln());
        let lap = crate::calculus::partial_derivative(&phi0, Axis::X, 2)
            .unwrap()
            .zip(
                &crate::calculus::partial_derivative(&phi0, Axis::Y, 2).unwrap(),
                |p, q| p + q,
            )
            .unwrap();
        let resid = lap.zip(&phi0.map(|p| (2.0 * p).exp()), |l, e| l + e).unwrap();
        assert!(
            resid.mask_frame(3).sup_norm() <= 1e-9,
            "interior liouville {}",
            resid.mask_frame(3).sup_norm()
        );
        // Supplying the same phi as a sampled field goes through the FD
        // path, which trims the boundary band but must agree inside.
        let phi = ScalarField::sample(g, |x, y| (2.0 / (1.0 + x * x + y * y)).ln());
        let c2 = make_minimal(g, Some(phi), 1e-6).unwrap();
        assert!(c2.beta.valid_count() < g.len());
        let diff = c2.beta.zip(&c.beta, |a, b| a - b).unwrap();
        assert!(diff.sup_norm() < 1e-8, "FD vs analytic {}", diff.sup_norm());
        let cls = classify(&c, 1e-5).unwrap();
        assert!(cls.jonas.member, "jonas {}", cls.jonas.residual);
    }

    #[test]
    fn minimal_rejects_shifted_phi() {
        let g = unit_grid(17, 0.5);
        let phi = ScalarField::sample(g, |x, y| (2.0 / (1.0 + x * x + y * y)).ln() + 0.3);
        assert!(make_minimal(g, Some(phi), 1e-8).is_err());
    }

    #[test]
    fn demoulin_constants_and_goursat() {
        let g = unit_grid(9, 0.0);
        let c = make_demoulin(DemoulinSource::Constants, g, 1e-8).unwrap();
        assert_eq!(c.beta.get(4, 4), -1.0);
        assert!(c.v.sup_norm() < 1e-12);
        let cls = classify(&c, 1e-8).unwrap();
        assert!(cls.demoulin.member);

        let n = 25;
        let g = GridSpec::square(n, 0.0, 0.5 / (n - 1) as f64).unwrap();
        let edge = |s: f64| 0.1 * s;
        let c = make_demoulin(
            DemoulinSource::Goursat {
                bottom_p: (0..n).map(|i| edge(g.x(i))).collect(),
                left_p: (0..n).map(|j| edge(g.y(j))).collect(),
                bottom_q: (0..n).map(|i| -0.05 * g.x(i)).collect(),
                left_q: (0..n).map(|j| -0.05 * g.y(j)).collect(),
            },
            g,
            1e-4,
        )
        .unwrap();
        let rep = gc1_residual(&c).unwrap();
        assert!(rep.max_sup() < 1e-4, "gc1 {}", rep.max_sup());
        let cls = classify(&c, 1e-4).unwrap();
        assert!(cls.demoulin.member, "demoulin {}", cls.demoulin.residual);
    }

    #[test]
    fn godeaux_rozet_and_projmin_constants() {
        let g = unit_grid(9, 0.0);
        let c = make_godeaux_rozet_const(1.0, g).unwrap();
        let cls = classify(&c, 1e-8).unwrap();
        assert!(cls.godeaux_rozet.member && !cls.demoulin.member);
        assert!(cls.projectively_minimal.member);
        let c2 = make_godeaux_rozet_const(2.0, g).unwrap();
        assert_eq!(c2.gamma.get(4, 4), -0.25);
        assert_eq!(c2.v.get(4, 4), 16.0);
        assert!(gc1_residual(&c2).unwrap().max_sup() < 1e-12);
        assert!(make_godeaux_rozet_const(0.0, g).is_err());

        let c3 = make_projmin_const(1.0, 2.0, g).unwrap();
        assert_eq!(c3.v.get(4, 4), 0.25);
        assert_eq!(c3.w.get(4, 4), 1.0);
        let cls3 = classify(&c3, 1e-8).unwrap();
        assert!(cls3.projectively_minimal.member && !cls3.godeaux_rozet.member);
        // Spectral scaling preserves the class.
        let s = crate::symmetry::spectral_scale(&c3, 3.0).unwrap();
        assert!(classify(&s, 1e-8).unwrap().projectively_minimal.member);
    }

    #[test]
    fn lambda_shift_kinds() {
        let g = unit_grid(9, 0.0);
        let c = make_constant(1.0, 2.0, 3.0, 4.0, g).unwrap();
        let s = lambda_shift(&c, 5.0, ShiftKind::R0, 1e-6).unwrap();
        assert_eq!(s.w.get(4, 4), 9.0);
        assert_eq!(s.v.get(4, 4), 3.0);
        assert!(gc1_residual(&s).unwrap().max_sup() < 1e-12);

        let s2 = lambda_shift(&c, 0.1, ShiftKind::R, 1e-6).unwrap();
        assert!(gc1_residual(&s2).unwrap().max_sup() < 1e-12);
        assert!(classify(&s2, 1e-6).unwrap().r.member);

        // K = -1 field: class R holds, R0 does not. λ couples to
        // β_y - γ_x, so on sampled data the residual can move only at
        // the level of the FD asymmetry of that difference.
        let n = 49;
        let gk = GridSpec::new(n, n, 0.8, 0.0, 0.4 / (n - 1) as f64, 0.4 / (n - 1) as f64)
            .unwrap();
        let ck = make_pseudospherical_kink(1.15, gk).unwrap();
        let asym = dy(&ck.beta)
            .unwrap()
            .zip(&dx(&ck.gamma).unwrap(), |p, q| p - q)
            .unwrap()
            .sup_norm();
        let r0 = gc1_residual(&ck).unwrap();
        let shifted = lambda_shift(&ck, 0.1, ShiftKind::R, 1e-4).unwrap();
        let r1 = gc1_residual(&shifted).unwrap();
        for ((_, a), (_, b)) in r0.components.iter().zip(r1.components.iter()) {
            let moved = (a.sup - b.sup).abs();
            assert!(moved <= 0.2 * asym + 1e-14, "residual moved by {moved}, asym {asym}");
        }
        assert!(lambda_shift(&ck, 0.1, ShiftKind::R0, 1e-4).is_err());
    }

    #[test]
    fn linear_complex_pair_has_k_l_zero() {
        let g = unit_grid(33, 1.0);
        let c = make_linear_complex_pair(g, 0.0, 1.0, 0.0).unwrap();
        assert!(gc1_residual(&c).unwrap().max_sup() < 1e-5);
        let cls = classify(&c, 1e-6).unwrap();
        assert!(cls.linear_complex_x.member, "k: {}", cls.linear_complex_x.residual);
        assert!(cls.linear_complex_y.member, "l: {}", cls.linear_complex_y.residual);
        let d = derived_quantities(&c).unwrap();
        // a = y, b = -x for (p, q, r) = (0, 1, 0).
        assert!((d.a.get(5, 9) - g.y(9)).abs() < 1e-8);
        assert!((d.b.get(5, 9) + g.x(5)).abs() < 1e-8);
    }

    #[test]
    fn extension_family_members_satisfy_gc1() {
        // β from the c = 2 normalization of the Liouville solution with
        // f = x, g = y: β = 1/(x+y).
        let n = 49;
        let g = unit_grid(n, 1.0);
        let beta = ScalarField::sample(g, |x, y| 1.0 / (x + y));
        for &(a0, b0, f0) in &[(0.0, 0.0, 0.0), (0.4, -0.2, 0.1)] {
            let (c, _, defects) =
                constant_curvature_extension(&beta, 2.0, a0, b0, f0, 1e-5).unwrap();
            assert!(
                defects.max_sup() < 1e-6,
                "sweep defects {}",
                defects.max_sup()
            );
            let rep = gc1_residual(&c).unwrap();
            assert!(rep.max_sup() < 1e-6, "gc1 {}", rep.max_sup());
        }
        // Distinct parameters share β (hence metric and cubic form) but
        // differ in V, W.
        let (c1, _, _) = constant_curvature_extension(&beta, 2.0, 0.0, 0.0, 0.0, 1e-5).unwrap();
        let (c2, _, _) = constant_curvature_extension(&beta, 2.0, 0.4, -0.2, 0.1, 1e-5).unwrap();
        assert_eq!(c1.beta.values(), c2.beta.values());
        let dv = c1.v.zip(&c2.v, |a, b| a - b).unwrap();
        assert!(dv.sup_norm() > 0.1, "V must differ: {}", dv.sup_norm());
    }

    #[test]
    fn extension_matches_kummer_for_matched_constants() {
        let n = 65;
        let g = unit_grid(n, 1.0);
        let spec = KummerSpec::new(vec![1.0], 0.6, 0.6);
        let kum = make_kummer(&spec, g).unwrap();
        // Recover the (A, B, F) seed from the Kummer V at the origin.
        let lxx = log_second(&kum.beta, Axis::X).unwrap();
        let lx = log_deriv(&kum.beta, Axis::X).unwrap();
        let lyy = log_second(&kum.beta, Axis::Y).unwrap();
        let ly = log_deriv(&kum.beta, Axis::Y).unwrap();
        let a_field = kum
            .v
            .zip(&lxx, |v, s| v - s)
            .unwrap()
            .zip(&lx, |t, d| t - 0.5 * d * d)
            .unwrap();
        let b_field = kum
            .w
            .zip(&lyy, |w, s| w - s)
            .unwrap()
            .zip(&ly, |t, d| t - 0.5 * d * d)
            .unwrap();
        let f_seed = {
            let ax = dx(&a_field).unwrap();
            let l2x = log_deriv(&kum.beta, Axis::X).unwrap().map(|v| 2.0 * v);
            ax.zip(&a_field.zip(&l2x, |a, l| a * l).unwrap(), |d, t| d + t)
                .unwrap()
                .get(0, 0)
        };
        let (ext, _, _) = constant_curvature_extension(
            &kum.beta,
            8.0 / 9.0,
            a_field.get(0, 0),
            b_field.get(0, 0),
            f_seed,
            1e-4,
        )
        .unwrap();
        let dv = ext.v.zip(&kum.v, |a, b| a - b).unwrap();
        let dw = ext.w.zip(&kum.w, |a, b| a - b).unwrap();
        assert!(dv.sup_norm() < 1e-4, "V mismatch {}", dv.sup_norm());
        assert!(dw.sup_norm() < 1e-4, "W mismatch {}", dw.sup_norm());
    }
}
