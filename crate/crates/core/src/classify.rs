//! Membership tests for the named surface classes.
//!
//! Each class is a closed condition on (β, γ, V, W). Residuals are
//! normalized by the sup-norm of the terms entering them, so verdicts do
//! not change under rescaling of the field and survive reparametrization
//! wherever the defining condition itself does.

use crate::calculus::{dx, dxy, dy, log_deriv, Axis};
use crate::coeffs::{derived_quantities, Coeffs, Derived};
use crate::error::{Result, SurfError};
use crate::grid::ScalarField;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassVerdict {
    pub residual: f64,
    pub member: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassReport {
    pub isothermally_asymptotic: ClassVerdict,
    pub r0_x: ClassVerdict,
    pub r0_y: ClassVerdict,
    pub r: ClassVerdict,
    pub jonas: ClassVerdict,
    pub projectively_minimal: ClassVerdict,
    pub godeaux_rozet: ClassVerdict,
    pub demoulin: ClassVerdict,
    pub linear_complex_x: ClassVerdict,
    pub linear_complex_y: ClassVerdict,
    pub tolerance: f64,
}

impl ClassReport {
    pub fn entries(&self) -> Vec<(&'static str, ClassVerdict)> {
        vec![
            ("isothermally-asymptotic", self.isothermally_asymptotic),
            ("r0-x", self.r0_x),
            ("r0-y", self.r0_y),
            ("r", self.r),
            ("jonas", self.jonas),
            ("projectively-minimal", self.projectively_minimal),
            ("godeaux-rozet", self.godeaux_rozet),
            ("demoulin", self.demoulin),
            ("linear-complex-x", self.linear_complex_x),
            ("linear-complex-y", self.linear_complex_y),
        ]
    }
}

/// Sup of the term sum divided by the largest term sup. Zero numerator
/// means an exact member regardless of scale.
fn normalized_residual(terms: &[&ScalarField]) -> Result<f64> {
    let mut combo = terms[0].clone();
    let mut norm = terms[0].sup_norm();
    for t in &terms[1..] {
        combo = combo.zip(t, |a, b| a + b)?;
        norm = norm.max(t.sup_norm());
    }
    if combo.valid_count() == 0 {
        return Err(SurfError::FullyMasked);
    }
    let sup = combo.sup_norm();
    Ok(if sup == 0.0 { 0.0 } else { sup / norm })
}

fn neg(f: &ScalarField) -> ScalarField {
    f.map(|v| -v)
}

/// Decomposition of (ln|f|)_xy into its two scale-free terms
/// f_xy/f and -f_x f_y/f².
fn log_mixed_terms(f: &ScalarField) -> Result<(ScalarField, ScalarField)> {
    let eps = f.eps_div();
    let fm = f.mask_below(eps);
    let t1 = dxy(f)?.zip(&fm, |d, v| d / v)?;
    let fx = dx(f)?.zip(&fm, |d, v| d / v)?;
    let fy = dy(f)?.zip(&fm, |d, v| d / v)?;
    let t2 = fx.zip(&fy, |a, b| -a * b)?;
    Ok((t1, t2))
}

/// Both sides of the Euler–Lagrange condition for the projective area
/// functional, in the gauge-covariant form β a_y + 2a β_y and
/// γ b_x + 2b γ_x.
fn euler_lagrange_residual(c: &Coeffs, d: &Derived) -> Result<f64> {
    let t1 = c.beta.zip(&dy(&d.a)?, |b, ay| b * ay)?;
    let t2 = d.a.zip(&dy(&c.beta)?, |a, by| 2.0 * a * by)?;
    let rx = normalized_residual(&[&t1, &t2])?;
    let t3 = c.gamma.zip(&dx(&d.b)?, |g, bx| g * bx)?;
    let t4 = d.b.zip(&dx(&c.gamma)?, |b, gx| 2.0 * b * gx)?;
    let ry = normalized_residual(&[&t3, &t4])?;
    Ok(rx.max(ry))
}

/// Residual of a = 0, normalized by the terms W, (ln β)_yy, ½(ln β)_y².
fn zero_residual_a(c: &Coeffs, d: &Derived) -> Result<f64> {
    let lyy = crate::calculus::log_second(&c.beta, Axis::Y)?;
    let ly = log_deriv(&c.beta, Axis::Y)?;
    let half_sq = ly.map(|v| 0.5 * v * v);
    let norm = c
        .w
        .sup_norm()
        .max(lyy.sup_norm())
        .max(half_sq.sup_norm());
    if d.a.valid_count() == 0 {
        return Err(SurfError::FullyMasked);
    }
    let sup = d.a.sup_norm();
    Ok(if sup == 0.0 {
        0.0
    } else {
        sup / norm.max(sup)
    })
}

fn zero_residual_b(c: &Coeffs, d: &Derived) -> Result<f64> {
    let lxx = crate::calculus::log_second(&c.gamma, Axis::X)?;
    let lx = log_deriv(&c.gamma, Axis::X)?;
    let half_sq = lx.map(|v| 0.5 * v * v);
    let norm = c
        .v
        .sup_norm()
        .max(lxx.sup_norm())
        .max(half_sq.sup_norm());
    if d.b.valid_count() == 0 {
        return Err(SurfError::FullyMasked);
    }
    let sup = d.b.sup_norm();
    Ok(if sup == 0.0 {
        0.0
    } else {
        sup / norm.max(sup)
    })
}

/// Residual of k = 0 (x-family of asymptotic lines in a linear complex),
/// normalized by the terms βγ and the parts of (ln β)_xy.
fn linear_complex_residual(
    product: &ScalarField,
    log_terms: &(ScalarField, ScalarField),
    kfield: &ScalarField,
) -> Result<f64> {
    let norm = product
        .sup_norm()
        .max(log_terms.0.sup_norm())
        .max(log_terms.1.sup_norm());
    if kfield.valid_count() == 0 {
        return Err(SurfError::FullyMasked);
    }
    let sup = kfield.sup_norm();
    Ok(if sup == 0.0 {
        0.0
    } else {
        sup / norm.max(sup)
    })
}

pub fn classify(c: &Coeffs, tol: f64) -> Result<ClassReport> {
    if tol <= 0.0 {
        return Err(SurfError::InvalidParam("tolerance must be positive".into()));
    }
    let d = derived_quantities(c)?;
    let verdict = |residual: f64| ClassVerdict {
        residual,
        member: residual <= tol,
    };

    let lb = log_mixed_terms(&c.beta)?;
    let lg = log_mixed_terms(&c.gamma)?;

    // (ln(β/γ))_xy = 0
    let iso = normalized_residual(&[&lb.0, &lb.1, &neg(&lg.0), &neg(&lg.1)])?;
    // (ln β)_xy = 0 and (ln γ)_xy = 0
    let r0_x = normalized_residual(&[&lb.0, &lb.1])?;
    let r0_y = normalized_residual(&[&lg.0, &lg.1])?;
    // β_y = γ_x and β_x = γ_y
    let r = normalized_residual(&[&dy(&c.beta)?, &neg(&dx(&c.gamma)?)])?;
    let jonas = normalized_residual(&[&dx(&c.beta)?, &neg(&dy(&c.gamma)?)])?;

    let el = euler_lagrange_residual(c, &d)?;
    let ra = zero_residual_a(c, &d)?;
    let rb = zero_residual_b(c, &d)?;
    let bg = c.beta.zip(&c.gamma, |x, y| x * y)?;

    // ∂_y(kβ) = 0 and ∂_x(lγ) = 0 for the Demoulin reduction.
    let kb_y = {
        let t1 = c.beta.zip(&dy(&d.k)?, |b, ky| b * ky)?;
        let t2 = d.k.zip(&dy(&c.beta)?, |k, by| k * by)?;
        normalized_residual(&[&t1, &t2])?
    };
    let lg_x = {
        let t1 = c.gamma.zip(&dx(&d.l)?, |g, lx| g * lx)?;
        let t2 = d.l.zip(&dx(&c.gamma)?, |l, gx| l * gx)?;
        normalized_residual(&[&t1, &t2])?
    };

    Ok(ClassReport {
        isothermally_asymptotic: verdict(iso),
        r0_x: verdict(r0_x),
        r0_y: verdict(r0_y),
        r: verdict(r),
        jonas: verdict(jonas),
        projectively_minimal: verdict(el),
        godeaux_rozet: verdict(el.max(ra)),
        demoulin: verdict(ra.max(rb).max(kb_y).max(lg_x)),
        linear_complex_x: verdict(linear_complex_residual(&bg, &lb, &d.k)?),
        linear_complex_y: verdict(linear_complex_residual(&bg, &lg, &d.l)?),
        tolerance: tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{GridSpec, ScalarField};

    fn constants(g: GridSpec, b: f64, gm: f64, v: f64, w: f64) -> Coeffs {
        Coeffs::new(
            ScalarField::constant(g, b),
            ScalarField::constant(g, gm),
            ScalarField::constant(g, v),
            ScalarField::constant(g, w),
        )
        .unwrap()
    }

    #[test]
    fn generic_constants_memberships() {
        let g = GridSpec::square(9, 0.0, 0.1).unwrap();
        let rep = classify(&constants(g, 1.0, 2.0, 3.0, 4.0), 1e-8).unwrap();
        assert!(rep.isothermally_asymptotic.member);
        assert!(rep.r0_x.member && rep.r0_y.member);
        assert!(rep.r.member && rep.jonas.member);
        assert!(rep.projectively_minimal.member);
        // a = 4 and k = 2 are order-one relative to their terms.
        assert!(!rep.godeaux_rozet.member);
        assert!(!rep.demoulin.member);
        assert!(!rep.linear_complex_x.member);
        assert!(!rep.linear_complex_y.member);
    }

    #[test]
    fn demoulin_constants_memberships() {
        let g = GridSpec::square(9, 0.0, 0.1).unwrap();
        let rep = classify(&constants(g, -1.0, -1.0, 0.0, 0.0), 1e-8).unwrap();
        assert!(rep.demoulin.member);
        assert!(rep.godeaux_rozet.member, "a = 0 subsumes");
        assert!(rep.projectively_minimal.member);
        assert!(!rep.linear_complex_x.member, "k = 1");
    }

    #[test]
    fn godeaux_rozet_constants_memberships() {
        let g = GridSpec::square(9, 0.0, 0.1).unwrap();
        let rep = classify(&constants(g, 1.0, -1.0, 1.0, 0.0), 1e-8).unwrap();
        assert!(rep.godeaux_rozet.member);
        assert!(!rep.demoulin.member, "b = 1");
        assert!(rep.projectively_minimal.member);
    }

    #[test]
    fn pseudospherical_field_is_r_not_jonas() {
        // K = -1 data built from an asymmetric sine-Gordon kink
        // 4 atan(exp(a x - y/a)); a != 1 breaks the Jonas symmetry.
        let n = 49;
        let a = 1.3;
        let g = GridSpec::new(n, n, 0.6, 0.0, 0.6 / (n - 1) as f64, 0.6 / (n - 1) as f64)
            .unwrap();
        let z = move |x: f64, y: f64| a * x - y / a;
        let phi = move |x: f64, y: f64| 4.0 * (z(x, y).exp()).atan();
        let beta = ScalarField::sample(g, |x, y| {
            let px = 2.0 * a / z(x, y).cosh();
            -px / phi(x, y).sin()
        });
        let gamma = ScalarField::sample(g, |x, y| {
            let py = -2.0 / a / z(x, y).cosh();
            -py / phi(x, y).sin()
        });
        let c = Coeffs::new(
            beta,
            gamma,
            ScalarField::zeros(g),
            ScalarField::zeros(g),
        )
        .unwrap();
        let rep = classify(&c, 1e-5).unwrap();
        assert!(rep.r.member, "beta_y = gamma_x, residual {}", rep.r.residual);
        assert!(!rep.jonas.member, "jonas residual {}", rep.jonas.residual);
    }

    #[test]
    fn fully_masked_errors() {
        let g = GridSpec::square(9, 0.0, 0.1).unwrap();
        let mut beta = ScalarField::constant(g, 1.0);
        for j in 0..9 {
            for i in 0..9 {
                beta.set_mask(i, j, false);
            }
        }
        let c = Coeffs::new(
            beta,
            ScalarField::constant(g, 1.0),
            ScalarField::zeros(g),
            ScalarField::zeros(g),
        )
        .unwrap();
        assert!(classify(&c, 1e-8).is_err());
    }
}
