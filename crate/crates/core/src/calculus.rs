//! Grid calculus: partial derivatives and sign-safe logarithmic derivatives.

use crate::error::{Result, SurfError};
use crate::grid::ScalarField;
use crate::stencil::{line_stencils, stencil_dot};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

/// Partial derivative of order 1..=3 along one axis.
///
/// Interior nodes use centered 7-point stencils, nodes within 3 of a
/// boundary one-sided 8-point stencils; both are at least fourth-order on
/// smooth data. A node of the output is valid only when every node of its
/// stencil window is valid.
pub fn partial_derivative(f: &ScalarField, axis: Axis, order: u32) -> Result<ScalarField> {
    if !(1..=3).contains(&order) {
        return Err(SurfError::BadOrder(order));
    }
    let g = *f.grid();
    g.validate()?;
    let (n_line, n_other, h) = match axis {
        Axis::X => (g.nx, g.ny, g.hx),
        Axis::Y => (g.ny, g.nx, g.hy),
    };
    let stencils = line_stencils(n_line, h, order as usize);
    let mut out = ScalarField::zeros(g);
    let vals = f.values();
    let mask = f.mask();
    for q in 0..n_other {
        for p in 0..n_line {
            let st = &stencils[p];
            let node = |k: usize| match axis {
                Axis::X => g.idx(k, q),
                Axis::Y => g.idx(q, k),
            };
            let ok = (0..st.nums.len()).all(|k| mask[node(st.start + k)]);
            let (i, j) = match axis {
                Axis::X => (p, q),
                Axis::Y => (q, p),
            };
            if ok {
                out.set(i, j, stencil_dot(st, |k| vals[node(k)]));
            } else {
                out.set_mask(i, j, false);
            }
        }
    }
    Ok(out)
}

pub fn dx(f: &ScalarField) -> Result<ScalarField> {
    partial_derivative(f, Axis::X, 1)
}

pub fn dy(f: &ScalarField) -> Result<ScalarField> {
    partial_derivative(f, Axis::Y, 1)
}

/// Mixed derivative f_xy, composed x-then-y.
pub fn dxy(f: &ScalarField) -> Result<ScalarField> {
    dy(&dx(f)?)
}

/// Fourth derivative along one axis, composed as two second derivatives.
pub fn d4(f: &ScalarField, axis: Axis) -> Result<ScalarField> {
    let d2 = partial_derivative(f, axis, 2)?;
    partial_derivative(&d2, axis, 2)
}

/// f_a / f with nodes |f| < eps_div masked.
pub fn log_deriv(f: &ScalarField, axis: Axis) -> Result<ScalarField> {
    let eps = f.eps_div();
    let fa = partial_derivative(f, axis, 1)?;
    fa.zip(&f.mask_below(eps), |d, v| d / v)
}

/// (ln|f|)_aa = f_aa/f - (f_a/f)^2, valid for negative f.
pub fn log_second(f: &ScalarField, axis: Axis) -> Result<ScalarField> {
    let eps = f.eps_div();
    let fm = f.mask_below(eps);
    let fa = partial_derivative(f, axis, 1)?;
    let faa = partial_derivative(f, axis, 2)?;
    let t1 = faa.zip(&fm, |d, v| d / v)?;
    let t2 = fa.zip(&fm, |d, v| d / v)?;
    t1.zip(&t2, |a, b| a - b * b)
}

/// (ln|f|)_aaa = f_aaa/f - 3 f_aa f_a/f² + 2 f_a³/f³, valid for negative f.
pub fn log_third(f: &ScalarField, axis: Axis) -> Result<ScalarField> {
    let eps = f.eps_div();
    let fm = f.mask_below(eps);
    let d1 = partial_derivative(f, axis, 1)?.zip(&fm, |d, v| d / v)?;
    let d2 = partial_derivative(f, axis, 2)?.zip(&fm, |d, v| d / v)?;
    let d3 = partial_derivative(f, axis, 3)?.zip(&fm, |d, v| d / v)?;
    d3.zip(&d2.zip(&d1, |p, q| 3.0 * p * q)?, |t, u| t - u)?
        .zip(&d1.map(|v| 2.0 * v * v * v), |t, u| t + u)
}

/// (ln|f|)_xy = f_xy/f - f_x f_y / f^2, valid for negative f.
pub fn log_mixed_derivative(f: &ScalarField) -> Result<ScalarField> {
    let eps = f.eps_div();
    let fm = f.mask_below(eps);
    let fx = dx(f)?;
    let fy = dy(f)?;
    let fxy = dxy(f)?;
    let t1 = fxy.zip(&fm, |d, v| d / v)?;
    let t2 = fx.zip(&fm, |d, v| d / v)?;
    let t3 = fy.zip(&fm, |d, v| d / v)?;
    let prod = t2.zip(&t3, |a, b| a * b)?;
    t1.zip(&prod, |a, b| a - b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;

    #[test]
    fn derivative_of_constant_is_zero() {
        let g = GridSpec::square(9, 0.0, 0.1).unwrap();
        let f = ScalarField::constant(g, 5.0);
        let d = partial_derivative(&f, Axis::X, 1).unwrap();
        assert!(d.sup_norm() < 1e-13);
    }

    #[test]
    fn third_derivative_of_cubic_exact() {
        let g = GridSpec::square(9, 0.0, 0.125).unwrap();
        let f = ScalarField::sample(g, |x, _| x * x * x);
        let d = partial_derivative(&f, Axis::X, 3).unwrap();
        let err = d.zip(&ScalarField::constant(g, 6.0), |a, b| a - b).unwrap();
        assert!(err.sup_norm() <= 1e-9, "sup {}", err.sup_norm());
    }

    #[test]
    fn second_derivative_fourth_order_on_sin() {
        // Richardson refinement oracle: halving h must shrink the error by
        // at least ~2^4 (the one-sided windows converge faster still).
        let err = |n: usize| {
            let h = 1.0 / (n - 1) as f64;
            let g = GridSpec::square(n, 0.0, h).unwrap();
            let f = ScalarField::sample(g, |x, _| x.sin());
            let d = partial_derivative(&f, Axis::X, 2).unwrap();
            let exact = ScalarField::sample(g, |x, _| -x.sin());
            d.zip(&exact, |a, b| a - b).unwrap().sup_norm()
        };
        let (e1, e2) = (err(33), err(65));
        assert!(e1 / e2 > 11.0, "ratio {}", e1 / e2);
        assert!(e1 < 1e-7);
    }

    #[test]
    fn mask_propagates_through_stencil() {
        let g = GridSpec::square(9, 0.0, 0.1).unwrap();
        let mut f = ScalarField::sample(g, |x, _| x);
        f.set_mask(4, 4, false);
        let d = partial_derivative(&f, Axis::X, 1).unwrap();
        // The whole row through the masked node loses its window.
        for i in 1..8 {
            assert!(!d.valid(i, 4), "node {i} should be masked");
        }
        assert!(d.valid(4, 3));
    }

    #[test]
    fn log_mixed_derivative_handles_negative_fields() {
        let g = GridSpec::square(9, 0.0, 0.1).unwrap();
        let f = ScalarField::constant(g, -1.0);
        let d = log_mixed_derivative(&f).unwrap();
        assert!(d.sup_norm() < 1e-13);
    }

    #[test]
    fn log_mixed_derivative_closed_form() {
        // f = 3/(2(x+y)) on x+y>0 has (ln f)_xy = 1/(x+y)^2.
        let n = 65;
        let h = 1.0 / (n - 1) as f64;
        let g = GridSpec::square(n, 1.0, h).unwrap();
        let f = ScalarField::sample(g, |x, y| 1.5 / (x + y));
        let d = log_mixed_derivative(&f).unwrap();
        let exact = ScalarField::sample(g, |x, y| 1.0 / ((x + y) * (x + y)));
        let err = d.zip(&exact, |a, b| a - b).unwrap();
        assert!(err.sup_norm() < 1e-9, "sup {}", err.sup_norm());
    }

    #[test]
    fn log_mixed_derivative_masks_zero_crossing() {
        let g = GridSpec::square(9, -0.4, 0.1).unwrap();
        let f = ScalarField::sample(g, |x, _| x);
        let d = log_mixed_derivative(&f).unwrap();
        assert!(d.valid_count() < g.len());
    }
}
