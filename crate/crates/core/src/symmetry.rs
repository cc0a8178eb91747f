//! Exact symmetries of the coefficient system: duality, the spectral
//! scaling β → λβ, γ → γ/λ, and reparametrizations x* = f(x), y* = g(y)
//! with their Schwarzian shift of V and W.

use crate::coeffs::Coeffs;
use crate::error::{Result, SurfError};
use crate::grid::{GridSpec, ScalarField};

/// Passage to the dual surface: (β, γ, V, W) → (-β, -γ, V, W).
pub fn dual(c: &Coeffs) -> Coeffs {
    Coeffs {
        beta: c.beta.map(|v| -v),
        gamma: c.gamma.map(|v| -v),
        v: c.v.clone(),
        w: c.w.clone(),
    }
}

/// (β, γ, V, W) → (λβ, γ/λ, V, W), λ ≠ 0.
pub fn spectral_scale(c: &Coeffs, lambda: f64) -> Result<Coeffs> {
    if lambda == 0.0 || !lambda.is_finite() {
        return Err(SurfError::InvalidParam(
            "spectral scale requires a nonzero finite lambda".into(),
        ));
    }
    Ok(Coeffs {
        beta: c.beta.map(|v| lambda * v),
        gamma: c.gamma.map(|v| v / lambda),
        v: c.v.clone(),
        w: c.w.clone(),
    })
}

type Fn1 = Box<dyn Fn(f64) -> f64>;

/// A reparametrization pair x* = f(x), y* = g(y) with derivatives up to
/// third order, both orientation-preserving (f' > 0, g' > 0).
pub struct GaugePair {
    pub f: Fn1,
    pub df: Fn1,
    pub d2f: Fn1,
    pub d3f: Fn1,
    pub g: Fn1,
    pub dg: Fn1,
    pub d2g: Fn1,
    pub d3g: Fn1,
}

impl GaugePair {
    pub fn identity() -> Self {
        GaugePair {
            f: Box::new(|x| x),
            df: Box::new(|_| 1.0),
            d2f: Box::new(|_| 0.0),
            d3f: Box::new(|_| 0.0),
            g: Box::new(|y| y),
            dg: Box::new(|_| 1.0),
            d2g: Box::new(|_| 0.0),
            d3g: Box::new(|_| 0.0),
        }
    }

    /// Schwarzian derivative S(f) = f'''/f' - 3/2 (f''/f')² at x.
    pub fn schwarzian_f(&self, x: f64) -> f64 {
        let d1 = (self.df)(x);
        let r = (self.d2f)(x) / d1;
        (self.d3f)(x) / d1 - 1.5 * r * r
    }

    pub fn schwarzian_g(&self, y: f64) -> f64 {
        let d1 = (self.dg)(y);
        let r = (self.d2g)(y) / d1;
        (self.d3g)(y) / d1 - 1.5 * r * r
    }
}

/// Transformed coefficient values at a source node (x, y):
/// β* = β g'/(f')², γ* = γ f'/(g')², V* = (V + S(f))/(f')²,
/// W* = (W + S(g))/(g')².
fn transform_at(c: &Coeffs, gauge: &GaugePair, i: usize, j: usize) -> (f64, f64, f64, f64) {
    let g = c.grid();
    let (x, y) = (g.x(i), g.y(j));
    let fp = (gauge.df)(x);
    let gp = (gauge.dg)(y);
    let beta = c.beta.get(i, j) * gp / (fp * fp);
    let gamma = c.gamma.get(i, j) * fp / (gp * gp);
    let v = (c.v.get(i, j) + gauge.schwarzian_f(x)) / (fp * fp);
    let w = (c.w.get(i, j) + gauge.schwarzian_g(y)) / (gp * gp);
    (beta, gamma, v, w)
}

/// Sup of |β* γ* f' g' - β γ| over the source nodes, evaluated before any
/// resampling. The identity is exact up to round-off.
pub fn gauge_identity_residual(c: &Coeffs, gauge: &GaugePair) -> Result<f64> {
    check_monotone(c.grid(), gauge)?;
    let g = c.grid();
    let mut worst = 0.0f64;
    for j in 0..g.ny {
        for i in 0..g.nx {
            if !(c.beta.valid(i, j) && c.gamma.valid(i, j)) {
                continue;
            }
            let (bs, gs, _, _) = transform_at(c, gauge, i, j);
            let fp = (gauge.df)(g.x(i));
            let gp = (gauge.dg)(g.y(j));
            let lhs = bs * gs * fp * gp;
            let rhs = c.beta.get(i, j) * c.gamma.get(i, j);
            worst = worst.max((lhs - rhs).abs());
        }
    }
    Ok(worst)
}

fn check_monotone(g: &GridSpec, gauge: &GaugePair) -> Result<()> {
    for i in 0..g.nx {
        if (gauge.df)(g.x(i)) <= 0.0 {
            return Err(SurfError::NonMonotoneGauge(format!(
                "f'({}) <= 0",
                g.x(i)
            )));
        }
    }
    for j in 0..g.ny {
        if (gauge.dg)(g.y(j)) <= 0.0 {
            return Err(SurfError::NonMonotoneGauge(format!(
                "g'({}) <= 0",
                g.y(j)
            )));
        }
    }
    Ok(())
}

/// Invert a strictly increasing map on [lo, hi] by Newton with bisection
/// safeguarding.
fn invert(f: &Fn1, df: &Fn1, target: f64, lo: f64, hi: f64) -> f64 {
    let (mut a, mut b) = (lo, hi);
    let span = (hi - lo).abs().max(1.0);
    let mut x = if (f)(hi) != (f)(lo) {
        lo + (target - (f)(lo)) / ((f)(hi) - (f)(lo)) * (hi - lo)
    } else {
        0.5 * (lo + hi)
    };
    for _ in 0..100 {
        let fx = (f)(x) - target;
        if fx.abs() <= 1e-15 * span.max(target.abs()) {
            return x;
        }
        if fx > 0.0 {
            b = x;
        } else {
            a = x;
        }
        let d = (df)(x);
        let mut next = x - fx / d;
        if !(next > a && next < b) {
            next = 0.5 * (a + b);
        }
        if (next - x).abs() <= 1e-16 * span {
            return next;
        }
        x = next;
    }
    x
}

/// 6-point Lagrange interpolation along one axis at fractional index u.
/// When u sits on a node the node value is returned untouched, so identity
/// gauges reproduce the field bit-exactly.
fn interp_weights(n: usize, u: f64) -> (usize, Vec<f64>) {
    let i0 = u.round() as isize;
    let snap = u - i0 as f64;
    if snap.abs() < 1e-9 && i0 >= 0 && (i0 as usize) < n {
        return (i0 as usize, vec![1.0]);
    }
    let w = 6.min(n);
    let mut start = (u.floor() as isize) - (w as isize / 2 - 1);
    start = start.clamp(0, (n - w) as isize);
    let s = start as usize;
    let mut weights = vec![1.0; w];
    for k in 0..w {
        let xk = (s + k) as f64;
        for m in 0..w {
            if m != k {
                let xm = (s + m) as f64;
                weights[k] *= (u - xm) / (xk - xm);
            }
        }
    }
    (s, weights)
}

/// Reparametrize onto a regular grid in (x*, y*) = (f(x), g(y)).
///
/// The four coefficient fields are transformed pointwise at the exact
/// preimages of the new nodes and interpolated with 6-point Lagrange
/// stencils per axis. A node of the result is masked when its
/// interpolation window touches a masked source node.
pub fn gauge_transform(c: &Coeffs, gauge: &GaugePair) -> Result<Coeffs> {
    let g = *c.grid();
    check_monotone(&g, gauge)?;
    let x_lo = g.x(0);
    let x_hi = g.x(g.nx - 1);
    let y_lo = g.y(0);
    let y_hi = g.y(g.ny - 1);
    let xs0 = (gauge.f)(x_lo);
    let xs1 = (gauge.f)(x_hi);
    let ys0 = (gauge.g)(y_lo);
    let ys1 = (gauge.g)(y_hi);
    let new_grid = GridSpec::new(
        g.nx,
        g.ny,
        xs0,
        ys0,
        (xs1 - xs0) / (g.nx - 1) as f64,
        (ys1 - ys0) / (g.ny - 1) as f64,
    )?;

    // Fractional source indices of the new nodes, per axis.
    let xi: Vec<f64> = (0..g.nx)
        .map(|i| {
            let target = new_grid.x(i);
            let x = invert(&gauge.f, &gauge.df, target, x_lo, x_hi);
            (x - g.x0) / g.hx
        })
        .collect();
    let yj: Vec<f64> = (0..g.ny)
        .map(|j| {
            let target = new_grid.y(j);
            let y = invert(&gauge.g, &gauge.dg, target, y_lo, y_hi);
            (y - g.y0) / g.hy
        })
        .collect();

    let mask = c.joint_mask();
    // Transformed source values on the original nodes.
    let mut src = vec![[0.0; 4]; g.len()];
    for j in 0..g.ny {
        for i in 0..g.nx {
            let p = g.idx(i, j);
            if mask[p] {
                let (b, gm, v, w) = transform_at(c, gauge, i, j);
                src[p] = [b, gm, v, w];
            }
        }
    }

    let mut out = [
        ScalarField::zeros(new_grid),
        ScalarField::zeros(new_grid),
        ScalarField::zeros(new_grid),
        ScalarField::zeros(new_grid),
    ];
    for j in 0..g.ny {
        let (sy, wy) = interp_weights(g.ny, yj[j]);
        for i in 0..g.nx {
            let (sx, wx) = interp_weights(g.nx, xi[i]);
            let mut acc = [0.0; 4];
            let mut ok = true;
            'win: for (kj, cy) in wy.iter().enumerate() {
                for (ki, cx) in wx.iter().enumerate() {
                    let p = g.idx(sx + ki, sy + kj);
                    if !mask[p] {
                        ok = false;
                        break 'win;
                    }
                    let coeff = cx * cy;
                    for q in 0..4 {
                        acc[q] += coeff * src[p][q];
                    }
                }
            }
            for q in 0..4 {
                if ok {
                    out[q].set(i, j, acc[q]);
                } else {
                    out[q].set_mask(i, j, false);
                }
            }
        }
    }
    let [beta, gamma, v, w] = out;
    Coeffs::new(beta, gamma, v, w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::classify;
    use crate::coeffs::gc1_residual;

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
    fn dual_is_bit_exact_involution() {
        let g = GridSpec::square(9, 0.0, 0.1).unwrap();
        let c = Coeffs::new(
            ScalarField::sample(g, |x, y| (x * y).sin() + 0.5),
            ScalarField::sample(g, |x, y| x - y + 2.0),
            ScalarField::sample(g, |x, y| x + y),
            ScalarField::sample(g, |x, y| x * y),
        )
        .unwrap();
        let dd = dual(&dual(&c));
        assert_eq!(dd.beta.values(), c.beta.values());
        assert_eq!(dd.gamma.values(), c.gamma.values());
        let d = dual(&c);
        assert_eq!(d.beta.get(3, 3), -c.beta.get(3, 3));
        assert_eq!(d.v.values(), c.v.values());
    }

    #[test]
    fn spectral_scale_involution_and_identity() {
        let g = GridSpec::square(9, 0.0, 0.1).unwrap();
        let c = constants(g, 1.0, 2.0, 0.25, 1.0);
        let id = spectral_scale(&c, 1.0).unwrap();
        assert_eq!(id.beta.values(), c.beta.values());
        let m = spectral_scale(&spectral_scale(&c, -1.0).unwrap(), -1.0).unwrap();
        assert_eq!(m.beta.values(), c.beta.values());
        assert_eq!(m.gamma.values(), c.gamma.values());
        assert!(spectral_scale(&c, 0.0).is_err());
    }

    #[test]
    fn spectral_scale_preserves_gc1_on_projmin_constants() {
        let g = GridSpec::square(9, 0.0, 0.1).unwrap();
        let c = constants(g, 1.0, 2.0, 0.25, 1.0);
        let s = spectral_scale(&c, 2.0).unwrap();
        assert!(gc1_residual(&s).unwrap().max_sup() < 1e-12);
    }

    #[test]
    fn identity_gauge_is_bit_exact() {
        let g = GridSpec::square(9, 0.25, 0.125).unwrap();
        let c = Coeffs::new(
            ScalarField::sample(g, |x, y| (x + y).sin() + 1.3),
            ScalarField::sample(g, |x, y| x * y + 2.0),
            ScalarField::sample(g, |x, y| x - y),
            ScalarField::sample(g, |x, y| x + 2.0 * y),
        )
        .unwrap();
        let t = gauge_transform(&c, &GaugePair::identity()).unwrap();
        assert_eq!(t.beta.values(), c.beta.values());
        assert_eq!(t.gamma.values(), c.gamma.values());
        assert_eq!(t.v.values(), c.v.values());
        assert_eq!(t.w.values(), c.w.values());
    }

    #[test]
    fn affine_gauge_on_constants_matches_closed_form() {
        // f = 2x, g = y on constants (1,2,3,4): S(2x) = 0, so
        // beta* = 1/4, gamma* = 4, V* = 3/4, W* = 4.
        let g = GridSpec::square(9, 0.0, 0.125).unwrap();
        let c = constants(g, 1.0, 2.0, 3.0, 4.0);
        let gauge = GaugePair {
            f: Box::new(|x| 2.0 * x),
            df: Box::new(|_| 2.0),
            d2f: Box::new(|_| 0.0),
            d3f: Box::new(|_| 0.0),
            ..GaugePair::identity()
        };
        let t = gauge_transform(&c, &gauge).unwrap();
        assert!((t.beta.get(4, 4) - 0.25).abs() < 1e-12);
        assert!((t.gamma.get(4, 4) - 4.0).abs() < 1e-12);
        assert!((t.v.get(4, 4) - 0.75).abs() < 1e-12);
        assert!((t.w.get(4, 4) - 4.0).abs() < 1e-12);
        assert!((t.grid().hx - 0.25).abs() < 1e-15);
    }

    #[test]
    fn non_monotone_gauge_rejected() {
        let g = GridSpec::square(9, 0.0, 0.5).unwrap();
        let c = constants(g, 1.0, 2.0, 3.0, 4.0);
        let gauge = GaugePair {
            f: Box::new(|x| -x),
            df: Box::new(|_| -1.0),
            ..GaugePair::identity()
        };
        assert!(gauge_transform(&c, &gauge).is_err());
    }

    #[test]
    fn gauge_preserves_classify_verdicts_on_rotation_field() {
        // Verdicts of the gauge-invariant classes must survive a nonlinear
        // reparametrization; this field is false in every parametrization-
        // bound class except those.
        let n = 65;
        let h = 1.0 / (n - 1) as f64;
        let g = GridSpec::square(n, 1.0, h).unwrap();
        let beta = ScalarField::sample(g, |x, y| 1.5 / (x + y));
        let c = Coeffs::new(
            beta.clone(),
            beta.map(|b| 1.02 * b),
            ScalarField::sample(g, |x, y| 1.0 / ((x + y) * (x + y))),
            ScalarField::sample(g, |x, y| 2.0 / ((x + y) * (x + y))),
        )
        .unwrap();
        let gauge = GaugePair {
            f: Box::new(|x| x + 0.1 * x.sin()),
            df: Box::new(|x| 1.0 + 0.1 * x.cos()),
            d2f: Box::new(|x| -0.1 * x.sin()),
            d3f: Box::new(|x| -0.1 * x.cos()),
            ..GaugePair::identity()
        };
        let before = classify(&c, 1e-5).unwrap();
        let after = classify(&gauge_transform(&c, &gauge).unwrap(), 1e-5).unwrap();
        for ((name, vb), (_, va)) in before.entries().iter().zip(after.entries().iter()) {
            assert_eq!(
                vb.member, va.member,
                "{name}: before {:.3e} after {:.3e}",
                vb.residual, va.residual
            );
        }
        assert!(gauge_identity_residual(&c, &gauge).unwrap() < 1e-12);
    }
}
