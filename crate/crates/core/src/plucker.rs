//! Line geometry: the wedge of two points of P³ as a point of P⁵, the
//! quadric relation, the six canonical rows attached to the Wilczynski
//! frame and their scalar-product table.

use crate::error::{Result, SurfError};
use crate::frames::{Frame4, FrameField, VectorField};
use crate::grid::ScalarField;

/// Components (p01, p02, p03, p23, p31, p12) of a bivector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bivector(pub [f64; 6]);

/// Wedge of two homogeneous points, with p31 = a³b¹ - a¹b³.
pub fn wedge(a: &[f64; 4], b: &[f64; 4]) -> Bivector {
    let p = |i: usize, j: usize| a[i] * b[j] - a[j] * b[i];
    Bivector([p(0, 1), p(0, 2), p(0, 3), p(2, 3), p(3, 1), p(1, 2)])
}

/// p01 p23 + p02 p31 + p03 p12; zero exactly on lines.
pub fn plucker_quadric_value(b: &Bivector) -> f64 {
    let p = b.0;
    p[0] * p[3] + p[1] * p[4] + p[2] * p[5]
}

/// Coefficient of ω∧σ in the volume form (the polarization of twice the
/// quadric value).
fn wedge_pairing(a: &Bivector, b: &Bivector) -> f64 {
    let p = a.0;
    let q = b.0;
    p[0] * q[3] + p[3] * q[0] + p[1] * q[4] + p[4] * q[1] + p[2] * q[5] + p[5] * q[2]
}

/// The six canonical rows U, A, P, V, B, Q built from a frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame6(pub [Bivector; 6]);

impl Frame6 {
    pub fn row(&self, r: usize) -> &Bivector {
        &self.0[r]
    }
}

fn add(a: Bivector, b: Bivector) -> Bivector {
    let mut out = [0.0; 6];
    for q in 0..6 {
        out[q] = a.0[q] + b.0[q];
    }
    Bivector(out)
}

fn scale(a: Bivector, s: f64) -> Bivector {
    let mut out = a.0;
    for v in &mut out {
        *v *= s;
    }
    Bivector(out)
}

/// U = r∧r₁, V = r∧r₂, A = r₂∧r₁ + r∧η, B = r₁∧r₂ + r∧η,
/// P = 2 r₂∧η, Q = 2 r₁∧η.
pub fn plucker_embed(f: &Frame4) -> Frame6 {
    let [r, r1, r2, eta] = f.0;
    let u = wedge(&r, &r1);
    let v = wedge(&r, &r2);
    let reta = wedge(&r, &eta);
    let a = add(wedge(&r2, &r1), reta);
    let b = add(wedge(&r1, &r2), reta);
    let p = scale(wedge(&r2, &eta), 2.0);
    let q = scale(wedge(&r1, &eta), 2.0);
    Frame6([u, a, p, v, b, q])
}

/// Scalar products G(ω, σ) = -½ (coefficient of ω∧σ in the volume form).
/// For a frame normalized to det = 1 this reproduces
/// (U,P) = -1, (A,A) = 1, (V,Q) = 1, (B,B) = -1, all others 0.
pub fn gram_matrix(f: &Frame6) -> [[f64; 6]; 6] {
    let mut g = [[0.0; 6]; 6];
    for r in 0..6 {
        for c in 0..6 {
            g[r][c] = -0.5 * wedge_pairing(f.row(r), f.row(c));
        }
    }
    g
}

/// The Gram matrix of the embedded standard-basis frame (the table).
pub fn gram_table() -> [[f64; 6]; 6] {
    let mut t = [[0.0; 6]; 6];
    t[0][2] = -1.0;
    t[2][0] = -1.0;
    t[1][1] = 1.0;
    t[3][5] = 1.0;
    t[5][3] = 1.0;
    t[4][4] = -1.0;
    t
}

/// Embed a 4x4 frame field nodewise into its six Plücker rows, returned
/// as six 6-component vector fields in row order (U, A, P, V, B, Q).
pub fn embed_frame_field(ff: &FrameField) -> Result<Vec<VectorField>> {
    if ff.dim != 4 || ff.m != 4 {
        return Err(SurfError::InvalidParam(
            "the embedding needs a 4x4 frame field".into(),
        ));
    }
    let g = ff.grid;
    let mut out = vec![VectorField::zeros(g, 6); 6];
    for j in 0..g.ny {
        for i in 0..g.nx {
            let f4 = Frame4::from_state(&ff.state(i, j))?;
            let f6 = plucker_embed(&f4);
            for r in 0..6 {
                out[r].set(i, j, &f6.row(r).0);
            }
        }
    }
    Ok(out)
}

/// Per-node quadric values of the six rows of an embedded frame field.
pub fn quadric_value_fields(rows: &[VectorField]) -> Result<Vec<ScalarField>> {
    rows.iter()
        .map(|vf| {
            if vf.dim != 6 {
                return Err(SurfError::InvalidParam("expected 6-component rows".into()));
            }
            let mut f = ScalarField::zeros(vf.grid);
            for j in 0..vf.grid.ny {
                for i in 0..vf.grid.nx {
                    let mut b = [0.0; 6];
                    b.copy_from_slice(vf.at(i, j));
                    f.set(i, j, plucker_quadric_value(&Bivector(b)));
                }
            }
            Ok(f)
        })
        .collect()
}

/// Worst deviation of the nodewise Gram matrix from `reference`.
pub fn gram_drift(rows: &[VectorField], reference: &[[f64; 6]; 6]) -> Result<f64> {
    if rows.len() != 6 {
        return Err(SurfError::InvalidParam("expected six rows".into()));
    }
    let g = rows[0].grid;
    let mut worst = 0.0f64;
    for j in 0..g.ny {
        for i in 0..g.nx {
            let mut f6 = [Bivector([0.0; 6]); 6];
            for r in 0..6 {
                let mut b = [0.0; 6];
                b.copy_from_slice(rows[r].at(i, j));
                f6[r] = Bivector(b);
            }
            let gram = gram_matrix(&Frame6(f6));
            for r in 0..6 {
                for c in 0..6 {
                    worst = worst.max((gram[r][c] - reference[r][c]).abs());
                }
            }
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn standard_basis_rows() {
        let f6 = plucker_embed(&Frame4::standard_basis());
        // U = e0∧e1 has p01 = 1, all else 0.
        assert_eq!(f6.row(0).0, [1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        // P = 2 e2∧e3 has p23 = 2.
        assert_eq!(f6.row(2).0, [0.0, 0.0, 0.0, 2.0, 0.0, 0.0]);
        // V = e0∧e2, Q = 2 e1∧e3 (p31 = -2 under the sign convention).
        assert_eq!(f6.row(3).0, [0.0, 1.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(f6.row(5).0, [0.0, 0.0, 0.0, 0.0, -2.0, 0.0]);
    }

    #[test]
    fn quadric_values_on_basis() {
        let f6 = plucker_embed(&Frame4::standard_basis());
        // The four decomposable rows are exactly on the quadric.
        for r in [0usize, 2, 3, 5] {
            assert_eq!(plucker_quadric_value(f6.row(r)), 0.0);
        }
        // A and B are sums of two wedges: their quadric value equals
        // minus/plus the frame determinant.
        assert_eq!(plucker_quadric_value(f6.row(1)), -1.0);
        assert_eq!(plucker_quadric_value(f6.row(4)), 1.0);
        let direct = Bivector([1.0, 0.0, 0.0, 1.0, 0.0, 0.0]);
        assert_eq!(plucker_quadric_value(&direct), 1.0);
    }

    #[test]
    fn decomposability_by_brute_force_wedge() {
        // Any a∧b lies on the quadric.
        let a = [0.3, -1.2, 2.0, 0.7];
        let b = [1.1, 0.4, -0.6, 2.2];
        let w = wedge(&a, &b);
        assert!(plucker_quadric_value(&w).abs() < 1e-15);
    }

    #[test]
    fn gram_matches_table_on_normalized_basis() {
        let f6 = plucker_embed(&Frame4::standard_basis());
        let g = gram_matrix(&f6);
        let t = gram_table();
        for r in 0..6 {
            for c in 0..6 {
                assert_relative_eq!(g[r][c], t[r][c], epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn gram_scales_quartically() {
        // Doubling the frame multiplies det by 16 and the Gram by 16.
        let mut f = Frame4::standard_basis();
        for r in 0..4 {
            for c in 0..4 {
                f.0[r][c] *= 2.0;
            }
        }
        let g = gram_matrix(&plucker_embed(&f));
        let t = gram_table();
        for r in 0..6 {
            for c in 0..6 {
                assert_relative_eq!(g[r][c], 16.0 * t[r][c], epsilon = 1e-12);
            }
        }
    }
}
