//! Affine meshes from homogeneous coordinates, and Wavefront OBJ export.

use crate::error::{Result, SurfError};
use crate::frames::VectorField;
use crate::grid::{GridSpec, EPS_DIV_FACTOR};
use std::fmt::Write as _;

/// Grid of affine points R = (r¹/r⁰, r²/r⁰, r³/r⁰) with a validity mask.
#[derive(Debug, Clone)]
pub struct SurfaceMesh {
    pub grid: GridSpec,
    pub points: Vec<[f64; 3]>,
    pub mask: Vec<bool>,
}

impl SurfaceMesh {
    pub fn point(&self, i: usize, j: usize) -> Option<[f64; 3]> {
        let p = self.grid.idx(i, j);
        self.mask[p].then(|| self.points[p])
    }
}

/// Divide out the homogeneous coordinate; nodes with |r⁰| below the
/// division threshold are masked.
pub fn to_affine_mesh(r: &VectorField) -> Result<SurfaceMesh> {
    if r.dim != 4 {
        return Err(SurfError::InvalidParam("expected a 4-component field".into()));
    }
    let g = r.grid;
    let mut sup0 = 0.0f64;
    for j in 0..g.ny {
        for i in 0..g.nx {
            if r.valid(i, j) {
                sup0 = sup0.max(r.at(i, j)[0].abs());
            }
        }
    }
    let eps = EPS_DIV_FACTOR * sup0;
    let mut points = vec![[0.0; 3]; g.len()];
    let mut mask = vec![false; g.len()];
    let mut any = false;
    for j in 0..g.ny {
        for i in 0..g.nx {
            if !r.valid(i, j) {
                continue;
            }
            let v = r.at(i, j);
            if v[0].abs() < eps {
                continue;
            }
            points[g.idx(i, j)] = [v[1] / v[0], v[2] / v[0], v[3] / v[0]];
            mask[g.idx(i, j)] = true;
            any = true;
        }
    }
    if !any {
        return Err(SurfError::FullyMasked);
    }
    Ok(SurfaceMesh {
        grid: g,
        points,
        mask,
    })
}

/// Render the mesh as Wavefront OBJ: vertices in row-major grid order
/// (masked nodes omitted), each quad split into two triangles, faces
/// touching a masked node dropped.
pub fn obj_string(mesh: &SurfaceMesh) -> String {
    let g = mesh.grid;
    let mut out = String::new();
    // 1-based OBJ index per valid node.
    let mut index = vec![0usize; g.len()];
    let mut next = 1usize;
    for j in 0..g.ny {
        for i in 0..g.nx {
            let p = g.idx(i, j);
            if mesh.mask[p] {
                index[p] = next;
                next += 1;
                let pt = mesh.points[p];
                let _ = writeln!(
                    out,
                    "v {} {} {}",
                    crate::io::format_f64(pt[0]),
                    crate::io::format_f64(pt[1]),
                    crate::io::format_f64(pt[2])
                );
            }
        }
    }
    for j in 0..g.ny - 1 {
        for i in 0..g.nx - 1 {
            let q = [
                g.idx(i, j),
                g.idx(i + 1, j),
                g.idx(i + 1, j + 1),
                g.idx(i, j + 1),
            ];
            if q.iter().any(|&p| !mesh.mask[p]) {
                continue;
            }
            let _ = writeln!(out, "f {} {} {}", index[q[0]], index[q[1]], index[q[2]]);
            let _ = writeln!(out, "f {} {} {}", index[q[0]], index[q[2]], index[q[3]]);
        }
    }
    out
}

pub fn write_obj(path: &std::path::Path, mesh: &SurfaceMesh) -> Result<()> {
    std::fs::write(path, obj_string(mesh))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frames::{integrate_separable_quadric, QuadricInit};

    fn bilinear_field(n: usize) -> VectorField {
        let g = GridSpec::square(n, 0.0, 1.0 / (n - 1) as f64).unwrap();
        integrate_separable_quadric(&|_| 0.0, &|_| 0.0, QuadricInit::bilinear(), g).unwrap()
    }

    #[test]
    fn hyperbolic_paraboloid_mesh() {
        let r = bilinear_field(9);
        let mesh = to_affine_mesh(&r).unwrap();
        let p = mesh.point(4, 2).unwrap();
        assert_eq!(p, [0.5, 0.25, 0.125]);
    }

    #[test]
    fn projective_invariance_of_mesh() {
        let n = 9;
        let r = bilinear_field(n);
        let mut scaled = r.clone();
        let g = r.grid;
        for j in 0..n {
            for i in 0..n {
                let s = 1.0 + 0.5 * (g.x(i) + 2.0 * g.y(j));
                let v = r.at(i, j);
                scaled.set(i, j, &[v[0] * s, v[1] * s, v[2] * s, v[3] * s]);
            }
        }
        let m1 = to_affine_mesh(&r).unwrap();
        let m2 = to_affine_mesh(&scaled).unwrap();
        for p in 0..g.len() {
            for c in 0..3 {
                assert!((m1.points[p][c] - m2.points[p][c]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_crossing_masks_band_and_drops_faces() {
        let n = 9;
        let g = GridSpec::square(n, -0.5, 1.0 / (n - 1) as f64).unwrap();
        let mut r = VectorField::zeros(g, 4);
        for j in 0..n {
            for i in 0..n {
                // r0 crosses zero along x = 0.
                r.set(i, j, &[g.x(i), 1.0, 1.0, 1.0]);
            }
        }
        let mesh = to_affine_mesh(&r).unwrap();
        let masked = mesh.mask.iter().filter(|&&m| !m).count();
        assert!(masked > 0, "zero band must be masked");
        let obj = obj_string(&mesh);
        let vcount = obj.lines().filter(|l| l.starts_with("v ")).count();
        assert_eq!(vcount, mesh.mask.iter().filter(|&&m| m).count());
        // No face may reference a vertex beyond the emitted count.
        for line in obj.lines().filter(|l| l.starts_with("f ")) {
            for tok in line.split_whitespace().skip(1) {
                let idx: usize = tok.parse().unwrap();
                assert!(idx >= 1 && idx <= vcount);
            }
        }
    }

    #[test]
    fn obj_output_is_deterministic() {
        let r = bilinear_field(9);
        let m = to_affine_mesh(&r).unwrap();
        assert_eq!(obj_string(&m), obj_string(&m));
        assert!(obj_string(&m).starts_with("v "));
    }
}
