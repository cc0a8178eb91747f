//! File formats: the shared JSON field file, boundary-data files, report
//! JSON and a deterministic writer.
//!
//! Field file layout (row-major, y varying slowest):
//!
//! ```json
//! {"grid": {"nx":…,"ny":…,"x0":…,"y0":…,"hx":…,"hy":…},
//!  "beta": […], "gamma": […], "V": […], "W": […], "mask": […]}
//! ```
//!
//! The writer prints every number with 17 significant digits so files
//! round-trip losslessly and identical inputs produce byte-identical
//! output.

use crate::coeffs::Coeffs;
use crate::error::{Result, SurfError};
use crate::grid::{GridSpec, ScalarField};
use crate::report::ResidualReport;
use serde::Deserialize;
use std::fmt::Write as _;
use std::path::Path;

/// JSON value with deterministic serialization order.
#[derive(Debug, Clone)]
pub enum Json {
    Null,
    Bool(bool),
    Int(i64),
    Num(f64),
    Str(String),
    Arr(Vec<Json>),
    Obj(Vec<(String, Json)>),
}

impl Json {
    pub fn obj(fields: Vec<(&str, Json)>) -> Json {
        Json::Obj(fields.into_iter().map(|(k, v)| (k.to_string(), v)).collect())
    }

    pub fn nums(v: &[f64]) -> Json {
        Json::Arr(v.iter().map(|&x| Json::Num(x)).collect())
    }

    fn write_into(&self, out: &mut String) {
        match self {
            Json::Null => out.push_str("null"),
            Json::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
            Json::Int(i) => {
                let _ = write!(out, "{i}");
            }
            Json::Num(x) => {
                let _ = write!(out, "{}", format_f64(*x));
            }
            Json::Str(s) => write_json_string(out, s),
            Json::Arr(items) => {
                out.push('[');
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    item.write_into(out);
                }
                out.push(']');
            }
            Json::Obj(fields) => {
                out.push('{');
                for (i, (k, v)) in fields.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    write_json_string(out, k);
                    out.push(':');
                    v.write_into(out);
                }
                out.push('}');
            }
        }
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        self.write_into(&mut s);
        s.push('\n');
        s
    }
}

/// 17 significant digits: enough to reproduce any f64 exactly on re-read.
pub fn format_f64(x: f64) -> String {
    if x == 0.0 {
        return "0.0".into();
    }
    format!("{:.16e}", x)
}

fn write_json_string(out: &mut String, s: &str) {
    out.push('"');
    for ch in s.chars() {
        match ch {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c if (c as u32) < 0x20 => {
                let _ = write!(out, "\\u{:04x}", c as u32);
            }
            c => out.push(c),
        }
    }
    out.push('"');
}

#[derive(Deserialize)]
struct FieldFile {
    grid: GridSpec,
    beta: Vec<f64>,
    gamma: Vec<f64>,
    #[serde(rename = "V")]
    v: Vec<f64>,
    #[serde(rename = "W")]
    w: Vec<f64>,
    #[serde(default)]
    mask: Option<Vec<u8>>,
}

pub fn read_field(path: &Path) -> Result<Coeffs> {
    let text = std::fs::read_to_string(path)?;
    parse_field(&text)
}

pub fn parse_field(text: &str) -> Result<Coeffs> {
    let f: FieldFile =
        serde_json::from_str(text).map_err(|e| SurfError::Malformed(e.to_string()))?;
    f.grid
        .validate()
        .map_err(|e| SurfError::Malformed(e.to_string()))?;
    let mask = f
        .mask
        .map(|m| m.iter().map(|&b| b != 0).collect::<Vec<bool>>());
    let mk = |vals: Vec<f64>| ScalarField::from_values(f.grid, vals, mask.clone());
    Coeffs::new(
        mk(f.beta).map_err(malformed)?,
        mk(f.gamma).map_err(malformed)?,
        mk(f.v).map_err(malformed)?,
        mk(f.w).map_err(malformed)?,
    )
}

fn malformed(e: SurfError) -> SurfError {
    SurfError::Malformed(e.to_string())
}

pub fn grid_json(g: &GridSpec) -> Json {
    Json::obj(vec![
        ("nx", Json::Int(g.nx as i64)),
        ("ny", Json::Int(g.ny as i64)),
        ("x0", Json::Num(g.x0)),
        ("y0", Json::Num(g.y0)),
        ("hx", Json::Num(g.hx)),
        ("hy", Json::Num(g.hy)),
    ])
}

pub fn field_json(c: &Coeffs) -> Json {
    let mut fields = vec![
        ("grid".to_string(), grid_json(c.grid())),
        ("beta".to_string(), Json::nums(c.beta.values())),
        ("gamma".to_string(), Json::nums(c.gamma.values())),
        ("V".to_string(), Json::nums(c.v.values())),
        ("W".to_string(), Json::nums(c.w.values())),
    ];
    let mask = c.joint_mask();
    if mask.iter().any(|&m| !m) {
        fields.push((
            "mask".to_string(),
            Json::Arr(mask.iter().map(|&m| Json::Int(m as i64)).collect()),
        ));
    }
    Json::Obj(fields)
}

pub fn write_field(path: &Path, c: &Coeffs) -> Result<()> {
    std::fs::write(path, field_json(c).render())?;
    Ok(())
}

pub fn report_json(rep: &ResidualReport) -> Json {
    let mut comps = Vec::new();
    for (name, n) in &rep.components {
        comps.push((
            name.clone(),
            Json::obj(vec![("sup", Json::Num(n.sup)), ("rms", Json::Num(n.rms))]),
        ));
    }
    let mut fields = vec![
        ("grid".to_string(), grid_json(&rep.grid)),
        ("components".to_string(), Json::Obj(comps)),
    ];
    if let Some(t) = rep.tolerance {
        fields.push(("tolerance".to_string(), Json::Num(t)));
    }
    Json::Obj(fields)
}

/// Boundary data for the Dirac solver and the Bäcklund constructions.
#[derive(Debug, Clone, Deserialize)]
pub struct BoundaryFile {
    #[serde(default)]
    pub u1_left: Option<Vec<f64>>,
    #[serde(default)]
    pub u2_bottom: Option<Vec<f64>>,
    #[serde(default)]
    pub lambda: Option<f64>,
    #[serde(default, rename = "H_corner")]
    pub h_corner: Option<f64>,
    #[serde(default, rename = "K_corner")]
    pub k_corner: Option<f64>,
}

pub fn read_boundary(path: &Path) -> Result<BoundaryFile> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| SurfError::Malformed(e.to_string()))
}
