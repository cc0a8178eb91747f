//! `surf` — generate coefficient fields for the built-in surface
//! families, verify them, integrate moving frames, apply W-congruence
//! transforms and run spectral-parameter sweeps.
//!
//! Exit codes: 0 success, 2 usage/input error, 3 mathematical
//! precondition failure.

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

use surf_core::classify::classify;
use surf_core::coeffs::{derived_quantities, gc1_residual, gc2_residual, Coeffs};
use surf_core::error::SurfError;
use surf_core::families::{self, DemoulinSource, KummerSpec, PseudosphericalKind, RomanSpec};
use surf_core::frames::{
    self, determinant_field, integrate_frame, integrate_separable_quadric, transport_loop,
    FrameState, QuadricInit, SweepOrder, SystemSelector,
};
use surf_core::grid::GridSpec;
use surf_core::io::{self, Json};
use surf_core::mesh::{to_affine_mesh, write_obj};
use surf_core::plucker;
use surf_core::report::ResidualReport;
use surf_core::spectral::{scalar_spectral_residual, SpectralData, SpectralProblem};
use surf_core::wcong::{self, BacklundCorner, BacklundKind};

#[derive(Parser)]
#[command(
    name = "surf",
    version,
    about = "surfaces in projective 3-space: generate, verify, integrate, transform"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a coefficient field from the family catalog.
    Family(FamilyArgs),
    /// Verify a field: compatibility residuals and class membership.
    Check(CheckArgs),
    /// Integrate a moving-frame system; export mesh and invariants.
    Frame(FrameArgs),
    /// Apply a W-congruence transformation.
    Backlund(BacklundArgs),
    /// Evaluate a scalar spectral problem over a list of λ.
    Spectral(SpectralArgs),
}

#[derive(Args)]
struct FamilyArgs {
    /// constant | rotation | roman | kummer | affine-sphere |
    /// pseudospherical-trig | pseudospherical-hyp | rnet4 | minimal |
    /// demoulin | godeaux-rozet | projmin | linear-complex-pair
    name: String,
    /// Grid "NXxNY:x0,y0,h" (square spacing) or "NXxNY:x0,y0,hx,hy".
    #[arg(long, default_value = "65x65:0,0,0.015625")]
    grid: String,
    #[arg(long, default_value = "field.json")]
    out: PathBuf,
    #[arg(long, default_value_t = 1e-6)]
    tolerance: f64,
    /// Rotation profile: "A*sin", "A*cos" or a plain constant.
    #[arg(long)]
    profile: Option<String>,
    /// Family constant (rotation shift, affine-sphere / Tzitzeica c).
    #[arg(long, allow_hyphen_values = true)]
    c: Option<f64>,
    /// Cubic coefficients a0,a1,a2 of the characteristic equations.
    #[arg(long, allow_hyphen_values = true)]
    a: Option<String>,
    /// Polynomial coefficients c0,c1,... (lowest degree first).
    #[arg(long, allow_hyphen_values = true)]
    poly: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    f0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    g0: Option<f64>,
    /// Curvature constant of the projective metric (default 8/9).
    #[arg(long)]
    curv: Option<f64>,
    /// Kink slope for pseudospherical-trig.
    #[arg(long)]
    slope: Option<f64>,
    /// Boundary scale for Goursat-built families.
    #[arg(long, allow_hyphen_values = true)]
    boundary_scale: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    beta0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    gamma0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    v0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    w0: Option<f64>,
    /// Linear-complex-pair extension parameters.
    #[arg(long, allow_hyphen_values = true)]
    p: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    q: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    r: Option<f64>,
}

#[derive(Args)]
struct CheckArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-6)]
    tolerance: f64,
}

#[derive(Args)]
struct FrameArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// wilczynski4 | plucker6 | plucker6-mvn | plucker6-projmin | jonas8
    #[arg(long)]
    system: String,
    /// Spectral parameter(s); repeat for a sweep.
    #[arg(long, allow_hyphen_values = true)]
    lambda: Vec<f64>,
    /// Wavefront OBJ output of the affine mesh (wilczynski4 only).
    #[arg(long)]
    mesh: Option<PathBuf>,
    /// Invariants report (JSON).
    #[arg(long)]
    invariants: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-6)]
    tolerance: f64,
}

#[derive(Args)]
struct BacklundArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// isothermal | r0 | r | jonas | rectify | quadric
    #[arg(long)]
    kind: String,
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<f64>,
    /// Boundary/corner data file (JSON).
    #[arg(long)]
    boundary: Option<PathBuf>,
    #[arg(long, default_value = "transformed.json")]
    out: PathBuf,
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-6)]
    tolerance: f64,
}

#[derive(Args)]
struct SpectralArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// mvn | kp | ds | jonas | demoulin
    #[arg(long)]
    problem: String,
    /// Comma-separated λ list.
    #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
    lambda: Vec<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-4)]
    tolerance: f64,
}

fn parse_grid(spec: &str) -> Result<GridSpec, String> {
    let (dims, rest) = spec
        .split_once(':')
        .ok_or_else(|| format!("grid '{spec}' must look like NXxNY:x0,y0,h"))?;
    let (nx, ny) = dims
        .split_once('x')
        .ok_or_else(|| format!("grid dimensions '{dims}' must look like NXxNY"))?;
    let nx: usize = nx.parse().map_err(|e| format!("bad nx: {e}"))?;
    let ny: usize = ny.parse().map_err(|e| format!("bad ny: {e}"))?;
    let nums: Vec<f64> = rest
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| format!("bad grid numbers: {e}"))?;
    let (x0, y0, hx, hy) = match nums.as_slice() {
        [x0, y0, h] => (*x0, *y0, *h, *h),
        [x0, y0, hx, hy] => (*x0, *y0, *hx, *hy),
        _ => return Err("grid needs x0,y0,h or x0,y0,hx,hy".into()),
    };
    GridSpec::new(nx, ny, x0, y0, hx, hy).map_err(|e| e.to_string())
}

fn parse_csv(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|e| format!("bad number '{t}': {e}"))
        })
        .collect()
}

/// Rotation profiles: "A*sin", "A*cos", or a plain constant.
fn parse_profile(s: &str) -> Result<Box<dyn Fn(f64) -> f64>, String> {
    let t = s.trim();
    if let Some(a) = t.strip_suffix("*sin") {
        let a: f64 = a.parse().map_err(|e| format!("bad amplitude: {e}"))?;
        return Ok(Box::new(move |v| a * v.sin()));
    }
    if let Some(a) = t.strip_suffix("*cos") {
        let a: f64 = a.parse().map_err(|e| format!("bad amplitude: {e}"))?;
        return Ok(Box::new(move |v| a * v.cos()));
    }
    if let Ok(cst) = t.parse::<f64>() {
        return Ok(Box::new(move |_| cst));
    }
    Err(format!(
        "unknown profile '{s}' (use \"A*sin\", \"A*cos\" or a constant)"
    ))
}

/// 2 for input/usage problems, 3 for mathematical precondition failures.
fn error_code(e: &SurfError) -> u8 {
    match e {
        SurfError::ClassPrecondition { .. }
        | SurfError::NoConvergence { .. }
        | SurfError::Singular(_)
        | SurfError::MaskedPath { .. }
        | SurfError::FullyMasked
        | SurfError::PathOffGrid => 3,
        _ => 2,
    }
}

fn fail(code: u8, msg: &str) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(code)
}

type CmdResult = Result<ExitCode, (u8, String)>;

fn core_err(e: SurfError) -> (u8, String) {
    (error_code(&e), e.to_string())
}

fn run_family(args: &FamilyArgs) -> CmdResult {
    let grid = parse_grid(&args.grid).map_err(|m| (2u8, m))?;
    let field: Coeffs = match args.name.as_str() {
        "constant" => families::make_constant(
            args.beta0.unwrap_or(1.0),
            args.gamma0.unwrap_or(2.0),
            args.v0.unwrap_or(3.0),
            args.w0.unwrap_or(4.0),
            grid,
        )
        .map_err(core_err)?,
        "rotation" => {
            let profile = parse_profile(args.profile.as_deref().unwrap_or("0.2*sin"))
                .map_err(|m| (2u8, m))?;
            families::make_rotation(&*profile, args.c.unwrap_or(0.3), grid).map_err(core_err)?
        }
        "roman" => {
            let a = parse_csv(args.a.as_deref().unwrap_or("1,0,0")).map_err(|m| (2u8, m))?;
            if a.len() != 3 {
                return Err((2, "roman needs --a a0,a1,a2".into()));
            }
            let spec = RomanSpec::new(
                a[0],
                a[1],
                a[2],
                args.f0.unwrap_or(grid.x0),
                args.g0.unwrap_or(grid.y0),
            );
            families::make_roman(&spec, grid).map_err(core_err)?
        }
        "kummer" => {
            let p = parse_csv(args.poly.as_deref().unwrap_or("1")).map_err(|m| (2u8, m))?;
            let mut spec = KummerSpec::new(
                p,
                args.f0.unwrap_or(grid.x0),
                args.g0.unwrap_or(grid.y0),
            );
            if let Some(cv) = args.curv {
                spec.c = cv;
            }
            families::make_kummer(&spec, grid).map_err(core_err)?
        }
        "affine-sphere" => {
            let cst = args.c.unwrap_or(-1.0);
            match args.boundary_scale {
                None => families::make_affine_sphere_const(cst, grid).map_err(core_err)?,
                Some(s) => families::make_affine_sphere_goursat(cst, grid, |x, y| s * (x + y))
                    .map_err(core_err)?,
            }
        }
        "pseudospherical-trig" => {
            families::make_pseudospherical_kink(args.slope.unwrap_or(1.15), grid)
                .map_err(core_err)?
        }
        "pseudospherical-hyp" => {
            let s = args.boundary_scale.unwrap_or(1.0);
            let p = surf_core::goursat::GoursatProblem::from_fn(
                surf_core::goursat::GoursatRhs::SinhGordon,
                &grid,
                |_, _| s,
            );
            let phi = surf_core::goursat::solve_goursat(&p, &grid).map_err(core_err)?;
            families::make_pseudospherical(PseudosphericalKind::Hyperbolic, &phi[0], 1e-4)
                .map_err(core_err)?
        }
        "rnet4" => {
            let nc = grid.nx + grid.ny - 1;
            let s = args.boundary_scale.unwrap_or(0.0);
            families::make_rnet4(&vec![s; nc], &vec![s; nc], grid, 1e-3).map_err(core_err)?
        }
        "minimal" => families::make_minimal(grid, None, 1e-6).map_err(core_err)?,
        "demoulin" => {
            let src = match args.boundary_scale {
                None => DemoulinSource::Constants,
                Some(s) => DemoulinSource::Goursat {
                    bottom_p: (0..grid.nx).map(|i| s * grid.x(i)).collect(),
                    left_p: (0..grid.ny).map(|j| s * grid.y(j)).collect(),
                    bottom_q: (0..grid.nx).map(|i| -0.5 * s * grid.x(i)).collect(),
                    left_q: (0..grid.ny).map(|j| -0.5 * s * grid.y(j)).collect(),
                },
            };
            families::make_demoulin(src, grid, 1e-4).map_err(core_err)?
        }
        "godeaux-rozet" => families::make_godeaux_rozet_const(args.beta0.unwrap_or(1.0), grid)
            .map_err(core_err)?,
        "projmin" => families::make_projmin_const(
            args.beta0.unwrap_or(1.0),
            args.gamma0.unwrap_or(2.0),
            grid,
        )
        .map_err(core_err)?,
        "linear-complex-pair" => families::make_linear_complex_pair(
            grid,
            args.p.unwrap_or(0.0),
            args.q.unwrap_or(1.0),
            args.r.unwrap_or(0.0),
        )
        .map_err(core_err)?,
        other => return Err((2, format!("unknown family '{other}'"))),
    };
    io::write_field(&args.out, &field).map_err(|e| (2u8, e.to_string()))?;
    let rep = gc1_residual(&field).map_err(core_err)?;
    for (name, n) in &rep.components {
        println!("gc1 {name}: sup {:.3e} rms {:.3e}", n.sup, n.rms);
    }
    let ok = rep.max_sup() <= args.tolerance;
    println!(
        "{}: gc1 sup {:.3e} vs tolerance {:.3e}",
        if ok { "pass" } else { "fail" },
        rep.max_sup(),
        args.tolerance
    );
    Ok(if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn class_report_json(c: &Coeffs, tol: f64) -> Result<Json, SurfError> {
    let rep = classify(c, tol)?;
    let mut entries = Vec::new();
    for (name, v) in rep.entries() {
        entries.push((
            name.to_string(),
            Json::obj(vec![
                ("residual", Json::Num(v.residual)),
                ("member", Json::Bool(v.member)),
            ]),
        ));
    }
    Ok(Json::Obj(entries))
}

fn run_check(args: &CheckArgs) -> CmdResult {
    let c = io::read_field(&args.input).map_err(core_err)?;
    let gc1 = gc1_residual(&c)
        .map_err(core_err)?
        .with_tolerance(args.tolerance);
    let d = derived_quantities(&c).map_err(core_err)?;
    let gc2 = gc2_residual(&c, &d)
        .map_err(core_err)?
        .with_tolerance(args.tolerance);
    let classes = class_report_json(&c, args.tolerance).map_err(core_err)?;
    let report = Json::obj(vec![
        ("gc1", io::report_json(&gc1)),
        ("gc2", io::report_json(&gc2)),
        ("classes", classes),
        ("tolerance", Json::Num(args.tolerance)),
    ]);
    match &args.out {
        Some(path) => std::fs::write(path, report.render()).map_err(|e| (2u8, e.to_string()))?,
        None => print!("{}", report.render()),
    }
    let ok = gc1.max_sup() <= args.tolerance;
    println!(
        "{}: gc1 sup {:.3e}",
        if ok { "pass" } else { "fail" },
        gc1.max_sup()
    );
    Ok(if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn quadric_route(c: &Coeffs, args: &FrameArgs) -> CmdResult {
    let g = *c.grid();
    // V must depend on x only, W on y only.
    let mut vrow = Vec::with_capacity(g.nx);
    for i in 0..g.nx {
        vrow.push(c.v.get(i, 0));
    }
    let mut wcol = Vec::with_capacity(g.ny);
    for j in 0..g.ny {
        wcol.push(c.w.get(0, j));
    }
    for j in 0..g.ny {
        for i in 0..g.nx {
            if (c.v.get(i, j) - vrow[i]).abs() > args.tolerance
                || (c.w.get(i, j) - wcol[j]).abs() > args.tolerance
            {
                return Err((3, "quadric data requires V = V(x) and W = W(y)".into()));
            }
        }
    }
    let vf = move |x: f64| {
        let u = (x - g.x0) / g.hx;
        let i = (u.round() as isize).clamp(0, g.nx as isize - 1) as usize;
        vrow[i]
    };
    let wf = move |y: f64| {
        let u = (y - g.y0) / g.hy;
        let j = (u.round() as isize).clamp(0, g.ny as isize - 1) as usize;
        wcol[j]
    };
    let r = integrate_separable_quadric(&vf, &wf, QuadricInit::bilinear(), g).map_err(core_err)?;
    println!("quadric data: routed to the separable integrator");
    if let Some(path) = &args.mesh {
        let mesh = to_affine_mesh(&r).map_err(core_err)?;
        write_obj(path, &mesh).map_err(core_err)?;
        println!("mesh written to {}", path.display());
    }
    if let Some(path) = &args.invariants {
        let mut rep = ResidualReport::new(g);
        for comp in 0..4 {
            let f = r.component(comp);
            let rxx =
                surf_core::calculus::partial_derivative(&f, surf_core::calculus::Axis::X, 2)
                    .map_err(core_err)?;
            let resid = rxx
                .zip(&c.v.zip(&f, |v, q| 0.5 * v * q).map_err(core_err)?, |p, q| p - q)
                .map_err(core_err)?;
            rep.push(&format!("r{comp}_xx - V r/2"), &resid);
        }
        let report = Json::obj(vec![("separable-residuals", io::report_json(&rep))]);
        std::fs::write(path, report.render()).map_err(|e| (2u8, e.to_string()))?;
    }
    Ok(ExitCode::SUCCESS)
}

fn run_frame(args: &FrameArgs) -> CmdResult {
    let c = io::read_field(&args.input).map_err(core_err)?;
    let gc1 = gc1_residual(&c).map_err(core_err)?;
    if gc1.max_sup() > args.tolerance {
        return Err((
            3,
            format!(
                "field fails gc1 at tolerance {}: sup {:.3e}",
                args.tolerance,
                gc1.max_sup()
            ),
        ));
    }
    // Quadric data: route to the separable integrator.
    let scale = c.v.sup_norm().max(c.w.sup_norm()).max(1.0);
    if c.beta.sup_norm() <= 1e-12 * scale && c.gamma.sup_norm() <= 1e-12 * scale {
        return quadric_route(&c, args);
    }

    let sel = SystemSelector::parse(&args.system).map_err(|e| (2u8, e.to_string()))?;
    let d = derived_quantities(&c).map_err(core_err)?;
    let lambdas: Vec<Option<f64>> = if sel.is_spectral() {
        if args.lambda.is_empty() {
            return Err((2, "spectral systems need --lambda".into()));
        }
        args.lambda.iter().map(|&l| Some(l)).collect()
    } else {
        vec![None]
    };

    let mut inv_fields: Vec<(String, Json)> = Vec::new();
    let g = *c.grid();
    for lambda in &lambdas {
        let label = match lambda {
            Some(l) => format!("lambda={l}"),
            None => "lambda=none".to_string(),
        };
        let (xm, ym) =
            frames::system_matrices(&c, &d, sel, *lambda, args.tolerance).map_err(core_err)?;
        let zc = frames::zero_curvature_residual(&xm, &ym).map_err(core_err)?;
        println!("{label}: zero-curvature sup {:.3e}", zc.max_sup());
        let mut entries = vec![("zero_curvature_sup".to_string(), Json::Num(zc.max_sup()))];

        if sel == SystemSelector::Wilczynski4 {
            let init = FrameState::identity(4);
            let ff = frames::integrate_frame_from(&xm, &ym, &init, SweepOrder::XThenY)
                .map_err(core_err)?;
            let det = determinant_field(&ff).map_err(core_err)?;
            let drift = det.map(|v| v - 1.0).sup_norm();
            entries.push(("det_drift".to_string(), Json::Num(drift)));
            println!("{label}: det drift {drift:.3e}");

            let rows = plucker::embed_frame_field(&ff).map_err(core_err)?;
            let qv = plucker::quadric_value_fields(&rows).map_err(core_err)?;
            let names = ["U", "A", "P", "V", "B", "Q"];
            let gram = plucker::gram_drift(&rows, &plucker::gram_table()).map_err(core_err)?;
            entries.push(("gram_drift".to_string(), Json::Num(gram)));
            println!("{label}: gram drift {gram:.3e}");
            for (name, q) in names.iter().zip(qv.iter()) {
                entries.push((format!("quadric_{name}"), Json::Num(q.sup_norm())));
            }

            let loop_state =
                transport_loop(&xm, &ym, &init, (0, 0), (g.nx - 1, g.ny - 1)).map_err(core_err)?;
            let defect = loop_state
                .rows
                .iter()
                .zip(init.rows.iter())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0f64, f64::max);
            entries.push(("loop_defect".to_string(), Json::Num(defect)));

            if let Some(path) = &args.mesh {
                let r = ff.row_vectors(0);
                let mesh = to_affine_mesh(&r).map_err(core_err)?;
                write_obj(path, &mesh).map_err(core_err)?;
                println!("mesh written to {}", path.display());
            }
        } else {
            // 6- or 8-row systems: transport the embedded standard frame.
            let f6 = plucker::plucker_embed(&frames::Frame4::standard_basis());
            let dim = sel.dim();
            let mut rows = vec![0.0; dim * 6];
            for r in 0..6 {
                rows[r * 6..(r + 1) * 6].copy_from_slice(&f6.row(r).0);
            }
            let init = FrameState { dim, m: 6, rows };
            let ff = frames::integrate_frame_from(&xm, &ym, &init, SweepOrder::XThenY)
                .map_err(core_err)?;
            let row_fields: Vec<_> = (0..6).map(|r| ff.row_vectors(r)).collect();
            let qv = plucker::quadric_value_fields(&row_fields).map_err(core_err)?;
            let names = ["U", "A", "P", "V", "B", "Q"];
            for (name, q) in names.iter().zip(qv.iter()) {
                entries.push((format!("quadric_{name}"), Json::Num(q.sup_norm())));
            }
            let gram =
                plucker::gram_drift(&row_fields, &plucker::gram_table()).map_err(core_err)?;
            entries.push(("gram_drift".to_string(), Json::Num(gram)));
            println!("{label}: gram drift {gram:.3e}");
            if args.mesh.is_some() {
                return Err((2, "mesh export needs the wilczynski4 system".into()));
            }
        }
        inv_fields.push((label, Json::Obj(entries)));
    }

    if let Some(path) = &args.invariants {
        let report = Json::Obj(inv_fields);
        std::fs::write(path, report.render()).map_err(|e| (2u8, e.to_string()))?;
        println!("invariants written to {}", path.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn run_backlund(args: &BacklundArgs) -> CmdResult {
    let c = io::read_field(&args.input).map_err(core_err)?;
    let boundary = match &args.boundary {
        Some(p) => Some(io::read_boundary(p).map_err(core_err)?),
        None => None,
    };
    let lambda = args
        .lambda
        .or(boundary.as_ref().and_then(|b| b.lambda))
        .unwrap_or(0.5);

    let mut report_fields: Vec<(String, Json)> = Vec::new();
    let out_field: Coeffs = match args.kind.as_str() {
        "isothermal" | "r0" | "r" | "jonas" => {
            let kind = BacklundKind::parse(&args.kind).map_err(core_err)?;
            let corner = boundary.as_ref().map(|b| {
                let mut corner = BacklundCorner::default_for(kind, lambda);
                if let Some(u1) = b.u1_left.as_ref().and_then(|v| v.first()) {
                    corner.rows[0] = *u1;
                }
                if let Some(u2) = b.u2_bottom.as_ref().and_then(|v| v.first()) {
                    corner.rows[3] = *u2;
                }
                if let Some(h) = b.h_corner {
                    corner.h = h;
                }
                if let Some(k) = b.k_corner {
                    corner.k = k;
                }
                corner
            });
            let out = wcong::backlund(&c, kind, lambda, corner, args.tolerance).map_err(core_err)?;
            report_fields.push(("class_residual".into(), Json::Num(out.class_residual)));
            report_fields.push((
                "constraint_drift".into(),
                Json::Num(out.constraint.max_sup()),
            ));
            report_fields.push((
                "identity_residual".into(),
                Json::Num(out.identity.max_sup()),
            ));
            println!(
                "class residual {:.3e}, constraint drift {:.3e}, identity {:.3e}",
                out.class_residual,
                out.constraint.max_sup(),
                out.identity.max_sup()
            );
            out.coeffs
        }
        "rectify" => {
            let out = wcong::rectify_linear_complex(&c, None, args.tolerance).map_err(core_err)?;
            report_fields.push(("beta_sup".into(), Json::Num(out.beta_sup)));
            report_fields.push((
                "constraint_drift".into(),
                Json::Num(out.constraint.max_sup()),
            ));
            println!(
                "beta~ sup {:.3e}, constraint drift {:.3e}",
                out.beta_sup,
                out.constraint.max_sup()
            );
            out.coeffs
        }
        "quadric" => {
            let corner = boundary.as_ref().and_then(|b| {
                match (
                    b.u1_left.as_ref().and_then(|v| v.first()),
                    b.u2_bottom.as_ref().and_then(|v| v.first()),
                ) {
                    (Some(u1), Some(u2)) => Some([*u1, *u2]),
                    _ => None,
                }
            });
            let out = wcong::map_to_quadric(&c, corner, args.tolerance).map_err(core_err)?;
            report_fields.push(("beta_sup".into(), Json::Num(out.beta_sup)));
            report_fields.push(("gamma_sup".into(), Json::Num(out.gamma_sup)));
            report_fields.push((
                "constraint_drift".into(),
                Json::Num(out.constraint.max_sup()),
            ));
            println!(
                "beta~ sup {:.3e}, gamma~ sup {:.3e}, constraint drift {:.3e}",
                out.beta_sup,
                out.gamma_sup,
                out.constraint.max_sup()
            );
            out.coeffs
        }
        other => return Err((2, format!("unknown backlund kind '{other}'"))),
    };
    io::write_field(&args.out, &out_field).map_err(|e| (2u8, e.to_string()))?;
    if let Some(path) = &args.report {
        std::fs::write(path, Json::Obj(report_fields).render())
            .map_err(|e| (2u8, e.to_string()))?;
    }
    Ok(ExitCode::SUCCESS)
}

fn run_spectral(args: &SpectralArgs) -> CmdResult {
    if args.lambda.is_empty() {
        return Err((2, "need at least one lambda".into()));
    }
    let c = io::read_field(&args.input).map_err(core_err)?;
    let d = derived_quantities(&c).map_err(core_err)?;
    let problem = SpectralProblem::parse(&args.problem).map_err(|e| (2u8, e.to_string()))?;
    let init6 = FrameState::column(6, &[1.0, 0.0, -1.0, 1.0, 0.0, 1.0]);
    let mut sups = Vec::new();
    let mut entries = Vec::new();
    for &lambda in &args.lambda {
        let rep = match problem {
            SpectralProblem::Mvn => {
                let ff = integrate_frame(
                    &c,
                    &d,
                    SystemSelector::Plucker6Mvn,
                    Some(lambda),
                    &init6,
                    SweepOrder::XThenY,
                    args.tolerance,
                )
                .map_err(core_err)?;
                let u = ff.row_component(0, 0);
                let v = ff.row_component(3, 0);
                scalar_spectral_residual(
                    &c,
                    &SpectralData::UV { u: &u, v: &v },
                    problem,
                    lambda,
                    args.tolerance,
                )
                .map_err(core_err)?
            }
            SpectralProblem::Kp | SpectralProblem::Ds => {
                let kind = if problem == SpectralProblem::Kp {
                    families::ShiftKind::R0
                } else {
                    families::ShiftKind::R
                };
                let shifted =
                    families::lambda_shift(&c, lambda, kind, args.tolerance).map_err(core_err)?;
                let ds = derived_quantities(&shifted).map_err(core_err)?;
                let ff = integrate_frame(
                    &shifted,
                    &ds,
                    SystemSelector::Wilczynski4,
                    None,
                    &FrameState::identity(4),
                    SweepOrder::XThenY,
                    args.tolerance,
                )
                .map_err(core_err)?;
                let r = ff.row_vectors(0);
                scalar_spectral_residual(&c, &SpectralData::R4(&r), problem, lambda, args.tolerance)
                    .map_err(core_err)?
            }
            SpectralProblem::Jonas => {
                let ff = integrate_frame(
                    &c,
                    &d,
                    SystemSelector::Jonas8,
                    Some(lambda),
                    &FrameState::column(8, &[1.0, 0.0, -1.0, 1.0, 0.0, 1.0, 0.5, 0.0]),
                    SweepOrder::XThenY,
                    args.tolerance,
                )
                .map_err(core_err)?;
                let u = ff.row_component(0, 0);
                let v = ff.row_component(3, 0);
                scalar_spectral_residual(
                    &c,
                    &SpectralData::UV { u: &u, v: &v },
                    problem,
                    lambda,
                    args.tolerance,
                )
                .map_err(core_err)?
            }
            SpectralProblem::Demoulin => {
                let ff = integrate_frame(
                    &c,
                    &d,
                    SystemSelector::Plucker6Projmin,
                    Some(lambda),
                    &init6,
                    SweepOrder::XThenY,
                    args.tolerance,
                )
                .map_err(core_err)?;
                let a = ff.row_component(1, 0);
                let b = ff.row_component(4, 0);
                scalar_spectral_residual(
                    &c,
                    &SpectralData::AB { a: &a, b: &b },
                    problem,
                    lambda,
                    args.tolerance,
                )
                .map_err(core_err)?
            }
        };
        println!("lambda {lambda}: residual sup {:.3e}", rep.max_sup());
        sups.push(rep.max_sup());
        entries.push((format!("lambda={lambda}"), io::report_json(&rep)));
    }
    let spread = sups.iter().cloned().fold(f64::MIN, f64::max)
        - sups.iter().cloned().fold(f64::MAX, f64::min);
    println!("spread across lambda: {spread:.3e}");
    entries.push(("spread".to_string(), Json::Num(spread)));
    if let Some(path) = &args.out {
        std::fs::write(path, Json::Obj(entries).render()).map_err(|e| (2u8, e.to_string()))?;
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Family(args) => run_family(args),
        Command::Check(args) => run_check(args),
        Command::Frame(args) => run_frame(args),
        Command::Backlund(args) => run_backlund(args),
        Command::Spectral(args) => run_spectral(args),
    };
    match result {
        Ok(code) => code,
        Err((code, msg)) => fail(code, &msg),
    }
}
