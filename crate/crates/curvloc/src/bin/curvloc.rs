//! Command-line front end: classification, locus meshes, lifts, nets and
//! the isometry decision, reported as JSON on stdout (schema 1). Exit
//! codes: 2 parse error, 3 wrong corank, 4 unwritable output, 5
//! unsupported orbit.

use std::path::PathBuf;
use std::process::exit;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use curvloc::classify::{
    classify_orbit, is_non_degenerate, locus_type_exact, reduce_isometric_prenormal,
};
use curvloc::germ::{
    parse_germ, prepare, second_form_matrix, GermError, JetCoefficients, MapGerm, PreparedGerm,
};
use curvloc::isometry::{check_jet_isometry_equivalence, IsometryError};
use curvloc::locus::{
    affine_hull_of_locus, blowup_residual, exact_cylinder_samples, export_csv, export_obj,
    fit_vanishing_forms, lift_to_regular, point_type, sample_singular_locus, Domain, GridSpec,
};
use curvloc::nets::{discriminant_cubic, parse_net, table2_label, verify_example44};
use curvloc::poly::{parse_poly, rat_to_string, Rat};

const EXIT_PARSE: i32 = 2;
const EXIT_CORANK: i32 = 3;
const EXIT_UNWRITABLE: i32 = 4;
const EXIT_UNSUPPORTED_ORBIT: i32 = 5;

#[derive(Parser)]
#[command(name = "curvloc", about = "Second-order geometry of corank-1 3-manifolds in 5-space")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify the 2-jet orbit and the topological type of the curvature locus.
    Classify { germ_file: PathBuf },
    /// Sample the curvature locus and export a mesh.
    Locus {
        germ_file: PathBuf,
        /// Grid as THETAxSECOND, e.g. 180x90.
        #[arg(long, default_value = "180x90")]
        grid: String,
        #[arg(long, default_value_t = 10.0)]
        cmax: f64,
        #[arg(long, value_enum, default_value_t = MeshFormat::Obj)]
        format: MeshFormat,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also fit exact vanishing forms of the locus up to this degree.
        #[arg(long)]
        degree: Option<u32>,
    },
    /// Lift to a regular 3-manifold in 6-space and check the blow-up identity.
    Lift { germ_file: PathBuf },
    /// Nets of quadrics.
    Net {
        #[command(subcommand)]
        sub: NetCommand,
    },
    /// Decide equivalence under source changes plus a target isometry.
    Iso {
        germ_file_a: PathBuf,
        germ_file_b: PathBuf,
    },
}

#[derive(Subcommand)]
enum NetCommand {
    /// Determinant cubic of the pencil of a net "(q1, q2, q3)".
    Discriminant { net: String },
    /// Region label of the first generic family at rational (c, g).
    Label {
        #[arg(long, allow_hyphen_values = true)]
        c: String,
        #[arg(long, allow_hyphen_values = true)]
        g: String,
    },
    /// Verify the worked equivalence chain and compare locus invariants.
    Example44,
}

#[derive(Copy, Clone, ValueEnum)]
enum MeshFormat {
    Obj,
    Csv,
}

#[derive(Args)]
struct Nothing {}

fn fail(code: i32, msg: &str) -> ! {
    eprintln!("curvloc: {msg}");
    exit(code);
}

fn emit(report: Value) {
    println!("{}", serde_json::to_string_pretty(&report).unwrap());
}

fn load_germ(path: &PathBuf) -> MapGerm {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => fail(EXIT_PARSE, &format!("cannot read {}: {e}", path.display())),
    };
    match parse_germ(text.trim()) {
        Ok(g) => g,
        Err(GermError::NotCorankOne) => {
            fail(EXIT_CORANK, "germ does not have corank 1 at the origin")
        }
        Err(e) => fail(EXIT_PARSE, &format!("invalid germ: {e}")),
    }
}

fn prepare_or_fail(g: &MapGerm) -> PreparedGerm {
    match prepare(g) {
        Ok(p) => p,
        Err(GermError::NotCorankOne) => {
            fail(EXIT_CORANK, "germ does not have corank 1 at the origin")
        }
        Err(e) => fail(EXIT_PARSE, &format!("cannot prepare germ: {e}")),
    }
}

fn parse_rat(s: &str) -> Rat {
    match parse_poly(s) {
        Ok(p) if p.degree() == 0 => p.constant_term(),
        _ => fail(EXIT_PARSE, &format!("expected a rational number, got {s:?}")),
    }
}

fn germ_text(p: &PreparedGerm) -> String {
    let parts: Vec<String> = p.comps.iter().map(|c| c.to_string()).collect();
    format!("({})", parts.join(", "))
}

fn grid_spec(grid: &str, cmax: f64) -> GridSpec {
    let parts: Vec<&str> = grid.split('x').collect();
    let bad = || fail(EXIT_PARSE, &format!("invalid grid {grid:?}, expected THETAxSECOND"));
    if parts.len() != 2 {
        bad();
    }
    let n_theta = parts[0].parse().unwrap_or_else(|_| bad());
    let n_second = parts[1].parse().unwrap_or_else(|_| bad());
    let spec = GridSpec {
        n_theta,
        n_second,
        c_max: cmax,
    };
    if let Err(e) = spec.validate() {
        fail(EXIT_PARSE, &format!("{e}"));
    }
    spec
}

fn cmd_classify(path: &PathBuf) {
    let g = load_germ(path);
    let p = prepare_or_fail(&g);
    let jet = JetCoefficients::from_prepared(&p);
    let orbit = classify_orbit(&jet);
    let m = second_form_matrix(&p);
    let topo = match locus_type_exact(&jet) {
        Ok(t) => json!(t.as_str()),
        Err(_) => json!("NotSpecialClass"),
    };
    emit(json!({
        "schema": 1,
        "command": "classify",
        "germ": germ_text(&p),
        "orbit": orbit.as_str(),
        "d": rat_to_string(&jet.d()),
        "rank_alpha": jet.alpha_rank(),
        "non_degenerate": is_non_degenerate(&jet),
        "topological_type": topo,
        "point_type": point_type(&m).label(),
    }));
}

fn cmd_locus(
    path: &PathBuf,
    grid: &str,
    cmax: f64,
    format: MeshFormat,
    out: &Option<PathBuf>,
    degree: Option<u32>,
) {
    let g = load_germ(path);
    let p = prepare_or_fail(&g);
    let spec = grid_spec(grid, cmax);
    let sample = match sample_singular_locus(&p, &spec) {
        Ok(s) => s,
        Err(e) => fail(EXIT_PARSE, &format!("{e}")),
    };
    let m = second_form_matrix(&p);
    let hull = affine_hull_of_locus(&m, Domain::Cylinder);
    let mut artifacts = Vec::new();
    if let Some(out_path) = out {
        let bytes = match format {
            MeshFormat::Obj => export_obj(&sample),
            MeshFormat::Csv => export_csv(&sample),
        };
        let bytes = match bytes {
            Ok(b) => b,
            Err(e) => fail(EXIT_PARSE, &format!("{e}")),
        };
        if let Err(e) = std::fs::write(out_path, bytes) {
            fail(EXIT_UNWRITABLE, &format!("cannot write {}: {e}", out_path.display()));
        }
        artifacts.push(out_path.display().to_string());
    }
    let mut report = json!({
        "schema": 1,
        "command": "locus",
        "germ": germ_text(&p),
        "domain": "cylinder",
        "grid": format!("{}x{}", spec.n_theta, spec.n_second),
        "cmax": spec.c_max,
        "affine_hull_dimension": hull.dim,
        "point_type": point_type(&m).label(),
        "artifacts": artifacts,
    });
    if let Some(d) = degree {
        let ts: Vec<Rat> = (-6..=6).map(curvloc::poly::rat).collect();
        let cs: Vec<Rat> = (-6..=6).map(curvloc::poly::rat).collect();
        let pts = exact_cylinder_samples(&m, &ts, &cs);
        match fit_vanishing_forms(&pts, d) {
            Ok(basis) => {
                report["vanishing_forms"] = json!({
                    "degree": d,
                    "dimension": basis.len(),
                    "basis": basis.iter().map(|b| b.to_string()).collect::<Vec<_>>(),
                });
            }
            Err(e) => fail(EXIT_PARSE, &format!("{e}")),
        }
    }
    emit(report);
}

fn cmd_lift(path: &PathBuf) {
    let g = load_germ(path);
    let p = prepare_or_fail(&g);
    let lift = lift_to_regular(&p);
    let residual = blowup_residual(&p, &GridSpec::default()).unwrap();
    emit(json!({
        "schema": 1,
        "command": "lift",
        "germ": germ_text(&p),
        "lift": lift.to_text(),
        "blowup_residual": residual,
        "point_type": point_type(&lift.second_form_matrix()).label(),
    }));
    if residual > 1e-9 {
        fail(1, &format!("blow-up identity violated: residual {residual:e}"));
    }
}

fn cmd_net(sub: &NetCommand) {
    match sub {
        NetCommand::Discriminant { net } => {
            let n = match parse_net(net) {
                Ok(n) => n,
                Err(e) => fail(EXIT_PARSE, &format!("{e}")),
            };
            let disc = discriminant_cubic(&n);
            emit(json!({
                "schema": 1,
                "command": "net discriminant",
                "net": n.to_text(),
                "discriminant": disc.to_text(),
            }));
        }
        NetCommand::Label { c, g } => {
            let cv = parse_rat(c);
            let gv = parse_rat(g);
            let label = table2_label(&cv, &gv);
            emit(json!({
                "schema": 1,
                "command": "net label",
                "c": rat_to_string(&cv),
                "g": rat_to_string(&gv),
                "region": label.region,
                "g_positive": label.g_positive,
                "label": label.label,
            }));
        }
        NetCommand::Example44 => {
            let rep = verify_example44();
            let summary = |s: &curvloc::nets::LocusSummary| {
                json!({
                    "point_type": format!("M{}", s.point_type),
                    "affine_hull_dimension": s.hull_dim,
                    "vanishing_dimension_deg2": s.vanishing_dim_deg2,
                    "vanishing_dimension_deg4": s.vanishing_dim_deg4,
                })
            };
            emit(json!({
                "schema": 1,
                "command": "net example44",
                "start_net": rep.start_net.to_text(),
                "step1_net": rep.step1_net.to_text(),
                "step1_ok": rep.step1_ok,
                "step2_net": rep.step2_net.to_text(),
                "step2_ok": rep.step2_ok,
                "step3_ok": rep.step3_ok,
                "first_manifold": summary(&rep.first_manifold),
                "second_manifold": summary(&rep.second_manifold),
                "loci_distinguished": rep.loci_distinguished,
            }));
        }
    }
}

fn cmd_iso(path_a: &PathBuf, path_b: &PathBuf) {
    let ga = load_germ(path_a);
    let gb = load_germ(path_b);
    // Surface the orbit check before the verdict for clean exit codes.
    for g in [&ga, &gb] {
        match reduce_isometric_prenormal(g) {
            Ok(p) if p.orbit == curvloc::classify::Orbit::XzYzZ2 => {}
            Ok(p) => fail(
                EXIT_UNSUPPORTED_ORBIT,
                &format!("orbit {} is not supported by the isometry decision", p.orbit),
            ),
            Err(GermError::NotCorankOne) => {
                fail(EXIT_CORANK, "germ does not have corank 1 at the origin")
            }
            Err(e) => fail(EXIT_PARSE, &format!("{e}")),
        }
    }
    let verdict = match check_jet_isometry_equivalence(&ga, &gb) {
        Ok(v) => v,
        Err(IsometryError::UnsupportedOrbit(o)) => fail(
            EXIT_UNSUPPORTED_ORBIT,
            &format!("orbit {o} is not supported by the isometry decision"),
        ),
        Err(IsometryError::Germ(e)) => fail(EXIT_PARSE, &format!("{e}")),
    };
    let witness = verdict.witness.as_ref().map(|w| {
        json!({
            "solution_index": w.solution_index,
            "source_signs": w.source_signs,
            "target_signs": w.target_signs,
        })
    });
    emit(json!({
        "schema": 1,
        "command": "iso",
        "equivalent": verdict.equivalent,
        "witness": witness,
        "certificate": verdict.certificate,
        "max_residual": verdict.max_residual,
        "reduced_a": verdict.reduced_a.to_vec(),
        "reduced_b": verdict.reduced_b.to_vec(),
    }));
}

fn main() {
    let cli = Cli::parse();
    match &cli.command {
        Command::Classify { germ_file } => cmd_classify(germ_file),
        Command::Locus {
            germ_file,
            grid,
            cmax,
            format,
            out,
            degree,
        } => cmd_locus(germ_file, grid, *cmax, *format, out, *degree),
        Command::Lift { germ_file } => cmd_lift(germ_file),
        Command::Net { sub } => cmd_net(sub),
        Command::Iso {
            germ_file_a,
            germ_file_b,
        } => cmd_iso(germ_file_a, germ_file_b),
    }
}
