mod manifest;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use metrifill::complex::{to_obj, MetricGraph};
use metrifill::export::embedding_svg;
use metrifill::filling::{fill_triangle, verify_filling, FillAccounting, FilledTriangle};
use metrifill::modulus::{discrete_modulus, round_annulus, unit_square_grid, ModulusError, ModulusProblem};
use metrifill::surface::{
    approximate_surface, generate_fixture, verify_isometry, FixtureKind, SurfaceApproximation,
    TriangulatedMetricSurface, DEFAULT_SAMPLE_BUDGET,
};
use metrifill::triangle::{
    embed_triangle, fixture_triangle, gromov_tripod, random_triangle, verify_bilipschitz,
    DiscreteMetricTriangle, TriangleFamily,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use manifest::Run;

#[global_allocator]
static ALLOC: mimalloc::MiMalloc = mimalloc::MiMalloc;

/// Polyhedral approximation of metric surfaces.
///
/// Every command writes its JSON artifacts and a `<command>.manifest.json`
/// into the `--out` directory. Exit status is 0 when every certificate
/// passes, 1 when one fails and 2 on bad input.
#[derive(Debug, Parser)]
#[command(name = "metrifill", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Embed a metric triangle in the plane and check the distortion window.
    Embed(InputArgs),
    /// Fill a metric triangle with a polyhedral disk and certify it.
    Fill(FillArgs),
    /// Approximate a triangulated surface at one or more levels.
    Approx(ApproxArgs),
    /// Certify a surface approximation, or a triangle filling.
    Verify(VerifyArgs),
    /// Discrete 2-modulus of a curve family.
    Modulus(ModulusArgs),
    /// Write a generated input.
    Fixture(FixtureArgs),
    /// Draw a triangle embedding as SVG or a filling as OBJ.
    Export(ExportArgs),
}

#[derive(Debug, Args)]
struct InputArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct FillArgs {
    #[command(flatten)]
    io: InputArgs,
    #[arg(long, default_value_t = 0.1, allow_negative_numbers = true)]
    eps: f64,
    /// Also write the filling as OBJ.
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Debug, Args)]
struct ApproxArgs {
    #[command(flatten)]
    io: InputArgs,
    #[arg(long, default_value_t = 0.2, allow_negative_numbers = true)]
    eps: f64,
    /// Number of levels; level `k` uses `eps / 2^k`.
    #[arg(long, default_value_t = 1)]
    levels: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Sampled pairs per certificate.
    #[arg(long, default_value_t = DEFAULT_SAMPLE_BUDGET)]
    samples: usize,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[command(flatten)]
    io: InputArgs,
    /// Filling parameter; defaults to the level-0 value recorded by `approx`
    /// when `--out` holds its manifest.
    #[arg(long, allow_negative_numbers = true)]
    eps: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_SAMPLE_BUDGET)]
    samples: usize,
}

#[derive(Debug, Args)]
struct ModulusArgs {
    /// A full problem JSON.
    #[arg(long, conflicts_with = "graph")]
    input: Option<PathBuf>,
    /// A metric graph JSON, used with `--connect`.
    #[arg(long, requires = "connect")]
    graph: Option<PathBuf>,
    /// Two JSON files listing the node sets to connect.
    #[arg(long, num_args = 2, value_names = ["E", "F"])]
    connect: Option<Vec<PathBuf>>,
    #[arg(long, allow_negative_numbers = true)]
    tol: Option<f64>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct FixtureArgs {
    /// euclidean_patch, sphere_octant_mesh, linf_patch (surfaces); euclidean,
    /// spherical, linf, random_norm (triangles); unit_square_grid,
    /// round_annulus (modulus problems).
    kind: String,
    /// Subdivision count of patches and grids, rings of the annulus.
    #[arg(long, default_value_t = 1)]
    n: usize,
    #[arg(long, default_value_t = 32)]
    samples_per_edge: usize,
    /// Draw a random triangle of the family instead of its representative.
    #[arg(long)]
    random: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Outer radius of the annulus.
    #[arg(long, default_value_t = std::f64::consts::E)]
    radius: f64,
    #[arg(long, default_value_t = 1e-9, allow_negative_numbers = true)]
    tol: f64,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct ExportArgs {
    #[command(flatten)]
    io: InputArgs,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long, conflicts_with_all = ["format", "obj"])]
    svg: bool,
    #[arg(long, conflicts_with = "format")]
    obj: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Json,
    Svg,
    Obj,
}

/// A run that did not produce a passing result.
#[derive(Debug)]
pub struct Failure {
    code: u8,
    kind: String,
    message: String,
}

impl Failure {
    fn input(kind: &str, message: impl ToString) -> Failure {
        Failure { code: 2, kind: kind.to_string(), message: message.to_string() }
    }

    fn io(path: &Path, e: std::io::Error) -> Failure {
        Failure::input("Io", format!("{}: {e}", path.display()))
    }

    fn internal(e: impl ToString) -> Failure {
        Failure { code: 2, kind: "Internal".into(), message: e.to_string() }
    }

    /// Classifies a library error by its message.
    fn library(e: impl ToString) -> Failure {
        let message = e.to_string();
        let kind = [
            ("invalid metric", "InvalidMetric"),
            ("invalid surface", "InvalidSurface"),
            ("embedded boundary is not a simple polygon", "NonSimpleBoundary"),
            ("triangle is degenerate", "DegenerateTriangle"),
            ("precondition violated", "Precondition"),
            ("no admissible eps", "EpsBudget"),
        ]
        .iter()
        .find(|(prefix, _)| message.contains(prefix))
        .map_or("InvalidInput", |(_, kind)| kind);
        Failure::input(kind, message)
    }
}

fn parse<T: serde::de::DeserializeOwned>(bytes: &[u8]) -> Result<T, Failure> {
    serde_json::from_slice(bytes).map_err(Failure::library)
}

fn positive(name: &str, v: f64) -> Result<f64, Failure> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Failure::input("InvalidInput", format!("--{name} must be positive, got {v}")))
    }
}

fn embed(a: InputArgs) -> Result<bool, Failure> {
    let mut run = Run::new("embed", &a.out)?;
    let tri: DiscreteMetricTriangle<f64> = parse(&run.read(&a.input)?)?;
    let tripod = gromov_tripod(&tri).map_err(Failure::library)?;
    let image = embed_triangle(&tri).map_err(Failure::library)?;
    let report = verify_bilipschitz(&tri, &image).map_err(Failure::library)?;
    run.manifest.pass = report.pass;
    run.write_json("embedding.json", &json!({ "tripod": tripod, "image": image, "report": report }))?;
    run.finish()
}

fn fill(a: FillArgs) -> Result<bool, Failure> {
    let mut run = Run::new("fill", &a.io.out)?;
    let eps = positive("eps", a.eps)?;
    run.param("eps", eps);
    run.param("format", a.format);
    let tri: DiscreteMetricTriangle<f64> = parse(&run.read(&a.io.input)?)?;
    let filled = fill_triangle(&tri, eps).map_err(Failure::library)?;
    let report = verify_filling(&tri, &filled).map_err(Failure::library)?;
    run.manifest.pass = report.pass;
    run.write_json_compact("filling.json", &filled)?;
    run.write_json("filling_report.json", &report)?;
    if a.format == Format::Obj {
        let obj = to_obj(&filled.complex).map_err(Failure::library)?;
        run.write_bytes("filling.obj", obj.as_bytes())?;
    }
    run.finish()
}

/// What `approx` keeps of a level: the counts and audits, not the complex.
#[derive(Debug, Serialize)]
struct LevelSummary<'a> {
    level: usize,
    eps: f64,
    nodes: usize,
    edges: usize,
    faces: usize,
    area: f64,
    part_areas: &'a [f64],
    euler_characteristic: i64,
    boundary_cycles: Option<usize>,
    fills: &'a [FillAccounting<f64>],
}

fn summary(level: usize, a: &SurfaceApproximation<f64>) -> LevelSummary<'_> {
    LevelSummary {
        level,
        eps: a.eps,
        nodes: a.complex.skeleton.node_count(),
        edges: a.complex.skeleton.edge_count(),
        faces: a.complex.faces.len(),
        area: a.complex.area(),
        part_areas: &a.part_areas,
        euler_characteristic: a.complex.euler_characteristic(),
        boundary_cycles: a.complex.boundary_cycles(),
        fills: &a.fills,
    }
}

fn approx(a: ApproxArgs) -> Result<bool, Failure> {
    let mut run = Run::new("approx", &a.io.out)?;
    let eps = positive("eps", a.eps)?;
    if a.levels == 0 {
        return Err(Failure::input("InvalidInput", "--levels must be at least 1"));
    }
    run.param("eps", eps);
    run.param("levels", a.levels);
    run.param("samples", a.samples);
    run.param("format", a.format);
    run.manifest.seed = Some(a.seed);
    let x: TriangulatedMetricSurface<f64> = parse(&run.read(&a.io.input)?)?;
    let mut estimates = Vec::new();
    let mut pass = true;
    for k in 0..a.levels {
        let e = eps / f64::powi(2.0, k as i32);
        let approx = approximate_surface(&x, e).map_err(Failure::library)?;
        let cert = verify_isometry(&x, &approx, a.samples, a.seed);
        pass &= cert.pass;
        estimates.push(json!({ "level": k, "eps": e, "eps_estimate": cert.eps_estimate, "pass": cert.pass }));
        run.write_json(&format!("level_{k}.json"), &summary(k, &approx))?;
        run.write_json(&format!("certificate_{k}.json"), &cert)?;
        if a.format == Format::Obj {
            let obj = to_obj(&approx.complex).map_err(Failure::library)?;
            run.write_bytes(&format!("level_{k}.obj"), obj.as_bytes())?;
        }
    }
    let monotone = estimates
        .windows(2)
        .all(|w| w[1]["eps_estimate"].as_f64() <= w[0]["eps_estimate"].as_f64());
    run.write_json("levels.json", &json!({ "levels": estimates, "non_increasing": monotone }))?;
    run.manifest.pass = pass;
    run.finish()
}

/// The level-0 eps an earlier `approx` run recorded in `dir`.
fn recorded_eps(dir: &Path) -> Option<f64> {
    let bytes = std::fs::read(dir.join("approx.manifest.json")).ok()?;
    let m: manifest::RunManifest = serde_json::from_slice(&bytes).ok()?;
    (m.command == "approx").then(|| m.parameters.get("eps")?.as_f64()).flatten()
}

fn verify(a: VerifyArgs) -> Result<bool, Failure> {
    let eps = match a.eps.or_else(|| recorded_eps(&a.io.out)) {
        Some(e) => positive("eps", e)?,
        None => return Err(Failure::input("InvalidInput", "--eps is required")),
    };
    let mut run = Run::new("verify", &a.io.out)?;
    run.param("eps", eps);
    let bytes = run.read(&a.io.input)?;
    let value: serde_json::Value = parse(&bytes)?;
    if value.get("triangles").is_some() {
        run.param("samples", a.samples);
        run.manifest.seed = Some(a.seed);
        let x: TriangulatedMetricSurface<f64> = parse(&bytes)?;
        let approx = approximate_surface(&x, eps).map_err(Failure::library)?;
        let cert = verify_isometry(&x, &approx, a.samples, a.seed);
        run.manifest.pass = cert.pass;
        run.write_json("certificate.json", &cert)?;
    } else {
        let tri: DiscreteMetricTriangle<f64> = parse(&bytes)?;
        let filled = fill_triangle(&tri, eps).map_err(Failure::library)?;
        let report = verify_filling(&tri, &filled).map_err(Failure::library)?;
        run.manifest.pass = report.pass;
        run.write_json("filling_report.json", &report)?;
    }
    run.finish()
}

fn modulus(a: ModulusArgs) -> Result<bool, Failure> {
    let mut run = Run::new("modulus", &a.out)?;
    let mut problem: ModulusProblem<f64> = match (&a.input, &a.graph, &a.connect) {
        (Some(p), _, _) => parse(&run.read(p)?)?,
        (None, Some(g), Some(sets)) => {
            let graph: MetricGraph<f64> = parse(&run.read(g)?)?;
            let from: Vec<usize> = parse(&run.read(&sets[0])?)?;
            let to: Vec<usize> = parse(&run.read(&sets[1])?)?;
            ModulusProblem::connect(graph, from, to, 1e-6)
        }
        _ => return Err(Failure::input("InvalidInput", "give --input, or --graph with --connect")),
    };
    if let Some(t) = a.tol {
        problem.tol = positive("tol", t)?;
    }
    run.param("tol", problem.tol);
    match discrete_modulus(&problem) {
        Ok(r) => run.write_json("result.json", &r)?,
        Err(ModulusError::Unconverged { iterations, lower, upper }) => {
            run.manifest.pass = false;
            run.write_json(
                "result.json",
                &json!({ "unconverged": { "iterations": iterations, "lower": lower, "upper": upper } }),
            )?;
        }
        Err(e) => return Err(Failure::library(e)),
    }
    run.finish()
}

fn fixture(a: FixtureArgs) -> Result<bool, Failure> {
    let mut run = Run::new("fixture", &a.out)?;
    run.param("kind", &a.kind);
    run.param("n", a.n);
    run.param("samples_per_edge", a.samples_per_edge);
    let name = format!("{}.json", a.kind);
    if let Ok(kind) = a.kind.parse::<FixtureKind>() {
        let x: TriangulatedMetricSurface<f64> =
            generate_fixture(kind, a.n, a.samples_per_edge).map_err(Failure::library)?;
        run.write_json(&name, &x)?;
    } else if let Ok(family) = a.kind.parse::<TriangleFamily>() {
        let tri: DiscreteMetricTriangle<f64> = if a.random {
            run.param("random", true);
            run.manifest.seed = Some(a.seed);
            random_triangle(family, a.samples_per_edge, &mut ChaCha8Rng::seed_from_u64(a.seed))
        } else {
            fixture_triangle(family, a.samples_per_edge)
        }
        .map_err(Failure::library)?;
        run.write_json(&name, &tri)?;
    } else {
        let tol = positive("tol", a.tol)?;
        run.param("tol", tol);
        let problem = match a.kind.as_str() {
            "unit_square_grid" if a.n > 0 => unit_square_grid(a.n, tol),
            "round_annulus" if a.n > 0 => {
                run.param("radius", a.radius);
                if !(a.radius > 1.0) {
                    return Err(Failure::input("InvalidInput", "--radius must exceed 1"));
                }
                round_annulus(a.radius, a.n, 4 * a.n, tol)
            }
            "unit_square_grid" | "round_annulus" => {
                return Err(Failure::input("InvalidInput", "--n must be at least 1"))
            }
            other => return Err(Failure::input("InvalidInput", format!("unknown fixture kind {other:?}"))),
        };
        run.write_json(&name, &problem)?;
    }
    run.finish()
}

fn export(a: ExportArgs) -> Result<bool, Failure> {
    let format = match (a.format, a.svg, a.obj) {
        (Some(f), _, _) => f,
        (None, true, _) => Format::Svg,
        (None, _, true) => Format::Obj,
        _ => Format::Svg,
    };
    let mut run = Run::new("export", &a.io.out)?;
    run.param("format", format);
    let bytes = run.read(&a.io.input)?;
    match format {
        Format::Svg => {
            let tri: DiscreteMetricTriangle<f64> = parse(&bytes)?;
            let image = embed_triangle(&tri).map_err(Failure::library)?;
            let svg = embedding_svg(&tri, &image).map_err(Failure::library)?;
            run.write_bytes("embedding.svg", svg.as_bytes())?;
        }
        Format::Obj => {
            let filled: FilledTriangle<f64> = parse(&bytes)?;
            let obj = to_obj(&filled.complex).map_err(Failure::library)?;
            run.write_bytes("filling.obj", obj.as_bytes())?;
        }
        Format::Json => {
            return Err(Failure::input("InvalidInput", "export writes svg or obj"));
        }
    }
    run.finish()
}

fn main() -> ExitCode {
    // SAFETY: sets a process-wide allocator option before any large allocation.
    unsafe { libmimalloc_sys::mi_option_set(libmimalloc_sys::mi_option_large_os_pages, 1) };
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let message = e.render().to_string();
            eprintln!("{}", json!({ "error": "Usage", "message": message.trim_end() }));
            return ExitCode::from(2);
        }
    };
    let result = match cli.command {
        Command::Embed(a) => embed(a),
        Command::Fill(a) => fill(a),
        Command::Approx(a) => approx(a),
        Command::Verify(a) => verify(a),
        Command::Modulus(a) => modulus(a),
        Command::Fixture(a) => fixture(a),
        Command::Export(a) => export(a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("{}", json!({ "error": "CertificateFailed", "message": "a certificate did not pass; see the artifacts" }));
            ExitCode::from(1)
        }
        Err(f) => {
            eprintln!("{}", json!({ "error": f.kind, "message": f.message }));
            ExitCode::from(f.code)
        }
    }
}
