//! Command-line front end.
//!
//! Exit codes: 0 success, 1 input error, 2 config error, 3 solver failure,
//! 4 bound violation.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::bounds::{self, classify_stability, BoundReport, HypothesisReport, Stability, Tolerances, Verdict};
use crate::config::{self, ConfigError, GenSpec, OperatorKind, RunConfig};
use crate::immersion::{self, GeometryField};
use crate::mesh::{write_off, MeshError, TriMesh};
use crate::operators::{self, OperatorPencil};
use crate::report::to_json_string;
use crate::spectrum::{self, IdentityResidual, SpectralResult, SpectrumError};

#[derive(Debug, Parser)]
#[command(name = "wjacobi", version, about = "Weighted Jacobi operator toolkit for closed triangle meshes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a test surface as OFF
    Gen {
        #[command(subcommand)]
        shape: Shape,
        /// Output file (stdout if omitted)
        #[arg(short = 'o', long = "output", global = true)]
        output: Option<PathBuf>,
    },
    /// Per-vertex geometry and a JSON summary
    Analyze(RunArgs),
    /// First eigenpair, α invariant and spectral identity
    Spectrum(RunArgs),
    /// Evaluate every bound and corollary
    Check(RunArgs),
}

#[derive(Debug, Subcommand)]
enum Shape {
    Icosphere {
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        #[arg(long, default_value_t = 4)]
        level: u32,
    },
    Torus {
        #[arg(long = "R", default_value_t = 2.0)]
        major: f64,
        #[arg(long = "r", default_value_t = 1.0)]
        minor: f64,
        #[arg(long, default_value_t = 64)]
        nu: usize,
        #[arg(long, default_value_t = 32)]
        nv: usize,
    },
    Ellipsoid {
        #[arg(long, default_value_t = 2.0)]
        a: f64,
        #[arg(long, default_value_t = 1.0)]
        b: f64,
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        #[arg(long, default_value_t = 4)]
        level: u32,
    },
    Slab {
        #[arg(long, default_value_t = 2)]
        holes: usize,
    },
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Mesh file (.off/.obj) or generator spec such as icosphere:2,4
    #[arg(long)]
    mesh: Option<String>,
    /// zero | gaussian | half_sq_dist | poly:i,j,k,c,... | logaffine:s,a1,a2,a3,b
    #[arg(long)]
    density: Option<String>,
    #[arg(long)]
    m: Option<f64>,
    /// Override the sampled curvature constant c
    #[arg(long, allow_hyphen_values = true)]
    c: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    maxiter: Option<usize>,
    /// Directory for report, CSV and matrix files
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also compute the k smallest eigenvalues
    #[arg(long)]
    k: Option<usize>,
    /// Write the per-vertex CSV
    #[arg(long)]
    csv: bool,
    /// Write S, M and A in coordinate format
    #[arg(long)]
    dump_matrices: bool,
    /// jacobi | laplace
    #[arg(long)]
    operator: Option<String>,
    #[arg(long)]
    tol_hf: Option<f64>,
    #[arg(long)]
    tol_bound: Option<f64>,
    #[arg(long)]
    tol_zero: Option<f64>,
    /// Flat key = value config file; flags override its entries
    #[arg(long)]
    config: Option<PathBuf>,
}

impl RunArgs {
    fn overrides(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        let mut put = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                m.insert(k.to_string(), v);
            }
        };
        put("mesh", self.mesh.clone());
        put("density", self.density.clone());
        put("m", self.m.map(|x| x.to_string()));
        put("c", self.c.map(|x| x.to_string()));
        put("tol", self.tol.map(|x| x.to_string()));
        put("maxiter", self.maxiter.map(|x| x.to_string()));
        put("out", self.out.as_ref().map(|p| p.display().to_string()));
        put("k", self.k.map(|x| x.to_string()));
        put("csv", self.csv.then(|| "true".to_string()));
        put("dump_matrices", self.dump_matrices.then(|| "true".to_string()));
        put("operator", self.operator.clone());
        put("tol_hf", self.tol_hf.map(|x| x.to_string()));
        put("tol_bound", self.tol_bound.map(|x| x.to_string()));
        put("tol_zero", self.tol_zero.map(|x| x.to_string()));
        m
    }

    fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut map = match &self.config {
            Some(p) => config::read_config_file(p)?,
            None => BTreeMap::new(),
        };
        map.extend(self.overrides());
        Ok(RunConfig::from_map(&map, config::seed_from_env()?)?)
    }
}

#[derive(Debug)]
pub enum CliError {
    Input(String),
    Config(String),
    Solver(String),
    Violation(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 1,
            CliError::Config(_) => 2,
            CliError::Solver(_) => 3,
            CliError::Violation(_) => 4,
        }
    }
    fn message(&self) -> &str {
        match self {
            CliError::Input(m) | CliError::Config(m) | CliError::Solver(m) | CliError::Violation(m) => m,
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e.0)
    }
}

impl From<MeshError> for CliError {
    fn from(e: MeshError) -> Self {
        match e {
            MeshError::InvalidParameter(_) => CliError::Config(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<SpectrumError> for CliError {
    fn from(e: SpectrumError) -> Self {
        CliError::Solver(e.to_string())
    }
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Input(format!("{}: {e}", path.display()))
}

fn input<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Input(e.to_string())
}

/// Parses `args` (including the program name), runs, and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let result = match cli.command {
        Command::Gen { shape, output } => cmd_gen(&shape, output.as_deref()),
        Command::Analyze(a) => a.resolve().and_then(|c| cmd_analyze(&c)),
        Command::Spectrum(a) => a.resolve().and_then(|c| cmd_spectrum(&c)),
        Command::Check(a) => a.resolve().and_then(|c| cmd_check(&c)),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("wjacobi: {}", e.message());
            e.exit_code()
        }
    }
}

fn cmd_gen(shape: &Shape, output: Option<&Path>) -> Result<(), CliError> {
    let spec = match *shape {
        Shape::Icosphere { radius, level } => GenSpec::Icosphere { radius, level },
        Shape::Torus { major, minor, nu, nv } => GenSpec::Torus { major, minor, nu, nv },
        Shape::Ellipsoid { a, b, c, level } => GenSpec::Ellipsoid { a, b, c, level },
        Shape::Slab { holes } => GenSpec::Slab { holes },
    };
    let mesh = spec.build()?;
    match output {
        Some(p) => {
            let f = File::create(p).map_err(|e| io_err(p, e))?;
            write_off(&mesh, BufWriter::new(f)).map_err(|e| io_err(p, e))
        }
        None => {
            let stdout = std::io::stdout();
            write_off(&mesh, stdout.lock()).map_err(input)
        }
    }
}

#[derive(Serialize)]
struct MeshSummary {
    source: String,
    vertices: usize,
    faces: usize,
    edges: usize,
    chi: i64,
    genus: i64,
}

#[derive(Serialize)]
struct GaussBonnet {
    sum_angle_defects: f64,
    two_pi_chi: f64,
    error: f64,
}

#[derive(Serialize)]
struct FieldStats {
    mean: f64,
    std: f64,
    min: f64,
    max: f64,
    mean_abs: f64,
    max_abs: f64,
}

fn field_stats(values: &[f64], weights: &[f64]) -> FieldStats {
    let w: f64 = weights.iter().sum();
    let mean = values.iter().zip(weights).map(|(v, w)| v * w).sum::<f64>() / w;
    let var = values.iter().zip(weights).map(|(v, w)| w * (v - mean).powi(2)).sum::<f64>() / w;
    FieldStats {
        mean,
        std: var.sqrt(),
        min: values.iter().copied().fold(f64::INFINITY, f64::min),
        max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        mean_abs: values.iter().zip(weights).map(|(v, w)| v.abs() * w).sum::<f64>() / w,
        max_abs: values.iter().map(|v| v.abs()).fold(0.0, f64::max),
    }
}

#[derive(Serialize)]
struct GeometryReport {
    command: &'static str,
    mesh: MeshSummary,
    density: String,
    m: f64,
    area: f64,
    weighted_area: f64,
    gauss_bonnet: GaussBonnet,
    /// dv_f-weighted statistics
    hf: FieldStats,
    shrinker_residual: FieldStats,
    phi2_clamp_deficit: f64,
    negative_cotan_edges: usize,
}

struct Pipeline {
    mesh: TriMesh,
    field: GeometryField,
    summary: MeshSummary,
}

fn load(cfg: &RunConfig) -> Result<Pipeline, CliError> {
    let mesh = cfg.mesh.load()?;
    let topo = mesh.euler_genus()?;
    let field = immersion::geometry_field(&mesh, &cfg.density, &cfg.params).map_err(input)?;
    let summary = MeshSummary {
        source: cfg.mesh_spec.clone(),
        vertices: mesh.num_vertices(),
        faces: mesh.num_faces(),
        edges: mesh.num_edges(),
        chi: topo.chi,
        genus: topo.genus,
    };
    Ok(Pipeline { mesh, field, summary })
}

fn out_path(cfg: &RunConfig, name: &str) -> Result<Option<PathBuf>, CliError> {
    match &cfg.out {
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
            Ok(Some(dir.join(name)))
        }
        None => Ok(None),
    }
}

fn artifact_dir(cfg: &RunConfig) -> Result<PathBuf, CliError> {
    Ok(out_path(cfg, "")?.unwrap_or_else(|| PathBuf::from(".")))
}

fn emit_json<T: Serialize>(cfg: &RunConfig, name: &str, value: &T) -> Result<(), CliError> {
    let text = to_json_string(value).map_err(input)?;
    if let Some(p) = out_path(cfg, name)? {
        std::fs::write(&p, &text).map_err(|e| io_err(&p, e))?;
    }
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    lock.write_all(text.as_bytes()).and_then(|_| lock.flush()).map_err(input)
}

fn write_csv(cfg: &RunConfig, field: &GeometryField, rho: Option<&[f64]>) -> Result<(), CliError> {
    if !cfg.emit_csv {
        return Ok(());
    }
    let p = artifact_dir(cfg)?.join("vertices.csv");
    let f = File::create(&p).map_err(|e| io_err(&p, e))?;
    immersion::write_vertex_csv(field, rho, BufWriter::new(f)).map_err(|e| io_err(&p, e))
}

fn write_matrices(cfg: &RunConfig, pencil: &OperatorPencil) -> Result<(), CliError> {
    if !cfg.emit_matrices {
        return Ok(());
    }
    let dir = artifact_dir(cfg)?;
    for (name, m) in [("S.coo", pencil.stiffness().clone()), ("M.coo", pencil.mass_matrix()), ("A.coo", pencil.matrix().clone())] {
        let p = dir.join(name);
        let f = File::create(&p).map_err(|e| io_err(&p, e))?;
        operators::write_coo(&m, BufWriter::new(f)).map_err(|e| io_err(&p, e))?;
    }
    Ok(())
}

fn cmd_analyze(cfg: &RunConfig) -> Result<(), CliError> {
    let Pipeline { mesh, field, summary } = load(cfg)?;
    let stiffness = operators::weighted_stiffness(&mesh, &cfg.density).map_err(input)?;
    let defect = mesh.angle_defect_sum();
    let two_pi_chi = 2.0 * std::f64::consts::PI * summary.chi as f64;
    let w = field.w_areas();
    let hf: Vec<f64> = field.vertices.iter().map(|v| v.hf).collect();
    let sr: Vec<f64> = field.vertices.iter().map(|v| v.shrinker_res).collect();
    let report = GeometryReport {
        command: "analyze",
        density: cfg.density_spec.clone(),
        m: cfg.params.m(),
        area: field.total_area,
        weighted_area: field.weighted_area,
        gauss_bonnet: GaussBonnet { sum_angle_defects: defect, two_pi_chi, error: (defect - two_pi_chi).abs() },
        hf: field_stats(&hf, &w),
        shrinker_residual: field_stats(&sr, &w),
        phi2_clamp_deficit: field.phi2_clamp_deficit,
        negative_cotan_edges: stiffness.negative_edges,
        mesh: summary,
    };
    write_csv(cfg, &field, None)?;
    emit_json(cfg, "analyze.json", &report)
}

#[derive(Serialize)]
struct SolverSummary {
    tol: f64,
    maxiter: usize,
    seed: u64,
    iterations: usize,
}

#[derive(Serialize)]
struct SpectrumReport {
    command: &'static str,
    mesh: MeshSummary,
    density: String,
    m: f64,
    operator: &'static str,
    lambda1: f64,
    lambda2: f64,
    gap: f64,
    residual: f64,
    rayleigh: f64,
    alpha: f64,
    spectral_identity: IdentitySummary,
    stability: Stability,
    rho_min: f64,
    rho_max: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    eigenvalues: Option<Vec<f64>>,
    solver: SolverSummary,
}

#[derive(Serialize)]
struct IdentitySummary {
    lambda1: f64,
    predicted: f64,
    abs: f64,
    rel: f64,
}

impl From<IdentityResidual> for IdentitySummary {
    fn from(r: IdentityResidual) -> Self {
        IdentitySummary { lambda1: r.lambda1, predicted: r.predicted, abs: r.abs, rel: r.rel }
    }
}

fn solve(cfg: &RunConfig, p: &Pipeline, kind: OperatorKind) -> Result<(OperatorPencil, SpectralResult), CliError> {
    let pencil = match kind {
        OperatorKind::Jacobi => operators::assemble_jacobi_pencil(&p.mesh, &p.field, &cfg.density),
        OperatorKind::Laplace => operators::assemble_laplace_pencil(&p.mesh, &p.field, &cfg.density),
    }
    .map_err(input)?;
    write_matrices(cfg, &pencil)?;
    let result = spectrum::smallest_eigenpair(&pencil, &cfg.solver)?;
    Ok((pencil, result))
}

fn cmd_spectrum(cfg: &RunConfig) -> Result<(), CliError> {
    let p = load(cfg)?;
    let (pencil, r) = solve(cfg, &p, cfg.operator)?;
    let eigenvalues = cfg.k.map(|k| spectrum::small_spectrum(&pencil, k, &cfg.solver)).transpose()?;
    write_csv(cfg, &p.field, Some(&r.rho))?;
    let identity = spectrum::spectral_identity_residual(&pencil, &r, &p.field);
    let report = SpectrumReport {
        command: "spectrum",
        density: cfg.density_spec.clone(),
        m: cfg.params.m(),
        operator: cfg.operator.name(),
        lambda1: r.lambda1,
        lambda2: r.lambda2,
        gap: r.gap(),
        residual: r.residual,
        rayleigh: r.rayleigh,
        alpha: r.alpha,
        spectral_identity: identity.into(),
        stability: classify_stability(r.lambda1, cfg.solver.tol),
        rho_min: r.rho.iter().copied().fold(f64::INFINITY, f64::min),
        rho_max: r.rho.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        eigenvalues,
        solver: SolverSummary {
            tol: cfg.solver.tol,
            maxiter: cfg.solver.maxiter,
            seed: cfg.solver.seed,
            iterations: r.iterations,
        },
        mesh: p.summary,
    };
    emit_json(cfg, "spectrum.json", &report)
}

#[derive(Serialize)]
struct CheckReport<'a> {
    command: &'static str,
    mesh: MeshSummary,
    density: String,
    lambda1: f64,
    residual: f64,
    stability: Stability,
    hypotheses: &'a HypothesisReport,
    tolerances: Tolerances,
    reports: &'a [BoundReport],
}

fn cmd_check(cfg: &RunConfig) -> Result<(), CliError> {
    let p = load(cfg)?;
    let (_, r) = solve(cfg, &p, OperatorKind::Jacobi)?;
    write_csv(cfg, &p.field, Some(&r.rho))?;
    let hyp = bounds::estimate_hypotheses(&p.field, &cfg.density, &cfg.params, cfg.tolerances.hf, cfg.c_override)
        .map_err(input)?;
    let reports = bounds::check_all(&p.mesh, &p.field, &cfg.density, &cfg.params, &r, &hyp, &cfg.tolerances)
        .map_err(input)?;
    let failed: Vec<String> = reports
        .iter()
        .filter(|x| x.verdict == Verdict::Fail)
        .map(|x| serde_json::to_value(x.theorem).map(|v| v.as_str().unwrap_or("?").to_string()).unwrap_or_default())
        .collect();
    let report = CheckReport {
        command: "check",
        density: cfg.density_spec.clone(),
        lambda1: r.lambda1,
        residual: r.residual,
        stability: classify_stability(r.lambda1, cfg.solver.tol),
        hypotheses: &hyp,
        tolerances: cfg.tolerances,
        reports: &reports,
        mesh: p.summary,
    };
    emit_json(cfg, "check.json", &report)?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Violation(format!("bound violated: {}", failed.join(", "))))
    }
}
