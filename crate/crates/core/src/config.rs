//! Run configuration: flat `key = value` files layered under command-line
//! overrides, plus mesh-source specs.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use thiserror::Error;

use crate::ambient::{AmbientParams, DensityModel};
use crate::bounds::Tolerances;
use crate::mesh::{self, MeshError, MeshFormat, TriMesh};
use crate::spectrum::{SolverOptions, DEFAULT_MAXITER, DEFAULT_TOL, MAX_SMALL_SPECTRUM};

#[derive(Debug, Error)]
#[error("{0}")]
pub struct ConfigError(pub String);

fn cfg_err(msg: impl Into<String>) -> ConfigError {
    ConfigError(msg.into())
}

/// Built-in surface generators.
#[derive(Debug, Clone, PartialEq)]
pub enum GenSpec {
    Icosphere { radius: f64, level: u32 },
    Torus { major: f64, minor: f64, nu: usize, nv: usize },
    Ellipsoid { a: f64, b: f64, c: f64, level: u32 },
    Slab { holes: usize },
}

impl GenSpec {
    pub fn build(&self) -> Result<TriMesh, MeshError> {
        match *self {
            GenSpec::Icosphere { radius, level } => mesh::gen_icosphere(radius, level),
            GenSpec::Torus { major, minor, nu, nv } => mesh::gen_torus(major, minor, nu, nv),
            GenSpec::Ellipsoid { a, b, c, level } => mesh::gen_ellipsoid(a, b, c, level),
            GenSpec::Slab { holes } => mesh::gen_punctured_slab(holes),
        }
    }
}

fn parse_list<T: FromStr>(body: &str, n: usize, what: &str) -> Result<Vec<T>, ConfigError> {
    let parts: Vec<&str> = body.split(',').map(str::trim).collect();
    if parts.len() != n {
        return Err(cfg_err(format!("{what} needs {n} comma-separated values, got '{body}'")));
    }
    parts
        .iter()
        .map(|p| p.parse().map_err(|_| cfg_err(format!("invalid value '{p}' in {what} spec"))))
        .collect()
}

impl FromStr for GenSpec {
    type Err = ConfigError;

    /// `icosphere:r,level`, `torus:R,r,nu,nv`, `ellipsoid:a,b,c,level`, `slab:holes`.
    fn from_str(s: &str) -> Result<Self, ConfigError> {
        let (name, body) = s.split_once(':').ok_or_else(|| cfg_err(format!("not a generator spec: '{s}'")))?;
        Ok(match name {
            "icosphere" => {
                let v: Vec<f64> = parse_list(body, 2, "icosphere")?;
                GenSpec::Icosphere { radius: v[0], level: as_count(v[1], "level")? as u32 }
            }
            "torus" => {
                let v: Vec<f64> = parse_list(body, 4, "torus")?;
                GenSpec::Torus { major: v[0], minor: v[1], nu: as_count(v[2], "nu")?, nv: as_count(v[3], "nv")? }
            }
            "ellipsoid" => {
                let v: Vec<f64> = parse_list(body, 4, "ellipsoid")?;
                GenSpec::Ellipsoid { a: v[0], b: v[1], c: v[2], level: as_count(v[3], "level")? as u32 }
            }
            "slab" => {
                let v: Vec<usize> = parse_list(body, 1, "slab")?;
                GenSpec::Slab { holes: v[0] }
            }
            _ => return Err(cfg_err(format!("unknown generator '{name}'"))),
        })
    }
}

fn as_count(x: f64, what: &str) -> Result<usize, ConfigError> {
    if x >= 0.0 && x.fract() == 0.0 && x <= u32::MAX as f64 {
        Ok(x as usize)
    } else {
        Err(cfg_err(format!("{what} must be a non-negative integer, got {x}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MeshSource {
    Generated(GenSpec),
    File(PathBuf),
}

impl MeshSource {
    /// Generator spec if the prefix names a generator, otherwise a path.
    pub fn parse(s: &str) -> Result<MeshSource, ConfigError> {
        match s.split_once(':') {
            Some((name, _)) if ["icosphere", "torus", "ellipsoid", "slab"].contains(&name) => {
                Ok(MeshSource::Generated(s.parse()?))
            }
            _ => Ok(MeshSource::File(PathBuf::from(s))),
        }
    }

    pub fn load(&self) -> Result<TriMesh, MeshError> {
        match self {
            MeshSource::Generated(g) => g.build(),
            MeshSource::File(p) => {
                let format = MeshFormat::from_path(p).ok_or_else(|| {
                    MeshError::InvalidParameter(format!("unknown mesh extension: {}", p.display()))
                })?;
                mesh::load_mesh(p, format)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorKind {
    Jacobi,
    Laplace,
}

impl FromStr for OperatorKind {
    type Err = ConfigError;
    fn from_str(s: &str) -> Result<Self, ConfigError> {
        match s {
            "jacobi" => Ok(OperatorKind::Jacobi),
            "laplace" => Ok(OperatorKind::Laplace),
            _ => Err(cfg_err(format!("operator must be jacobi or laplace, got '{s}'"))),
        }
    }
}

impl OperatorKind {
    pub fn name(self) -> &'static str {
        match self {
            OperatorKind::Jacobi => "jacobi",
            OperatorKind::Laplace => "laplace",
        }
    }
}

pub const KEYS: &[&str] = &[
    "mesh",
    "density",
    "m",
    "c",
    "tol",
    "maxiter",
    "out",
    "k",
    "csv",
    "dump_matrices",
    "operator",
    "tol_hf",
    "tol_bound",
    "tol_zero",
];

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub mesh_spec: String,
    pub mesh: MeshSource,
    pub density_spec: String,
    pub density: DensityModel,
    pub params: AmbientParams,
    pub c_override: Option<f64>,
    pub solver: SolverOptions,
    pub out: Option<PathBuf>,
    pub k: Option<usize>,
    pub emit_csv: bool,
    pub emit_matrices: bool,
    pub operator: OperatorKind,
    pub tolerances: Tolerances,
}

/// Parses `key = value` lines; `#` starts a comment, `-` in keys reads as `_`.
pub fn parse_kv(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut map = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| cfg_err(format!("config line {}: expected key = value", i + 1)))?;
        let key = k.trim().replace('-', "_");
        if !KEYS.contains(&key.as_str()) {
            return Err(cfg_err(format!("config line {}: unknown key '{key}'", i + 1)));
        }
        map.insert(key, v.trim().to_string());
    }
    Ok(map)
}

pub fn read_config_file(path: &Path) -> Result<BTreeMap<String, String>, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| cfg_err(format!("{}: {e}", path.display())))?;
    parse_kv(&text)
}

fn num<T: FromStr>(map: &BTreeMap<String, String>, key: &str) -> Result<Option<T>, ConfigError> {
    map.get(key)
        .map(|v| v.parse().map_err(|_| cfg_err(format!("invalid value for {key}: '{v}'"))))
        .transpose()
}

fn flag(map: &BTreeMap<String, String>, key: &str) -> Result<bool, ConfigError> {
    match map.get(key).map(String::as_str) {
        None | Some("false") | Some("0") => Ok(false),
        Some("true") | Some("1") => Ok(true),
        Some(v) => Err(cfg_err(format!("invalid boolean for {key}: '{v}'"))),
    }
}

impl RunConfig {
    /// Builds a validated config from merged key/value pairs and a solver seed.
    pub fn from_map(map: &BTreeMap<String, String>, seed: u64) -> Result<RunConfig, ConfigError> {
        if let Some(bad) = map.keys().find(|k| !KEYS.contains(&k.as_str())) {
            return Err(cfg_err(format!("unknown key '{bad}'")));
        }
        let mesh_spec = map.get("mesh").cloned().ok_or_else(|| cfg_err("no mesh given (--mesh)"))?;
        let mesh = MeshSource::parse(&mesh_spec)?;
        let density_spec = map.get("density").cloned().unwrap_or_else(|| "zero".into());
        let density: DensityModel = density_spec.parse().map_err(|e| cfg_err(format!("{e}")))?;
        let m = num(map, "m")?.unwrap_or(1.0);
        let params = AmbientParams::new(m).map_err(|e| cfg_err(e.to_string()))?;
        let tol = num(map, "tol")?.unwrap_or(DEFAULT_TOL);
        if !(tol > 0.0 && tol <= 1e-4) {
            return Err(cfg_err(format!("tol must lie in (0, 1e-4], got {tol}")));
        }
        let maxiter = num(map, "maxiter")?.unwrap_or(DEFAULT_MAXITER);
        if maxiter == 0 {
            return Err(cfg_err("maxiter must be at least 1"));
        }
        let k: Option<usize> = num(map, "k")?;
        if let Some(k) = k {
            if k == 0 || k > MAX_SMALL_SPECTRUM {
                return Err(cfg_err(format!("k must lie in 1..={MAX_SMALL_SPECTRUM}, got {k}")));
            }
        }
        let defaults = Tolerances::default();
        let tolerances = Tolerances {
            hf: num(map, "tol_hf")?.unwrap_or(defaults.hf),
            bound: num(map, "tol_bound")?.unwrap_or(defaults.bound),
            zero: num(map, "tol_zero")?.unwrap_or(defaults.zero),
        };
        if !(tolerances.hf >= 0.0 && tolerances.bound >= 0.0 && tolerances.zero >= 0.0) {
            return Err(cfg_err("tolerances must be non-negative"));
        }
        Ok(RunConfig {
            mesh_spec,
            mesh,
            density_spec,
            density,
            params,
            c_override: num(map, "c")?,
            solver: SolverOptions { tol, maxiter, seed },
            out: map.get("out").map(PathBuf::from),
            k,
            emit_csv: flag(map, "csv")?,
            emit_matrices: flag(map, "dump_matrices")?,
            operator: map.get("operator").map(|s| s.parse()).transpose()?.unwrap_or(OperatorKind::Jacobi),
            tolerances,
        })
    }
}

/// Solver seed from `WJACOBI_SEED`, default 0.
pub fn seed_from_env() -> Result<u64, ConfigError> {
    match std::env::var("WJACOBI_SEED") {
        Ok(v) => v.trim().parse().map_err(|_| cfg_err(format!("WJACOBI_SEED must be an unsigned integer, got '{v}'"))),
        Err(_) => Ok(0),
    }
}
