//! Run configuration: a TOML file with a fixed set of sections and keys.
//!
//! ```toml
//! mode = "solve"            # solve | solve+oracle | constants | validate
//! out = "out"
//!
//! [problem]
//! D = 1.0
//! beta = 1.0
//! b = 1.0
//! flux = { kind = "linear", a = 0.05, c = 0.05 }
//! u0 = { kind = "quadratic", alpha = 0.05 }
//!
//! [solver]
//! N = 256
//! sigma = 0.1
//!
//! [oracle]
//! Nx = 200
//! ```
//!
//! Relative table paths resolve against the directory of the file.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::problem::{Flux, FluxForm, PhysicalProblem, Profile, DEFAULT_TABLE_POINTS};
use crate::table::Table;
use crate::volterra::{JumpRule, SolverOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
pub enum Mode {
    #[serde(rename = "solve")]
    Solve,
    #[serde(rename = "solve+oracle")]
    SolveOracle,
    #[serde(rename = "constants")]
    Constants,
    #[serde(rename = "validate")]
    Validate,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Solve => "solve",
            Mode::SolveOracle => "solve+oracle",
            Mode::Constants => "constants",
            Mode::Validate => "validate",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum FluxSpec {
    Constant { value: f64 },
    Linear { a: f64, c: f64 },
    Exponential { a: f64, c: f64 },
    Table { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ProfileSpec {
    /// `u0 = value`, defaulting to `beta`.
    Constant { value: Option<f64> },
    /// `u0(b) = beta`, curvature set by `alpha`, slope at the origin
    /// defaulting to the compatible `g(0) / D`.
    Quadratic { alpha: f64, slope0: Option<f64> },
    Cosine { amp: f64 },
    Table { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mode: Mode,
    pub out: PathBuf,
    pub d: f64,
    pub beta: f64,
    pub b: f64,
    pub flux: FluxSpec,
    pub u0: ProfileSpec,
    /// Time steps per segment.
    pub steps: usize,
    /// Points per inverted slice.
    pub slice_points: usize,
    /// Samples of the transformed initial data.
    pub table_points: usize,
    pub opts: SolverOptions,
    pub c1: Option<f64>,
    /// Segment length; the certified horizon when absent.
    pub sigma: Option<f64>,
    /// Total time, reached by chained segments; one segment when absent.
    pub horizon: Option<f64>,
    pub nx: usize,
    pub safety: f64,
    /// Directory that relative table paths resolve against.
    pub base_dir: PathBuf,
}

const TOP_KEYS: [&str; 5] = ["mode", "out", "problem", "solver", "oracle"];
const PROBLEM_KEYS: [&str; 5] = ["D", "beta", "b", "flux", "u0"];
const SOLVER_KEYS: [&str; 13] =
    ["N", "Ny", "table_points", "inner_tol", "inner_max", "outer_tol", "outer_max", "relax", "near_cells", "jump", "C1", "sigma", "horizon"];
const ORACLE_KEYS: [&str; 2] = ["Nx", "safety"];

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    mode: Option<Mode>,
    out: Option<PathBuf>,
    problem: RawProblem,
    #[serde(default)]
    solver: RawSolver,
    #[serde(default)]
    oracle: RawOracle,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProblem {
    #[serde(rename = "D")]
    d: f64,
    beta: f64,
    b: f64,
    flux: RawFlux,
    u0: ProfileSpec,
}

/// A bare number is a constant flux.
#[derive(Deserialize)]
#[serde(untagged)]
enum RawFlux {
    Value(f64),
    Spec(FluxSpec),
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawSolver {
    #[serde(rename = "N")]
    n: Option<usize>,
    #[serde(rename = "Ny")]
    ny: Option<usize>,
    table_points: Option<usize>,
    inner_tol: Option<f64>,
    inner_max: Option<usize>,
    outer_tol: Option<f64>,
    outer_max: Option<usize>,
    relax: Option<f64>,
    near_cells: Option<usize>,
    jump: Option<String>,
    #[serde(rename = "C1")]
    c1: Option<f64>,
    sigma: Option<f64>,
    horizon: Option<f64>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawOracle {
    #[serde(rename = "Nx")]
    nx: Option<usize>,
    safety: Option<f64>,
}

pub const DEFAULT_STEPS: usize = 256;
pub const DEFAULT_SLICE_POINTS: usize = 65;
pub const DEFAULT_NX: usize = 200;
pub const DEFAULT_SAFETY: f64 = 0.4;

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].bytes().filter(|&c| c == b'\n').count() + 1
}

/// Every key outside the schema, as `section.key`.
fn unknown_keys(table: &toml::Table) -> Vec<String> {
    let mut out = Vec::new();
    for (k, v) in table {
        if !TOP_KEYS.contains(&k.as_str()) {
            out.push(k.clone());
            continue;
        }
        let allowed: &[&str] = match k.as_str() {
            "problem" => &PROBLEM_KEYS,
            "solver" => &SOLVER_KEYS,
            "oracle" => &ORACLE_KEYS,
            _ => continue,
        };
        if let Some(sub) = v.as_table() {
            out.extend(sub.keys().filter(|s| !allowed.contains(&s.as_str())).map(|s| format!("{k}.{s}")));
        }
    }
    out
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Constraint(format!("{name} must be positive and finite, got {v}")))
    }
}

fn at_least(name: &str, v: usize, min: usize) -> Result<usize> {
    if v >= min {
        Ok(v)
    } else {
        Err(Error::Constraint(format!("{name} must be at least {min}, got {v}")))
    }
}

/// Parse configuration text; `base_dir` anchors relative table paths.
pub fn parse_config_str(text: &str, base_dir: &Path) -> Result<RunConfig> {
    let table: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Config {
        line: e.span().map(|s| line_of(text, s.start)),
        message: e.message().to_string(),
    })?;
    let unknown = unknown_keys(&table);
    if !unknown.is_empty() {
        return Err(Error::UnknownKeys(unknown));
    }
    let raw: RawFile = toml::from_str(text).map_err(|e| Error::Config {
        line: e.span().map(|s| line_of(text, s.start)),
        message: e.message().to_string(),
    })?;
    let p = raw.problem;
    if !(p.d > 0.0 && p.d < 2.0) {
        return Err(Error::Constraint(format!("0<D<2 is required, got D = {}", p.d)));
    }
    let beta = positive("beta", p.beta)?;
    let b = positive("b", p.b)?;
    let s = raw.solver;
    let defaults = SolverOptions::default();
    let jump = match s.jump.as_deref() {
        None | Some("exact") => JumpRule::Exact,
        Some("scaled") => JumpRule::Scaled,
        Some(other) => return Err(Error::Constraint(format!("jump must be \"exact\" or \"scaled\", got \"{other}\""))),
    };
    let relax = s.relax.unwrap_or(defaults.relax);
    if !(relax > 0.0 && relax <= 1.0) {
        return Err(Error::Constraint(format!("relax must lie in (0, 1], got {relax}")));
    }
    let opts = SolverOptions {
        inner_tol: positive("inner_tol", s.inner_tol.unwrap_or(defaults.inner_tol))?,
        inner_max: at_least("inner_max", s.inner_max.unwrap_or(defaults.inner_max), 1)?,
        outer_tol: positive("outer_tol", s.outer_tol.unwrap_or(defaults.outer_tol))?,
        outer_max: at_least("outer_max", s.outer_max.unwrap_or(defaults.outer_max), 1)?,
        relax,
        slice_points: at_least("Ny", s.ny.unwrap_or(DEFAULT_SLICE_POINTS), 5)?,
        jump,
        near_cells: at_least("near_cells", s.near_cells.unwrap_or(defaults.near_cells), 1)?,
    };
    let safety = raw.oracle.safety.unwrap_or(DEFAULT_SAFETY);
    if !(safety > 0.0 && safety <= 1.0) {
        return Err(Error::Constraint(format!("safety must lie in (0, 1], got {safety}")));
    }
    let flux = match p.flux {
        RawFlux::Value(value) => FluxSpec::Constant { value },
        RawFlux::Spec(f) => f,
    };
    let cfg = RunConfig {
        mode: raw.mode.unwrap_or(Mode::Solve),
        out: raw.out.unwrap_or_else(|| PathBuf::from("out")),
        d: p.d,
        beta,
        b,
        flux,
        u0: p.u0,
        steps: at_least("N", s.n.unwrap_or(DEFAULT_STEPS), crate::quadrature::TimeGrid::MIN_NODES)?,
        slice_points: opts.slice_points,
        table_points: at_least("table_points", s.table_points.unwrap_or(DEFAULT_TABLE_POINTS), 5)?,
        opts,
        c1: s.c1.map(|v| positive("C1", v)).transpose()?,
        sigma: s.sigma.map(|v| positive("sigma", v)).transpose()?,
        horizon: s.horizon.map(|v| positive("horizon", v)).transpose()?,
        nx: at_least("Nx", raw.oracle.nx.unwrap_or(DEFAULT_NX), 16)?,
        safety,
        base_dir: base_dir.to_path_buf(),
    };
    for path in cfg.table_paths() {
        if !path.is_file() {
            return Err(Error::InvalidInput(format!("table file {} does not exist", path.display())));
        }
    }
    Ok(cfg)
}

/// Read and parse a configuration file.
pub fn parse_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    parse_config_str(&text, &base)
}

impl RunConfig {
    fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    /// Table files the configuration refers to.
    pub fn table_paths(&self) -> Vec<PathBuf> {
        let mut v = Vec::new();
        if let FluxSpec::Table { path } = &self.flux {
            v.push(self.resolve(path));
        }
        if let ProfileSpec::Table { path } = &self.u0 {
            v.push(self.resolve(path));
        }
        v
    }

    pub fn flux(&self) -> Result<Flux> {
        let form = match &self.flux {
            FluxSpec::Constant { value } => FluxForm::Constant { value: *value },
            FluxSpec::Linear { a, c } => FluxForm::Linear { a: *a, c: *c },
            FluxSpec::Exponential { a, c } => FluxForm::Exponential { a: *a, c: *c },
            FluxSpec::Table { path } => FluxForm::Tabulated(Table::load(&self.resolve(path))?),
        };
        Flux::new(form)
    }

    pub fn problem(&self) -> Result<PhysicalProblem> {
        let flux = self.flux()?;
        let u0 = match &self.u0 {
            ProfileSpec::Constant { value } => Profile::Constant { value: value.unwrap_or(self.beta) },
            ProfileSpec::Quadratic { alpha, slope0 } => {
                Profile::quadratic(self.beta, self.b, *alpha, slope0.unwrap_or(flux.eval(0.0) / self.d))
            }
            ProfileSpec::Cosine { amp } => Profile::Cosine { beta: self.beta, b: self.b, amp: *amp },
            ProfileSpec::Table { path } => Profile::Tabulated(Table::load(&self.resolve(path))?),
        };
        Ok(PhysicalProblem { d: self.d, beta: self.beta, b: self.b, flux, u0 })
    }
}
