//! Orchestration from a configuration to deterministic output files.
//!
//! Every numeric CSV uses `{:.16e}` and a header row with units, so identical
//! configurations give byte-identical files. `summary.json` also carries
//! wall-clock timings and is not byte-stable.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde_json::{json, Value};

use crate::config::{Mode, RunConfig};
use crate::error::{Error, Result};
use crate::oracle::{compare, solve_frontfix, ComparisonReport, FrontFixGrid};
use crate::physical::{residual_report, PhysicalSolution, ResidualReport};
use crate::problem::{validate_problem, C1Choice, TransformedProblem, ValidationReport};
use crate::volterra::{compute_constants, extend_solution, ConstantsLedger, ExtensionPlan, Extended, SegmentHorizon};

/// Upper limit on chained segments for one run.
pub const MAX_SEGMENTS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    ValidationFailure,
    NonConvergence,
    Failure,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::Failure => 1,
            Status::ValidationFailure => 2,
            Status::NonConvergence => 3,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::Failure => "failure",
            Status::ValidationFailure => "validation-failure",
            Status::NonConvergence => "non-convergence",
        }
    }
}

/// Exit class of a library error.
pub fn classify(e: &Error) -> Status {
    match e {
        Error::Config { .. } | Error::UnknownKeys(_) | Error::InvalidInput(_) | Error::InvalidProfile(_) | Error::Constraint(_) | Error::Kernel(_) => {
            Status::ValidationFailure
        }
        Error::NoConvergence { .. }
        | Error::HorizonExceeded { .. }
        | Error::DegenerateGeometry(_)
        | Error::OutOfDomain { .. }
        | Error::InversionSingularity { .. }
        | Error::BlowUp { .. }
        | Error::InsufficientData(_) => Status::NonConvergence,
        Error::Io(_) => Status::Failure,
    }
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub status: Status,
    pub errors: Vec<String>,
    pub artifacts: Vec<PathBuf>,
}

struct Writer {
    dir: PathBuf,
    artifacts: Vec<PathBuf>,
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

impl Writer {
    fn create(&mut self, name: &str) -> Result<BufWriter<File>> {
        let path = self.dir.join(name);
        let f = File::create(&path)?;
        self.artifacts.push(path);
        Ok(BufWriter::new(f))
    }

    fn csv<const K: usize>(&mut self, name: &str, header: [&str; K], rows: impl IntoIterator<Item = [f64; K]>) -> Result<()> {
        let mut w = self.create(name)?;
        writeln!(w, "{}", header.join(","))?;
        for r in rows {
            let line: Vec<String> = r.iter().map(|v| num(*v)).collect();
            writeln!(w, "{}", line.join(","))?;
        }
        w.flush()?;
        Ok(())
    }
}

fn write_constants(w: &mut Writer, l: &ConstantsLedger) -> Result<()> {
    let mut out = w.create("constants.csv")?;
    writeln!(out, "name,value,unit")?;
    let mut row = |name: &str, v: f64, unit: &str| writeln!(out, "{name},{},{unit}", num(v));
    for (k, e) in l.e.iter().enumerate() {
        row(&format!("E{k}"), *e, "-")?;
    }
    for (k, f) in l.f.iter().enumerate() {
        row(&format!("F{k}"), *f, "-")?;
    }
    row("M", l.m, "1/length")?;
    row("H", l.h, "-")?;
    row("R", l.r, "-")?;
    row("jump", l.jump, "-")?;
    row("D", l.d, "length^2/time")?;
    row("beta", l.beta, "-")?;
    row("C1", l.c1, "length")?;
    row("C2", l.c2, "length")?;
    row("g_norm", l.g_norm, "length/time")?;
    for q in l.inequalities() {
        row(&format!("bound:{}", q.name), q.bound(), "time")?;
    }
    row("sigma_star", l.sigma_star, "time")?;
    out.flush()?;
    Ok(())
}

fn ledger_json(l: &ConstantsLedger) -> Value {
    let bounds: serde_json::Map<String, Value> = l.inequalities().iter().map(|q| (q.name.to_string(), json!(q.bound()))).collect();
    json!({ "sigma_star": l.sigma_star, "M": l.m, "R": l.r, "H": l.h, "C1": l.c1, "C2": l.c2, "g_norm": l.g_norm, "bounds": bounds })
}

fn plan_for(cfg: &RunConfig, ledger: &ConstantsLedger) -> Result<ExtensionPlan> {
    let (segments, horizon) = match (cfg.horizon, cfg.sigma) {
        (None, None) => (1, SegmentHorizon::Certified),
        (None, Some(s)) => (1, SegmentHorizon::Fixed(s)),
        (Some(t), s) => {
            let step = s.unwrap_or(ledger.sigma_star);
            let k = (t / step * (1.0 - 1e-12)).ceil().max(1.0);
            if k > MAX_SEGMENTS as f64 {
                return Err(Error::InvalidInput(format!("horizon {t} needs {k:e} segments of length {step:e}; the limit is {MAX_SEGMENTS}")));
            }
            (k as usize, SegmentHorizon::Fixed(t / k))
        }
    };
    Ok(ExtensionPlan { segments, steps: cfg.steps, horizon, opts: cfg.opts })
}

fn write_solution(w: &mut Writer, ext: &Extended, ny: usize, summary: &mut serde_json::Map<String, Value>) -> Result<PhysicalSolution> {
    w.csv("boundaries.csv", ["t[time]", "y0[length]", "y1[length]", "C[-]"], ext.boundaries())?;
    let (mids, nodes) = ext.densities();
    // w0 at a midpoint is the mean of its two nodes within a segment.
    let mut rows = Vec::with_capacity(mids.len());
    let mut node_at = 0;
    for (k, seg) in ext.segments.iter().enumerate() {
        if k > 0 {
            node_at -= 1;
        }
        for i in 0..seg.solver.grid.n {
            let m = mids[rows.len()];
            rows.push([m[0], m[1], m[2], 0.5 * (nodes[node_at + i][1] + nodes[node_at + i + 1][1])]);
        }
        node_at += seg.solver.grid.n + 1;
    }
    w.csv("densities.csv", ["t[time]", "chi1[1/length]", "chi2[-]", "w0[-]"], rows)?;

    let mut slices = Vec::new();
    let mut residuals = Vec::new();
    let mut seg_json = Vec::new();
    for (k, seg) in ext.segments.iter().enumerate() {
        let local = seg.local_physical(ny)?;
        let rep = residual_report(&local, &seg.solver, &seg.state)?;
        let skip = usize::from(k > 0);
        for (i, sl) in local.slices.iter().enumerate().skip(skip) {
            residuals.push(residual_row(seg.t0 + sl.t, &rep, i));
        }
        seg_json.push(segment_json(seg, &rep));
        slices.extend(local.slices.into_iter().skip(skip).map(|s| seg.to_global(s)));
    }
    let sol = PhysicalSolution { slices };
    w.csv(
        "residuals.csv",
        [
            "t[time]",
            "neumann[length/time]",
            "dirichlet[-]",
            "stefan[length/time]",
            "pde[1/time]",
            "pde_interior[1/time]",
            "face_flux[-]",
            "face_flux_alt[-]",
            "front_trace[-]",
            "front_consistency[length]",
        ],
        residuals,
    )?;
    w.csv("front.csv", ["t[time]", "s[length]"], sol.slices.iter().map(|s| [s.t, s.front()]))?;
    w.csv("solution.csv", ["t[time]", "x[length]", "u[-]"], sol.slices.iter().flat_map(|s| s.x.iter().zip(&s.u).map(move |(x, u)| [s.t, *x, *u])))?;
    summary.insert("segments".into(), Value::Array(seg_json));
    Ok(sol)
}

fn residual_row(t: f64, r: &ResidualReport, i: usize) -> [f64; 10] {
    let pde = r.pde.as_ref().map_or(f64::NAN, |v| v[i]);
    let pde_interior = r.pde_interior.as_ref().map_or(f64::NAN, |v| v[i]);
    [t, r.neumann[i], r.dirichlet[i], r.stefan[i], pde, pde_interior, r.face_flux[i], r.face_flux_alt[i], r.front_trace[i], r.front_consistency[i]]
}

fn segment_json(seg: &crate::volterra::Segment, rep: &ResidualReport) -> Value {
    json!({
        "t0": seg.t0,
        "sigma": seg.solver.grid.sigma,
        "steps": seg.solver.grid.n,
        "sigma_star": seg.ledger.sigma_star,
        "outer_residuals": seg.state.outer_residuals,
        "inner_increments": seg.state.increments,
        "inner_ratios": seg.state.ratios(),
        "residual_sup": {
            "neumann": rep.sup_neumann(),
            "dirichlet": rep.sup_dirichlet(),
            "stefan": rep.sup_stefan(),
            "pde": rep.sup_pde(),
            "pde_interior": rep.sup_pde_interior(),
            "face_flux": rep.sup_face_flux(),
            "face_flux_alt": rep.sup_face_flux_alt(),
            "front_trace": rep.sup_front_trace(),
            "front_consistency": rep.sup_front_consistency(),
        },
    })
}

fn write_comparison(w: &mut Writer, c: &ComparisonReport) -> Result<()> {
    let rows = (0..c.times.len()).map(|k| [c.times[k], c.s_integral[k], c.s_oracle[k], (c.s_integral[k] - c.s_oracle[k]).abs(), c.u_linf[k]]);
    w.csv("comparison.csv", ["t[time]", "s_integral[length]", "s_oracle[length]", "s_abs_err[length]", "u_linf[-]"], rows)
}

fn validation_json(v: &ValidationReport) -> Value {
    let checks: Vec<Value> = v.checks.iter().map(|c| json!({ "name": c.name, "ok": c.passed, "defect": c.defect })).collect();
    json!({ "passed": v.passed(), "flux_norm": v.flux_norm, "flux_smooth": v.flux_smooth, "checks": checks })
}

/// Run the configured mode, writing artifacts into `cfg.out`.
///
/// Solver failures are reported through [`RunReport::status`] with whatever
/// artifacts were completed; only failures to write are returned as errors.
pub fn run_pipeline(cfg: &RunConfig) -> Result<RunReport> {
    std::fs::create_dir_all(&cfg.out)?;
    let mut w = Writer { dir: cfg.out.clone(), artifacts: Vec::new() };
    let mut summary = serde_json::Map::new();
    summary.insert("mode".into(), json!(cfg.mode.name()));
    summary.insert(
        "config".into(),
        json!({ "D": cfg.d, "beta": cfg.beta, "b": cfg.b, "N": cfg.steps, "Ny": cfg.slice_points, "sigma": cfg.sigma, "horizon": cfg.horizon, "Nx": cfg.nx, "safety": cfg.safety }),
    );
    let started = Instant::now();
    let mut errors = Vec::new();
    let status = match stages(cfg, &mut w, &mut summary) {
        Ok(()) => Status::Ok,
        Err(e) => {
            errors.push(e.to_string());
            if let Error::NoConvergence { ratios, .. } = &e {
                summary.insert("failed_ratios".into(), json!(ratios));
            }
            classify(&e)
        }
    };
    summary.insert("status".into(), json!(status.name()));
    summary.insert("exit_code".into(), json!(status.exit_code()));
    summary.insert("errors".into(), json!(errors));
    summary.insert("elapsed_seconds".into(), json!(started.elapsed().as_secs_f64()));
    let path = cfg.out.join("summary.json");
    std::fs::write(&path, serde_json::to_string_pretty(&Value::Object(summary)).map_err(|e| Error::Io(e.into()))? + "\n")?;
    w.artifacts.push(path);
    Ok(RunReport { status, errors, artifacts: w.artifacts })
}

fn stages(cfg: &RunConfig, w: &mut Writer, summary: &mut serde_json::Map<String, Value>) -> Result<()> {
    let p = cfg.problem()?;
    let report = validate_problem(&p);
    summary.insert("validation".into(), validation_json(&report));
    if !report.passed() {
        let names: Vec<&str> = report.failures().map(|c| c.name).collect();
        return Err(Error::Constraint(format!("problem validation failed: {}", names.join(", "))));
    }
    if cfg.mode == Mode::Validate {
        return Ok(());
    }
    let c1 = cfg.c1.map_or(C1Choice::Auto, C1Choice::Fixed);
    let tp = TransformedProblem::build(&p, c1, cfg.table_points)?;
    let ledger = compute_constants(&tp)?;
    write_constants(w, &ledger)?;
    summary.insert("constants".into(), ledger_json(&ledger));
    if cfg.mode == Mode::Constants {
        return Ok(());
    }
    let plan = plan_for(cfg, &ledger)?;
    summary.insert("plan".into(), json!({ "segments": plan.segments, "steps": plan.steps }));
    let solve_started = Instant::now();
    let (ext, failure) = match extend_solution(tp, p.flux.clone(), &plan) {
        Ok(ext) => (ext, None),
        Err(f) => (f.completed, Some(f.source)),
    };
    summary.insert("solve_seconds".into(), json!(solve_started.elapsed().as_secs_f64()));
    if ext.segments.is_empty() {
        return Err(failure.expect("an empty chain always carries its error"));
    }
    let sol = write_solution(w, &ext, cfg.slice_points, summary)?;
    if let Some(e) = failure {
        return Err(e);
    }
    if cfg.mode == Mode::SolveOracle {
        let times = sol.times();
        let oracle = solve_frontfix(&p, FrontFixGrid { nx: cfg.nx, safety: cfg.safety }, &times)?;
        let c = compare(&sol, &oracle)?;
        write_comparison(w, &c)?;
        summary.insert(
            "comparison".into(),
            json!({ "s_sup": c.s_sup, "s_l2": c.s_l2, "s_rel_sup": c.s_rel_sup, "u_linf_sup": c.u_linf_sup(), "oracle_steps": oracle.steps, "min_principle_defect": oracle.min_principle_defect }),
        );
    }
    Ok(())
}

/// Record an error raised before a configuration could be run.
pub fn write_failure_summary(out: &Path, mode: Mode, e: &Error) -> Result<PathBuf> {
    std::fs::create_dir_all(out)?;
    let status = classify(e);
    let summary = json!({ "mode": mode.name(), "status": status.name(), "exit_code": status.exit_code(), "errors": [e.to_string()] });
    let path = out.join("summary.json");
    std::fs::write(&path, serde_json::to_string_pretty(&summary).map_err(|e| Error::Io(e.into()))? + "\n")?;
    Ok(path)
}

/// Apply command-line overrides to a parsed configuration.
pub fn apply_overrides(cfg: &mut RunConfig, mode: Mode, out: Option<&Path>, sigma: Option<f64>, grid: Option<usize>) -> Result<()> {
    cfg.mode = mode;
    if let Some(o) = out {
        cfg.out = o.to_path_buf();
    }
    if let Some(s) = sigma {
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::Constraint(format!("sigma must be positive and finite, got {s}")));
        }
        cfg.sigma = Some(s);
    }
    if let Some(n) = grid {
        if n < crate::quadrature::TimeGrid::MIN_NODES {
            return Err(Error::Constraint(format!("grid must be at least {}, got {n}", crate::quadrature::TimeGrid::MIN_NODES)));
        }
        cfg.steps = n;
    }
    Ok(())
}
