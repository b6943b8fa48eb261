//! Batch commands: each run loads one patch, performs one computation,
//! and writes its artifacts atomically into an output directory.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::config::{catalog_names, PatchConfig};
use crate::error::{Error, Result};
use crate::flatness::flatness_report;
use crate::forms::closedness_report;
use crate::geodesic::{
    closed_form_criterion, el_reversibility_residual, integrate_geodesic, spray_coefficients, trace_reversibility_defect,
    STEPS_PER_UNIT_TIME,
};
use crate::metric::{DirectionPoint, Variant};
use crate::quasimetric::{
    distance, distance_oracle_grid, quasi_axioms_report, triangle_orientation_report, weightability_report,
};
use crate::report::{max_abs, CheckReport};
use crate::sampling::Sampler;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Eval,
    Geodesic,
    Distance,
    CheckReversible,
    CheckFlat,
    CheckWeightable,
    Triangle,
    Catalog,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Eval => "eval",
            Command::Geodesic => "geodesic",
            Command::Distance => "distance",
            Command::CheckReversible => "check-reversible",
            Command::CheckFlat => "check-flat",
            Command::CheckWeightable => "check-weightable",
            Command::Triangle => "triangle",
            Command::Catalog => "catalog",
        }
    }
}

/// Threshold override applied to every report of a run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub threshold: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: Command,
    /// Absent only for `catalog`.
    pub patch: Option<PatchConfig>,
    pub seed: u64,
    pub tolerances: Tolerances,
    pub output: PathBuf,
    /// Sample count for checks; each command has its own default.
    pub samples: Option<usize>,
    /// RK4 steps; each command has its own default.
    pub steps: Option<usize>,
    /// Closedness scan or oracle grid size.
    pub grid: Option<usize>,
    pub at: Option<Vec<f64>>,
    pub to: Option<Vec<f64>>,
    pub dir: Option<Vec<f64>>,
    pub t_end: Option<f64>,
}

impl RunManifest {
    pub fn new(command: Command, patch: Option<PatchConfig>, output: impl Into<PathBuf>) -> Self {
        RunManifest {
            command,
            patch,
            seed: 0,
            tolerances: Tolerances::default(),
            output: output.into(),
            samples: None,
            steps: None,
            grid: None,
            at: None,
            to: None,
            dir: None,
            t_end: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    /// All checks passed.
    pub pass: bool,
    /// The JSON document written to `<output>/<command>.json`.
    pub summary: Value,
    pub artifacts: Vec<PathBuf>,
}

/// JSON body for a failed run.
pub fn error_json(e: &Error) -> Value {
    json!({ "error": { "kind": e.kind(), "message": e.to_string() } })
}

/// Writes via a temporary sibling and a rename.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let io = |e: std::io::Error| Error::Invalid(format!("cannot write {}: {e}", path.display()));
    let tmp = path.with_extension(format!("{}.tmp", path.extension().and_then(|e| e.to_str()).unwrap_or("")));
    let mut f = fs::File::create(&tmp).map_err(io)?;
    f.write_all(contents.as_bytes()).map_err(io)?;
    f.sync_all().map_err(io)?;
    fs::rename(&tmp, path).map_err(io)
}

fn rejudge(report: &mut CheckReport, tol: &Tolerances) {
    if let Some(t) = tol.threshold {
        report.threshold = t;
        report.pass = report.max_residual <= t && report.details.iter().all(|d| d.pass != Some(false));
    }
}

fn point(v: &Option<Vec<f64>>, flag: &str, n: usize) -> Result<Vec<f64>> {
    let p = v.clone().ok_or_else(|| Error::Invalid(format!("--{flag} is required for this command")))?;
    if p.len() != n {
        return Err(Error::Dimension { expected: n, got: p.len() });
    }
    Ok(p)
}

fn matrix_json(m: &nalgebra::DMatrix<f64>) -> Value {
    json!((0..m.nrows()).map(|i| m.row(i).iter().copied().collect::<Vec<_>>()).collect::<Vec<_>>())
}

pub fn run_command(manifest: &RunManifest) -> Result<RunOutcome> {
    let m = manifest;
    fs::create_dir_all(&m.output)
        .map_err(|e| Error::Invalid(format!("cannot create {}: {e}", m.output.display())))?;
    let mut artifacts = Vec::new();
    let mut write = |name: &str, text: &str| -> Result<()> {
        let path = m.output.join(name);
        write_atomic(&path, text)?;
        artifacts.push(path);
        Ok(())
    };
    if m.command == Command::Catalog {
        let summary = json!({ "command": "catalog", "patches": catalog_names() });
        write("catalog.json", &serde_json::to_string_pretty(&summary).expect("json"))?;
        return Ok(RunOutcome { pass: true, summary, artifacts });
    }
    let cfg = m.patch.as_ref().ok_or_else(|| Error::Invalid("--patch is required for this command".into()))?;
    let patch = cfg.build()?;
    let n = patch.dim();
    let mut sampler = Sampler::new(m.seed);
    let mut reports: Vec<CheckReport> = Vec::new();
    let mut values = json!({});

    match m.command {
        Command::Catalog => unreachable!(),
        Command::Eval => {
            let dp = DirectionPoint::new(point(&m.at, "at", n)?, point(&m.dir, "dir", n)?);
            let g = patch.fundamental_tensor(&dp)?;
            let min_eig = g.min_eigenvalue();
            values = json!({
                "x": dp.x, "y": dp.y,
                "alpha": patch.alpha(&dp)?,
                "beta": patch.beta(&dp)?,
                "F": patch.f_value(&dp)?,
                "F_reverse": patch.f_reverse(&dp)?,
                "F_quartic": patch.finsler(&dp, Variant::Quartic)?,
                "g": matrix_json(&g.g),
                "g_min_eigenvalue": min_eig,
                "spray": spray_coefficients(&patch, &dp)?.g,
            });
            reports.push(CheckReport::below("strong_convexity", 1, -min_eig, 0.0));
        }
        Command::Geodesic => {
            let t_end = m.t_end.unwrap_or(1.0);
            let steps = m.steps.unwrap_or((STEPS_PER_UNIT_TIME as f64 * t_end).ceil().max(1.0) as usize);
            let path = integrate_geodesic(&patch, &point(&m.at, "at", n)?, &point(&m.dir, "dir", n)?, t_end, steps)?;
            write("geodesic.csv", &path.to_csv())?;
            values = json!({
                "t_end": t_end, "steps": steps, "truncated": path.truncated,
                "length": path.length(), "speed_drift": path.speed_drift(), "end": path.end().x,
            });
        }
        Command::Distance => {
            let (x, y) = (point(&m.at, "at", n)?, point(&m.to, "to", n)?);
            let d = distance(&patch, &x, &y)?;
            write("distance.csv", &d.to_csv(&patch)?)?;
            values = json!({
                "from": x, "to": y, "value": d.value, "method": d.method,
                "converged": d.converged, "descent_value": d.descent_value,
            });
            if let Some(grid) = m.grid {
                let o = distance_oracle_grid(&patch, &x, &y, grid)?;
                values["oracle"] = json!({ "value": o.value, "grid": grid, "snapped": o.snapped });
            }
            if !d.converged {
                reports.push(CheckReport::below("distance_converged", 1, 1.0, 0.0));
            }
        }
        Command::CheckReversible => {
            let samples = sampler.direction_points(&patch, m.samples.unwrap_or(8));
            reports.push(closedness_report(&patch, m.grid.unwrap_or(9))?);
            let (mut crit, mut el) = (0.0f64, 0.0f64);
            for dp in &samples {
                crit = closed_form_criterion(&patch, dp)?.iter().fold(crit, |a, v| max_abs(a, *v));
                el = el_reversibility_residual(&patch, dp)?.iter().fold(el, |a, v| max_abs(a, *v));
            }
            reports.push(CheckReport::below("reversibility_criterion", samples.len(), crit, 1e-8));
            reports.push(CheckReport::below("euler_lagrange_residual", samples.len(), el, 1e-8));
            let trace: Vec<_> = samples.iter().take(4).cloned().collect();
            reports.push(trace_reversibility_defect(&patch, &trace, 2.0, m.steps.unwrap_or(1024))?);
        }
        Command::CheckFlat => {
            let samples = sampler.direction_points(&patch, m.samples.unwrap_or(16));
            let r = flatness_report(&patch, &samples)?;
            reports.push(r.report);
        }
        Command::CheckWeightable => {
            let count = m.samples.unwrap_or(10);
            let triples = sampler.triples(&patch, count);
            let pairs = sampler.pairs(&patch, count);
            let base = m.at.clone().map_or_else(|| Ok(patch.center()), |a| point(&Some(a), "at", n))?;
            reports.push(quasi_axioms_report(&patch, &triples)?);
            reports.push(weightability_report(&patch, &base, &pairs)?);
        }
        Command::Triangle => {
            let triples = sampler.triples(&patch, m.samples.unwrap_or(10));
            reports.push(triangle_orientation_report(&patch, &triples)?);
        }
    }
    for r in &mut reports {
        rejudge(r, &m.tolerances);
    }
    let pass = reports.iter().all(|r| r.pass);
    let summary = json!({
        "command": m.command.name(),
        "patch": patch.name(),
        "seed": m.seed,
        "pass": pass,
        "values": values,
        "reports": reports,
    });
    write(&format!("{}.json", m.command.name()), &serde_json::to_string_pretty(&summary).expect("json"))?;
    Ok(RunOutcome { pass, summary, artifacts })
}
