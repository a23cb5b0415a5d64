//! simulate → witness → measure → verdict, and the files a run leaves behind.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::{MeasuresSection, ModelDesc, RunConfig, ValidatedRun};
use crate::dynamics::{evolve, Backend, TimeGrid, Trajectory};
use crate::error::Error;
use crate::io::{diagnostics_csv, export_trajectory, witness_csv, write_file};
use crate::measures::{divisibility_verdict, measure_report, rhp_series, MeasureReport, SearchConfig, Verdict};
use crate::operator::{CMatrix, HermitianOperator};
use crate::witness::{series, ViolationInterval, WitnessSeries, WitnessSpec};

pub const REPORT_FILE: &str = "report.json";
pub const TRAJECTORY_FILE: &str = "trajectory.json";
pub const DIAGNOSTICS_FILE: &str = "diagnostics.csv";

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

/// An error tagged with the pipeline stage that raised it.
#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub operation: &'static str,
    pub error: Error,
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} failed: {}", self.operation, self.error)
    }
}

impl std::error::Error for Failure {}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        exit_code(&self.error)
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NotPsd { .. }
        | Error::OutOfHorizon { .. }
        | Error::KernelUnsolved { .. }
        | Error::SingularRates { .. }
        | Error::Integration { .. }
        | Error::SingularPropagator { .. }
        | Error::DegenerateAverage { .. }
        | Error::NotInterior { .. }
        | Error::NonFinite { .. }
        | Error::UnmatchedSubspace { .. } => EXIT_NUMERIC,
        _ => EXIT_VALIDATION,
    }
}

pub type StageResult<T> = std::result::Result<T, Failure>;

fn stage<T>(operation: &'static str, r: crate::Result<T>) -> StageResult<T> {
    r.map_err(|error| Failure { operation, error })
}

/// Command-line overrides of configuration values.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub backend: Option<Backend>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut RunConfig) {
        if let Some(b) = self.backend {
            cfg.model.backend = b;
        }
        if let Some(s) = self.seed {
            cfg.measures.search.rng_seed = s;
        }
        if let Some(o) = &self.out {
            cfg.output.dir = o.clone();
        }
    }
}

pub fn load(path: &Path, overrides: &Overrides) -> StageResult<ValidatedRun> {
    let mut cfg = stage("config", RunConfig::load(path))?;
    overrides.apply(&mut cfg);
    stage("config", cfg.validate())
}

pub fn simulate(run: &ValidatedRun) -> StageResult<Trajectory> {
    stage("simulate", evolve(&run.model, &run.grid, run.config.model.backend, &run.config.solver))
}

/// What [`analyze`] computes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Stages {
    pub witnesses: bool,
    pub verdict: bool,
    pub measures: bool,
}

impl Stages {
    pub const ALL: Stages = Stages { witnesses: true, verdict: true, measures: true };
}

#[derive(Clone, Debug, Default)]
pub struct Analysis {
    pub witnesses: Vec<(String, WitnessSeries)>,
    pub verdict: Option<Verdict>,
    /// `g(t)` at the nodes, when the trajectory has a generator.
    pub g: Option<Vec<f64>>,
    pub measures: Option<MeasureReport>,
}

pub fn analyze(
    traj: &Trajectory,
    witnesses: &[(String, WitnessSpec)],
    measures: &MeasuresSection,
    stages: Stages,
) -> StageResult<Analysis> {
    let mut out = Analysis::default();
    if stages.witnesses {
        for (label, spec) in witnesses {
            out.witnesses.push((label.clone(), stage("witness", series(traj, spec))?));
        }
    }
    if stages.verdict {
        out.verdict = Some(stage("verdict", divisibility_verdict(traj, measures.verdict_tolerance))?);
        if let Some(model) = traj.model() {
            let grid = stage("rhp", TimeGrid::from_times(traj.times().to_vec()))?;
            out.g = Some(stage("rhp", rhp_series(model, &grid))?);
        }
    }
    if stages.measures && measures.enabled {
        out.measures = Some(stage("measure", measure_report(traj, &measures.search))?);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MatrixJson {
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl MatrixJson {
    pub fn new(m: &CMatrix) -> Self {
        let rows = |f: fn(&num_complex::Complex64) -> f64| {
            (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| f(&m[(i, j)])).collect()).collect()
        };
        Self { re: rows(|z| z.re), im: rows(|z| z.im) }
    }

    fn of(op: &HermitianOperator) -> Self {
        Self::new(op.matrix())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WitnessMeasureJson {
    pub value: f64,
    /// The value comes from a finite search.
    pub lower_bound: bool,
    pub witness: Option<MatrixJson>,
    pub violation_intervals: Vec<ViolationInterval>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BlpMeasureJson {
    pub value: f64,
    pub lower_bound: bool,
    pub pair: Option<[MatrixJson; 2]>,
    pub violation_intervals: Vec<ViolationInterval>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MeasuresJson {
    pub n_witness: WitnessMeasureJson,
    pub n_rhp: Option<f64>,
    pub rhp_intervals: Vec<ViolationInterval>,
    pub n_blp: BlpMeasureJson,
    pub search: SearchConfig,
}

impl MeasuresJson {
    pub fn new(m: &MeasureReport, search: &SearchConfig) -> Self {
        Self {
            n_witness: WitnessMeasureJson {
                value: m.n_witness,
                lower_bound: true,
                witness: m.witness.as_ref().map(MatrixJson::of),
                violation_intervals: m.witness_intervals.clone(),
            },
            n_rhp: m.n_rhp,
            rhp_intervals: m.rhp_intervals.clone(),
            n_blp: BlpMeasureJson {
                value: m.n_blp,
                lower_bound: true,
                pair: m.blp_pair.as_ref().map(|(a, b)| [MatrixJson::of(a.operator()), MatrixJson::of(b.operator())]),
                violation_intervals: m.blp_intervals.clone(),
            },
            search: *search,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WitnessJson {
    pub label: String,
    pub kind: &'static str,
    pub file: String,
    pub violation_intervals: Vec<ViolationInterval>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Tool {
    pub name: &'static str,
    pub version: &'static str,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridJson {
    pub t_start: f64,
    pub t_max: f64,
    pub nodes: usize,
}

/// Everything in `report.json`. No wall-clock fields, so identical inputs
/// give identical bytes.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub tool: Tool,
    pub command: String,
    pub seed: u64,
    /// `None` for imported trajectories.
    pub backend: Option<Backend>,
    pub model: Option<ModelDesc>,
    pub grid: GridJson,
    pub verdict: Option<Verdict>,
    pub measures: Option<MeasuresJson>,
    pub witnesses: Vec<WitnessJson>,
    pub files: Vec<String>,
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("plain data serializes");
        s.push('\n');
        s
    }
}

/// Inputs of [`write_outputs`] besides the analysis itself.
pub struct OutputContext<'a> {
    pub command: &'a str,
    pub dir: &'a Path,
    pub search: &'a SearchConfig,
    pub backend: Option<Backend>,
    pub model: Option<&'a ModelDesc>,
    /// Write the trajectory file too.
    pub trajectory: bool,
}

/// Writes CSVs, optionally the trajectory, and `report.json` into `ctx.dir`.
pub fn write_outputs(traj: &Trajectory, analysis: &Analysis, ctx: &OutputContext<'_>) -> StageResult<Report> {
    let dir = ctx.dir;
    stage(
        "output",
        std::fs::create_dir_all(dir).map_err(|e| Error::Io { path: dir.display().to_string(), message: e.to_string() }),
    )?;
    let mut files = Vec::new();
    if ctx.trajectory {
        stage("output", export_trajectory(&dir.join(TRAJECTORY_FILE), traj, ctx.model))?;
        files.push(TRAJECTORY_FILE.to_string());
    }
    let mut witnesses = Vec::new();
    for (label, s) in &analysis.witnesses {
        let file = format!("witness_{label}.csv");
        stage("output", write_file(&dir.join(&file), &witness_csv(s)))?;
        witnesses.push(WitnessJson {
            label: label.clone(),
            kind: s.spec.name(),
            file: file.clone(),
            violation_intervals: s.violation_intervals.clone(),
        });
        files.push(file);
    }
    if let Some(v) = &analysis.verdict {
        stage(
            "output",
            write_file(&dir.join(DIAGNOSTICS_FILE), &diagnostics_csv(traj.times(), analysis.g.as_deref(), v)),
        )?;
        files.push(DIAGNOSTICS_FILE.to_string());
    }
    files.push(REPORT_FILE.to_string());
    let report = Report {
        tool: Tool { name: env!("CARGO_PKG_NAME"), version: env!("CARGO_PKG_VERSION") },
        command: ctx.command.to_string(),
        seed: ctx.search.rng_seed,
        backend: ctx.backend,
        model: ctx.model.cloned(),
        grid: GridJson { t_start: traj.times()[0], t_max: traj.t_max(), nodes: traj.len() },
        verdict: analysis.verdict.clone(),
        measures: analysis.measures.as_ref().map(|m| MeasuresJson::new(m, ctx.search)),
        witnesses,
        files,
    };
    stage("output", write_file(&dir.join(REPORT_FILE), &report.to_json()))?;
    Ok(report)
}

/// The full pipeline for a validated configuration.
pub fn run(run: &ValidatedRun) -> StageResult<Report> {
    let traj = simulate(run)?;
    let analysis = analyze(&traj, &run.witnesses, &run.config.measures, Stages::ALL)?;
    let ctx = OutputContext {
        command: "report",
        dir: &run.config.output.dir,
        search: &run.config.measures.search,
        backend: Some(run.config.model.backend),
        model: Some(&run.model_desc),
        trajectory: run.config.output.trajectory,
    };
    write_outputs(&traj, &analysis, &ctx)
}
