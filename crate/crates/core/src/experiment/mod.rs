//! Experiment runner: datasets, per-seed runs, sweeps and CSV artifacts.

mod metrics;
mod settings;

use std::fmt;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::{Arc, Mutex};
use std::time::Instant;

use rayon::prelude::*;

use crate::baselines::{train_paced, train_vanilla, OrderingKind, PacingKind};
use crate::config::RclConfig;
use crate::curriculum::{train_rcl, CurriculumTrace};
use crate::error::{Error, Result};
use crate::graph::{format_real, load_graph, save_graph, Graph};
use crate::perturb::{inject_edges, AttackSpec};
use crate::synth::{empirical_homophily, generate, EdgeDifficulty, SynthParams};
use crate::training::RunMetrics;

pub use metrics::{
    group_of, mean_std, summary_csv, GroupSummary, MetricsRow, MetricsTable, METRICS_HEADER,
    SUMMARY_HEADER,
};
pub use settings::{parse_methods, parse_reals, parse_seeds, ExperimentConfig};

/// Environment variable holding the number of worker threads.
pub const WORKERS_ENV: &str = "RCL_WORKERS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Rcl,
    Vanilla,
    CurriculumLinear,
    CurriculumRoot,
    RandomLinear,
    RandomRoot,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::Rcl,
        Method::Vanilla,
        Method::CurriculumLinear,
        Method::CurriculumRoot,
        Method::RandomLinear,
        Method::RandomRoot,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Rcl => "rcl",
            Self::Vanilla => "vanilla",
            Self::CurriculumLinear => "curriculum-linear",
            Self::CurriculumRoot => "curriculum-root",
            Self::RandomLinear => "random-linear",
            Self::RandomRoot => "random-root",
        }
    }

    fn paced(self) -> Option<(OrderingKind, PacingKind)> {
        match self {
            Self::CurriculumLinear => Some((OrderingKind::Residual, PacingKind::Linear)),
            Self::CurriculumRoot => Some((OrderingKind::Residual, PacingKind::Root)),
            Self::RandomLinear => Some((OrderingKind::Random, PacingKind::Linear)),
            Self::RandomRoot => Some((OrderingKind::Random, PacingKind::Root)),
            Self::Rcl | Self::Vanilla => None,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::param(format!("unknown method {s:?}")))
    }
}

/// A graph plus the labels that end up in the metrics table.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub name: String,
    pub graph: Graph,
    pub difficulty: Option<EdgeDifficulty>,
    pub noise_ratio: f64,
}

impl Dataset {
    pub fn new(name: impl Into<String>, graph: Graph, difficulty: Option<EdgeDifficulty>) -> Self {
        Self {
            name: sanitize(&name.into()),
            graph,
            difficulty,
            noise_ratio: 0.0,
        }
    }

    /// Loads a graph file and, when present, its difficulty sidecar.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let graph = load_graph(path)?;
        let sidecar = sidecar_path(path);
        let difficulty = if sidecar.exists() {
            Some(EdgeDifficulty::load(&graph, &sidecar)?)
        } else {
            None
        };
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "dataset".into());
        Ok(Self::new(name, graph, difficulty))
    }

    pub fn synthetic(p: &SynthParams) -> Result<Self> {
        let (graph, difficulty) = generate(p)?;
        Ok(Self::new(format!("synth-h{}", format_real(p.homo)), graph, Some(difficulty)))
    }

    /// Randomly attacked copy; difficulty labels are recomputed when the
    /// original carried them.
    pub fn attacked(&self, ratio: f64, seed: u64) -> Result<Self> {
        let graph = inject_edges(&self.graph, &AttackSpec { ratio, seed })?;
        let difficulty = match self.difficulty {
            Some(_) => Some(EdgeDifficulty::from_graph(&graph)?),
            None => None,
        };
        Ok(Self {
            name: format!("{}-r{}", self.name, format_real(ratio)),
            graph,
            difficulty,
            noise_ratio: ratio,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        save_graph(&self.graph, path)?;
        if let Some(d) = &self.difficulty {
            d.save(&self.graph, sidecar_path(path))?;
        }
        Ok(())
    }

    pub fn homophily(&self) -> Option<f64> {
        empirical_homophily(&self.graph).ok()
    }
}

/// Where the difficulty labels of a graph file live.
pub fn sidecar_path(graph_path: &Path) -> PathBuf {
    graph_path.with_extension("difficulty")
}

fn sanitize(name: &str) -> String {
    name.chars()
        .map(|c| if c == ',' || c.is_whitespace() { '_' } else { c })
        .collect()
}

/// One (method, dataset, config, seed) run.
#[derive(Debug, Clone)]
pub struct Cell {
    pub run_id: String,
    pub method: Method,
    pub dataset: Arc<Dataset>,
    /// Carries the run seed.
    pub cfg: RclConfig,
}

impl Cell {
    /// `label` distinguishes cells of a sweep that share method and dataset.
    pub fn new(method: Method, dataset: Arc<Dataset>, cfg: RclConfig, label: Option<&str>) -> Self {
        let mut run_id = format!("{method}-{}", dataset.name);
        if let Some(l) = label {
            let _ = write!(run_id, "-{l}");
        }
        let _ = write!(run_id, "-s{}", cfg.seed);
        Self {
            run_id,
            method,
            dataset,
            cfg,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub row: MetricsRow,
    pub metrics: RunMetrics,
    pub trace: Option<CurriculumTrace>,
}

pub fn run_cell(cell: &Cell) -> Result<RunOutcome> {
    let start = Instant::now();
    let d = &cell.dataset;
    let (metrics, trace) = match cell.method {
        Method::Rcl => {
            let out = train_rcl(&d.graph, &cell.cfg, d.difficulty.as_ref())?;
            (out.metrics, Some(out.trace))
        }
        Method::Vanilla => (train_vanilla(&d.graph, &cell.cfg)?.1, None),
        m => {
            let (ordering, pacing) = m.paced().expect("paced method");
            (train_paced(&d.graph, &cell.cfg, ordering, pacing)?, None)
        }
    };
    let row = MetricsRow {
        run_id: cell.run_id.clone(),
        method: cell.method,
        dataset: d.name.clone(),
        homo: d.homophily(),
        noise_ratio: d.noise_ratio,
        seed: cell.cfg.seed,
        best_val_acc: metrics.best_val_acc,
        test_acc: metrics.test_acc,
        wall_time_s: start.elapsed().as_secs_f64(),
    };
    Ok(RunOutcome { row, metrics, trace })
}

/// Worker count from the environment, defaulting to the available cores.
pub fn workers_from_env() -> Result<usize> {
    match std::env::var(WORKERS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(Error::param(format!("{WORKERS_ENV}={v:?} is not a positive integer"))),
        },
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

/// Runs cells on `workers` threads; results come back in cell order.
/// `on_done` is called once per finished cell, from the worker thread.
pub fn run_cells<F>(cells: &[Cell], workers: usize, on_done: F) -> Result<Vec<Result<RunOutcome>>>
where
    F: Fn(usize, &Result<RunOutcome>) + Sync,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::param(format!("thread pool: {e}")))?;
    Ok(pool.install(|| {
        cells
            .par_iter()
            .enumerate()
            .map(|(i, cell)| {
                let res = run_cell(cell);
                on_done(i, &res);
                res
            })
            .collect()
    }))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub run_id: String,
    pub error: String,
}

#[derive(Debug, Default)]
pub struct Report {
    pub table: MetricsTable,
    pub failures: Vec<Failure>,
}

impl Report {
    pub fn all_completed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Runs every cell and writes `metrics.csv`, `summary.csv`, per-run RCL
/// traces under `traces/`, and `failures.csv` when something failed.
/// `metrics.csv` is rewritten (in cell order) after each finished run so
/// partial results survive an interruption.
pub fn execute(cells: &[Cell], out_dir: &Path, workers: usize) -> Result<Report> {
    let traces_dir = out_dir.join("traces");
    fs::create_dir_all(&traces_dir).map_err(|e| Error::io(traces_dir.display().to_string(), e))?;
    let metrics_path = out_dir.join("metrics.csv");
    let done: Mutex<Vec<Option<MetricsRow>>> = Mutex::new(vec![None; cells.len()]);
    let io_error: Mutex<Option<Error>> = Mutex::new(None);

    let results = run_cells(cells, workers, |i, res| {
        let Ok(outcome) = res else { return };
        let mut written = Ok(());
        if let Some(trace) = &outcome.trace {
            let path = traces_dir.join(format!("{}.csv", outcome.row.run_id));
            written = write_file(&path, &trace.to_csv());
        }
        let mut done = done.lock().expect("metrics lock");
        done[i] = Some(outcome.row.clone());
        let table = MetricsTable {
            rows: done.iter().flatten().cloned().collect(),
        };
        written = written.and(write_file(&metrics_path, &table.to_csv()));
        if let Err(e) = written {
            io_error.lock().expect("error lock").get_or_insert(e);
        }
    })?;
    if let Some(e) = io_error.into_inner().expect("error lock") {
        return Err(e);
    }

    let mut report = Report::default();
    for (cell, res) in cells.iter().zip(results) {
        match res {
            Ok(outcome) => report.table.rows.push(outcome.row),
            Err(e) => report.failures.push(Failure {
                run_id: cell.run_id.clone(),
                error: e.to_string(),
            }),
        }
    }
    write_file(&metrics_path, &report.table.to_csv())?;
    write_file(&out_dir.join("summary.csv"), &summary_csv(&report.table.summarize()))?;
    let failures_path = out_dir.join("failures.csv");
    if report.failures.is_empty() {
        if failures_path.exists() {
            fs::remove_file(&failures_path).map_err(|e| Error::io(failures_path.display().to_string(), e))?;
        }
    } else {
        let mut text = String::from("run_id,error\n");
        for f in &report.failures {
            let _ = writeln!(text, "{},{}", f.run_id, f.error.replace([',', '\n'], ";"));
        }
        write_file(&failures_path, &text)?;
    }
    Ok(report)
}

pub fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path.display().to_string(), e))
}

/// Cells for `methods × seeds` on one dataset.
pub fn grid(dataset: &Arc<Dataset>, exp: &ExperimentConfig, label: Option<&str>) -> Vec<Cell> {
    let mut cells = Vec::new();
    for &method in &exp.methods {
        for &seed in &exp.seeds {
            let cfg = RclConfig { seed, ..exp.rcl.clone() };
            cells.push(Cell::new(method, Arc::clone(dataset), cfg, label));
        }
    }
    cells
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    /// Generated graphs at each homophily value.
    Homo,
    /// Attacked copies of one graph at each injection ratio.
    Ratio,
    /// RCL pace values on one graph.
    Pace,
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Homo => "homo",
            Self::Ratio => "ratio",
            Self::Pace => "pace",
        })
    }
}

impl FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "homo" => Ok(Self::Homo),
            "ratio" => Ok(Self::Ratio),
            "pace" => Ok(Self::Pace),
            other => Err(Error::param(format!("unknown sweep axis {other:?}"))),
        }
    }
}

/// Source graph for sweeps that do not generate their own.
#[derive(Debug, Clone)]
pub enum SweepBase {
    Synthetic(SynthParams),
    Loaded(Arc<Dataset>),
}

/// Cells for the cross product of axis values, methods and seeds.
pub fn sweep_cells(
    axis: SweepAxis,
    values: &[f64],
    base: &SweepBase,
    exp: &ExperimentConfig,
    attack_seed: u64,
) -> Result<Vec<Cell>> {
    let base_dataset = || -> Result<Arc<Dataset>> {
        match base {
            SweepBase::Synthetic(p) => Ok(Arc::new(Dataset::synthetic(p)?)),
            SweepBase::Loaded(d) => Ok(Arc::clone(d)),
        }
    };
    let mut cells = Vec::new();
    match axis {
        SweepAxis::Homo => {
            let SweepBase::Synthetic(p) = base else {
                return Err(Error::param("a homophily sweep generates its own graphs"));
            };
            for &homo in values {
                let d = Arc::new(Dataset::synthetic(&SynthParams { homo, ..p.clone() })?);
                cells.extend(grid(&d, exp, None));
            }
        }
        SweepAxis::Ratio => {
            let clean = base_dataset()?;
            for &ratio in values {
                let d = Arc::new(clean.attacked(ratio, attack_seed)?);
                cells.extend(grid(&d, exp, None));
            }
        }
        SweepAxis::Pace => {
            let d = base_dataset()?;
            for &v in values {
                if v.fract() != 0.0 || !(1.0..=5.0).contains(&v) {
                    return Err(Error::param(format!("pace {v} is not an integer in 1..=5")));
                }
                let mut e = exp.clone();
                e.rcl.pace = v as u32;
                cells.extend(grid(&d, &e, Some(&format!("pace{v}"))));
            }
        }
    }
    Ok(cells)
}

/// Long-format rows `run_id,iter,series,value` from curriculum traces.
pub fn trace_long_format(traces: &[(String, CurriculumTrace)]) -> String {
    let mut out = String::from("run_id,iter,series,value\n");
    for (id, trace) in traces {
        for r in &trace.records {
            let mut series = vec![
                ("lambda", format_real(r.lambda)),
                ("num_selected", r.num_selected.to_string()),
            ];
            if let Some(f) = r.fractions {
                series.push(("frac_easy", format_real(f.easy)));
                series.push(("frac_medium", format_real(f.medium)));
                series.push(("frac_hard", format_real(f.hard)));
            }
            series.push(("train_loss", format_real(r.train_loss)));
            series.push(("val_acc", format_real(r.val_acc)));
            for (name, value) in series {
                let _ = writeln!(out, "{id},{},{name},{value}", r.iter);
            }
        }
    }
    out
}
