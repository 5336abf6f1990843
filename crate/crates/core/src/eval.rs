//! Graph scoring and the benchmark sweep over structures, lengths, seeds and
//! methods.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs::{self, OpenOptions};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Mutex;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::granger::pwgc;
use crate::model::{DiscoveryParams, Mark, SummaryCausalGraph};
use crate::pc::discover;
use crate::simulate::{generate, Coupling, StructureKind, StructureSpec};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl ScoreReport {
    pub fn from_counts(tp: usize, fp: usize, fn_: usize) -> Self {
        let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        Self {
            tp,
            fp,
            fn_,
            precision,
            recall,
            f1,
        }
    }
}

/// Directed scoring: an estimated `i -> j` matches only a true `i -> j`, and
/// an estimated `i <-> j` only a true `i <-> j`.
pub fn f1_score(estimated: &SummaryCausalGraph, truth: &SummaryCausalGraph) -> Result<ScoreReport> {
    score(estimated, truth, false)
}

/// Scores either by edge marks or, with `adjacency_only`, by unordered
/// adjacencies.
pub fn score(
    estimated: &SummaryCausalGraph,
    truth: &SummaryCausalGraph,
    adjacency_only: bool,
) -> Result<ScoreReport> {
    if estimated.g() != truth.g() {
        return Err(Error::NodeMismatch {
            estimated: estimated.g(),
            truth: truth.g(),
        });
    }
    if adjacency_only {
        let pairs = |g: &SummaryCausalGraph| -> BTreeSet<(usize, usize)> {
            g.edges()
                .iter()
                .filter(|e| e.from != e.to)
                .map(|e| (e.from.min(e.to), e.from.max(e.to)))
                .collect()
        };
        let (est, tru) = (pairs(estimated), pairs(truth));
        let tp = est.intersection(&tru).count();
        return Ok(ScoreReport::from_counts(tp, est.len() - tp, tru.len() - tp));
    }
    // (from, to, bidirected); bidirected pairs are stored with from < to.
    let units = |g: &SummaryCausalGraph| -> BTreeSet<(usize, usize, bool)> {
        g.edges()
            .iter()
            .filter(|e| e.from != e.to)
            .map(|e| match e.mark {
                Mark::Bidirected => (e.from.min(e.to), e.from.max(e.to), true),
                _ => (e.from, e.to, false),
            })
            .collect()
    };
    let (est, tru) = (units(estimated), units(truth));
    let tp = est.intersection(&tru).count();
    Ok(ScoreReport::from_counts(tp, est.len() - tp, tru.len() - tp))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    PcPmime,
    Pwgc,
}

impl Method {
    pub const ALL: [Method; 2] = [Method::PcPmime, Method::Pwgc];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::PcPmime => "pc_pmime",
            Method::Pwgc => "pwgc",
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
            .ok_or_else(|| Error::InvalidParam(format!("unknown method '{s}'")))
    }
}

/// Everything a sweep depends on; stored verbatim in run manifests.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchmarkGrid {
    pub structures: Vec<StructureKind>,
    pub n_values: Vec<usize>,
    pub seeds: Vec<u64>,
    pub methods: Vec<Method>,
    #[serde(default)]
    pub params: DiscoveryParams,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default)]
    pub coupling: Coupling,
    #[serde(default)]
    pub adjacency_only: bool,
}

pub fn default_alpha() -> f64 {
    0.03
}

impl BenchmarkGrid {
    pub fn new(structures: Vec<StructureKind>, n_values: Vec<usize>, seeds: Vec<u64>, methods: Vec<Method>) -> Self {
        Self {
            structures,
            n_values,
            seeds,
            methods,
            params: DiscoveryParams::default(),
            alpha: default_alpha(),
            coupling: Coupling::default(),
            adjacency_only: false,
        }
    }

    /// Cells in result order: (structure, n, seed, method).
    pub fn cells(&self) -> Vec<CellKey> {
        let mut cells = Vec::new();
        for &structure in &self.structures {
            for &n in &self.n_values {
                for &seed in &self.seeds {
                    for &method in &self.methods {
                        cells.push(CellKey {
                            structure,
                            n,
                            seed,
                            method,
                        });
                    }
                }
            }
        }
        cells.sort();
        cells.dedup();
        cells
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CellKey {
    pub structure: StructureKind,
    pub n: usize,
    pub seed: u64,
    pub method: Method,
}

/// One scored run. Failed cells keep their error message and zero scores.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub structure: StructureKind,
    pub n: usize,
    pub seed: u64,
    pub method: Method,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub error: String,
}

impl ResultRow {
    pub fn key(&self) -> CellKey {
        CellKey {
            structure: self.structure,
            n: self.n,
            seed: self.seed,
            method: self.method,
        }
    }

    pub fn failed(&self) -> bool {
        !self.error.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimingRow {
    pub structure: StructureKind,
    pub n: usize,
    pub seed: u64,
    pub method: Method,
    pub wall_time_ms: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub structure: StructureKind,
    pub n: usize,
    pub method: Method,
    pub runs: usize,
    pub mean_f1: f64,
    /// Sample standard deviation; 0 for a single run.
    pub std_f1: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct BenchmarkResult {
    pub rows: Vec<ResultRow>,
    pub timings: Vec<TimingRow>,
    pub aggregates: Vec<AggregateRow>,
}

impl BenchmarkResult {
    pub fn aggregate(&self, structure: StructureKind, n: usize, method: Method) -> Option<&AggregateRow> {
        self.aggregates
            .iter()
            .find(|a| a.structure == structure && a.n == n && a.method == method)
    }
}

pub const RESULTS_FILE: &str = "results.csv";
pub const TIMINGS_FILE: &str = "timings.csv";
pub const AGGREGATE_FILE: &str = "aggregate.csv";

/// Runs one cell: simulate, estimate, score.
pub fn run_cell(grid: &BenchmarkGrid, key: CellKey) -> Result<ScoreReport> {
    let spec = StructureSpec {
        coupling: grid.coupling,
        ..StructureSpec::new(key.structure, key.n, key.seed)
    };
    let (panel, truth) = generate(&spec)?;
    let estimate = match key.method {
        Method::PcPmime => {
            let params = DiscoveryParams {
                seed: key.seed,
                ..grid.params.clone()
            };
            discover(&panel, &params)?.graph
        }
        Method::Pwgc => pwgc(&panel, grid.params.tau_max, grid.alpha)?,
    };
    score(&estimate, &truth, grid.adjacency_only)
}

/// Runs the sweep on `jobs` threads (0 = all cores).
///
/// With `out_dir`, each finished cell is appended to `results.csv` and
/// `timings.csv` at once; cells already present there are not rerun. At the
/// end both files are rewritten in (structure, n, seed, method) order and
/// `aggregate.csv` plus one `plot_{structure}_{method}.csv` per pair are
/// written. A failing cell is recorded with its error and does not stop the
/// sweep.
pub fn run_benchmark(grid: &BenchmarkGrid, out_dir: Option<&Path>, jobs: usize) -> Result<BenchmarkResult> {
    grid.params.validate()?;
    let cells = grid.cells();
    let mut done: BTreeMap<CellKey, ResultRow> = BTreeMap::new();
    let mut timings: BTreeMap<CellKey, TimingRow> = BTreeMap::new();
    let mut sinks = None;
    if let Some(dir) = out_dir {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for row in read_rows::<ResultRow>(&dir.join(RESULTS_FILE))? {
            done.insert(row.key(), row);
        }
        for t in read_rows::<TimingRow>(&dir.join(TIMINGS_FILE))? {
            let key = CellKey {
                structure: t.structure,
                n: t.n,
                seed: t.seed,
                method: t.method,
            };
            timings.insert(key, t);
        }
        if !done.is_empty() {
            log::info!("resuming: {} cells already complete", done.len());
        }
        sinks = Some(Mutex::new((
            appender(&dir.join(RESULTS_FILE))?,
            appender(&dir.join(TIMINGS_FILE))?,
        )));
    }
    let todo: Vec<CellKey> = cells.iter().copied().filter(|c| !done.contains_key(c)).collect();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::InvalidParam(format!("cannot start {jobs} worker threads: {e}")))?;
    let fresh: Vec<(ResultRow, TimingRow)> = pool.install(|| {
        todo.par_iter()
            .map(|&key| {
                let start = Instant::now();
                let outcome = run_cell(grid, key);
                let wall_time_ms = start.elapsed().as_millis() as u64;
                let row = match outcome {
                    Ok(s) => ResultRow {
                        structure: key.structure,
                        n: key.n,
                        seed: key.seed,
                        method: key.method,
                        precision: s.precision,
                        recall: s.recall,
                        f1: s.f1,
                        error: String::new(),
                    },
                    Err(e) => {
                        log::warn!("{} n={} seed={} {}: {e}", key.structure, key.n, key.seed, key.method);
                        ResultRow {
                            structure: key.structure,
                            n: key.n,
                            seed: key.seed,
                            method: key.method,
                            precision: 0.0,
                            recall: 0.0,
                            f1: 0.0,
                            error: e.to_string(),
                        }
                    }
                };
                let timing = TimingRow {
                    structure: key.structure,
                    n: key.n,
                    seed: key.seed,
                    method: key.method,
                    wall_time_ms,
                };
                if let Some(sinks) = &sinks {
                    let mut guard = sinks.lock().expect("result writer poisoned");
                    let written = guard
                        .0
                        .serialize(&row)
                        .and_then(|_| guard.1.serialize(&timing))
                        .map_err(Error::from)
                        .and_then(|_| guard.0.flush().map_err(|e| Error::io(RESULTS_FILE, e)))
                        .and_then(|_| guard.1.flush().map_err(|e| Error::io(TIMINGS_FILE, e)));
                    if let Err(e) = written {
                        log::error!("cannot append result: {e}");
                    }
                }
                log::info!("{} n={} seed={} {}: f1={:.3}", key.structure, key.n, key.seed, key.method, row.f1);
                (row, timing)
            })
            .collect()
    });
    drop(sinks);
    for (row, timing) in fresh {
        timings.insert(row.key(), timing);
        done.insert(row.key(), row);
    }

    // Only cells of this grid are reported, in key order.
    let rows: Vec<ResultRow> = cells.iter().filter_map(|c| done.get(c).cloned()).collect();
    let timings: Vec<TimingRow> = cells.iter().filter_map(|c| timings.get(c).cloned()).collect();
    let result = BenchmarkResult {
        aggregates: aggregate(&rows),
        rows,
        timings,
    };
    if let Some(dir) = out_dir {
        write_outputs(&result, dir)?;
    }
    Ok(result)
}

/// Mean and sample standard deviation of F1 per (structure, n, method),
/// over cells that did not fail.
pub fn aggregate(rows: &[ResultRow]) -> Vec<AggregateRow> {
    let mut groups: BTreeMap<(StructureKind, usize, Method), Vec<f64>> = BTreeMap::new();
    for r in rows.iter().filter(|r| !r.failed()) {
        groups.entry((r.structure, r.n, r.method)).or_default().push(r.f1);
    }
    groups
        .into_iter()
        .map(|((structure, n, method), f1s)| {
            let k = f1s.len() as f64;
            let mean = f1s.iter().sum::<f64>() / k;
            let std = if f1s.len() < 2 {
                0.0
            } else {
                (f1s.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0)).sqrt()
            };
            AggregateRow {
                structure,
                n,
                method,
                runs: f1s.len(),
                mean_f1: mean,
                std_f1: std,
            }
        })
        .collect()
}

fn appender(path: &Path) -> Result<csv::Writer<fs::File>> {
    let fresh = !path.exists() || fs::metadata(path).map(|m| m.len() == 0).unwrap_or(true);
    let file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| Error::io(path, e))?;
    Ok(csv::WriterBuilder::new().has_headers(fresh).from_writer(file))
}

fn read_rows<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    if !path.exists() {
        return Ok(Vec::new());
    }
    let mut rd = csv::Reader::from_path(path)?;
    let mut rows = Vec::new();
    for rec in rd.deserialize() {
        match rec {
            Ok(r) => rows.push(r),
            // A torn final line from an interrupted run is dropped and redone.
            Err(e) => log::warn!("skipping unreadable row in {}: {e}", path.display()),
        }
    }
    Ok(rows)
}

fn write_all<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn write_header_only(path: &Path, header: &[&str]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    w.flush().map_err(|e| Error::io(path, e))
}

/// Writes the sorted result, timing, aggregate and plot-data files.
pub fn write_outputs(result: &BenchmarkResult, dir: &Path) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    let path = dir.join(RESULTS_FILE);
    if result.rows.is_empty() {
        write_header_only(&path, &["structure", "n", "seed", "method", "precision", "recall", "f1", "error"])?;
    } else {
        write_all(&path, &result.rows)?;
    }
    written.push(path);
    let path = dir.join(TIMINGS_FILE);
    if result.timings.is_empty() {
        write_header_only(&path, &["structure", "n", "seed", "method", "wall_time_ms"])?;
    } else {
        write_all(&path, &result.timings)?;
    }
    written.push(path);
    let path = dir.join(AGGREGATE_FILE);
    if result.aggregates.is_empty() {
        write_header_only(&path, &["structure", "n", "method", "runs", "mean_f1", "std_f1"])?;
    } else {
        write_all(&path, &result.aggregates)?;
    }
    written.push(path);

    let mut plots: BTreeMap<(StructureKind, Method), Vec<&AggregateRow>> = BTreeMap::new();
    for a in &result.aggregates {
        plots.entry((a.structure, a.method)).or_default().push(a);
    }
    for ((structure, method), aggs) in plots {
        let path = dir.join(format!("plot_{structure}_{method}.csv"));
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record(["n", "mean_f1", "std_f1"])?;
        for a in aggs {
            w.write_record([a.n.to_string(), a.mean_f1.to_string(), a.std_f1.to_string()])?;
        }
        w.flush().map_err(|e| Error::io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}
