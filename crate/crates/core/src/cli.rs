//! Command-line front end. Every run that writes to a directory also writes
//! `manifest.json` there, holding the complete effective configuration;
//! `--from-manifest` replays it.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::{default_alpha, run_benchmark, score, BenchmarkGrid, Method};
use crate::granger::pwgc;
use crate::model::{DiscoveryParams, SummaryCausalGraph, TimeSeriesPanel};
use crate::pc::{discover, write_audit_csv};
use crate::simulate::{generate, Coupling, StructureKind, StructureSpec};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Parser)]
#[command(
    name = "tempoca",
    version,
    about = "Causal discovery for multivariate time series",
    args_conflicts_with_subcommands = true
)]
pub struct Cli {
    /// Replay the run recorded in a manifest file.
    #[arg(long, value_name = "FILE")]
    pub from_manifest: Option<PathBuf>,
    /// With --from-manifest: write outputs here instead of the recorded directory.
    #[arg(long, value_name = "DIR", requires = "from_manifest")]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a benchmark structure; writes `<kind>_n<N>_s<seed>.csv` and a matching `.truth.json`.
    Simulate {
        #[arg(long)]
        kind: StructureKind,
        #[arg(long, default_value_t = 4000)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "quadratic")]
        coupling: CouplingArg,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Run PC-PMIME on a CSV panel.
    Discover {
        #[arg(long = "in", value_name = "CSV")]
        input: PathBuf,
        /// Output directory; without it the graph JSON goes to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Run pairwise Granger causality on a CSV panel.
    Pwgc {
        #[arg(long = "in", value_name = "CSV")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 3)]
        tau_max: usize,
        #[arg(long, default_value_t = default_alpha())]
        alpha: f64,
    },
    /// Score an estimated graph against a ground-truth graph.
    Evaluate {
        #[arg(long = "in", value_name = "JSON")]
        input: PathBuf,
        #[arg(long, value_name = "JSON")]
        truth: PathBuf,
        #[arg(long)]
        adjacency_only: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sweep structures x lengths x seeds x methods.
    Bench {
        #[arg(long, value_delimiter = ',', default_values = ["fork", "v_structure", "mediator", "diamond", "seven_two_hidden"])]
        kind: Vec<StructureKind>,
        #[arg(long, value_delimiter = ',', default_values_t = [125usize, 250, 500, 1000, 2000, 4000])]
        n: Vec<usize>,
        /// Number of seeds; seeds 0..N are used.
        #[arg(long, default_value_t = 10)]
        seeds: u64,
        #[arg(long, value_delimiter = ',', value_enum, default_values = ["pc_pmime", "pwgc"])]
        methods: Vec<MethodArg>,
        #[arg(long, default_value_t = default_alpha())]
        alpha: f64,
        #[arg(long, value_enum, default_value = "quadratic")]
        coupling: CouplingArg,
        #[arg(long)]
        adjacency_only: bool,
        /// Worker threads; 0 uses every core.
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        params: ParamArgs,
    },
}

#[derive(Clone, Copy, Debug, clap::ValueEnum)]
pub enum CouplingArg {
    Quadratic,
    Linear,
}

impl From<CouplingArg> for Coupling {
    fn from(c: CouplingArg) -> Self {
        match c {
            CouplingArg::Quadratic => Coupling::Quadratic,
            CouplingArg::Linear => Coupling::Linear,
        }
    }
}

#[derive(Clone, Copy, Debug, clap::ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum MethodArg {
    PcPmime,
    Pwgc,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::PcPmime => Method::PcPmime,
            MethodArg::Pwgc => Method::Pwgc,
        }
    }
}

#[derive(Clone, Debug, Args)]
pub struct ParamArgs {
    #[arg(long, default_value_t = 3)]
    pub tau_max: usize,
    #[arg(long, default_value_t = 0.01)]
    pub k_fraction: f64,
    /// Stopping threshold of the embedding cycles.
    #[arg(long = "A", default_value_t = 0.03)]
    pub stop_a: f64,
    /// Independence threshold on R.
    #[arg(long, default_value_t = 1e-10)]
    pub threshold: f64,
    #[arg(long, default_value_t = 1)]
    pub horizon: usize,
    /// Seed of the tie-breaking jitter.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl From<ParamArgs> for DiscoveryParams {
    fn from(a: ParamArgs) -> Self {
        DiscoveryParams {
            tau_max: a.tau_max,
            k_fraction: a.k_fraction,
            stop_a: a.stop_a,
            indep_threshold: a.threshold,
            horizon_t: a.horizon,
            seed: a.seed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub spec: StructureSpec,
    pub out: PathBuf,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscoverConfig {
    pub input: PathBuf,
    pub out: Option<PathBuf>,
    pub params: DiscoveryParams,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PwgcConfig {
    pub input: PathBuf,
    pub out: Option<PathBuf>,
    pub tau_max: usize,
    pub alpha: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvaluateConfig {
    pub input: PathBuf,
    pub truth: PathBuf,
    pub adjacency_only: bool,
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    pub grid: BenchmarkGrid,
    pub jobs: usize,
    pub out: PathBuf,
}

/// Fully resolved configuration of one run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunConfig {
    Simulate(SimulateConfig),
    Discover(DiscoverConfig),
    Pwgc(PwgcConfig),
    Evaluate(EvaluateConfig),
    Bench(BenchConfig),
}

impl RunConfig {
    fn out_dir(&self) -> Option<&Path> {
        match self {
            RunConfig::Simulate(c) => Some(&c.out),
            RunConfig::Discover(c) => c.out.as_deref(),
            RunConfig::Pwgc(c) => c.out.as_deref(),
            RunConfig::Evaluate(c) => c.out.as_deref(),
            RunConfig::Bench(c) => Some(&c.out),
        }
    }

    fn set_out_dir(&mut self, dir: PathBuf) {
        match self {
            RunConfig::Simulate(c) => c.out = dir,
            RunConfig::Discover(c) => c.out = Some(dir),
            RunConfig::Pwgc(c) => c.out = Some(dir),
            RunConfig::Evaluate(c) => c.out = Some(dir),
            RunConfig::Bench(c) => c.out = dir,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub run: RunConfig,
}

impl Manifest {
    pub fn new(run: RunConfig) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            run,
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}

// Input paths are recorded absolute so a manifest replays from any directory.
fn absolute(p: PathBuf) -> PathBuf {
    std::path::absolute(&p).unwrap_or(p)
}

/// Resolves parsed arguments into a run configuration.
pub fn resolve(command: Command) -> RunConfig {
    match command {
        Command::Simulate {
            kind,
            n,
            seed,
            coupling,
            out,
        } => RunConfig::Simulate(SimulateConfig {
            spec: StructureSpec {
                coupling: coupling.into(),
                ..StructureSpec::new(kind, n, seed)
            },
            out,
        }),
        Command::Discover { input, out, params } => RunConfig::Discover(DiscoverConfig {
            input: absolute(input),
            out,
            params: params.into(),
        }),
        Command::Pwgc {
            input,
            out,
            tau_max,
            alpha,
        } => RunConfig::Pwgc(PwgcConfig {
            input: absolute(input),
            out,
            tau_max,
            alpha,
        }),
        Command::Evaluate {
            input,
            truth,
            adjacency_only,
            out,
        } => RunConfig::Evaluate(EvaluateConfig {
            input: absolute(input),
            truth: absolute(truth),
            adjacency_only,
            out,
        }),
        Command::Bench {
            kind,
            n,
            seeds,
            methods,
            alpha,
            coupling,
            adjacency_only,
            jobs,
            out,
            params,
        } => RunConfig::Bench(BenchConfig {
            grid: BenchmarkGrid {
                structures: kind,
                n_values: n,
                seeds: (0..seeds).collect(),
                methods: methods.into_iter().map(Method::from).collect(),
                params: params.into(),
                alpha,
                coupling: coupling.into(),
                adjacency_only,
            },
            jobs,
            out,
        }),
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn prepare(dir: &Path, run: &RunConfig) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let manifest = serde_json::to_string_pretty(&Manifest::new(run.clone()))?;
    write_text(&dir.join(MANIFEST_FILE), &(manifest + "\n"))
}

fn emit_graph(graph: &SummaryCausalGraph, out: Option<&Path>) -> Result<()> {
    let json = graph.to_json()?;
    match out {
        Some(dir) => {
            write_text(&dir.join("graph.json"), &(json + "\n"))?;
            write_text(&dir.join("graph.dot"), &graph.to_dot())
        }
        None => {
            println!("{json}");
            Ok(())
        }
    }
}

/// Executes a resolved run.
pub fn execute(run: &RunConfig) -> Result<()> {
    if let Some(dir) = run.out_dir() {
        prepare(dir, run)?;
    }
    match run {
        RunConfig::Simulate(c) => {
            let (panel, truth) = generate(&c.spec)?;
            let stem = c.spec.file_stem();
            panel.write_csv(c.out.join(format!("{stem}.csv")))?;
            write_text(&c.out.join(format!("{stem}.truth.json")), &(truth.to_json()? + "\n"))?;
            log::info!("wrote {stem}.csv and {stem}.truth.json to {}", c.out.display());
        }
        RunConfig::Discover(c) => {
            let panel = TimeSeriesPanel::load_csv(&c.input)?;
            let found = discover(&panel, &c.params)?;
            emit_graph(&found.graph, c.out.as_deref())?;
            if let Some(dir) = &c.out {
                write_audit_csv(&found.records, dir.join("audit.csv"))?;
            }
        }
        RunConfig::Pwgc(c) => {
            let panel = TimeSeriesPanel::load_csv(&c.input)?;
            emit_graph(&pwgc(&panel, c.tau_max, c.alpha)?, c.out.as_deref())?;
        }
        RunConfig::Evaluate(c) => {
            let read = |p: &Path| -> Result<SummaryCausalGraph> {
                SummaryCausalGraph::from_json(&fs::read_to_string(p).map_err(|e| Error::io(p, e))?)
            };
            let report = score(&read(&c.input)?, &read(&c.truth)?, c.adjacency_only)?;
            let json = serde_json::to_string_pretty(&report)?;
            println!("{json}");
            if let Some(dir) = &c.out {
                write_text(&dir.join("score.json"), &(json + "\n"))?;
            }
        }
        RunConfig::Bench(c) => {
            let result = run_benchmark(&c.grid, Some(&c.out), c.jobs)?;
            println!("structure,n,method,runs,mean_f1,std_f1");
            for a in &result.aggregates {
                println!(
                    "{},{},{},{},{:.4},{:.4}",
                    a.structure, a.n, a.method, a.runs, a.mean_f1, a.std_f1
                );
            }
            let failed = result.rows.iter().filter(|r| r.failed()).count();
            if failed > 0 {
                log::warn!("{failed} cells failed; see the error column of results.csv");
            }
        }
    }
    Ok(())
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidParam(_) | Error::InvalidSpec(_) => 1,
        _ => 2,
    }
}

/// Parses `argv`, runs the command and returns the process exit code:
/// 0 on success, 1 on usage errors, 2 on data errors.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let _ = env_logger::Builder::from_env(env_logger::Env::new().filter_or("TEMPOCA_LOG", "warn")).try_init();
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let run = match (cli.from_manifest, cli.command) {
        (Some(path), _) => match Manifest::load(&path) {
            Ok(m) => {
                let mut run = m.run;
                if let Some(dir) = cli.out {
                    run.set_out_dir(dir);
                }
                run
            }
            Err(e) => {
                eprintln!("error: --from-manifest {}: {e}", path.display());
                return 2;
            }
        },
        (None, Some(cmd)) => resolve(cmd),
        (None, None) => {
            eprintln!("error: a subcommand or --from-manifest is required (see --help)");
            return 1;
        }
    };
    match execute(&run) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_resolve_to_standard_parameters() {
        let cli = Cli::try_parse_from(["tempoca", "discover", "--in", "x.csv"]).unwrap();
        let RunConfig::Discover(c) = resolve(cli.command.unwrap()) else {
            panic!("wrong command")
        };
        assert_eq!(c.params, DiscoveryParams::default());
    }

    #[test]
    fn manifest_round_trip_and_unknown_keys() {
        let run = RunConfig::Pwgc(PwgcConfig {
            input: "/tmp/a.csv".into(),
            out: None,
            tau_max: 3,
            alpha: 0.03,
        });
        let m = Manifest::new(run);
        let text = serde_json::to_string(&m).unwrap();
        assert_eq!(serde_json::from_str::<Manifest>(&text).unwrap(), m);
        let bad = text.replace("\"alpha\"", "\"alfa\"");
        assert!(serde_json::from_str::<Manifest>(&bad).is_err());
    }

    #[test]
    fn usage_errors_exit_with_one() {
        assert_eq!(run_cli(["tempoca"]), 1);
        assert_eq!(run_cli(["tempoca", "simulate", "--kind", "triangle"]), 1);
        assert_eq!(run_cli(["tempoca", "discover", "--in", "a.csv", "--k-fraction", "zero"]), 1);
    }
}
