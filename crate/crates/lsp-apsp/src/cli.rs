//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 when a verification fails, 2 for usage errors
//! and anything else that stops a command from running.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lsp_apsp_core::oracle::{verify_path_system, verify_static, OracleReport, VerifyMode};
use lsp_apsp_core::{solve_apsp, EdgeUpdateSampler, PathSystem, QueueKind, Seed, WeightModel, WeightedDigraph};
use serde::Serialize;

use crate::experiments::{self, parse_model, run_churn, trial_seed, ExperimentKind, ExperimentSpec};
use crate::io;
use crate::{Error, Result};

/// Seed used when `--seed` is not given.
pub const DEFAULT_SEED: u64 = 12345;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "lsp-apsp", version, about = "All-pairs shortest paths via locally shortest paths")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a random graph file.
    Gen(Common),
    /// Solve APSP statically; distance CSV to --out, summary JSON to --summary (or stderr).
    Solve {
        #[command(flatten)]
        common: Common,
        /// Write the summary JSON here instead of stderr.
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// Check solver output against the brute-force oracle; one JSON report per trial.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = ModeArg::DistOnly)]
        mode: ModeArg,
    },
    /// Build the dynamic structure and apply random edge updates; churn CSV per update.
    Dyn(Common),
    /// Run an experiment; CSV with a #schema header.
    Stats {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_parser = parse_kind)]
        kind: ExperimentKind,
        /// Comma-separated α values for BALL_SIZES.
        #[arg(long, value_delimiter = ',')]
        alphas: Vec<f64>,
        /// Comma-separated size ladder for EXAMINE_SCALING.
        #[arg(long, value_delimiter = ',')]
        sizes: Vec<usize>,
        /// Per-trial memory cap in MiB.
        #[arg(long, default_value_t = experiments::DEFAULT_MEMORY_CAP >> 20)]
        memory_cap_mb: u64,
    },
}

#[derive(Debug, Args)]
struct Common {
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Vertex count for generated graphs.
    #[arg(long, default_value_t = 100)]
    n: usize,
    /// uniform01 | exponential1 | integer:MAX (aliases: uniform, exp, int:MAX).
    #[arg(long, default_value = "uniform01", value_parser = parse_model)]
    model: WeightModel,
    /// Upper bound for integer weights; overrides the bound given in --model.
    #[arg(long)]
    max: Option<u32>,
    /// Edge probability of the generated G(n, p) graph.
    #[arg(long, default_value_t = 1.0)]
    p: f64,
    /// Read the graph from a file instead of generating one.
    #[arg(long)]
    graph: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = QueueArg::Bucket)]
    queue: QueueArg,
    #[arg(long, default_value_t = 1)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    updates: usize,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Leave timing fields empty so output is reproducible byte for byte.
    #[arg(long)]
    no_timing: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum QueueArg {
    Bucket,
    Comparison,
}

impl From<QueueArg> for QueueKind {
    fn from(q: QueueArg) -> Self {
        match q {
            QueueArg::Bucket => QueueKind::Bucket,
            QueueArg::Comparison => QueueKind::Comparison,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    DistOnly,
    FullLsp,
}

impl From<ModeArg> for VerifyMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::DistOnly => VerifyMode::DistOnly,
            ModeArg::FullLsp => VerifyMode::FullLsp,
        }
    }
}

fn parse_kind(s: &str) -> Result<ExperimentKind, String> {
    s.parse()
}

impl Common {
    fn model(&self) -> WeightModel {
        match (self.max, self.model) {
            (Some(max), _) => WeightModel::IntegerUniform { max },
            (None, m) => m,
        }
    }

    fn graph(&self, seed: Seed) -> Result<WeightedDigraph> {
        match &self.graph {
            Some(path) => io::load_graph(path),
            None => Ok(WeightedDigraph::gen_gnp(self.n, self.p, self.model(), seed)?),
        }
    }

    fn with_output<F>(&self, stdout: &mut dyn Write, body: F) -> Result<()>
    where
        F: FnOnce(&mut dyn Write) -> Result<()>,
    {
        with_target(self.out.as_deref(), stdout, body)
    }
}

fn with_target<F>(path: Option<&Path>, fallback: &mut dyn Write, body: F) -> Result<()>
where
    F: FnOnce(&mut dyn Write) -> Result<()>,
{
    match path {
        Some(path) => {
            let file = File::create(path).map_err(|source| Error::Io { path: path.into(), source })?;
            let mut w = BufWriter::new(file);
            body(&mut w)?;
            w.flush()?;
            Ok(())
        }
        None => body(fallback),
    }
}

#[derive(Debug, Serialize)]
struct SolveSummary {
    n: usize,
    edges: usize,
    queue: QueueKind,
    fallback: bool,
    fallback_reason: Option<lsp_apsp_core::apsp::FallbackReason>,
    examined_lsp_count: u64,
    lsp_count: u64,
    wall_micros: Option<u64>,
}

#[derive(Debug, Serialize)]
struct VerifyRecord {
    trial: usize,
    seed: u64,
    updates: usize,
    #[serde(rename = "static")]
    static_report: OracleReport,
    dynamic: OracleReport,
}

/// Parses `argv` (including the program name), runs the command and returns
/// the process exit code.
pub fn dispatch<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{text}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(stderr, "{text}");
                    EXIT_USAGE
                }
            };
        }
    };
    match run(cli.command, stdout, stderr) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_USAGE
        }
    }
}

fn run(command: Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32> {
    match command {
        Command::Gen(c) => {
            let g = c.graph(Seed(c.seed))?;
            c.with_output(stdout, |w| io::write_graph(&g, w))?;
        }
        Command::Solve { common: c, summary } => {
            let g = c.graph(Seed(c.seed))?;
            let start = Instant::now();
            let res = solve_apsp(&g, c.queue.into())?;
            let wall = start.elapsed();
            c.with_output(stdout, |w| io::write_dist_csv(&res.dist, res.n, w))?;
            let s = SolveSummary {
                n: res.n,
                edges: res.edge_count,
                queue: res.queue_kind,
                fallback: res.fallback_engaged(),
                fallback_reason: res.fallback,
                examined_lsp_count: res.examined_lsp_count,
                lsp_count: res.lsp_count(),
                wall_micros: (!c.no_timing).then(|| wall.as_micros() as u64),
            };
            with_target(summary.as_deref(), stderr, |w| {
                serde_json::to_writer(&mut *w, &s)?;
                writeln!(w)?;
                Ok(())
            })?;
        }
        Command::Verify { common: c, mode } => {
            let mode: VerifyMode = mode.into();
            let mut records = Vec::with_capacity(c.trials);
            for trial in 0..c.trials.max(1) {
                let seed = trial_seed(Seed(c.seed), trial);
                let g = c.graph(seed)?;
                let res = solve_apsp(&g, c.queue.into())?;
                let static_report = verify_static(&res, &g, mode)?;
                let mut sys = PathSystem::init(&g)?;
                let mut current = g.clone();
                if c.updates > 0 {
                    let mut sampler = EdgeUpdateSampler::new(&g, c.model(), seed)?;
                    for _ in 0..c.updates {
                        let ((u, v), w) = sampler.next_update();
                        sys.apply_update(&[((u, v), w)])?;
                        current.set_weight(u, v, w)?;
                    }
                }
                let dynamic = verify_path_system(&sys, &current, mode)?;
                records.push(VerifyRecord { trial, seed: seed.0, updates: c.updates, static_report, dynamic });
            }
            c.with_output(stdout, |w| {
                for r in &records {
                    serde_json::to_writer(&mut *w, r)?;
                    writeln!(w)?;
                }
                Ok(())
            })?;
            if records.iter().any(|r| !r.static_report.pass || !r.dynamic.pass) {
                return Ok(EXIT_VERIFY_FAILED);
            }
        }
        Command::Dyn(c) => {
            let g = c.graph(Seed(c.seed))?;
            let rows = run_churn(&g, c.model(), Seed(c.seed), c.updates, !c.no_timing)?;
            c.with_output(stdout, |w| io::write_churn_csv(&rows, w))?;
        }
        Command::Stats { common: c, kind, alphas, sizes, memory_cap_mb } => {
            let mut spec = ExperimentSpec::new(kind, c.n, c.trials, c.model(), Seed(c.seed));
            spec.p = c.p;
            spec.queue = c.queue.into();
            if !alphas.is_empty() {
                spec.alphas = alphas;
            }
            spec.sizes = sizes;
            if c.updates > 0 {
                spec.updates = c.updates;
            }
            spec.memory_cap = memory_cap_mb << 20;
            let rows = experiments::run_experiment(&spec)?;
            c.with_output(stdout, |w| experiments::write_stat_csv(&rows, w))?;
        }
    }
    Ok(EXIT_OK)
}
