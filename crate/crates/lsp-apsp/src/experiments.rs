//! Seeded, trial-averaged experiments.
//!
//! Every experiment produces one [`StatRow`] per trial and metric plus an
//! aggregate row (`trial = None`) summarizing the trial values. Trials run
//! in parallel but rows come out in trial order, so output only depends on
//! the spec.

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use lsp_apsp_core::apsp::essential_subgraph;
use lsp_apsp_core::stats::{self, reference_values, Summary, BALL_ALPHAS};
use lsp_apsp_core::{solve_apsp, EdgeUpdateSampler, PathSystem, QueueKind, Seed, WeightModel, WeightedDigraph};
use rayon::prelude::*;
use serde::Serialize;

use crate::io::ChurnRow;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ExperimentKind {
    LspDensity,
    DistanceStats,
    HopStats,
    EdgeSpProb,
    EssentialDegree,
    BallSizes,
    UpdateChurn,
    ExamineScaling,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 8] = [
        Self::LspDensity,
        Self::DistanceStats,
        Self::HopStats,
        Self::EdgeSpProb,
        Self::EssentialDegree,
        Self::BallSizes,
        Self::UpdateChurn,
        Self::ExamineScaling,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::LspDensity => "LSP_DENSITY",
            Self::DistanceStats => "DISTANCE_STATS",
            Self::HopStats => "HOP_STATS",
            Self::EdgeSpProb => "EDGE_SP_PROB",
            Self::EssentialDegree => "ESSENTIAL_DEGREE",
            Self::BallSizes => "BALL_SIZES",
            Self::UpdateChurn => "UPDATE_CHURN",
            Self::ExamineScaling => "EXAMINE_SCALING",
        }
    }

    fn needs_complete(self) -> bool {
        matches!(self, Self::UpdateChurn | Self::ExamineScaling)
    }

    fn needs_path_system(self) -> bool {
        matches!(self, Self::UpdateChurn)
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let norm = s.trim().to_ascii_uppercase().replace('-', "_");
        Self::ALL
            .into_iter()
            .find(|k| k.name() == norm)
            .ok_or_else(|| format!("unknown experiment kind {s:?}"))
    }
}

/// Short textual names: `uniform01`, `exponential1`, `integer:MAX`.
pub fn model_name(model: WeightModel) -> String {
    match model {
        WeightModel::Uniform01 => "uniform01".into(),
        WeightModel::Exponential1 => "exponential1".into(),
        WeightModel::IntegerUniform { max } => format!("integer:{max}"),
    }
}

/// Parses [`model_name`] output plus the aliases `uniform`, `exp`,
/// `exponential` and `int:MAX`.
pub fn parse_model(s: &str) -> Result<WeightModel, String> {
    let s = s.trim().to_ascii_lowercase();
    match s.as_str() {
        "uniform" | "uniform01" => Ok(WeightModel::Uniform01),
        "exp" | "exponential" | "exponential1" => Ok(WeightModel::Exponential1),
        _ => {
            let max = s
                .strip_prefix("integer:")
                .or_else(|| s.strip_prefix("int:"))
                .ok_or_else(|| format!("unknown weight model {s:?}"))?;
            let max: u32 = max.parse().map_err(|_| format!("bad integer weight bound {max:?}"))?;
            if max == 0 {
                return Err("integer weight bound must be at least 1".into());
            }
            Ok(WeightModel::IntegerUniform { max })
        }
    }
}

/// Default cap on the estimated working set of a single trial.
pub const DEFAULT_MEMORY_CAP: u64 = 4 << 30;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    pub n: usize,
    pub trials: usize,
    pub model: WeightModel,
    pub seed: Seed,
    /// Edge probability; experiments that need complete graphs require 1.
    pub p: f64,
    pub queue: QueueKind,
    /// Radius multipliers for BALL_SIZES.
    pub alphas: Vec<f64>,
    /// Updates per trial for UPDATE_CHURN.
    pub updates: usize,
    /// Size ladder for EXAMINE_SCALING; empty means just `n`.
    pub sizes: Vec<usize>,
    /// Estimated bytes one trial may use.
    pub memory_cap: u64,
}

impl ExperimentSpec {
    pub fn new(kind: ExperimentKind, n: usize, trials: usize, model: WeightModel, seed: Seed) -> Self {
        Self {
            kind,
            n,
            trials,
            model,
            seed,
            p: 1.0,
            queue: QueueKind::Bucket,
            alphas: BALL_ALPHAS.to_vec(),
            updates: 100,
            sizes: Vec::new(),
            memory_cap: DEFAULT_MEMORY_CAP,
        }
    }

    fn ladder(&self) -> Vec<usize> {
        if self.kind == ExperimentKind::ExamineScaling && !self.sizes.is_empty() {
            self.sizes.clone()
        } else {
            vec![self.n]
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Core(lsp_apsp_core::Error::InvalidArgument(msg)));
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if let Some(&n) = self.ladder().iter().find(|&&n| n < 2) {
            return bad(format!("experiments need n >= 2, got {n}"));
        }
        if !(self.p > 0.0 && self.p <= 1.0) {
            return bad(format!("edge probability must lie in (0, 1], got {}", self.p));
        }
        if self.kind.needs_complete() && self.p != 1.0 {
            return bad(format!("{} requires complete graphs (p = 1)", self.kind));
        }
        if self.kind == ExperimentKind::UpdateChurn && self.updates == 0 {
            return bad("UPDATE_CHURN needs at least one update".into());
        }
        self.model.validate()?;
        for &n in &self.ladder() {
            let need = estimated_bytes(self.kind, n);
            if need > self.memory_cap {
                return Err(Error::Resource(format!(
                    "{} at n = {n} needs about {} MiB, above the cap of {} MiB",
                    self.kind,
                    need >> 20,
                    self.memory_cap >> 20
                )));
            }
        }
        Ok(())
    }
}

/// Rough per-trial working set: dense n² tables for the static solver, and
/// roughly 3.6 n² arena nodes for the path system.
pub fn estimated_bytes(kind: ExperimentKind, n: usize) -> u64 {
    let pairs = (n as u64) * (n as u64);
    let per_pair = if kind.needs_path_system() { 480 } else { 96 };
    pairs * per_pair
}

/// Seed of trial `t`, spread so neighbouring base seeds do not share trials.
pub fn trial_seed(base: Seed, trial: usize) -> Seed {
    Seed(base.0.wrapping_add((trial as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StatRow {
    pub kind: ExperimentKind,
    pub n: usize,
    pub model: String,
    /// Trial seed, or the base seed for an aggregate row.
    pub seed: u64,
    /// `None` marks the aggregate row.
    pub trial: Option<usize>,
    pub metric: String,
    /// The trial's measured value; for aggregates, the mean over trials.
    pub value: f64,
    /// Within-trial sample for per-trial rows where one exists, otherwise
    /// the single value; across trials for aggregate rows.
    pub summary: Summary,
    pub reference: Option<f64>,
}

pub const STAT_CSV_SCHEMA: &str =
    "#schema: kind,n,model,seed,trial,metric,value,count,mean,variance,min,max,reference";

fn fmt_opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

impl StatRow {
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let s = &self.summary;
        let trial = self.trial.map(|t| t.to_string()).unwrap_or_else(|| "all".into());
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.kind,
            self.n,
            self.model,
            self.seed,
            trial,
            self.metric,
            self.value,
            s.count,
            s.mean,
            s.variance,
            s.min,
            s.max,
            fmt_opt(self.reference)
        )?;
        Ok(())
    }
}

pub fn write_stat_csv<W: Write>(rows: &[StatRow], mut w: W) -> Result<()> {
    writeln!(w, "{STAT_CSV_SCHEMA}")?;
    for row in rows {
        row.write_csv(&mut w)?;
    }
    w.flush()?;
    Ok(())
}

/// One measured quantity of one trial.
#[derive(Debug, Clone)]
struct Measurement {
    metric: String,
    value: f64,
    sample: Summary,
    reference: Option<f64>,
}

impl Measurement {
    fn scalar(metric: impl Into<String>, value: f64, reference: Option<f64>) -> Self {
        Self { metric: metric.into(), value, sample: Summary::of([value]), reference }
    }

    fn sampled(metric: impl Into<String>, sample: Summary, reference: Option<f64>) -> Self {
        Self { metric: metric.into(), value: sample.mean, sample, reference }
    }
}

fn graph_for(spec: &ExperimentSpec, n: usize, seed: Seed) -> Result<WeightedDigraph> {
    Ok(WeightedDigraph::gen_gnp(n, spec.p, spec.model, seed)?)
}

fn run_trial(spec: &ExperimentSpec, n: usize, seed: Seed) -> Result<Vec<Measurement>> {
    let refs = reference_values(n)?;
    let g = graph_for(spec, n, seed)?;
    let n2 = (n * n) as f64;
    let out = match spec.kind {
        ExperimentKind::UpdateChurn => {
            let rows = run_churn(&g, spec.model, seed, spec.updates, false)?;
            let col = |f: fn(&ChurnRow) -> u64| Summary::of(rows.iter().map(|r| f(r) as f64));
            let asymmetric = rows.iter().filter(|r| r.report.sp_minus != r.report.sp_plus).count();
            vec![
                Measurement::sampled("sp_minus", col(|r| r.report.sp_minus), Some(2.0 * refs.ln_n)),
                Measurement::sampled("sp_plus", col(|r| r.report.sp_plus), Some(2.0 * refs.ln_n)),
                Measurement::sampled("lsp_minus", col(|r| r.report.lsp_minus), None),
                Measurement::sampled("lsp_plus", col(|r| r.report.lsp_plus), None),
                Measurement::sampled("lambda", col(|r| r.report.lambda), None),
                Measurement::scalar("sp_asymmetric_updates", asymmetric as f64, Some(0.0)),
            ]
        }
        kind => {
            let res = solve_apsp(&g, spec.queue)?;
            match kind {
                ExperimentKind::LspDensity => vec![Measurement::scalar(
                    "lsp_per_n2",
                    res.lsp_count() as f64 / n2,
                    Some(refs.lsp_density),
                )],
                ExperimentKind::DistanceStats => {
                    let d = stats::distance_summary(&res);
                    vec![
                        Measurement::sampled("distance", d, Some(refs.mean_distance)),
                        Measurement::scalar("distance_variance", d.variance, Some(refs.distance_variance)),
                    ]
                }
                ExperimentKind::HopStats => {
                    let hops = stats::hop_counts(&res);
                    let sample = Summary::of(
                        (0..n * n)
                            .filter(|&i| i / n != i % n && res.dist[i].is_finite())
                            .map(|i| f64::from(hops[i])),
                    );
                    vec![Measurement::sampled("hops", sample, Some(refs.ln_n))]
                }
                ExperimentKind::EdgeSpProb => {
                    let ess = essential_subgraph(&res, &g);
                    let frac = ess.edges.len() as f64 / g.edge_count().max(1) as f64;
                    vec![Measurement::scalar("edge_sp_fraction", frac, Some(refs.mean_distance))]
                }
                ExperimentKind::EssentialDegree => {
                    let ess = essential_subgraph(&res, &g);
                    vec![
                        Measurement::scalar("max_out_degree", ess.max_out_degree as f64, None),
                        Measurement::scalar("max_out_degree_over_ln_n", ess.max_out_degree as f64 / refs.ln_n, None),
                    ]
                }
                ExperimentKind::BallSizes => stats::mean_ball_sizes(&res, &spec.alphas)
                    .into_iter()
                    .zip(&spec.alphas)
                    .map(|(size, alpha)| Measurement::scalar(format!("ball_alpha_{alpha}"), size, None))
                    .collect(),
                ExperimentKind::ExamineScaling => vec![
                    Measurement::scalar("examined_per_n2", res.examined_lsp_count as f64 / n2, None),
                    Measurement::scalar("lsp_per_n2", res.lsp_count() as f64 / n2, Some(refs.lsp_density)),
                ],
                ExperimentKind::UpdateChurn => unreachable!(),
            }
        }
    };
    Ok(out)
}

/// Runs every trial of `spec` and returns per-trial rows followed by one
/// aggregate row per metric (per ladder size for EXAMINE_SCALING).
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Vec<StatRow>> {
    spec.validate()?;
    let model = model_name(spec.model);
    let mut rows = Vec::new();
    for n in spec.ladder() {
        let trials: Vec<Vec<Measurement>> = (0..spec.trials)
            .into_par_iter()
            .map(|t| run_trial(spec, n, trial_seed(spec.seed, t)))
            .collect::<Result<_>>()?;
        for (t, ms) in trials.iter().enumerate() {
            for m in ms {
                rows.push(StatRow {
                    kind: spec.kind,
                    n,
                    model: model.clone(),
                    seed: trial_seed(spec.seed, t).0,
                    trial: Some(t),
                    metric: m.metric.clone(),
                    value: m.value,
                    summary: m.sample,
                    reference: m.reference,
                });
            }
        }
        for (i, m) in trials[0].iter().enumerate() {
            let across = Summary::of(trials.iter().map(|ms| ms[i].value));
            rows.push(StatRow {
                kind: spec.kind,
                n,
                model: model.clone(),
                seed: spec.seed.0,
                trial: None,
                metric: m.metric.clone(),
                value: across.mean,
                summary: across,
                reference: m.reference,
            });
        }
    }
    Ok(rows)
}

/// Builds the path system of `g` and applies `updates` random edge updates
/// drawn from `seed`, one row per update.
pub fn run_churn(
    g: &WeightedDigraph,
    model: WeightModel,
    seed: Seed,
    updates: usize,
    timing: bool,
) -> Result<Vec<ChurnRow>> {
    let mut sampler = EdgeUpdateSampler::new(g, model, seed)?;
    let mut sys = PathSystem::init(g)?;
    let mut rows = Vec::with_capacity(updates);
    for update_index in 0..updates {
        let update = sampler.next_update();
        let start = Instant::now();
        let report = sys.apply_update(&[update])?;
        let micros = timing.then(|| start.elapsed().as_micros() as u64);
        rows.push(ChurnRow { seed: seed.0, n: g.n(), update_index, report, micros });
    }
    Ok(rows)
}

/// Aggregate row of `metric` at size `n`, if present.
pub fn aggregate<'a>(rows: &'a [StatRow], n: usize, metric: &str) -> Option<&'a StatRow> {
    rows.iter().find(|r| r.trial.is_none() && r.n == n && r.metric == metric)
}
