//! Runs the sweep × seed cross product of an experiment and writes its outputs:
//!
//! - `runs/NNNN_<label>_seed<S>.csv`, one trace per run
//! - `runs.csv`, a manifest mapping runs to files and outcomes
//! - `stats.csv`, per-group aggregates

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::config::{ExperimentConfig, RunSpec, ScenarioConfig};
use crate::error::{Error, Result};
use crate::sim::{analyze, run_closed_loop, ClosedLoopTrace, StatsRow, Termination};
use crate::trace::{format_stats, read_trace, write_atomic, write_trace};
use crate::weights::DistanceMetric;

/// sha256 over the canonical JSON of the resolved scenario and seed.
pub fn config_hash(scenario: &ScenarioConfig, seed: u64) -> String {
    let doc = serde_json::json!({ "scenario": scenario.to_value(), "seed": seed });
    let bytes = serde_json::to_vec(&doc).expect("JSON values serialize");
    hex::encode(Sha256::digest(&bytes))
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub index: usize,
    pub label: String,
    pub seed: u64,
    pub file: PathBuf,
    pub result: std::result::Result<Termination, String>,
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub runs: Vec<RunOutcome>,
    pub stats: Vec<StatsRow>,
    pub stats_path: PathBuf,
}

impl ExperimentReport {
    pub fn failures(&self) -> usize {
        self.runs.iter().filter(|r| r.result.is_err()).count()
    }
}

fn file_name(index: usize, label: &str, seed: u64) -> String {
    let clean: String =
        label.chars().map(|c| if c.is_ascii_alphanumeric() || "._=-".contains(c) { c } else { '_' }).collect();
    format!("{index:04}_{clean}_seed{seed}.csv")
}

fn alternatives(sc: &ScenarioConfig) -> Vec<Vec<f64>> {
    sc.missions.iter().skip(1).map(|m| m.target.clone()).collect()
}

/// Per-label statistics, labels in order of first appearance.
pub fn stats_for(runs: &[(&RunSpec, &ClosedLoopTrace<f64>)]) -> Result<Vec<StatsRow>> {
    let mut labels: Vec<&str> = Vec::new();
    for (spec, _) in runs {
        if !labels.contains(&spec.label.as_str()) {
            labels.push(&spec.label);
        }
    }
    let mut rows = Vec::with_capacity(labels.len());
    for label in labels {
        let group: Vec<_> = runs.iter().filter(|(s, _)| s.label == label).collect();
        let spec = group[0].0;
        let traces: Vec<(String, &ClosedLoopTrace<f64>)> = group.iter().map(|(s, t)| (s.label.clone(), *t)).collect();
        let metric: DistanceMetric = spec.scenario.weights.metric.into();
        rows.extend(analyze(&traces, &alternatives(&spec.scenario), metric)?);
    }
    Ok(rows)
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let specs = cfg.runs()?;
    let runs_dir = cfg.out_dir.join("runs");
    std::fs::create_dir_all(&runs_dir).map_err(|e| Error::io(&runs_dir, e))?;

    let execute = || -> Vec<(RunOutcome, Option<ClosedLoopTrace<f64>>)> {
        specs
            .par_iter()
            .enumerate()
            .map(|(index, spec)| {
                let file = runs_dir.join(file_name(index, &spec.label, spec.seed));
                let attempt = spec.scenario.build(spec.seed).and_then(|sc| run_closed_loop(&sc)).and_then(|run| {
                    let mut trace = run.trace;
                    trace.config_hash = config_hash(&spec.scenario, spec.seed);
                    write_trace(&trace, &file)?;
                    Ok(trace)
                });
                let (result, trace) = match attempt {
                    Ok(t) => (Ok(t.termination), Some(t)),
                    Err(e) => (Err(e.to_string()), None),
                };
                (RunOutcome { index, label: spec.label.clone(), seed: spec.seed, file, result }, trace)
            })
            .collect()
    };
    let results = match cfg.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(format!("cannot build worker pool: {e}")))?
            .install(execute),
        None => execute(),
    };

    let finished: Vec<(&RunSpec, &ClosedLoopTrace<f64>)> =
        specs.iter().zip(&results).filter_map(|(s, (_, t))| t.as_ref().map(|t| (s, t))).collect();
    let stats = if finished.is_empty() { Vec::new() } else { stats_for(&finished)? };
    let stats_path = cfg.out_dir.join("stats.csv");
    write_atomic(&stats_path, &format_stats(&stats))?;

    let runs: Vec<RunOutcome> = results.into_iter().map(|(o, _)| o).collect();
    write_atomic(&cfg.out_dir.join("runs.csv"), &format_manifest(&runs))?;
    Ok(ExperimentReport { runs, stats, stats_path })
}

fn format_manifest(runs: &[RunOutcome]) -> String {
    let mut out = String::from("index,label,seed,file,outcome\n");
    for r in runs {
        let file = r.file.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default();
        let outcome = match &r.result {
            Ok(t) => t.to_string(),
            Err(e) => format!("error: {}", e.replace([',', '\n'], " ")),
        };
        out.push_str(&format!("{},\"{}\",{},{},{}\n", r.index, r.label.replace('"', "'"), r.seed, file, outcome));
    }
    out
}

/// Recomputes the statistics table from the trace files an experiment wrote.
pub fn recompute_stats(cfg: &ExperimentConfig, out_dir: &Path) -> Result<Vec<StatsRow>> {
    let specs = cfg.runs()?;
    let mut traces = Vec::new();
    for (index, spec) in specs.iter().enumerate() {
        let path = out_dir.join("runs").join(file_name(index, &spec.label, spec.seed));
        if path.exists() {
            traces.push((spec, read_trace(&path)?));
        }
    }
    let refs: Vec<(&RunSpec, &ClosedLoopTrace<f64>)> = traces.iter().map(|(s, t)| (*s, t)).collect();
    if refs.is_empty() {
        return Ok(Vec::new());
    }
    stats_for(&refs)
}
