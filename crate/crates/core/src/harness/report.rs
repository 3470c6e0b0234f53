//! Per-run summaries and the cross-variant comparison table.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::Algo;
use super::io::{load_run, LOG_FILE};
use crate::metrics::{detect_convergence, run_stability, ConvergenceKind, RunLog, TRAILING_WINDOW};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub algorithm: String,
    pub environment: String,
    pub seed: u64,
    pub episodes: usize,
    /// Episode at which the convergence detector first fired.
    pub convergence: Option<usize>,
    /// Goals in the last 100 episodes.
    pub trailing_success: usize,
    /// Mean reward over the last 100 episodes.
    pub trailing_reward: f64,
    pub max_exploration: usize,
    pub stability: f64,
    pub wall_clock_secs: Option<f64>,
}

pub fn convergence_kind(algorithm: &str) -> ConvergenceKind {
    match algorithm.parse::<Algo>() {
        Ok(a) if !a.is_discrete() => ConvergenceKind::Continuous,
        _ => ConvergenceKind::Discrete,
    }
}

pub fn summarize(log: &RunLog, stability_threshold: usize) -> RunSummary {
    let meta = log.meta();
    let rewards = log.rewards();
    let tail = &rewards[rewards.len().saturating_sub(TRAILING_WINDOW)..];
    RunSummary {
        algorithm: meta.algorithm.clone(),
        environment: meta.environment.clone(),
        seed: meta.seed,
        episodes: log.rows().len(),
        convergence: detect_convergence(log, convergence_kind(&meta.algorithm)),
        trailing_success: log.trailing_successes(),
        trailing_reward: if tail.is_empty() { 0.0 } else { tail.iter().sum::<f64>() / tail.len() as f64 },
        max_exploration: log.max_exploration(),
        stability: run_stability(log, stability_threshold),
        wall_clock_secs: log.wall_clock_secs(),
    }
}

/// Every run directory (one containing `log.csv`) directly under `root`, sorted by name.
pub fn find_runs(root: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let root = root.as_ref();
    if root.join(LOG_FILE).exists() {
        return Ok(vec![root.to_path_buf()]);
    }
    let entries = std::fs::read_dir(root).map_err(|e| Error::io(root, e))?;
    let mut dirs: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.join(LOG_FILE).exists())
        .collect();
    dirs.sort();
    Ok(dirs)
}

pub fn load_summaries(root: impl AsRef<Path>, stability_threshold: usize) -> Result<Vec<RunSummary>> {
    find_runs(root)?
        .into_iter()
        .map(|d| load_run(&d).map(|log| summarize(&log, stability_threshold)))
        .collect()
}

fn mean(xs: impl Iterator<Item = f64>) -> Option<f64> {
    let (mut sum, mut n) = (0.0, 0usize);
    for x in xs {
        sum += x;
        n += 1;
    }
    (n > 0).then(|| sum / n as f64)
}

/// Markdown table grouped by environment and algorithm, one row per group.
pub fn comparison_table(summaries: &[RunSummary]) -> String {
    let mut groups: BTreeMap<(&str, &str), Vec<&RunSummary>> = BTreeMap::new();
    for s in summaries {
        groups.entry((&s.environment, &s.algorithm)).or_default().push(s);
    }
    let mut out = String::new();
    out.push_str("| environment | algorithm | seeds | convergence start | trailing success | trailing reward | max exploration | stability | training time (s) |\n");
    out.push_str("|---|---|---|---|---|---|---|---|---|\n");
    for ((env, algo), runs) in groups {
        let convergence: Vec<String> = runs
            .iter()
            .map(|r| r.convergence.map_or("none".to_string(), |c| c.to_string()))
            .collect();
        let seeds: Vec<String> = runs.iter().map(|r| r.seed.to_string()).collect();
        let success = mean(runs.iter().map(|r| r.trailing_success as f64)).unwrap_or(0.0);
        let reward = mean(runs.iter().map(|r| r.trailing_reward)).unwrap_or(0.0);
        let explore = runs.iter().map(|r| r.max_exploration).max().unwrap_or(0);
        let stability = mean(runs.iter().map(|r| r.stability)).unwrap_or(0.0);
        let time = mean(runs.iter().filter_map(|r| r.wall_clock_secs)).map_or("-".to_string(), |t| format!("{t:.1}"));
        let _ = writeln!(
            out,
            "| {env} | {algo} | {} | {} | {success:.1} | {reward:.3} | {explore} | {:.1}% | {time} |",
            seeds.join(" "),
            convergence.join(" "),
            stability * 100.0
        );
    }
    out
}

/// One line per run, for machine consumption.
pub fn summaries_csv(summaries: &[RunSummary]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for s in summaries {
        w.serialize(s)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Format {
        kind: "csv",
        detail: e.to_string(),
    })?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
