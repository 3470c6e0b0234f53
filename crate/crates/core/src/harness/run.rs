//! Single runs and seeded experiment matrices.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::config::{ExperimentConfig, RunSpec};
use super::io::save_run;
use super::plot::{field_path_svg, grid_path_svg, reward_chart, steps_chart, trailing_success_chart};
use super::report::{comparison_table, summaries_csv, summarize, RunSummary};
use crate::agents::{ActorCriticAgent, DqnAgent};
use crate::env::{GridWorld, Outcome, Point};
use crate::metrics::{EpisodeRecord, RunLog, RunMetadata};
use crate::nn::checkpoint;
use crate::{Error, Result};

pub const POLICY_CHECKPOINT: &str = "policy.json";
pub const CHECKPOINT_DIR: &str = "checkpoints";

/// Per-episode callback shared by parallel workers.
pub type Progress<'a> = &'a (dyn Fn(&RunSpec, &EpisodeRecord) + Sync);

pub fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn build_grid(cfg: &ExperimentConfig, spec: &RunSpec) -> Result<GridWorld> {
    let env = spec.env.build_grid(cfg.slippery)?;
    Ok(match cfg.max_steps {
        Some(m) => env.with_max_steps(m),
        None => env,
    })
}

/// A greedy rollout after training.
#[derive(Debug, Clone, PartialEq)]
pub enum PlannedPath {
    Grid(Vec<usize>),
    Field(Vec<Point>),
}

impl PlannedPath {
    pub fn moves(&self) -> usize {
        match self {
            PlannedPath::Grid(p) => p.len().saturating_sub(1),
            PlannedPath::Field(p) => p.len().saturating_sub(1),
        }
    }

    /// One line per visited state: `state,row,col` on grids, `x,y` in the field.
    pub fn to_trace(&self, grid: Option<&GridWorld>) -> String {
        let mut out = String::new();
        match (self, grid) {
            (PlannedPath::Grid(p), Some(env)) => {
                out.push_str("state,row,col\n");
                for &s in p {
                    let (r, c) = env.coords(s);
                    let _ = writeln!(out, "{s},{r},{c}");
                }
            }
            (PlannedPath::Grid(p), None) => {
                out.push_str("state\n");
                for &s in p {
                    let _ = writeln!(out, "{s}");
                }
            }
            (PlannedPath::Field(p), _) => {
                out.push_str("x,y\n");
                for q in p {
                    let _ = writeln!(out, "{},{}", q.x, q.y);
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub log: RunLog,
    pub path: PlannedPath,
    pub path_outcome: Option<Outcome>,
    pub dir: PathBuf,
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Trains one (algorithm, environment, seed) combination and writes its artifacts under
/// `out_root/<run name>/`: `log.csv`, `meta.json`, `path.txt`, SVG plots and checkpoints.
pub fn run_one(cfg: &ExperimentConfig, spec: &RunSpec, out_root: &Path, progress: Progress) -> Result<RunOutput> {
    spec.check()?;
    let dir = out_root.join(spec.run_name());
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let mut rng = rng_for(spec.seed);
    let started = Instant::now();
    let on_episode = |r: &EpisodeRecord| progress(spec, r);

    let (rows, snapshot, path, path_outcome, path_svg) = if let Some(variant) = spec.algo.dqn_variant() {
        let dqn_cfg = cfg.dqn_config(variant)?;
        let snapshot = toml::to_string(&dqn_cfg).expect("config serializes");
        let mut env = build_grid(cfg, spec)?;
        let mut agent = DqnAgent::new(env.n_states(), env.n_actions(), dqn_cfg, &mut rng)?;
        let rows = agent.train(&mut env, &mut rng, on_episode)?;
        checkpoint::save(agent.policy(), dir.join(POLICY_CHECKPOINT))?;
        let path = agent.extract_path(&mut env, &mut rng)?;
        let svg = grid_path_svg(&env, &path);
        write(&dir.join("path.txt"), &PlannedPath::Grid(path.clone()).to_trace(Some(&env)))?;
        (rows, snapshot, PlannedPath::Grid(path), env.outcome(), svg)
    } else {
        let algo = spec.algo.actor_critic().expect("continuous algorithm");
        let ac_cfg = cfg.actor_critic_config(algo)?;
        let farm = cfg.farm_params()?;
        let snapshot = format!(
            "{}\n[farm]\n{}",
            toml::to_string(&ac_cfg).expect("config serializes"),
            toml::to_string(&farm).expect("params serialize")
        );
        let mut env = spec.env.build_field(farm)?;
        let mut agent = ActorCriticAgent::new(env.observation_dim(), env.action_dim(), ac_cfg, &mut rng)?;
        let ckpt = dir.join(CHECKPOINT_DIR);
        let rows = agent.train(&mut env, &mut rng, Some(&ckpt), on_episode)?;
        agent.save_checkpoints(&ckpt)?;
        let path = agent.rollout(&mut env)?;
        let svg = field_path_svg(env.scenario(), &path);
        let trace = PlannedPath::Field(path);
        write(&dir.join("path.txt"), &trace.to_trace(None))?;
        (rows, snapshot, trace, env.outcome(), svg)
    };

    let meta = RunMetadata {
        algorithm: spec.algo.to_string(),
        environment: spec.env.to_string(),
        seed: spec.seed,
        config: snapshot,
    };
    let mut log = RunLog::from_rows(meta, rows)?;
    log.finish(started.elapsed().as_secs_f64());
    save_run(&log, &dir)?;
    let title = spec.run_name();
    write(&dir.join("path.svg"), &path_svg)?;
    write(&dir.join("steps.svg"), &steps_chart(&log, &title)?)?;
    write(&dir.join("reward.svg"), &reward_chart(&log, &title)?)?;
    write(&dir.join("trailing.svg"), &trailing_success_chart(&log, &title)?)?;
    Ok(RunOutput {
        log,
        path,
        path_outcome,
        dir,
    })
}

#[derive(Debug)]
pub struct MatrixEntry {
    pub spec: RunSpec,
    pub result: std::result::Result<RunSummary, String>,
}

/// Runs every combination in `cfg` on `cfg.workers` threads. A failed run is recorded and
/// the rest continue. Writes `summary.md`, `summary.csv` and, if any run failed,
/// `failures.txt` under `out_root`.
pub fn run_matrix(cfg: &ExperimentConfig, out_root: &Path, progress: Progress) -> Result<Vec<MatrixEntry>> {
    let specs = cfg.runs();
    if specs.is_empty() {
        return Err(Error::InvalidConfig("no algorithm matches any environment kind".into()));
    }
    std::fs::create_dir_all(out_root).map_err(|e| Error::io(out_root, e))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
    let entries: Vec<MatrixEntry> = pool.install(|| {
        specs
            .par_iter()
            .map(|spec| MatrixEntry {
                spec: spec.clone(),
                result: run_one(cfg, spec, out_root, progress)
                    .map(|out| summarize(&out.log, cfg.stability_threshold))
                    .map_err(|e| e.to_string()),
            })
            .collect()
    });

    let ok: Vec<RunSummary> = entries.iter().filter_map(|e| e.result.as_ref().ok().cloned()).collect();
    write(&out_root.join("summary.md"), &comparison_table(&ok))?;
    write(&out_root.join("summary.csv"), &summaries_csv(&ok)?)?;
    let failures: Vec<String> = entries
        .iter()
        .filter_map(|e| e.result.as_ref().err().map(|msg| format!("{}: {msg}", e.spec.run_name())))
        .collect();
    if !failures.is_empty() {
        write(&out_root.join("failures.txt"), &(failures.join("\n") + "\n"))?;
    }
    Ok(entries)
}

/// Greedy rollout of a saved agent from its run directory (or checkpoint directory).
pub fn evaluate(cfg: &ExperimentConfig, spec: &RunSpec, checkpoint_dir: &Path) -> Result<(PlannedPath, Option<Outcome>, String)> {
    spec.check()?;
    let mut rng = rng_for(spec.seed);
    if let Some(variant) = spec.algo.dqn_variant() {
        let file = if checkpoint_dir.is_file() {
            checkpoint_dir.to_path_buf()
        } else {
            checkpoint_dir.join(POLICY_CHECKPOINT)
        };
        let net = checkpoint::load(&file)?;
        let agent = DqnAgent::from_network(net, cfg.dqn_config(variant)?)?;
        let mut env = build_grid(cfg, spec)?;
        let path = agent.extract_path(&mut env, &mut rng)?;
        let trace = PlannedPath::Grid(path.clone()).to_trace(Some(&env));
        Ok((PlannedPath::Grid(path), env.outcome(), trace))
    } else {
        let algo = spec.algo.actor_critic().expect("continuous algorithm");
        let dir = if checkpoint_dir.join(CHECKPOINT_DIR).is_dir() {
            checkpoint_dir.join(CHECKPOINT_DIR)
        } else {
            checkpoint_dir.to_path_buf()
        };
        let agent = ActorCriticAgent::load_checkpoints(&dir, cfg.actor_critic_config(algo)?)?;
        let mut env = spec.env.build_field(cfg.farm_params()?)?;
        let path = PlannedPath::Field(agent.rollout(&mut env)?);
        let trace = path.to_trace(None);
        Ok((path, env.outcome(), trace))
    }
}
