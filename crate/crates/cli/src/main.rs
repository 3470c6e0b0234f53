use std::path::{Path, PathBuf};
use std::process::ExitCode;

use agripath::harness::plot::{field_path_svg, grid_path_svg, reward_chart, steps_chart, trailing_success_chart};
use agripath::harness::report::{comparison_table, load_summaries, summaries_csv};
use agripath::harness::run::{build_grid, evaluate, run_matrix, run_one, PlannedPath};
use agripath::harness::{load_run, Algo, EnvSpec, ExperimentConfig, RunSpec};
use agripath::metrics::{EpisodeRecord, RunLog, RunMetadata, TRAILING_WINDOW};
use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "agripath", version, about = "Train and compare deep RL path planners on grid and continuous farm fields")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Default)]
struct Common {
    /// TOML experiment file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Seed; replaces the config's seed list.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// dqn, double, dueling, ddpg or td3; replaces the config's algorithm list.
    #[arg(long)]
    algo: Option<Algo>,
    /// 8x8, 10x10, 4x4, scenario1..3, map:<file> or scenario:<file>; replaces the config's environment list.
    #[arg(long)]
    env: Option<EnvSpec>,
    /// Episode count override.
    #[arg(long)]
    episodes: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Train one algorithm on one environment with one seed.
    Train {
        #[command(flatten)]
        common: Common,
        /// Slippery grid transitions.
        #[arg(long)]
        slippery: bool,
        /// Print a progress line every this many episodes (0 = quiet).
        #[arg(long, default_value_t = 100)]
        log_every: usize,
    },
    /// Run every algorithm × environment × seed combination of a config.
    Matrix {
        #[command(flatten)]
        common: Common,
        /// Parallel runs; overrides the config.
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long, default_value_t = 0)]
        log_every: usize,
    },
    /// Greedy rollout of a trained agent from its run directory.
    Eval {
        #[command(flatten)]
        common: Common,
        /// Run directory (or checkpoint directory / policy file).
        #[arg(long)]
        run: PathBuf,
    },
    /// Comparison table over all runs under a directory.
    Report {
        /// Directory holding run directories (or a single run).
        dir: PathBuf,
        /// Step threshold for the stability measure.
        #[arg(long)]
        stability_threshold: Option<usize>,
        /// Also write report.md and report.csv here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Redraw the SVG curves of a run.
    Plot {
        /// Run directory or a log CSV.
        input: PathBuf,
        /// Where to write the SVGs; defaults to the run directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load_config(common: &Common) -> Result<ExperimentConfig> {
    let mut cfg = match &common.config {
        Some(p) => ExperimentConfig::load(p).with_context(|| format!("reading config {}", p.display()))?,
        None => ExperimentConfig::default(),
    };
    if let Some(a) = common.algo {
        cfg.algos = vec![a];
    }
    if let Some(e) = &common.env {
        cfg.envs = vec![e.clone()];
    }
    if let Some(s) = common.seed {
        cfg.seeds = vec![s];
    }
    if common.episodes.is_some() {
        cfg.episodes = common.episodes;
    }
    if let Some(o) = &common.out {
        cfg.out = Some(o.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn out_dir(cfg: &ExperimentConfig) -> PathBuf {
    cfg.out.clone().unwrap_or_else(|| PathBuf::from("runs"))
}

fn progress_printer(every: usize) -> impl Fn(&RunSpec, &EpisodeRecord) + Sync {
    move |spec: &RunSpec, r: &EpisodeRecord| {
        if every > 0 && r.episode.is_multiple_of(every) {
            eprintln!(
                "{} episode {} reward {:.3} steps {} outcome {} eps/noise {:.3}",
                spec.run_name(),
                r.episode,
                r.reward,
                r.steps,
                r.outcome,
                r.epsilon_or_noise
            );
        }
    }
}

fn train(common: Common, slippery: bool, log_every: usize) -> Result<()> {
    let mut cfg = load_config(&common)?;
    cfg.slippery |= slippery;
    let specs = cfg.runs();
    let [spec] = specs.as_slice() else {
        if specs.is_empty() {
            bail!("algorithm and environment kinds do not match (grid algorithms: dqn, double, dueling; continuous: ddpg, td3)");
        }
        bail!("train runs a single combination but the config selects {}; use `matrix` or pass --algo/--env/--seed", specs.len());
    };
    let out = out_dir(&cfg);
    let progress = progress_printer(log_every);
    let result = run_one(&cfg, spec, &out, &progress)?;
    let summary = agripath::harness::summarize(&result.log, cfg.stability_threshold);
    println!("run: {}", result.dir.display());
    println!("episodes: {}", summary.episodes);
    println!(
        "convergence: {}",
        summary.convergence.map_or("none".to_string(), |c| format!("episode {c}"))
    );
    println!("trailing-{TRAILING_WINDOW} success: {}", summary.trailing_success);
    println!("trailing-{TRAILING_WINDOW} mean reward: {:.4}", summary.trailing_reward);
    println!("greedy path: {} moves, outcome {}", result.path.moves(), outcome_str(result.path_outcome));
    println!("wall clock: {:.1}s", summary.wall_clock_secs.unwrap_or(0.0));
    Ok(())
}

fn outcome_str(o: Option<agripath::env::Outcome>) -> String {
    o.map_or("unfinished".to_string(), |o| o.to_string())
}

fn matrix(common: Common, workers: Option<usize>, log_every: usize) -> Result<()> {
    let mut cfg = load_config(&common)?;
    if let Some(w) = workers {
        cfg.workers = w;
    }
    cfg.validate()?;
    let out = out_dir(&cfg);
    let progress = progress_printer(log_every);
    let entries = run_matrix(&cfg, &out, &progress)?;
    let mut failed = 0;
    for e in &entries {
        match &e.result {
            Ok(s) => println!(
                "ok   {} trailing success {} convergence {}",
                e.spec.run_name(),
                s.trailing_success,
                s.convergence.map_or("none".to_string(), |c| c.to_string())
            ),
            Err(msg) => {
                failed += 1;
                println!("FAIL {}: {msg}", e.spec.run_name());
            }
        }
    }
    println!();
    print!("{}", std::fs::read_to_string(out.join("summary.md"))?);
    if failed > 0 {
        bail!("{failed} of {} runs failed; see {}", entries.len(), out.join("failures.txt").display());
    }
    Ok(())
}

/// Fills algorithm/environment/seed from the run's metadata when not given on the command line.
fn eval(mut common: Common, run: PathBuf) -> Result<()> {
    let run_dir = if run.is_file() { run.parent().map(Path::to_path_buf).unwrap_or_default() } else { run.clone() };
    let meta = [run_dir.clone(), run_dir.parent().map(Path::to_path_buf).unwrap_or_default()]
        .iter()
        .find_map(|d| load_run(d).ok())
        .map(|log| log.meta().clone());
    if let Some(m) = &meta {
        if common.algo.is_none() {
            common.algo = m.algorithm.parse().ok();
        }
        if common.env.is_none() {
            common.env = m.environment.parse().ok();
        }
        if common.seed.is_none() {
            common.seed = Some(m.seed);
        }
    }
    let (Some(algo), Some(env)) = (common.algo, common.env.clone()) else {
        bail!("--algo and --env are required when the run directory has no metadata");
    };
    let cfg = load_config(&common)?;
    let spec = RunSpec {
        algo,
        env,
        seed: common.seed.unwrap_or(0),
    };
    let (path, outcome, trace) = evaluate(&cfg, &spec, &run)?;
    print!("{trace}");
    println!("outcome: {} after {} moves", outcome_str(outcome), path.moves());
    if let Some(out) = &common.out {
        std::fs::create_dir_all(out)?;
        let svg = match &path {
            PlannedPath::Grid(p) => grid_path_svg(&build_grid(&cfg, &spec)?, p),
            PlannedPath::Field(p) => field_path_svg(spec.env.build_field(cfg.farm_params()?)?.scenario(), p),
        };
        std::fs::write(out.join("eval_path.svg"), svg)?;
        std::fs::write(out.join("eval_path.txt"), trace)?;
    }
    Ok(())
}

fn report(dir: PathBuf, threshold: Option<usize>, out: Option<PathBuf>) -> Result<()> {
    let threshold = threshold.unwrap_or(agripath::metrics::STABILITY_STEPS_THRESHOLD);
    let summaries = load_summaries(&dir, threshold)?;
    if summaries.is_empty() {
        bail!("no runs (directories with log.csv) under {}", dir.display());
    }
    let table = comparison_table(&summaries);
    print!("{table}");
    if let Some(out) = out {
        std::fs::create_dir_all(&out)?;
        std::fs::write(out.join("report.md"), &table)?;
        std::fs::write(out.join("report.csv"), summaries_csv(&summaries)?)?;
    }
    Ok(())
}

fn plot(input: PathBuf, out: Option<PathBuf>) -> Result<()> {
    let (log, run_dir) = if input.is_dir() {
        (load_run(&input)?, Some(input.clone()))
    } else {
        let file = std::fs::File::open(&input).with_context(|| format!("opening {}", input.display()))?;
        let rows = agripath::harness::read_rows(std::io::BufReader::new(file))?;
        let meta = RunMetadata {
            algorithm: String::new(),
            environment: String::new(),
            seed: 0,
            config: String::new(),
        };
        (RunLog::from_rows(meta, rows)?, input.parent().map(Path::to_path_buf))
    };
    let out = out.or(run_dir.clone()).unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&out)?;
    let title = input.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    std::fs::write(out.join("steps.svg"), steps_chart(&log, &title)?)?;
    std::fs::write(out.join("reward.svg"), reward_chart(&log, &title)?)?;
    std::fs::write(out.join("trailing.svg"), trailing_success_chart(&log, &title)?)?;
    println!("wrote steps.svg, reward.svg, trailing.svg to {}", out.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Train {
            common,
            slippery,
            log_every,
        } => train(common, slippery, log_every),
        Command::Matrix {
            common,
            workers,
            log_every,
        } => matrix(common, workers, log_every),
        Command::Eval { common, run } => eval(common, run),
        Command::Report {
            dir,
            stability_threshold,
            out,
        } => report(dir, stability_threshold, out),
        Command::Plot { input, out } => plot(input, out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
