//! Experiment configuration files (TOML).
//!
//! ```toml
//! algos = ["dqn", "double", "dueling"]
//! envs = ["8x8", "10x10"]
//! seeds = [1, 2, 3]
//! episodes = 10000
//!
//! [dqn]
//! learning_rate = 0.001
//!
//! [td3]
//! hidden = [64, 64]
//! ```
//!
//! Section keys overlay the algorithm defaults; unknown keys anywhere are rejected.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::agents::{ActorCriticAlgo, ActorCriticConfig, DqnConfig, DqnVariant};
use crate::env::{ContinuousFarm, FarmParams, GridWorld, Scenario};
use crate::metrics::STABILITY_STEPS_THRESHOLD;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algo {
    Dqn,
    Double,
    Dueling,
    Ddpg,
    Td3,
}

impl Algo {
    pub const ALL: [Algo; 5] = [Algo::Dqn, Algo::Double, Algo::Dueling, Algo::Ddpg, Algo::Td3];

    pub fn as_str(self) -> &'static str {
        match self {
            Algo::Dqn => "dqn",
            Algo::Double => "double",
            Algo::Dueling => "dueling",
            Algo::Ddpg => "ddpg",
            Algo::Td3 => "td3",
        }
    }

    pub fn is_discrete(self) -> bool {
        matches!(self, Algo::Dqn | Algo::Double | Algo::Dueling)
    }

    pub fn dqn_variant(self) -> Option<DqnVariant> {
        match self {
            Algo::Dqn => Some(DqnVariant::Dqn),
            Algo::Double => Some(DqnVariant::Double),
            Algo::Dueling => Some(DqnVariant::Dueling),
            _ => None,
        }
    }

    pub fn actor_critic(self) -> Option<ActorCriticAlgo> {
        match self {
            Algo::Ddpg => Some(ActorCriticAlgo::Ddpg),
            Algo::Td3 => Some(ActorCriticAlgo::Td3),
            _ => None,
        }
    }
}

impl fmt::Display for Algo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algo {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algo::ALL
            .into_iter()
            .find(|a| a.as_str() == s.trim().to_ascii_lowercase())
            .ok_or_else(|| Error::InvalidConfig(format!("unknown algorithm `{s}` (expected dqn, double, dueling, ddpg or td3)")))
    }
}

/// Environment selector: a shipped name or a file.
///
/// Grid: `8x8`, `10x10`, `4x4`, `map:<path>`. Continuous: `scenario1`..`scenario3`,
/// `scenario:<path>`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum EnvSpec {
    Grid { name: String, path: Option<PathBuf> },
    Field { name: String, path: Option<PathBuf> },
}

impl EnvSpec {
    pub fn name(&self) -> &str {
        match self {
            EnvSpec::Grid { name, .. } | EnvSpec::Field { name, .. } => name,
        }
    }

    pub fn is_grid(&self) -> bool {
        matches!(self, EnvSpec::Grid { .. })
    }

    /// Name safe to use in file names.
    pub fn slug(&self) -> String {
        self.name()
            .chars()
            .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
            .collect()
    }

    pub fn build_grid(&self, slippery: bool) -> Result<GridWorld> {
        match self {
            EnvSpec::Grid { path: Some(p), .. } => GridWorld::load(p, slippery),
            EnvSpec::Grid { name, path: None } => match name.as_str() {
                "8x8" => Ok(GridWorld::canonical_8x8(slippery)),
                "10x10" => Ok(GridWorld::dense_10x10(slippery)),
                "4x4" => Ok(GridWorld::small_4x4(slippery)),
                other => Err(Error::InvalidConfig(format!("unknown map `{other}`"))),
            },
            EnvSpec::Field { .. } => Err(Error::InvalidConfig(format!("`{}` is not a grid map", self.name()))),
        }
    }

    pub fn build_field(&self, params: FarmParams) -> Result<ContinuousFarm> {
        let scenario = match self {
            EnvSpec::Field { path: Some(p), .. } => Scenario::load(p)?,
            EnvSpec::Field { name, path: None } => {
                let id = name
                    .strip_prefix("scenario")
                    .and_then(|d| d.parse::<u8>().ok())
                    .ok_or_else(|| Error::InvalidConfig(format!("unknown scenario `{name}`")))?;
                Scenario::builtin(id)?
            }
            EnvSpec::Grid { .. } => return Err(Error::InvalidConfig(format!("`{}` is not a continuous scenario", self.name()))),
        };
        ContinuousFarm::new(scenario, params)
    }
}

impl fmt::Display for EnvSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EnvSpec::Grid { path: Some(p), .. } => write!(f, "map:{}", p.display()),
            EnvSpec::Field { path: Some(p), .. } => write!(f, "scenario:{}", p.display()),
            _ => f.write_str(self.name()),
        }
    }
}

impl FromStr for EnvSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let stem = |p: &str| {
            Path::new(p)
                .file_stem()
                .map(|x| x.to_string_lossy().into_owned())
                .unwrap_or_else(|| p.to_string())
        };
        if let Some(p) = s.strip_prefix("map:") {
            return Ok(EnvSpec::Grid {
                name: stem(p),
                path: Some(PathBuf::from(p)),
            });
        }
        if let Some(p) = s.strip_prefix("scenario:") {
            return Ok(EnvSpec::Field {
                name: stem(p),
                path: Some(PathBuf::from(p)),
            });
        }
        match s {
            "8x8" | "10x10" | "4x4" => Ok(EnvSpec::Grid {
                name: s.to_string(),
                path: None,
            }),
            "scenario1" | "scenario2" | "scenario3" => Ok(EnvSpec::Field {
                name: s.to_string(),
                path: None,
            }),
            _ => Err(Error::InvalidConfig(format!(
                "unknown environment `{s}` (expected 8x8, 10x10, 4x4, scenario1-3, map:<path> or scenario:<path>)"
            ))),
        }
    }
}

impl Serialize for EnvSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for EnvSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

fn default_algos() -> Vec<Algo> {
    vec![Algo::Dqn]
}

fn default_envs() -> Vec<EnvSpec> {
    vec![EnvSpec::Grid {
        name: "8x8".into(),
        path: None,
    }]
}

fn default_seeds() -> Vec<u64> {
    vec![0]
}

fn default_workers() -> usize {
    1
}

fn default_stability_threshold() -> usize {
    STABILITY_STEPS_THRESHOLD
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_algos")]
    pub algos: Vec<Algo>,
    #[serde(default = "default_envs")]
    pub envs: Vec<EnvSpec>,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    /// Overrides the per-algorithm episode count.
    #[serde(default)]
    pub episodes: Option<usize>,
    #[serde(default)]
    pub slippery: bool,
    /// Grid step limit; defaults depend on `slippery`.
    #[serde(default)]
    pub max_steps: Option<usize>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    /// Parallel runs in a matrix.
    #[serde(default = "default_workers")]
    pub workers: usize,
    #[serde(default = "default_stability_threshold")]
    pub stability_threshold: usize,
    #[serde(default)]
    pub dqn: toml::Table,
    #[serde(default)]
    pub ddpg: toml::Table,
    #[serde(default)]
    pub td3: toml::Table,
    #[serde(default)]
    pub farm: toml::Table,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        toml::from_str("").expect("empty config is valid")
    }
}

/// Applies `patch` on top of `base`, rejecting keys `base` does not have.
pub fn overlay<T: Serialize + DeserializeOwned>(base: &T, patch: &toml::Table, section: &str) -> Result<T> {
    let mut table = toml::Table::try_from(base).map_err(|e| Error::InvalidConfig(format!("[{section}]: {e}")))?;
    for (key, value) in patch {
        if !table.contains_key(key) {
            return Err(Error::InvalidConfig(format!("[{section}]: unknown key `{key}`")));
        }
        table.insert(key.clone(), value.clone());
    }
    table.try_into().map_err(|e| Error::InvalidConfig(format!("[{section}]: {e}")))
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.algos.is_empty() || self.envs.is_empty() || self.seeds.is_empty() {
            return Err(Error::InvalidConfig("algos, envs and seeds must be non-empty".into()));
        }
        if self.workers == 0 {
            return Err(Error::InvalidConfig("workers must be positive".into()));
        }
        if self.episodes == Some(0) || self.max_steps == Some(0) {
            return Err(Error::InvalidConfig("episodes and max_steps must be positive".into()));
        }
        for (section, table) in [("dqn", &self.dqn), ("ddpg", &self.ddpg), ("td3", &self.td3)] {
            for reserved in ["variant", "algo", "episodes"] {
                if table.contains_key(reserved) {
                    return Err(Error::InvalidConfig(format!(
                        "[{section}]: `{reserved}` is set at the top level, not in a section"
                    )));
                }
            }
        }
        // Sections are checked even when no selected algorithm uses them.
        self.dqn_config(DqnVariant::Dqn)?;
        self.actor_critic_config(ActorCriticAlgo::Ddpg)?;
        self.actor_critic_config(ActorCriticAlgo::Td3)?;
        self.farm_params()?;
        for env in &self.envs {
            if let EnvSpec::Grid { path: Some(p), .. } | EnvSpec::Field { path: Some(p), .. } = env {
                if !p.exists() {
                    return Err(Error::InvalidConfig(format!("environment file {} not found", p.display())));
                }
            }
        }
        Ok(())
    }

    pub fn dqn_config(&self, variant: DqnVariant) -> Result<DqnConfig> {
        let mut cfg: DqnConfig = overlay(&DqnConfig::with_variant(variant), &self.dqn, "dqn")?;
        cfg.variant = variant;
        if let Some(e) = self.episodes {
            cfg.episodes = e;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn actor_critic_config(&self, algo: ActorCriticAlgo) -> Result<ActorCriticConfig> {
        let (patch, section) = match algo {
            ActorCriticAlgo::Ddpg => (&self.ddpg, "ddpg"),
            ActorCriticAlgo::Td3 => (&self.td3, "td3"),
        };
        let mut cfg: ActorCriticConfig = overlay(&ActorCriticConfig::for_algo(algo), patch, section)?;
        cfg.algo = algo;
        if let Some(e) = self.episodes {
            cfg.episodes = e;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn farm_params(&self) -> Result<FarmParams> {
        let p: FarmParams = overlay(&FarmParams::default(), &self.farm, "farm")?;
        p.validate()?;
        Ok(p)
    }

    /// Every (algorithm, environment, seed) combination whose kinds match.
    pub fn runs(&self) -> Vec<RunSpec> {
        let mut out = Vec::new();
        for &algo in &self.algos {
            for env in &self.envs {
                if algo.is_discrete() != env.is_grid() {
                    continue;
                }
                for &seed in &self.seeds {
                    out.push(RunSpec {
                        algo,
                        env: env.clone(),
                        seed,
                    });
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RunSpec {
    pub algo: Algo,
    pub env: EnvSpec,
    pub seed: u64,
}

impl RunSpec {
    /// Directory name for this run's artifacts.
    pub fn run_name(&self) -> String {
        format!("{}-{}-seed{}", self.algo, self.env.slug(), self.seed)
    }

    pub fn check(&self) -> Result<()> {
        if self.algo.is_discrete() != self.env.is_grid() {
            return Err(Error::InvalidConfig(format!(
                "{} cannot run on {} ({} environment)",
                self.algo,
                self.env,
                if self.env.is_grid() { "grid" } else { "continuous" }
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_has_defaults() {
        let cfg = ExperimentConfig::parse("").unwrap();
        assert_eq!(cfg.algos, vec![Algo::Dqn]);
        assert_eq!(cfg.seeds, vec![0]);
        assert_eq!(cfg.stability_threshold, 30);
        assert_eq!(cfg.dqn_config(DqnVariant::Dqn).unwrap(), DqnConfig::default());
        assert_eq!(cfg.actor_critic_config(ActorCriticAlgo::Td3).unwrap(), ActorCriticConfig::td3());
    }

    #[test]
    fn section_overlays_defaults() {
        let cfg = ExperimentConfig::parse(
            "algos = [\"td3\", \"dueling\"]\nenvs = [\"scenario2\", \"10x10\"]\nepisodes = 7\n\n[td3]\nhidden = [64, 64]\nexploration = { kind = \"gaussian\", sigma = 0.3 }\n\n[dqn]\nbatch_size = 32\n\n[farm]\nstep_scale = 1.0\n",
        )
        .unwrap();
        let td3 = cfg.actor_critic_config(ActorCriticAlgo::Td3).unwrap();
        assert_eq!(td3.hidden, vec![64, 64]);
        assert_eq!(td3.alpha, 5e-4);
        assert_eq!(td3.episodes, 7);
        assert_eq!(td3.exploration.scale(), 0.3);
        let dq = cfg.dqn_config(DqnVariant::Dueling).unwrap();
        assert_eq!((dq.batch_size, dq.variant, dq.episodes), (32, DqnVariant::Dueling, 7));
        assert_eq!(cfg.farm_params().unwrap().step_scale, 1.0);
        let runs = cfg.runs();
        assert_eq!(runs.len(), 2);
        assert_eq!(runs[0].run_name(), "td3-scenario2-seed0");
        assert_eq!(runs[1].run_name(), "dueling-10x10-seed0");
    }

    #[test]
    fn unknown_keys_rejected_everywhere() {
        for text in [
            "algo = \"dqn\"\n",
            "[dqn]\nlearning_rat = 0.1\n",
            "[td3]\nnoise = 0.1\n",
            "[farm]\nwind = 3\n",
            "[extra]\nx = 1\n",
            "[dqn]\nvariant = \"double\"\n",
        ] {
            assert!(ExperimentConfig::parse(text).is_err(), "{text}");
        }
    }

    #[test]
    fn invalid_values_rejected() {
        for text in [
            "algos = [\"sarsa\"]\n",
            "envs = [\"moon\"]\n",
            "seeds = []\n",
            "[dqn]\ngamma = 1.5\n",
            "[td3]\nnoise_clip = 0.0\nalgo = \"td3\"\n",
            "envs = [\"map:/no/such/file.txt\"]\n",
            "workers = 0\n",
        ] {
            assert!(ExperimentConfig::parse(text).is_err(), "{text}");
        }
    }

    #[test]
    fn env_spec_round_trips_through_text() {
        for s in ["8x8", "10x10", "scenario3", "map:maps/a.txt", "scenario:x/y.txt"] {
            let spec: EnvSpec = s.parse().unwrap();
            assert_eq!(spec.to_string(), s);
        }
        let spec: EnvSpec = "map:maps/field b.txt".parse().unwrap();
        assert_eq!(spec.slug(), "field_b");
    }

    #[test]
    fn mismatched_run_rejected() {
        let spec = RunSpec {
            algo: Algo::Td3,
            env: "8x8".parse().unwrap(),
            seed: 1,
        };
        assert!(spec.check().is_err());
    }

    #[test]
    fn config_round_trips_through_toml() {
        let cfg = ExperimentConfig::parse("algos = [\"ddpg\"]\nenvs = [\"scenario1\"]\nseeds = [4, 5]\n[ddpg]\ntau = 0.01\n").unwrap();
        assert_eq!(ExperimentConfig::parse(&cfg.to_toml()).unwrap(), cfg);
    }
}
