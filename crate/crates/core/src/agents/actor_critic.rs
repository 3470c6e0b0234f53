//! DDPG and TD3 for the continuous field.
//!
//! One agent type covers both algorithms. DDPG keeps a single critic and updates the
//! actor on every learning step; TD3 adds a second critic, regresses both onto the
//! smaller target estimate, smooths the target action with clipped noise and delays the
//! actor and target updates.

use std::path::{Path, PathBuf};

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::noise::{clipped_noise, Exploration, ExplorationSpec};
use crate::env::{Bounds, ContinuousFarm, Outcome, Point};
use crate::metrics::{EpisodeRecord, TRAILING_WINDOW};
use crate::nn::{checkpoint, mse_loss, soft_update, Activation, AdamState, Matrix, Mlp};
use crate::replay::{ReplayBuffer, Transition};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ActorCriticAlgo {
    Ddpg,
    Td3,
}

impl ActorCriticAlgo {
    pub fn as_str(self) -> &'static str {
        match self {
            ActorCriticAlgo::Ddpg => "ddpg",
            ActorCriticAlgo::Td3 => "td3",
        }
    }

    pub fn critic_count(self) -> usize {
        match self {
            ActorCriticAlgo::Ddpg => 1,
            ActorCriticAlgo::Td3 => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ActionMode {
    Explore,
    Exploit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActorCriticConfig {
    pub algo: ActorCriticAlgo,
    /// Actor learning rate.
    pub alpha: f64,
    /// Critic learning rate.
    pub beta: f64,
    pub tau: f64,
    pub gamma: f64,
    pub buffer_capacity: usize,
    pub batch_size: usize,
    pub noise_clip: f64,
    pub policy_update_every: usize,
    pub smoothing_sigma: f64,
    pub exploration: ExplorationSpec,
    pub episodes: usize,
    pub warmup_steps: usize,
    pub hidden: Vec<usize>,
    /// Save every network each this many episodes; 0 disables.
    pub checkpoint_every: usize,
    /// End training once the convergence detector fires.
    pub stop_at_convergence: bool,
}

impl ActorCriticConfig {
    pub fn ddpg() -> Self {
        Self {
            algo: ActorCriticAlgo::Ddpg,
            alpha: 1e-4,
            beta: 1e-3,
            tau: 0.001,
            gamma: 0.99,
            buffer_capacity: 100_000,
            batch_size: 64,
            noise_clip: 0.5,
            policy_update_every: 1,
            smoothing_sigma: 0.2,
            exploration: ExplorationSpec::Ou {
                theta: 0.15,
                sigma: 0.2,
                mu: 0.0,
            },
            episodes: 5000,
            warmup_steps: 1000,
            hidden: vec![256, 256],
            checkpoint_every: 0,
            stop_at_convergence: false,
        }
    }

    pub fn td3() -> Self {
        Self {
            algo: ActorCriticAlgo::Td3,
            alpha: 5e-4,
            beta: 5e-3,
            policy_update_every: 2,
            exploration: ExplorationSpec::Gaussian { sigma: 0.1 },
            ..Self::ddpg()
        }
    }

    pub fn for_algo(algo: ActorCriticAlgo) -> Self {
        match algo {
            ActorCriticAlgo::Ddpg => Self::ddpg(),
            ActorCriticAlgo::Td3 => Self::td3(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        for (name, v) in [("alpha", self.alpha), ("beta", self.beta)] {
            if !(v.is_finite() && v >= 0.0) {
                return bad(&format!("{name} must be finite and non-negative"));
            }
        }
        if !(0.0..=1.0).contains(&self.tau) {
            return bad("tau must lie in [0, 1]");
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return bad("gamma must lie in (0, 1]");
        }
        if self.buffer_capacity == 0 || self.batch_size == 0 || self.episodes == 0 || self.policy_update_every == 0 {
            return bad("buffer_capacity, batch_size, episodes and policy_update_every must be positive");
        }
        if self.batch_size > self.buffer_capacity {
            return bad("batch_size exceeds buffer_capacity");
        }
        if self.algo == ActorCriticAlgo::Td3 && !(self.noise_clip > 0.0 && self.noise_clip.is_finite()) {
            return bad("td3 needs a positive noise_clip");
        }
        if !(self.smoothing_sigma.is_finite() && self.smoothing_sigma >= 0.0) {
            return bad("smoothing_sigma must be finite and non-negative");
        }
        if self.hidden.is_empty() || self.hidden.contains(&0) {
            return bad("need at least one positive hidden width");
        }
        Exploration::new(self.exploration, 1)?;
        Ok(())
    }
}

/// Maps a point to `[-1, 1]²` relative to the field bounds.
pub fn normalize_observation(bounds: &Bounds, p: Point) -> Vec<f64> {
    vec![
        2.0 * (p.x - bounds.min.x) / bounds.width() - 1.0,
        2.0 * (p.y - bounds.min.y) / bounds.height() - 1.0,
    ]
}

/// Losses and objective from one learning step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpdateStats {
    pub critic_loss: f64,
    /// Mean `Q₁(s, μ(s))` before the actor step; `None` when the actor was not updated.
    pub actor_objective: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct ActorCriticAgent {
    config: ActorCriticConfig,
    actor: Mlp,
    actor_target: Mlp,
    critics: Vec<Mlp>,
    critic_targets: Vec<Mlp>,
    actor_opt: AdamState,
    critic_opts: Vec<AdamState>,
    buffer: ReplayBuffer<Vec<f64>>,
    exploration: Exploration,
    update_counter: u64,
    obs_dim: usize,
    act_dim: usize,
}

const NETWORK_FILES: [&str; 6] = ["actor", "actor_target", "critic1", "critic1_target", "critic2", "critic2_target"];

impl ActorCriticAgent {
    pub fn new<R: Rng + ?Sized>(obs_dim: usize, act_dim: usize, config: ActorCriticConfig, rng: &mut R) -> Result<Self> {
        config.validate()?;
        let mut actor_widths = vec![obs_dim];
        actor_widths.extend(&config.hidden);
        actor_widths.push(act_dim);
        let actor = Mlp::dense(&actor_widths, Activation::Relu, Activation::Tanh, rng)?;
        let mut critic_widths = vec![obs_dim + act_dim];
        critic_widths.extend(&config.hidden);
        critic_widths.push(1);
        let critics = (0..config.algo.critic_count())
            .map(|_| Mlp::dense(&critic_widths, Activation::Relu, Activation::Linear, rng))
            .collect::<Result<Vec<_>>>()?;
        Self::from_networks(actor, critics, config)
    }

    /// Builds an agent around given networks; targets start as copies.
    pub fn from_networks(actor: Mlp, critics: Vec<Mlp>, config: ActorCriticConfig) -> Result<Self> {
        config.validate()?;
        if critics.len() != config.algo.critic_count() {
            return Err(Error::Architecture(format!(
                "{} needs {} critic(s), got {}",
                config.algo.as_str(),
                config.algo.critic_count(),
                critics.len()
            )));
        }
        let (obs_dim, act_dim) = (actor.input_width(), actor.output_width());
        for c in &critics {
            if c.input_width() != obs_dim + act_dim || c.output_width() != 1 {
                return Err(Error::Architecture("critic must map state‖action to one value".into()));
            }
            if !c.same_architecture(&critics[0]) {
                return Err(Error::Architecture("critics must share an architecture".into()));
            }
        }
        Ok(Self {
            actor_target: actor.clone(),
            critic_targets: critics.clone(),
            actor_opt: AdamState::new(&actor),
            critic_opts: critics.iter().map(AdamState::new).collect(),
            buffer: ReplayBuffer::new(config.buffer_capacity)?,
            exploration: Exploration::new(config.exploration, act_dim)?,
            update_counter: 0,
            obs_dim,
            act_dim,
            actor,
            critics,
            config,
        })
    }

    pub fn config(&self) -> &ActorCriticConfig {
        &self.config
    }

    pub fn actor(&self) -> &Mlp {
        &self.actor
    }

    pub fn actor_target(&self) -> &Mlp {
        &self.actor_target
    }

    pub fn critics(&self) -> &[Mlp] {
        &self.critics
    }

    pub fn critic_targets(&self) -> &[Mlp] {
        &self.critic_targets
    }

    pub fn critic_targets_mut(&mut self) -> &mut [Mlp] {
        &mut self.critic_targets
    }

    pub fn actor_target_mut(&mut self) -> &mut Mlp {
        &mut self.actor_target
    }

    pub fn buffer(&self) -> &ReplayBuffer<Vec<f64>> {
        &self.buffer
    }

    pub fn update_counter(&self) -> u64 {
        self.update_counter
    }

    pub fn reset_noise(&mut self) {
        self.exploration.reset();
    }

    /// Deterministic policy output `μ(s)`.
    pub fn act(&self, observation: &[f64]) -> Result<Vec<f64>> {
        self.actor.predict_one(observation)
    }

    /// Returns the action and the noise that was added (zeros when exploiting).
    pub fn select_action_with_noise<R: Rng + ?Sized>(
        &mut self,
        observation: &[f64],
        mode: ActionMode,
        rng: &mut R,
    ) -> Result<(Vec<f64>, Vec<f64>)> {
        let mu = self.act(observation)?;
        match mode {
            ActionMode::Exploit => Ok((mu, vec![0.0; self.act_dim])),
            ActionMode::Explore => {
                let noise = self.exploration.sample(rng);
                let action = mu.iter().zip(&noise).map(|(m, n)| (m + n).clamp(-1.0, 1.0)).collect();
                Ok((action, noise))
            }
        }
    }

    pub fn select_action<R: Rng + ?Sized>(&mut self, observation: &[f64], mode: ActionMode, rng: &mut R) -> Result<Vec<f64>> {
        Ok(self.select_action_with_noise(observation, mode, rng)?.0)
    }

    pub fn remember(&mut self, t: Transition<Vec<f64>>) -> Result<()> {
        t.validate()?;
        if t.state.len() != self.obs_dim || t.next_state.len() != self.obs_dim || t.action.len() != self.act_dim {
            return Err(Error::dim("transition", self.obs_dim, t.state.len()));
        }
        self.buffer.push(t);
        Ok(())
    }

    /// `μ′(s′) + clip(noise, ±c)`, clamped to the action box.
    pub fn smoothed_target_actions(&self, next_states: &Matrix, raw_noise: &Matrix) -> Result<Matrix> {
        let mut a = self.actor_target.predict(next_states)?;
        if raw_noise.rows() != a.rows() || raw_noise.cols() != a.cols() {
            return Err(Error::dim("smoothing noise", a.cols(), raw_noise.cols()));
        }
        let clip = self.config.noise_clip;
        for (x, &n) in a.as_mut_slice().iter_mut().zip(raw_noise.as_slice()) {
            *x = (*x + clipped_noise(n, clip)).clamp(-1.0, 1.0);
        }
        Ok(a)
    }

    /// Bootstrap targets `r + γ·min_j Q′_j(s′, a′)` (a single critic for DDPG).
    /// `raw_noise` perturbs the target action before clipping; pass `None` for `μ′(s′)`.
    pub fn compute_targets(&self, batch: &[&Transition<Vec<f64>>], raw_noise: Option<&Matrix>) -> Result<Vec<f64>> {
        if batch.is_empty() {
            return Err(Error::InvalidArgument("empty batch".into()));
        }
        let next = Matrix::from_rows(&batch.iter().map(|t| t.next_state.as_slice()).collect::<Vec<_>>())?;
        let next_actions = match raw_noise {
            Some(noise) => self.smoothed_target_actions(&next, noise)?,
            None => self.actor_target.predict(&next)?,
        };
        let input = next.hcat(&next_actions)?;
        let mut q_min = vec![f64::INFINITY; batch.len()];
        for target in &self.critic_targets {
            let q = target.predict(&input)?;
            for (m, &v) in q_min.iter_mut().zip(q.as_slice()) {
                *m = m.min(v);
            }
        }
        Ok(batch
            .iter()
            .zip(q_min)
            .map(|(t, q)| if t.terminated { t.reward } else { t.reward + self.config.gamma * q })
            .collect())
    }

    fn critic_step(&mut self, index: usize, input: &Matrix, targets: &[f64]) -> Result<f64> {
        let critic = &mut self.critics[index];
        let trace = critic.forward_batch(input)?;
        let (loss, grad) = mse_loss(trace.output().as_slice(), targets)?;
        if !loss.is_finite() {
            return Err(Error::NonFinite("critic loss"));
        }
        let grads = critic.backward(&trace, &Matrix::from_vec(grad.len(), 1, grad)?)?;
        self.critic_opts[index].step(critic, &grads, self.config.beta)?;
        Ok(loss)
    }

    /// `∂Q₁(s, a)/∂a` at `a = μ(s)`, one row per state.
    pub fn action_gradient(&self, states: &Matrix) -> Result<Matrix> {
        let actions = self.actor.predict(states)?;
        let trace = self.critics[0].forward_batch(&states.hcat(&actions)?)?;
        let ones = Matrix::from_vec(states.rows(), 1, vec![1.0; states.rows()])?;
        let (_, input_grad) = self.critics[0].backward_with_input(&trace, &ones)?;
        Ok(input_grad.columns(self.obs_dim, self.act_dim))
    }

    /// One ascent step on `mean Q₁(s, μ(s))`; returns the objective before the step.
    fn actor_step(&mut self, states: &Matrix) -> Result<f64> {
        let actor_trace = self.actor.forward_batch(states)?;
        let input = states.hcat(actor_trace.output())?;
        let critic_trace = self.critics[0].forward_batch(&input)?;
        let n = states.rows() as f64;
        let objective = critic_trace.output().as_slice().iter().sum::<f64>() / n;
        if !objective.is_finite() {
            return Err(Error::NonFinite("actor objective"));
        }
        // Minimise -J, so dL/dQ = -1/N per row.
        let dq = Matrix::from_vec(states.rows(), 1, vec![-1.0 / n; states.rows()])?;
        let (_, input_grad) = self.critics[0].backward_with_input(&critic_trace, &dq)?;
        let da = input_grad.columns(self.obs_dim, self.act_dim);
        let grads = self.actor.backward(&actor_trace, &da)?;
        self.actor_opt.step(&mut self.actor, &grads, self.config.alpha)?;
        Ok(objective)
    }

    fn soft_update_targets(&mut self) -> Result<()> {
        let tau = self.config.tau;
        soft_update(&mut self.actor_target, &self.actor, tau)?;
        for (t, c) in self.critic_targets.iter_mut().zip(&self.critics) {
            soft_update(t, c, tau)?;
        }
        Ok(())
    }

    fn batch_inputs(batch: &[&Transition<Vec<f64>>]) -> Result<(Matrix, Matrix)> {
        let states = Matrix::from_rows(&batch.iter().map(|t| t.state.as_slice()).collect::<Vec<_>>())?;
        let actions = Matrix::from_rows(&batch.iter().map(|t| t.action.as_slice()).collect::<Vec<_>>())?;
        let input = states.hcat(&actions)?;
        Ok((states, input))
    }

    /// Critic regression, actor ascent and soft target updates on every call.
    pub fn ddpg_update(&mut self, batch: &[&Transition<Vec<f64>>]) -> Result<UpdateStats> {
        let targets = self.compute_targets(batch, None)?;
        let (states, input) = Self::batch_inputs(batch)?;
        let critic_loss = self.critic_step(0, &input, &targets)?;
        let objective = self.actor_step(&states)?;
        self.soft_update_targets()?;
        self.update_counter += 1;
        Ok(UpdateStats {
            critic_loss,
            actor_objective: Some(objective),
        })
    }

    /// TD3 step with caller-supplied smoothing noise (one row per transition).
    pub fn td3_update_with_noise(&mut self, batch: &[&Transition<Vec<f64>>], raw_noise: &Matrix) -> Result<UpdateStats> {
        if self.critics.len() != 2 {
            return Err(Error::Architecture("td3 needs two critics".into()));
        }
        let targets = self.compute_targets(batch, Some(raw_noise))?;
        let (states, input) = Self::batch_inputs(batch)?;
        let loss1 = self.critic_step(0, &input, &targets)?;
        let loss2 = self.critic_step(1, &input, &targets)?;
        self.update_counter += 1;
        let actor_objective = if self.update_counter.is_multiple_of(self.config.policy_update_every as u64) {
            let objective = self.actor_step(&states)?;
            self.soft_update_targets()?;
            Some(objective)
        } else {
            None
        };
        Ok(UpdateStats {
            critic_loss: 0.5 * (loss1 + loss2),
            actor_objective,
        })
    }

    pub fn td3_update<R: Rng + ?Sized>(&mut self, batch: &[&Transition<Vec<f64>>], rng: &mut R) -> Result<UpdateStats> {
        let sigma = self.config.smoothing_sigma;
        let noise: Vec<f64> = (0..batch.len() * self.act_dim)
            .map(|_| {
                let z: f64 = StandardNormal.sample(rng);
                sigma * z
            })
            .collect();
        let noise = Matrix::from_vec(batch.len(), self.act_dim, noise)?;
        self.td3_update_with_noise(batch, &noise)
    }

    pub fn update<R: Rng + ?Sized>(&mut self, batch: &[&Transition<Vec<f64>>], rng: &mut R) -> Result<UpdateStats> {
        match self.config.algo {
            ActorCriticAlgo::Ddpg => self.ddpg_update(batch),
            ActorCriticAlgo::Td3 => self.td3_update(batch, rng),
        }
    }

    /// Writes every network as `<name>.json` under `dir`.
    pub fn save_checkpoints(&self, dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut nets = vec![&self.actor, &self.actor_target];
        for (c, t) in self.critics.iter().zip(&self.critic_targets) {
            nets.push(c);
            nets.push(t);
        }
        nets.iter()
            .zip(NETWORK_FILES)
            .map(|(net, name)| {
                let path = dir.join(format!("{name}.json"));
                checkpoint::save(net, &path)?;
                Ok(path)
            })
            .collect()
    }

    /// Restores networks written by [`save_checkpoints`](Self::save_checkpoints).
    /// Optimiser moments and the replay memory start fresh.
    pub fn load_checkpoints(dir: impl AsRef<Path>, config: ActorCriticConfig) -> Result<Self> {
        let dir = dir.as_ref();
        let load = |name: &str| checkpoint::load(dir.join(format!("{name}.json")));
        let critics = (0..config.algo.critic_count())
            .map(|i| load(NETWORK_FILES[2 + 2 * i]))
            .collect::<Result<Vec<_>>>()?;
        let mut agent = Self::from_networks(load("actor")?, critics, config)?;
        agent.actor_target = load("actor_target")?;
        for i in 0..agent.critic_targets.len() {
            agent.critic_targets[i] = load(NETWORK_FILES[3 + 2 * i])?;
        }
        if !agent.actor_target.same_architecture(&agent.actor)
            || agent.critic_targets.iter().zip(&agent.critics).any(|(t, c)| !t.same_architecture(c))
        {
            return Err(Error::Architecture("checkpoint targets do not mirror their sources".into()));
        }
        Ok(agent)
    }

    /// One episode; the first `warmup_steps` global steps act uniformly at random and
    /// learning starts once they are spent and the memory holds a batch.
    pub fn run_episode<R: Rng + ?Sized>(
        &mut self,
        env: &mut ContinuousFarm,
        episode: usize,
        global_step: &mut usize,
        rng: &mut R,
    ) -> Result<EpisodeRecord> {
        let bounds = env.scenario().bounds;
        self.reset_noise();
        let mut obs = normalize_observation(&bounds, env.reset());
        let (mut reward_sum, mut steps) = (0.0, 0usize);
        let (mut loss_sum, mut updates) = (0.0, 0usize);
        loop {
            let action = if *global_step < self.config.warmup_steps {
                (0..self.act_dim).map(|_| rng.random_range(-1.0..=1.0)).collect()
            } else {
                self.select_action(&obs, ActionMode::Explore, rng)?
            };
            let result = env.step([action[0], action[1]])?;
            let next_obs = normalize_observation(&bounds, result.observation);
            self.remember(Transition {
                state: obs,
                action,
                reward: result.reward,
                next_state: next_obs.clone(),
                terminated: result.terminated,
            })?;
            reward_sum += result.reward;
            steps += 1;
            *global_step += 1;

            if *global_step > self.config.warmup_steps && self.buffer.can_sample(self.config.batch_size) {
                let indices = self.buffer.sample_indices(self.config.batch_size, rng)?;
                let batch: Vec<Transition<Vec<f64>>> =
                    indices.iter().map(|&i| self.buffer.get(i).expect("index").clone()).collect();
                let refs: Vec<&Transition<Vec<f64>>> = batch.iter().collect();
                let stats = self.update(&refs, rng).map_err(|e| Error::Diverged {
                    episode,
                    detail: e.to_string(),
                })?;
                loss_sum += stats.critic_loss;
                updates += 1;
            }

            obs = next_obs;
            if result.done() {
                break;
            }
        }
        Ok(EpisodeRecord {
            episode,
            reward: reward_sum,
            steps,
            outcome: env.outcome().unwrap_or(Outcome::Timeout),
            epsilon_or_noise: self.config.exploration.scale(),
            mean_loss: (updates > 0).then(|| loss_sum / updates as f64),
        })
    }

    /// Trains for `config.episodes` episodes. With `checkpoint_dir` set and a non-zero
    /// `checkpoint_every`, all networks are saved on that episode cadence.
    pub fn train<R: Rng + ?Sized>(
        &mut self,
        env: &mut ContinuousFarm,
        rng: &mut R,
        checkpoint_dir: Option<&Path>,
        mut on_episode: impl FnMut(&EpisodeRecord),
    ) -> Result<Vec<EpisodeRecord>> {
        if env.observation_dim() != self.obs_dim || env.action_dim() != self.act_dim {
            return Err(Error::Architecture("agent does not match the environment".into()));
        }
        let mut rows: Vec<EpisodeRecord> = Vec::with_capacity(self.config.episodes);
        let mut global_step = 0usize;
        for episode in 1..=self.config.episodes {
            let row = self.run_episode(env, episode, &mut global_step, rng)?;
            on_episode(&row);
            rows.push(row);
            if let Some(dir) = checkpoint_dir {
                if self.config.checkpoint_every > 0 && episode % self.config.checkpoint_every == 0 {
                    self.save_checkpoints(dir)?;
                }
            }
            if self.config.stop_at_convergence && rows.len() >= TRAILING_WINDOW {
                let tail = &rows[rows.len() - TRAILING_WINDOW..];
                let reward = tail.iter().map(|r| r.reward).sum::<f64>() / TRAILING_WINDOW as f64;
                let steps = tail.iter().map(|r| r.steps as f64).sum::<f64>() / TRAILING_WINDOW as f64;
                if reward > crate::metrics::CONTINUOUS_REWARD_THRESHOLD && steps < crate::metrics::CONTINUOUS_STEPS_THRESHOLD {
                    break;
                }
            }
        }
        Ok(rows)
    }

    /// Greedy rollout from the start point; returns visited points, start included.
    pub fn rollout(&self, env: &mut ContinuousFarm) -> Result<Vec<Point>> {
        let bounds = env.scenario().bounds;
        let mut path = vec![env.reset()];
        loop {
            let p = *path.last().expect("non-empty");
            let a = self.act(&normalize_observation(&bounds, p))?;
            let r = env.step([a[0], a[1]])?;
            path.push(r.observation);
            if r.done() {
                return Ok(path);
            }
        }
    }
}

/// Builds an agent sized for `env` and trains it without checkpoints.
pub fn train_actor_critic<R: Rng + ?Sized>(
    env: &mut ContinuousFarm,
    config: ActorCriticConfig,
    rng: &mut R,
) -> Result<(ActorCriticAgent, Vec<EpisodeRecord>)> {
    let mut agent = ActorCriticAgent::new(env.observation_dim(), env.action_dim(), config, rng)?;
    let rows = agent.train(env, rng, None, |_| {})?;
    Ok((agent, rows))
}
