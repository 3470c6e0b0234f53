//! Value-based agents: DQN, Double DQN and Dueling Double DQN.
//!
//! All three share one loop: ε-greedy acting, replay memory, a policy network trained on
//! mini-batches every environment step once the memory holds a batch, and a target
//! network refreshed by hard copy every `target_update_every` environment steps. They
//! differ only in how the bootstrap target is formed and in the network head.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::env::{GridAction, GridWorld, Outcome};
use crate::metrics::{EpisodeRecord, TRAILING_WINDOW};
use crate::nn::{chain_specs, mse_loss, Activation, AdamState, Matrix, Mlp};
use crate::replay::{ReplayBuffer, Transition};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DqnVariant {
    /// Vanilla target `r + γ max Q′(s′, ·)`.
    Dqn,
    /// Policy net picks the next action, target net evaluates it.
    Double,
    /// Dueling head; uses the double target unless `pure_dueling` is set.
    Dueling,
}

impl DqnVariant {
    pub fn as_str(self) -> &'static str {
        match self {
            DqnVariant::Dqn => "dqn",
            DqnVariant::Double => "double",
            DqnVariant::Dueling => "dueling",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DqnConfig {
    pub variant: DqnVariant,
    pub learning_rate: f64,
    pub gamma: f64,
    pub epsilon_start: f64,
    pub epsilon_decay: f64,
    pub epsilon_min: f64,
    pub buffer_capacity: usize,
    pub batch_size: usize,
    pub target_update_every: usize,
    pub episodes: usize,
    pub hidden: Vec<usize>,
    /// Dueling head with the vanilla max target (ablation of the double rule).
    pub pure_dueling: bool,
    /// End training once the last 100 episodes all reached the goal.
    pub stop_at_convergence: bool,
}

impl Default for DqnConfig {
    fn default() -> Self {
        Self {
            variant: DqnVariant::Dqn,
            learning_rate: 0.001,
            gamma: 0.99,
            epsilon_start: 1.0,
            epsilon_decay: 0.995,
            epsilon_min: 0.01,
            buffer_capacity: 100_000,
            batch_size: 64,
            target_update_every: 1000,
            episodes: 10_000,
            hidden: vec![128, 128],
            pure_dueling: false,
            stop_at_convergence: false,
        }
    }
}

impl DqnConfig {
    pub fn with_variant(variant: DqnVariant) -> Self {
        Self {
            variant,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return bad("gamma must lie in (0, 1]");
        }
        if !(0.0 <= self.epsilon_min && self.epsilon_min <= self.epsilon_start && self.epsilon_start <= 1.0) {
            return bad("need 0 <= epsilon_min <= epsilon_start <= 1");
        }
        if !(self.epsilon_decay > 0.0 && self.epsilon_decay <= 1.0) {
            return bad("epsilon_decay must lie in (0, 1]");
        }
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be finite and non-negative");
        }
        if self.buffer_capacity == 0 || self.batch_size == 0 || self.target_update_every == 0 || self.episodes == 0 {
            return bad("buffer_capacity, batch_size, target_update_every and episodes must be positive");
        }
        if self.batch_size > self.buffer_capacity {
            return bad("batch_size exceeds buffer_capacity");
        }
        if self.hidden.contains(&0) {
            return bad("hidden widths must be positive");
        }
        Ok(())
    }

    pub fn uses_double_target(&self) -> bool {
        match self.variant {
            DqnVariant::Dqn => false,
            DqnVariant::Double => true,
            DqnVariant::Dueling => !self.pure_dueling,
        }
    }
}

/// Index of the largest value; ties go to the lowest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

#[derive(Debug, Clone)]
pub struct DqnAgent {
    config: DqnConfig,
    policy: Mlp,
    target: Mlp,
    adam: AdamState,
    buffer: ReplayBuffer<usize>,
    epsilon: f64,
    global_step: u64,
    n_actions: usize,
}

impl DqnAgent {
    pub fn new<R: Rng + ?Sized>(state_dim: usize, n_actions: usize, config: DqnConfig, rng: &mut R) -> Result<Self> {
        config.validate()?;
        let mut widths = vec![state_dim];
        widths.extend(&config.hidden);
        let policy = if config.variant == DqnVariant::Dueling {
            Mlp::new(&chain_specs(&widths, Activation::Relu, Activation::Relu)?, Some(n_actions), rng)?
        } else {
            widths.push(n_actions);
            Mlp::dense(&widths, Activation::Relu, Activation::Linear, rng)?
        };
        Self::from_network(policy, config)
    }

    /// Wraps an existing policy network; the target starts as a copy.
    pub fn from_network(policy: Mlp, config: DqnConfig) -> Result<Self> {
        config.validate()?;
        let dueling = policy.head() == crate::nn::HeadKind::Dueling;
        if dueling != (config.variant == DqnVariant::Dueling) {
            return Err(Error::Architecture("dueling variant requires a dueling head and vice versa".into()));
        }
        Ok(Self {
            n_actions: policy.output_width(),
            target: policy.clone(),
            adam: AdamState::new(&policy),
            buffer: ReplayBuffer::new(config.buffer_capacity)?,
            epsilon: config.epsilon_start,
            global_step: 0,
            policy,
            config,
        })
    }

    pub fn config(&self) -> &DqnConfig {
        &self.config
    }

    pub fn policy(&self) -> &Mlp {
        &self.policy
    }

    pub fn policy_mut(&mut self) -> &mut Mlp {
        &mut self.policy
    }

    pub fn target(&self) -> &Mlp {
        &self.target
    }

    pub fn target_mut(&mut self) -> &mut Mlp {
        &mut self.target
    }

    pub fn buffer(&self) -> &ReplayBuffer<usize> {
        &self.buffer
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn set_epsilon(&mut self, epsilon: f64) -> Result<()> {
        if !(0.0..=1.0).contains(&epsilon) {
            return Err(Error::InvalidArgument(format!("epsilon {epsilon} outside [0, 1]")));
        }
        self.epsilon = epsilon;
        Ok(())
    }

    pub fn global_step(&self) -> u64 {
        self.global_step
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn q_values(&self, state: &[f64]) -> Result<Vec<f64>> {
        self.policy.predict_one(state)
    }

    pub fn greedy_action(&self, state: &[f64]) -> Result<usize> {
        Ok(argmax(&self.q_values(state)?))
    }

    /// ε-greedy over the policy network.
    pub fn select_action<R: Rng + ?Sized>(&self, state: &[f64], rng: &mut R) -> Result<usize> {
        if self.epsilon > 0.0 && rng.random::<f64>() < self.epsilon {
            Ok(rng.random_range(0..self.n_actions))
        } else {
            self.greedy_action(state)
        }
    }

    pub fn remember(&mut self, t: Transition<usize>) -> Result<()> {
        t.validate()?;
        if t.action >= self.n_actions {
            return Err(Error::InvalidArgument(format!("action {} out of range", t.action)));
        }
        self.buffer.push(t);
        Ok(())
    }

    /// Bootstrap targets for a batch.
    pub fn compute_targets(&self, batch: &[&Transition<usize>]) -> Result<Vec<f64>> {
        if batch.is_empty() {
            return Err(Error::InvalidArgument("empty batch".into()));
        }
        let next = Matrix::from_rows(&batch.iter().map(|t| t.next_state.as_slice()).collect::<Vec<_>>())?;
        let q_target = self.target.predict(&next)?;
        let q_online = if self.config.uses_double_target() {
            Some(self.policy.predict(&next)?)
        } else {
            None
        };
        let gamma = self.config.gamma;
        Ok(batch
            .iter()
            .enumerate()
            .map(|(i, t)| {
                if t.terminated {
                    return t.reward;
                }
                let evaluated = match &q_online {
                    Some(online) => q_target.get(i, argmax(online.row(i))),
                    None => q_target.row(i).iter().cloned().fold(f64::NEG_INFINITY, f64::max),
                };
                t.reward + gamma * evaluated
            })
            .collect())
    }

    /// One Adam step on the MSE between `Q(s, a)` of the taken actions and their targets.
    pub fn train_step(&mut self, batch: &[&Transition<usize>]) -> Result<f64> {
        let targets = self.compute_targets(batch)?;
        let states = Matrix::from_rows(&batch.iter().map(|t| t.state.as_slice()).collect::<Vec<_>>())?;
        let trace = self.policy.forward_batch(&states)?;
        let q = trace.output();
        let predicted: Vec<f64> = batch.iter().enumerate().map(|(i, t)| q.get(i, t.action)).collect();
        let (loss, grad) = mse_loss(&predicted, &targets)?;
        if !loss.is_finite() {
            return Err(Error::NonFinite("dqn loss"));
        }
        let mut output_grad = Matrix::zeros(q.rows(), q.cols());
        for (i, t) in batch.iter().enumerate() {
            output_grad.set(i, t.action, grad[i]);
        }
        let grads = self.policy.backward(&trace, &output_grad)?;
        self.adam.step(&mut self.policy, &grads, self.config.learning_rate)?;
        Ok(loss)
    }

    /// Counts one environment step and hard-copies the target on the update cadence.
    /// Returns whether the target was refreshed.
    pub fn tick(&mut self) -> Result<bool> {
        self.global_step += 1;
        if self.global_step.is_multiple_of(self.config.target_update_every as u64) {
            self.target.copy_from(&self.policy)?;
            return Ok(true);
        }
        Ok(false)
    }

    pub fn decay_epsilon(&mut self) {
        self.epsilon = (self.epsilon * self.config.epsilon_decay).max(self.config.epsilon_min);
    }

    /// Runs one episode of ε-greedy interaction and learning.
    pub fn run_episode<R: Rng + ?Sized>(&mut self, env: &mut GridWorld, episode: usize, rng: &mut R) -> Result<EpisodeRecord> {
        let epsilon = self.epsilon;
        let mut state = env.reset();
        let mut encoded = env.encode_state(state)?;
        let (mut reward_sum, mut steps) = (0.0, 0usize);
        let (mut loss_sum, mut updates) = (0.0, 0usize);
        loop {
            let action = self.select_action(&encoded, rng)?;
            let result = env.step(GridAction::from_index(action)?, rng)?;
            let next_encoded = env.encode_state(result.next_state)?;
            self.remember(Transition {
                state: encoded,
                action,
                reward: result.reward,
                next_state: next_encoded.clone(),
                terminated: result.terminated,
            })?;
            reward_sum += result.reward;
            steps += 1;

            if self.buffer.can_sample(self.config.batch_size) {
                let indices = self.buffer.sample_indices(self.config.batch_size, rng)?;
                let batch: Vec<&Transition<usize>> = indices.iter().map(|&i| self.buffer.get(i).expect("index")).collect();
                let batch: Vec<Transition<usize>> = batch.into_iter().cloned().collect();
                let refs: Vec<&Transition<usize>> = batch.iter().collect();
                let loss = self.train_step(&refs).map_err(|e| Error::Diverged {
                    episode,
                    detail: e.to_string(),
                })?;
                loss_sum += loss;
                updates += 1;
            }
            self.tick()?;

            state = result.next_state;
            encoded = next_encoded;
            if result.done() {
                break;
            }
        }
        let _ = state;
        self.decay_epsilon();
        Ok(EpisodeRecord {
            episode,
            reward: reward_sum,
            steps,
            outcome: env.outcome().unwrap_or(Outcome::Timeout),
            epsilon_or_noise: epsilon,
            mean_loss: (updates > 0).then(|| loss_sum / updates as f64),
        })
    }

    /// Trains for `config.episodes` episodes, calling `on_episode` after each one.
    pub fn train<R: Rng + ?Sized>(
        &mut self,
        env: &mut GridWorld,
        rng: &mut R,
        mut on_episode: impl FnMut(&EpisodeRecord),
    ) -> Result<Vec<EpisodeRecord>> {
        if env.n_states() != self.policy.input_width() || env.n_actions() != self.n_actions {
            return Err(Error::Architecture("agent does not match the environment".into()));
        }
        let mut rows = Vec::with_capacity(self.config.episodes);
        let mut trailing = std::collections::VecDeque::with_capacity(TRAILING_WINDOW);
        for episode in 1..=self.config.episodes {
            let row = self.run_episode(env, episode, rng)?;
            on_episode(&row);
            if trailing.len() == TRAILING_WINDOW {
                trailing.pop_front();
            }
            trailing.push_back(row.outcome == Outcome::Goal);
            rows.push(row);
            if self.config.stop_at_convergence && trailing.len() == TRAILING_WINDOW && trailing.iter().all(|&g| g) {
                break;
            }
        }
        Ok(rows)
    }

    /// Greedy rollout from the start cell; returns the visited states, start included.
    pub fn extract_path<R: Rng + ?Sized>(&self, env: &mut GridWorld, rng: &mut R) -> Result<Vec<usize>> {
        let mut path = vec![env.reset()];
        loop {
            let state = *path.last().expect("non-empty");
            let action = self.greedy_action(&env.encode_state(state)?)?;
            let result = env.step(GridAction::from_index(action)?, rng)?;
            path.push(result.next_state);
            if result.done() {
                return Ok(path);
            }
        }
    }
}

/// Builds an agent sized for `env` and trains it.
pub fn train_dqn<R: Rng + ?Sized>(env: &mut GridWorld, config: DqnConfig, rng: &mut R) -> Result<(DqnAgent, Vec<EpisodeRecord>)> {
    let mut agent = DqnAgent::new(env.n_states(), env.n_actions(), config, rng)?;
    let rows = agent.train(env, rng, |_| {})?;
    Ok((agent, rows))
}
