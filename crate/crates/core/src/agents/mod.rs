//! Learning agents for the grid and continuous environments.

pub mod actor_critic;
pub mod dqn;
pub mod noise;

pub use actor_critic::{
    normalize_observation, train_actor_critic, ActionMode, ActorCriticAgent, ActorCriticAlgo, ActorCriticConfig, UpdateStats,
};
pub use dqn::{argmax, train_dqn, DqnAgent, DqnConfig, DqnVariant};
pub use noise::{clipped_noise, ou_sample, Exploration, ExplorationSpec, OuNoise};
