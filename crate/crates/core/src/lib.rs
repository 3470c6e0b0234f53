//! Deep reinforcement learning for field path planning.
//!
//! Value-based agents (DQN, Double DQN, Dueling Double DQN) learn to cross a discrete
//! grid field; actor-critic agents (DDPG, TD3) steer a point robot through a continuous
//! obstacle field under a potential-shaped reward. A metrics harness detects
//! convergence, scores stability and runs seeded experiment matrices.

pub mod agents;
pub mod env;
mod error;
pub mod harness;
pub mod metrics;
pub mod nn;
pub mod replay;
pub mod reward3d;

pub use error::{Error, Result};
pub use nn::{Activation, LayerSpec, Matrix, Mlp};
pub use replay::{ReplayBuffer, Transition};
