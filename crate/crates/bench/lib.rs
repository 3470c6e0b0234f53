//! Shared fixtures for the benchmarks.

use agripath::agents::{ActorCriticAgent, ActorCriticConfig, DqnAgent, DqnConfig, DqnVariant};
use agripath::replay::Transition;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// One-hot grid transitions over `n_states` states.
pub fn grid_batch(n_states: usize, batch: usize, seed: u64) -> Vec<Transition<usize>> {
    let mut r = rng(seed);
    (0..batch)
        .map(|_| {
            let s = r.random_range(0..n_states);
            let s2 = r.random_range(0..n_states);
            let mut state = vec![0.0; n_states];
            state[s] = 1.0;
            let mut next_state = vec![0.0; n_states];
            next_state[s2] = 1.0;
            Transition {
                state,
                action: r.random_range(0..4),
                reward: if r.random::<f64>() < 0.1 { 1.0 } else { 0.0 },
                next_state,
                terminated: r.random::<f64>() < 0.1,
            }
        })
        .collect()
}

pub fn field_batch(batch: usize, seed: u64) -> Vec<Transition<Vec<f64>>> {
    let mut r = rng(seed);
    let mut v = |n: usize| (0..n).map(|_| r.random_range(-1.0..1.0)).collect::<Vec<f64>>();
    (0..batch)
        .map(|_| Transition {
            state: v(2),
            action: v(2),
            reward: v(1)[0],
            next_state: v(2),
            terminated: false,
        })
        .collect()
}

pub fn dqn_agent(variant: DqnVariant, n_states: usize, hidden: usize) -> DqnAgent {
    let cfg = DqnConfig {
        hidden: vec![hidden, hidden],
        ..DqnConfig::with_variant(variant)
    };
    DqnAgent::new(n_states, 4, cfg, &mut rng(0)).expect("valid config")
}

pub fn actor_critic_agent(cfg: ActorCriticConfig, hidden: usize) -> ActorCriticAgent {
    let cfg = ActorCriticConfig {
        hidden: vec![hidden, hidden],
        ..cfg
    };
    ActorCriticAgent::new(2, 2, cfg, &mut rng(0)).expect("valid config")
}
