//! Bounded FIFO experience replay with uniform sampling.

use std::collections::VecDeque;

use rand::Rng;

use crate::{Error, Result};

/// Action payload stored in a transition.
pub trait ActionValue: Clone {
    fn is_valid(&self) -> bool;
}

impl ActionValue for usize {
    fn is_valid(&self) -> bool {
        true
    }
}

/// Continuous actions must be finite and inside `[-1, 1]`.
impl ActionValue for Vec<f64> {
    fn is_valid(&self) -> bool {
        self.iter().all(|a| a.is_finite() && (-1.0..=1.0).contains(a))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transition<A = usize> {
    pub state: Vec<f64>,
    pub action: A,
    pub reward: f64,
    pub next_state: Vec<f64>,
    pub terminated: bool,
}

impl<A: ActionValue> Transition<A> {
    pub fn new(state: Vec<f64>, action: A, reward: f64, next_state: Vec<f64>, terminated: bool) -> Result<Self> {
        let t = Self {
            state,
            action,
            reward,
            next_state,
            terminated,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        if self.state.len() != self.next_state.len() {
            return Err(Error::dim("transition next_state", self.state.len(), self.next_state.len()));
        }
        if !self.action.is_valid() {
            return Err(Error::InvalidArgument("transition action outside [-1, 1]".into()));
        }
        if !self.reward.is_finite() {
            return Err(Error::NonFinite("transition reward"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct ReplayBuffer<A = usize> {
    capacity: usize,
    entries: VecDeque<Transition<A>>,
}

impl<A> ReplayBuffer<A> {
    pub fn new(capacity: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::InvalidArgument("replay capacity must be positive".into()));
        }
        Ok(Self {
            capacity,
            entries: VecDeque::with_capacity(capacity.min(1 << 16)),
        })
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Appends `t`, evicting the oldest entry when full.
    pub fn push(&mut self, t: Transition<A>) {
        if self.entries.len() == self.capacity {
            self.entries.pop_front();
        }
        self.entries.push_back(t);
    }

    /// Oldest to newest.
    pub fn iter(&self) -> impl Iterator<Item = &Transition<A>> {
        self.entries.iter()
    }

    pub fn get(&self, index: usize) -> Option<&Transition<A>> {
        self.entries.get(index)
    }

    pub fn can_sample(&self, n: usize) -> bool {
        n > 0 && self.entries.len() >= n
    }

    /// `n` indices drawn uniformly with replacement.
    pub fn sample_indices<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Vec<usize>> {
        if n == 0 {
            return Err(Error::InvalidArgument("sample size must be positive".into()));
        }
        if self.entries.len() < n {
            return Err(Error::NotEnoughSamples {
                size: self.entries.len(),
                requested: n,
            });
        }
        let len = self.entries.len();
        Ok((0..n).map(|_| rng.random_range(0..len)).collect())
    }

    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Vec<&Transition<A>>> {
        Ok(self.sample_indices(n, rng)?.into_iter().map(|i| &self.entries[i]).collect())
    }
}
