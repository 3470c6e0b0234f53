//! Simulated fields: a discrete grid and a continuous obstacle plane.

pub mod continuous;
pub mod grid;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use continuous::{Bounds, ContStepResult, ContinuousFarm, FarmParams, Obstacle, Point, RewardBreakdown, Scenario};
pub use grid::{Cell, GridAction, GridWorld, StepResult};

use crate::Error;

/// How an episode ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Goal,
    /// Entered an obstacle (grid), or timed out after at least one blocked collision
    /// (continuous).
    Collision,
    Timeout,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Goal => "goal",
            Outcome::Collision => "collision",
            Outcome::Timeout => "timeout",
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Outcome {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "goal" => Ok(Outcome::Goal),
            "collision" => Ok(Outcome::Collision),
            "timeout" => Ok(Outcome::Timeout),
            other => Err(Error::Format {
                kind: "outcome",
                detail: format!("unknown outcome '{other}'"),
            }),
        }
    }
}
