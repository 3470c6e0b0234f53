//! Reward for the ground-robot navigation stage, as a pure function of one step's
//! navigation state.
//!
//! | term         | value                                              |
//! |--------------|----------------------------------------------------|
//! | `yaw`        | `-|goal_angle|`                                    |
//! | `vangular`   | `-action_angular²`                                 |
//! | `distance`   | `2·d₀ / (d₀ + d) - 1`                              |
//! | `obstacle`   | `-20` if `min_obstacle_dist < 0.22`, else `0`      |
//! | `vlinear`    | `-((0.22 - action_linear)·10)²`                    |
//! | `step`       | `-1` on every step                                 |
//! | `success`    | `+2500` when the goal is reached                   |
//! | `failure`    | `-2000` on collision with an obstacle or boundary  |

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const OBSTACLE_THRESHOLD: f64 = 0.22;
pub const OBSTACLE_PENALTY: f64 = -20.0;
pub const TARGET_LINEAR_SPEED: f64 = 0.22;
pub const STEP_PENALTY: f64 = -1.0;
pub const SUCCESS_REWARD: f64 = 2500.0;
pub const FAILURE_PENALTY: f64 = -2000.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NavOutcome {
    Ongoing,
    Success,
    Failure,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NavState {
    /// Signed yaw error to the goal, radians.
    pub goal_angle: f64,
    pub goal_dist: f64,
    pub goal_dist_initial: f64,
    pub min_obstacle_dist: f64,
    pub action_linear: f64,
    pub action_angular: f64,
    pub outcome: NavOutcome,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Reward3dBreakdown {
    pub yaw: f64,
    pub vangular: f64,
    pub distance: f64,
    pub obstacle: f64,
    pub vlinear: f64,
    pub step: f64,
    pub success: f64,
    pub failure: f64,
}

impl Reward3dBreakdown {
    pub fn total(&self) -> f64 {
        self.yaw + self.vangular + self.distance + self.obstacle + self.vlinear + self.step + self.success + self.failure
    }

    pub fn components(&self) -> [f64; 8] {
        [
            self.yaw,
            self.vangular,
            self.distance,
            self.obstacle,
            self.vlinear,
            self.step,
            self.success,
            self.failure,
        ]
    }
}

pub fn reward3d(s: &NavState) -> Result<(f64, Reward3dBreakdown)> {
    let values = [
        s.goal_angle,
        s.goal_dist,
        s.goal_dist_initial,
        s.min_obstacle_dist,
        s.action_linear,
        s.action_angular,
    ];
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("navigation state"));
    }
    if s.goal_dist_initial <= 0.0 {
        return Err(Error::InvalidArgument("goal_dist_initial must be positive".into()));
    }
    if s.goal_dist < 0.0 || s.min_obstacle_dist < 0.0 {
        return Err(Error::InvalidArgument("distances must be non-negative".into()));
    }
    let b = Reward3dBreakdown {
        yaw: -s.goal_angle.abs(),
        vangular: -(s.action_angular * s.action_angular),
        distance: 2.0 * s.goal_dist_initial / (s.goal_dist_initial + s.goal_dist) - 1.0,
        obstacle: if s.min_obstacle_dist < OBSTACLE_THRESHOLD {
            OBSTACLE_PENALTY
        } else {
            0.0
        },
        vlinear: {
            let dev = (TARGET_LINEAR_SPEED - s.action_linear) * 10.0;
            -(dev * dev)
        },
        step: STEP_PENALTY,
        success: if s.outcome == NavOutcome::Success {
            SUCCESS_REWARD
        } else {
            0.0
        },
        failure: if s.outcome == NavOutcome::Failure {
            FAILURE_PENALTY
        } else {
            0.0
        },
    };
    Ok((b.total(), b))
}
