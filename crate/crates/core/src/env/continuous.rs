//! Continuous 2D obstacle field with a point-mass agent and potential-shaped reward.
//!
//! Scenario files are plain text, one directive per line (`#` starts a comment):
//!
//! ```text
//! bounds 0 0 20 20        # xmin ymin xmax ymax
//! start 3 3
//! goal 17 17
//! goal_radius 1.0
//! rect 8 8 3 3            # x y w h (lower-left corner, size)
//! circle 14 5 2           # cx cy r
//! ```
//!
//! Collision checks are swept along the motion segment against every obstacle inflated by
//! the proximity margin. A colliding move is blocked: the agent stays put, pays the
//! collision penalty and the episode continues. Only the goal area terminates an episode;
//! the step limit truncates it.

use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::Outcome;
use crate::{Error, Result};

pub const SCENARIO_1: &str = include_str!("../../data/scenarios/scenario1.txt");
pub const SCENARIO_2: &str = include_str!("../../data/scenarios/scenario2.txt");
pub const SCENARIO_3: &str = include_str!("../../data/scenarios/scenario3.txt");

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn lerp(self, other: Point, t: f64) -> Point {
        Point::new(self.x + t * (other.x - self.x), self.y + t * (other.y - self.y))
    }

    pub fn to_array(self) -> [f64; 2] {
        [self.x, self.y]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub min: Point,
    pub max: Point,
}

impl Bounds {
    pub fn contains(&self, p: Point) -> bool {
        (self.min.x..=self.max.x).contains(&p.x) && (self.min.y..=self.max.y).contains(&p.y)
    }

    pub fn clamp(&self, p: Point) -> Point {
        Point::new(p.x.clamp(self.min.x, self.max.x), p.y.clamp(self.min.y, self.max.y))
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    pub fn diagonal(&self) -> f64 {
        self.width().hypot(self.height())
    }

    /// Distance from `p` to the nearest edge.
    pub fn edge_distance(&self, p: Point) -> f64 {
        (p.x - self.min.x).min(self.max.x - p.x).min(p.y - self.min.y).min(self.max.y - p.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Obstacle {
    /// Axis-aligned rectangle with lower-left corner `(x, y)`.
    Rect { x: f64, y: f64, w: f64, h: f64 },
    Circle { cx: f64, cy: f64, r: f64 },
}

impl Obstacle {
    pub fn contains(&self, p: Point) -> bool {
        self.distance_to_point(p) == 0.0
    }

    /// Euclidean distance from `p` to the shape (0 inside).
    pub fn distance_to_point(&self, p: Point) -> f64 {
        match *self {
            Obstacle::Rect { x, y, w, h } => {
                let dx = (x - p.x).max(0.0).max(p.x - (x + w));
                let dy = (y - p.y).max(0.0).max(p.y - (y + h));
                dx.hypot(dy)
            }
            Obstacle::Circle { cx, cy, r } => (p.distance(Point::new(cx, cy)) - r).max(0.0),
        }
    }

    /// Minimum distance between the segment `a→b` and the shape (0 when they touch).
    pub fn distance_to_segment(&self, a: Point, b: Point) -> f64 {
        match *self {
            Obstacle::Circle { cx, cy, r } => (point_segment_distance(Point::new(cx, cy), a, b) - r).max(0.0),
            Obstacle::Rect { x, y, w, h } => {
                if segment_hits_rect(a, b, x, y, x + w, y + h) {
                    return 0.0;
                }
                // Disjoint convex sets: the closest pair involves a vertex of one of them.
                let corners = [
                    Point::new(x, y),
                    Point::new(x + w, y),
                    Point::new(x, y + h),
                    Point::new(x + w, y + h),
                ];
                let from_corners = corners
                    .iter()
                    .map(|&c| point_segment_distance(c, a, b))
                    .fold(f64::INFINITY, f64::min);
                from_corners.min(self.distance_to_point(a)).min(self.distance_to_point(b))
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            Obstacle::Rect { x, y, w, h } => [x, y, w, h].iter().all(|v| v.is_finite()) && w > 0.0 && h > 0.0,
            Obstacle::Circle { cx, cy, r } => [cx, cy, r].iter().all(|v| v.is_finite()) && r > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidScenario(format!("degenerate obstacle {self:?}")))
        }
    }
}

pub fn point_segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let len2 = dx * dx + dy * dy;
    if len2 == 0.0 {
        return p.distance(a);
    }
    let t = (((p.x - a.x) * dx + (p.y - a.y) * dy) / len2).clamp(0.0, 1.0);
    p.distance(a.lerp(b, t))
}

/// Liang–Barsky clip of segment `a→b` against `[x0, x1] × [y0, y1]`.
fn segment_hits_rect(a: Point, b: Point, x0: f64, y0: f64, x1: f64, y1: f64) -> bool {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let mut t0: f64 = 0.0;
    let mut t1: f64 = 1.0;
    for (p, q) in [(-dx, a.x - x0), (dx, x1 - a.x), (-dy, a.y - y0), (dy, y1 - a.y)] {
        if p == 0.0 {
            if q < 0.0 {
                return false;
            }
        } else {
            let t = q / p;
            if p < 0.0 {
                t0 = t0.max(t);
            } else {
                t1 = t1.min(t);
            }
            if t0 > t1 {
                return false;
            }
        }
    }
    true
}

/// Static layout: bounds, start, goal, goal area and obstacles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub bounds: Bounds,
    pub start: Point,
    pub goal: Point,
    pub goal_radius: f64,
    pub obstacles: Vec<Obstacle>,
}

impl Scenario {
    /// One of the three shipped layouts (1-based).
    pub fn builtin(id: u8) -> Result<Self> {
        let text = match id {
            1 => SCENARIO_1,
            2 => SCENARIO_2,
            3 => SCENARIO_3,
            _ => return Err(Error::InvalidScenario(format!("unknown scenario {id}; expected 1, 2 or 3"))),
        };
        Self::parse(text)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let bad = |line: usize, msg: String| Error::InvalidScenario(format!("line {}: {msg}", line + 1));
        let (mut bounds, mut start, mut goal, mut radius) = (None, None, None, None);
        let mut obstacles = Vec::new();
        for (ln, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let key = parts.next().unwrap_or_default();
            let nums = parts
                .map(|t| t.parse::<f64>().map_err(|_| bad(ln, format!("'{t}' is not a number"))))
                .collect::<Result<Vec<f64>>>()?;
            if nums.iter().any(|v| !v.is_finite()) {
                return Err(bad(ln, "non-finite value".into()));
            }
            let want = |n: usize| -> Result<()> {
                if nums.len() == n {
                    Ok(())
                } else {
                    Err(bad(ln, format!("'{key}' takes {n} values, got {}", nums.len())))
                }
            };
            match key {
                "bounds" => {
                    want(4)?;
                    bounds = Some(Bounds {
                        min: Point::new(nums[0], nums[1]),
                        max: Point::new(nums[2], nums[3]),
                    });
                }
                "start" => {
                    want(2)?;
                    start = Some(Point::new(nums[0], nums[1]));
                }
                "goal" => {
                    want(2)?;
                    goal = Some(Point::new(nums[0], nums[1]));
                }
                "goal_radius" => {
                    want(1)?;
                    radius = Some(nums[0]);
                }
                "rect" => {
                    want(4)?;
                    obstacles.push(Obstacle::Rect {
                        x: nums[0],
                        y: nums[1],
                        w: nums[2],
                        h: nums[3],
                    });
                }
                "circle" => {
                    want(3)?;
                    obstacles.push(Obstacle::Circle {
                        cx: nums[0],
                        cy: nums[1],
                        r: nums[2],
                    });
                }
                other => return Err(bad(ln, format!("unknown directive '{other}'"))),
            }
        }
        let missing = |what: &str| Error::InvalidScenario(format!("missing '{what}'"));
        let scenario = Scenario {
            bounds: bounds.ok_or_else(|| missing("bounds"))?,
            start: start.ok_or_else(|| missing("start"))?,
            goal: goal.ok_or_else(|| missing("goal"))?,
            goal_radius: radius.ok_or_else(|| missing("goal_radius"))?,
            obstacles,
        };
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn validate(&self) -> Result<()> {
        let b = self.bounds;
        if !(b.max.x > b.min.x && b.max.y > b.min.y) {
            return Err(Error::InvalidScenario("bounds must have positive extent".into()));
        }
        if self.goal_radius.is_nan() || self.goal_radius <= 0.0 {
            return Err(Error::InvalidScenario("goal_radius must be positive".into()));
        }
        for (name, p) in [("start", self.start), ("goal", self.goal)] {
            if !b.contains(p) {
                return Err(Error::InvalidScenario(format!("{name} lies outside the bounds")));
            }
            if let Some(o) = self.obstacles.iter().find(|o| o.contains(p)) {
                return Err(Error::InvalidScenario(format!("{name} lies inside obstacle {o:?}")));
            }
        }
        if self.start.distance(self.goal) <= self.goal_radius {
            return Err(Error::InvalidScenario("start already inside the goal area".into()));
        }
        self.obstacles.iter().try_for_each(Obstacle::validate)
    }

    pub fn to_text(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let b = self.bounds;
        writeln!(f, "bounds {} {} {} {}", b.min.x, b.min.y, b.max.x, b.max.y)?;
        writeln!(f, "start {} {}", self.start.x, self.start.y)?;
        writeln!(f, "goal {} {}", self.goal.x, self.goal.y)?;
        writeln!(f, "goal_radius {}", self.goal_radius)?;
        for o in &self.obstacles {
            match *o {
                Obstacle::Rect { x, y, w, h } => writeln!(f, "rect {x} {y} {w} {h}")?,
                Obstacle::Circle { cx, cy, r } => writeln!(f, "circle {cx} {cy} {r}")?,
            }
        }
        Ok(())
    }
}

/// Motion and reward magnitudes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FarmParams {
    /// World units moved per unit of action.
    pub step_scale: f64,
    /// Obstacles are inflated by this much for collision checks.
    pub obstacle_margin: f64,
    pub collision_penalty: f64,
    pub boundary_margin: f64,
    pub boundary_penalty: f64,
    pub revisit_penalty: f64,
    pub step_penalty: f64,
    /// Side length of the square visit-grid cells.
    pub visit_cell: f64,
    pub max_steps: usize,
}

impl Default for FarmParams {
    fn default() -> Self {
        Self {
            step_scale: 2.0,
            obstacle_margin: 0.3,
            collision_penalty: -2.0,
            boundary_margin: 0.5,
            boundary_penalty: -0.5,
            revisit_penalty: -1.0,
            step_penalty: -0.05,
            visit_cell: 1.0,
            max_steps: 200,
        }
    }
}

impl FarmParams {
    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.step_scale,
            self.obstacle_margin,
            self.collision_penalty,
            self.boundary_margin,
            self.boundary_penalty,
            self.revisit_penalty,
            self.step_penalty,
            self.visit_cell,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite || self.step_scale <= 0.0 || self.visit_cell <= 0.0 || self.max_steps == 0 {
            return Err(Error::InvalidConfig("farm parameters must be finite with positive scale, cell and step limit".into()));
        }
        if self.obstacle_margin < 0.0 || self.boundary_margin < 0.0 {
            return Err(Error::InvalidConfig("margins must be non-negative".into()));
        }
        Ok(())
    }
}

/// Per-term reward; `total()` is the sum.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RewardBreakdown {
    pub potential: f64,
    pub step: f64,
    pub boundary: f64,
    pub revisit: f64,
    pub collision: f64,
}

impl RewardBreakdown {
    pub fn total(&self) -> f64 {
        self.potential + self.step + self.boundary + self.revisit + self.collision
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContStepResult {
    pub observation: Point,
    pub reward: f64,
    pub breakdown: RewardBreakdown,
    /// Goal area reached.
    pub terminated: bool,
    /// Step limit reached without reaching the goal.
    pub truncated: bool,
    pub collided: bool,
}

impl ContStepResult {
    pub fn done(&self) -> bool {
        self.terminated || self.truncated
    }
}

#[derive(Debug, Clone)]
pub struct ContinuousFarm {
    scenario: Scenario,
    params: FarmParams,
    start_goal_distance: f64,
    agent: Point,
    visit_cols: usize,
    visit_rows: usize,
    visits: Vec<u32>,
    step_count: usize,
    collisions: usize,
    outcome: Option<Outcome>,
}

impl ContinuousFarm {
    pub fn new(scenario: Scenario, params: FarmParams) -> Result<Self> {
        scenario.validate()?;
        params.validate()?;
        let visit_cols = (scenario.bounds.width() / params.visit_cell).ceil().max(1.0) as usize;
        let visit_rows = (scenario.bounds.height() / params.visit_cell).ceil().max(1.0) as usize;
        let mut env = Self {
            start_goal_distance: scenario.start.distance(scenario.goal),
            agent: scenario.start,
            scenario,
            params,
            visit_cols,
            visit_rows,
            visits: vec![0; visit_cols * visit_rows],
            step_count: 0,
            collisions: 0,
            outcome: None,
        };
        env.reset();
        Ok(env)
    }

    /// Shipped scenario `id` ∈ {1, 2, 3} with default parameters.
    pub fn builtin(id: u8) -> Result<Self> {
        Self::new(Scenario::builtin(id)?, FarmParams::default())
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn params(&self) -> &FarmParams {
        &self.params
    }

    pub fn agent(&self) -> Point {
        self.agent
    }

    pub fn step_count(&self) -> usize {
        self.step_count
    }

    pub fn collisions(&self) -> usize {
        self.collisions
    }

    pub fn outcome(&self) -> Option<Outcome> {
        self.outcome
    }

    pub fn observation_dim(&self) -> usize {
        2
    }

    pub fn action_dim(&self) -> usize {
        2
    }

    pub fn visit_count(&self, p: Point) -> u32 {
        self.visits[self.visit_cell(p)]
    }

    /// Back to the start point with a cleared visit grid.
    pub fn reset(&mut self) -> Point {
        self.agent = self.scenario.start;
        self.visits.iter_mut().for_each(|v| *v = 0);
        let cell = self.visit_cell(self.agent);
        self.visits[cell] = 1;
        self.step_count = 0;
        self.collisions = 0;
        self.outcome = None;
        self.agent
    }

    /// Switches to another shipped layout and resets.
    pub fn reset_scenario(&mut self, id: u8) -> Result<Point> {
        let scenario = Scenario::builtin(id)?;
        *self = Self::new(scenario, self.params)?;
        Ok(self.agent)
    }

    fn visit_cell(&self, p: Point) -> usize {
        let b = self.scenario.bounds;
        let col = (((p.x - b.min.x) / self.params.visit_cell).floor().max(0.0) as usize).min(self.visit_cols - 1);
        let row = (((p.y - b.min.y) / self.params.visit_cell).floor().max(0.0) as usize).min(self.visit_rows - 1);
        row * self.visit_cols + col
    }

    /// `-distance(p, goal) / distance(start, goal)`.
    pub fn potential(&self, p: Point) -> f64 {
        -p.distance(self.scenario.goal) / self.start_goal_distance
    }

    /// True iff the segment `prev→next` comes within the proximity margin of any obstacle.
    pub fn collision_check(&self, prev: Point, next: Point) -> bool {
        let margin = self.params.obstacle_margin;
        self.scenario.obstacles.iter().any(|o| o.distance_to_segment(prev, next) <= margin)
    }

    pub fn in_goal_area(&self, p: Point) -> bool {
        p.distance(self.scenario.goal) <= self.scenario.goal_radius
    }

    /// Shaped reward for moving from `prev` to `next` given the current visit history.
    pub fn shaped_reward(&self, prev: Point, next: Point, collided: bool) -> RewardBreakdown {
        let p = &self.params;
        let boundary = if self.scenario.bounds.edge_distance(next) < p.boundary_margin {
            p.boundary_penalty
        } else {
            0.0
        };
        let (from, to) = (self.visit_cell(prev), self.visit_cell(next));
        let revisit = if to != from && self.visits[to] > 0 {
            p.revisit_penalty
        } else {
            0.0
        };
        RewardBreakdown {
            potential: self.potential(next),
            step: p.step_penalty,
            boundary,
            revisit,
            collision: if collided { p.collision_penalty } else { 0.0 },
        }
    }

    pub fn step(&mut self, action: [f64; 2]) -> Result<ContStepResult> {
        if self.outcome.is_some() {
            return Err(Error::EpisodeOver);
        }
        if action.iter().any(|a| !a.is_finite()) {
            return Err(Error::NonFinite("action"));
        }
        let [ax, ay] = action.map(|a| a.clamp(-1.0, 1.0));
        let prev = self.agent;
        let s = self.params.step_scale;
        let proposed = self.scenario.bounds.clamp(Point::new(prev.x + ax * s, prev.y + ay * s));
        let collided = self.collision_check(prev, proposed);
        let next = if collided { prev } else { proposed };
        let breakdown = self.shaped_reward(prev, next, collided);

        let cell = self.visit_cell(next);
        self.visits[cell] += 1;
        self.agent = next;
        self.step_count += 1;
        if collided {
            self.collisions += 1;
        }
        let terminated = !collided && self.in_goal_area(next);
        let truncated = !terminated && self.step_count >= self.params.max_steps;
        if terminated {
            self.outcome = Some(Outcome::Goal);
        } else if truncated {
            self.outcome = Some(if self.collisions > 0 { Outcome::Collision } else { Outcome::Timeout });
        }
        Ok(ContStepResult {
            observation: next,
            reward: breakdown.total(),
            breakdown,
            terminated,
            truncated,
            collided,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn open_field() -> ContinuousFarm {
        let scenario = Scenario::parse("bounds 0 0 20 20\nstart 2 2\ngoal 18 18\ngoal_radius 1\n").unwrap();
        ContinuousFarm::new(scenario, FarmParams::default()).unwrap()
    }

    #[test]
    fn builtin_scenarios_reset_to_start() {
        for id in 1..=3 {
            let mut env = ContinuousFarm::builtin(id).unwrap();
            let s = env.scenario().start;
            assert_eq!(env.reset(), s);
            assert_eq!(env.reset(), s);
            let sc = env.scenario();
            for o in &sc.obstacles {
                assert!(o.distance_to_point(sc.start) > env.params().obstacle_margin);
                assert!(o.distance_to_point(sc.goal) > env.params().obstacle_margin);
            }
        }
        assert!(ContinuousFarm::builtin(4).is_err());
        assert!(Scenario::builtin(0).is_err());
    }

    #[test]
    fn null_move_keeps_position() {
        let mut env = open_field();
        let r = env.step([0.0, 0.0]).unwrap();
        assert_eq!(r.observation, Point::new(2.0, 2.0));
        assert_eq!(r.breakdown.potential, -1.0);
        assert_eq!(r.reward, -1.0 + env.params().step_penalty);
        assert!(!r.done());
    }

    #[test]
    fn potential_examples() {
        let env = open_field();
        assert_eq!(env.potential(Point::new(2.0, 2.0)), -1.0);
        assert_eq!(env.potential(Point::new(18.0, 18.0)), 0.0);
        assert!((env.potential(Point::new(10.0, 10.0)) + 0.5).abs() < 1e-15);
    }

    #[test]
    fn action_is_clamped_and_scaled() {
        let mut env = open_field();
        let r = env.step([5.0, -0.5]).unwrap();
        let s = env.params().step_scale;
        assert_eq!(r.observation, Point::new(2.0 + s, 2.0 - 0.5 * s));
        assert!(env.step([f64::NAN, 0.0]).is_err());
    }

    #[test]
    fn crossing_an_obstacle_is_blocked_and_penalised() {
        let scenario = Scenario::parse("bounds 0 0 20 20\nstart 5 5\ngoal 18 18\ngoal_radius 1\nrect 6 4 0.2 2\n").unwrap();
        let mut env = ContinuousFarm::new(scenario, FarmParams::default()).unwrap();
        let r = env.step([1.0, 0.0]).unwrap();
        assert!(r.collided);
        assert_eq!(r.breakdown.collision, -2.0);
        assert_eq!(r.observation, Point::new(5.0, 5.0));
        assert!(!r.terminated);
    }

    #[test]
    fn goal_area_terminates() {
        let scenario = Scenario::parse("bounds 0 0 20 20\nstart 15 15\ngoal 17 17\ngoal_radius 1\n").unwrap();
        let mut env = ContinuousFarm::new(scenario, FarmParams::default()).unwrap();
        let r = env.step([0.9, 0.9]).unwrap();
        assert!(r.terminated && !r.collided);
        assert_eq!(env.outcome(), Some(Outcome::Goal));
        assert!(matches!(env.step([0.0, 0.0]), Err(Error::EpisodeOver)));
    }

    #[test]
    fn step_limit_truncates() {
        let params = FarmParams {
            max_steps: 3,
            ..FarmParams::default()
        };
        let scenario = Scenario::parse("bounds 0 0 20 20\nstart 2 2\ngoal 18 18\ngoal_radius 1\n").unwrap();
        let mut env = ContinuousFarm::new(scenario, params).unwrap();
        for _ in 0..2 {
            assert!(!env.step([0.0, 0.0]).unwrap().done());
        }
        let r = env.step([0.0, 0.0]).unwrap();
        assert!(r.truncated && !r.terminated);
        assert_eq!(env.outcome(), Some(Outcome::Timeout));
    }

    #[test]
    fn revisit_and_boundary_penalties() {
        let mut env = open_field();
        let s = env.params().step_scale;
        let away = env.step([1.0, 0.0]).unwrap();
        assert_eq!(away.breakdown.revisit, 0.0);
        let back = env.step([-1.0, 0.0]).unwrap();
        assert_eq!(back.breakdown.revisit, -1.0);
        assert_eq!(back.observation, Point::new(2.0, 2.0));
        // Staying inside one cell is not a revisit.
        assert_eq!(env.step([0.0, 0.0]).unwrap().breakdown.revisit, 0.0);
        // Drive into the left edge.
        let edge = env.step([-1.0, 0.0]).unwrap();
        assert_eq!(edge.observation.x, (2.0 - s).max(0.0));
        assert_eq!(edge.breakdown.boundary, -0.5);
    }

    #[test]
    fn breakdown_sums_to_reward() {
        let mut env = ContinuousFarm::builtin(3).unwrap();
        for k in 0..50 {
            let a = [((k * 7) % 5) as f64 / 2.0 - 1.0, ((k * 3) % 4) as f64 / 1.5 - 1.0];
            let r = env.step(a).unwrap();
            assert_eq!(r.reward, r.breakdown.total());
            if r.done() {
                env.reset();
            }
        }
    }

    #[test]
    fn segment_geometry() {
        let rect = Obstacle::Rect {
            x: 4.0,
            y: 4.0,
            w: 2.0,
            h: 2.0,
        };
        // Crossing with both endpoints outside.
        assert_eq!(rect.distance_to_segment(Point::new(3.0, 5.0), Point::new(7.0, 5.0)), 0.0);
        // Endpoint inside.
        assert_eq!(rect.distance_to_segment(Point::new(5.0, 5.0), Point::new(9.0, 9.0)), 0.0);
        // Parallel pass above the top edge.
        let d = rect.distance_to_segment(Point::new(0.0, 7.0), Point::new(10.0, 7.0));
        assert!((d - 1.0).abs() < 1e-12);
        // Passing a corner diagonally.
        let d = rect.distance_to_segment(Point::new(6.0, 8.0), Point::new(8.0, 6.0));
        assert!((d - 2f64.sqrt()).abs() < 1e-12);
        let circle = Obstacle::Circle { cx: 0.0, cy: 0.0, r: 1.0 };
        assert!((circle.distance_to_segment(Point::new(-3.0, 2.0), Point::new(3.0, 2.0)) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn loader_rejects_invalid_scenarios() {
        let ok = "bounds 0 0 20 20\nstart 1 1\ngoal 18 18\ngoal_radius 1\n";
        assert!(Scenario::parse(ok).is_ok());
        for bad in [
            "start 1 1\ngoal 18 18\ngoal_radius 1\n",
            "bounds 0 0 20 20\nstart 1 1\ngoal 18 18\ngoal_radius 0\n",
            "bounds 0 0 20 20\nstart 1 1\ngoal 18 18\ngoal_radius 1\nrect 0 0 2 2\n",
            "bounds 0 0 20 20\nstart 1 1\ngoal 18 18\ngoal_radius 1\ncircle 18 18 0.5\n",
            "bounds 0 0 20 20\nstart 1 1\ngoal 25 18\ngoal_radius 1\n",
            "bounds 0 0 20 20\nstart 1 1\ngoal 18 18\ngoal_radius 1\ntriangle 1 2 3\n",
            "bounds 0 0 20 20\nstart 1 1 1\ngoal 18 18\ngoal_radius 1\n",
            "bounds 0 0 20 20\nstart 1 x\ngoal 18 18\ngoal_radius 1\n",
            "bounds 0 0 20 20\nstart 1 1\ngoal 18 18\ngoal_radius 1\nrect 5 5 0 2\n",
        ] {
            assert!(matches!(Scenario::parse(bad), Err(Error::InvalidScenario(_))), "{bad:?}");
        }
    }

    #[test]
    fn scenario_text_round_trip() {
        for id in 1..=3 {
            let s = Scenario::builtin(id).unwrap();
            assert_eq!(Scenario::parse(&s.to_text()).unwrap(), s);
        }
    }
}
