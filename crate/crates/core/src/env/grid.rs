//! Discrete grid field with sparse reward and optional slippery dynamics.
//!
//! Map text uses one row per line: `S` start, `F` free, `H` obstacle, `G` goal.
//! Entering an obstacle or the goal ends the episode; only the goal pays (+1).

use std::fmt;
use std::fs;
use std::path::Path;

use rand::Rng;

use super::Outcome;
use crate::{Error, Result};

pub const MAP_8X8: &str = include_str!("../../data/maps/8x8.txt");
pub const MAP_10X10: &str = include_str!("../../data/maps/10x10.txt");
pub const MAP_4X4: &str = include_str!("../../data/maps/4x4.txt");

pub const DETERMINISTIC_MAX_STEPS: usize = 200;
pub const SLIPPERY_MAX_STEPS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Cell {
    Start,
    Free,
    Obstacle,
    Goal,
}

impl Cell {
    fn from_char(c: char) -> Option<Cell> {
        match c {
            'S' => Some(Cell::Start),
            'F' => Some(Cell::Free),
            'H' => Some(Cell::Obstacle),
            'G' => Some(Cell::Goal),
            _ => None,
        }
    }

    fn to_char(self) -> char {
        match self {
            Cell::Start => 'S',
            Cell::Free => 'F',
            Cell::Obstacle => 'H',
            Cell::Goal => 'G',
        }
    }
}

/// Action indices follow the FrozenLake convention.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GridAction {
    Left = 0,
    Down = 1,
    Right = 2,
    Up = 3,
}

impl GridAction {
    pub const ALL: [GridAction; 4] = [GridAction::Left, GridAction::Down, GridAction::Right, GridAction::Up];
    pub const COUNT: usize = 4;

    pub fn from_index(i: usize) -> Result<Self> {
        Self::ALL
            .get(i)
            .copied()
            .ok_or_else(|| Error::InvalidArgument(format!("action index {i} out of range")))
    }

    pub fn index(self) -> usize {
        self as usize
    }

    /// The two directions at right angles to `self`.
    pub fn perpendicular(self) -> [GridAction; 2] {
        let i = self.index();
        [Self::ALL[(i + 3) % 4], Self::ALL[(i + 1) % 4]]
    }

    pub fn opposite(self) -> GridAction {
        Self::ALL[(self.index() + 2) % 4]
    }

    fn delta(self) -> (isize, isize) {
        match self {
            GridAction::Left => (0, -1),
            GridAction::Down => (1, 0),
            GridAction::Right => (0, 1),
            GridAction::Up => (-1, 0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepResult {
    pub next_state: usize,
    pub reward: f64,
    pub terminated: bool,
    /// Step limit reached without termination.
    pub truncated: bool,
    /// Direction actually executed (differs from the request only when slippery).
    pub executed: GridAction,
}

impl StepResult {
    pub fn done(&self) -> bool {
        self.terminated || self.truncated
    }
}

#[derive(Debug, Clone)]
pub struct GridWorld {
    width: usize,
    height: usize,
    cells: Vec<Cell>,
    start: usize,
    goal: usize,
    slippery: bool,
    max_steps: usize,
    agent: usize,
    steps: usize,
    outcome: Option<Outcome>,
}

impl GridWorld {
    pub fn from_map_str(text: &str, slippery: bool) -> Result<Self> {
        let rows: Vec<&str> = text.lines().map(str::trim).filter(|l| !l.is_empty()).collect();
        if rows.is_empty() {
            return Err(Error::InvalidMap("map is empty".into()));
        }
        let width = rows[0].chars().count();
        let mut cells = Vec::with_capacity(rows.len() * width);
        for (r, row) in rows.iter().enumerate() {
            if row.chars().count() != width {
                return Err(Error::InvalidMap(format!("row {r} has {} cells, expected {width}", row.chars().count())));
            }
            for (c, ch) in row.chars().enumerate() {
                let cell = Cell::from_char(ch)
                    .ok_or_else(|| Error::InvalidMap(format!("unknown cell '{ch}' at row {r}, column {c}")))?;
                cells.push(cell);
            }
        }
        let find = |kind: Cell| -> Result<usize> {
            let hits: Vec<usize> = cells.iter().enumerate().filter(|(_, &c)| c == kind).map(|(i, _)| i).collect();
            match hits.as_slice() {
                [one] => Ok(*one),
                _ => Err(Error::InvalidMap(format!("expected exactly one {:?} cell, found {}", kind, hits.len()))),
            }
        };
        let start = find(Cell::Start)?;
        let goal = find(Cell::Goal)?;
        Ok(Self {
            width,
            height: rows.len(),
            cells,
            start,
            goal,
            slippery,
            max_steps: if slippery { SLIPPERY_MAX_STEPS } else { DETERMINISTIC_MAX_STEPS },
            agent: start,
            steps: 0,
            outcome: None,
        })
    }

    pub fn load(path: impl AsRef<Path>, slippery: bool) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_map_str(&text, slippery)
    }

    /// The FrozenLake-v1 8x8 layout.
    pub fn canonical_8x8(slippery: bool) -> Self {
        Self::from_map_str(MAP_8X8, slippery).expect("shipped map is valid")
    }

    /// Denser 10x10 layout with wall segments that force detours.
    pub fn dense_10x10(slippery: bool) -> Self {
        Self::from_map_str(MAP_10X10, slippery).expect("shipped map is valid")
    }

    /// The FrozenLake-v1 4x4 layout.
    pub fn small_4x4(slippery: bool) -> Self {
        Self::from_map_str(MAP_4X4, slippery).expect("shipped map is valid")
    }

    pub fn with_max_steps(mut self, max_steps: usize) -> Self {
        self.max_steps = max_steps.max(1);
        self
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn n_states(&self) -> usize {
        self.width * self.height
    }

    pub fn n_actions(&self) -> usize {
        GridAction::COUNT
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn cell(&self, index: usize) -> Cell {
        self.cells[index]
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn goal(&self) -> usize {
        self.goal
    }

    pub fn is_slippery(&self) -> bool {
        self.slippery
    }

    pub fn max_steps(&self) -> usize {
        self.max_steps
    }

    pub fn agent(&self) -> usize {
        self.agent
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Set once the episode ends.
    pub fn outcome(&self) -> Option<Outcome> {
        self.outcome
    }

    pub fn coords(&self, index: usize) -> (usize, usize) {
        (index / self.width, index % self.width)
    }

    pub fn index(&self, row: usize, col: usize) -> usize {
        row * self.width + col
    }

    pub fn reset(&mut self) -> usize {
        self.agent = self.start;
        self.steps = 0;
        self.outcome = None;
        self.agent
    }

    /// Cell reached from `from` moving `dir`, clamped at the edges.
    pub fn neighbour(&self, from: usize, dir: GridAction) -> usize {
        let (r, c) = self.coords(from);
        let (dr, dc) = dir.delta();
        let nr = (r as isize + dr).clamp(0, self.height as isize - 1) as usize;
        let nc = (c as isize + dc).clamp(0, self.width as isize - 1) as usize;
        self.index(nr, nc)
    }

    pub fn step<R: Rng + ?Sized>(&mut self, action: GridAction, rng: &mut R) -> Result<StepResult> {
        if self.outcome.is_some() {
            return Err(Error::EpisodeOver);
        }
        let executed = if self.slippery {
            let [left, right] = action.perpendicular();
            match rng.random_range(0..3u8) {
                0 => left,
                1 => action,
                _ => right,
            }
        } else {
            action
        };
        self.agent = self.neighbour(self.agent, executed);
        self.steps += 1;
        let cell = self.cells[self.agent];
        let terminated = matches!(cell, Cell::Goal | Cell::Obstacle);
        let reward = if cell == Cell::Goal { 1.0 } else { 0.0 };
        let truncated = !terminated && self.steps >= self.max_steps;
        self.outcome = match cell {
            Cell::Goal => Some(Outcome::Goal),
            Cell::Obstacle => Some(Outcome::Collision),
            _ if truncated => Some(Outcome::Timeout),
            _ => None,
        };
        Ok(StepResult {
            next_state: self.agent,
            reward,
            terminated,
            truncated,
            executed,
        })
    }

    /// One-hot encoding of a flat state index.
    pub fn encode_state(&self, index: usize) -> Result<Vec<f64>> {
        if index >= self.n_states() {
            return Err(Error::InvalidArgument(format!("state {index} outside 0..{}", self.n_states())));
        }
        let mut v = vec![0.0; self.n_states()];
        v[index] = 1.0;
        Ok(v)
    }

    pub fn to_map_string(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for GridWorld {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in self.cells.chunks(self.width) {
            let line: String = row.iter().map(|c| c.to_char()).collect();
            writeln!(f, "{line}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;

    #[test]
    fn reset_puts_agent_on_start() {
        let mut env = GridWorld::canonical_8x8(false);
        assert_eq!(env.reset(), 0);
        assert_eq!(env.reset(), 0);
        let mut big = GridWorld::dense_10x10(false);
        assert_eq!(big.reset(), 0);
        assert_eq!(big.n_states(), 100);
    }

    #[test]
    fn reaching_goal_pays_and_terminates() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut env = GridWorld::canonical_8x8(false);
        env.reset();
        // Walk the top row then the right column.
        for _ in 0..7 {
            assert_eq!(env.step(GridAction::Right, &mut rng).unwrap().reward, 0.0);
        }
        for _ in 0..6 {
            assert!(!env.step(GridAction::Down, &mut rng).unwrap().terminated);
        }
        let last = env.step(GridAction::Down, &mut rng).unwrap();
        assert_eq!((last.next_state, last.reward, last.terminated), (63, 1.0, true));
        assert_eq!(env.outcome(), Some(Outcome::Goal));
        assert!(matches!(env.step(GridAction::Up, &mut rng), Err(Error::EpisodeOver)));
    }

    #[test]
    fn edges_clamp() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut env = GridWorld::canonical_8x8(false);
        env.reset();
        let r = env.step(GridAction::Up, &mut rng).unwrap();
        assert_eq!((r.next_state, r.reward, r.terminated), (0, 0.0, false));
        let r = env.step(GridAction::Left, &mut rng).unwrap();
        assert_eq!(r.next_state, 0);
    }

    #[test]
    fn obstacle_terminates_without_reward() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut env = GridWorld::small_4x4(false);
        env.reset();
        env.step(GridAction::Right, &mut rng).unwrap();
        let r = env.step(GridAction::Down, &mut rng).unwrap();
        assert_eq!((r.next_state, r.reward, r.terminated), (5, 0.0, true));
        assert_eq!(env.outcome(), Some(Outcome::Collision));
    }

    #[test]
    fn step_limit_truncates() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut env = GridWorld::canonical_8x8(false).with_max_steps(3);
        env.reset();
        assert!(!env.step(GridAction::Up, &mut rng).unwrap().done());
        assert!(!env.step(GridAction::Up, &mut rng).unwrap().done());
        let r = env.step(GridAction::Up, &mut rng).unwrap();
        assert!(r.truncated && !r.terminated);
        assert_eq!(env.outcome(), Some(Outcome::Timeout));
        assert_eq!(GridWorld::canonical_8x8(true).max_steps(), SLIPPERY_MAX_STEPS);
    }

    #[test]
    fn one_hot_encoding() {
        let env = GridWorld::canonical_8x8(false);
        let v = env.encode_state(0).unwrap();
        assert_eq!(v.len(), 64);
        assert_eq!(v[0], 1.0);
        assert_eq!(v.iter().sum::<f64>(), 1.0);
        let big = GridWorld::dense_10x10(false);
        let v = big.encode_state(99).unwrap();
        assert_eq!((v.len(), v[99]), (100, 1.0));
        assert!(big.encode_state(100).is_err());
    }

    #[test]
    fn slippery_never_goes_backwards() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut env = GridWorld::canonical_8x8(true);
        for _ in 0..2000 {
            env.reset();
            let r = env.step(GridAction::Right, &mut rng).unwrap();
            assert_ne!(r.executed, GridAction::Left);
        }
    }

    #[test]
    fn loader_rejects_invalid_maps() {
        for bad in ["", "SFF\nFG", "SFX\nFFG", "SFF\nFFF", "SSG\nFFF", "SGG\nFFF"] {
            assert!(matches!(GridWorld::from_map_str(bad, false), Err(Error::InvalidMap(_))), "{bad:?}");
        }
        let env = GridWorld::from_map_str("SF\nHG\n", false).unwrap();
        assert_eq!(env.to_map_string(), "SF\nHG\n");
    }

    #[test]
    fn perpendiculars() {
        assert_eq!(GridAction::Left.perpendicular(), [GridAction::Up, GridAction::Down]);
        assert_eq!(GridAction::Down.opposite(), GridAction::Up);
    }
}
