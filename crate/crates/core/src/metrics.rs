//! Episode logs, smoothing, convergence detection and stability scoring.

use serde::{Deserialize, Serialize};

use crate::env::Outcome;
use crate::{Error, Result};

/// Trailing window used throughout the results tables.
pub const TRAILING_WINDOW: usize = 100;
/// Continuous convergence: trailing mean reward must exceed this.
pub const CONTINUOUS_REWARD_THRESHOLD: f64 = -5.0;
/// Continuous convergence: trailing mean steps must stay below this.
pub const CONTINUOUS_STEPS_THRESHOLD: f64 = 30.0;
/// Default step threshold for the stability measure.
pub const STABILITY_STEPS_THRESHOLD: usize = 30;
/// Smoothing factor used for plotted curves.
pub const PLOT_SMOOTHING: f64 = 0.99;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    /// 1-based episode number.
    pub episode: usize,
    pub reward: f64,
    pub steps: usize,
    pub outcome: Outcome,
    /// ε for value-based agents, exploration noise scale for actor-critic agents.
    pub epsilon_or_noise: f64,
    /// Mean training loss over the episode's updates; `None` when no update ran.
    pub mean_loss: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub algorithm: String,
    pub environment: String,
    pub seed: u64,
    /// Snapshot of the configuration the run was started with.
    pub config: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunLog {
    meta: RunMetadata,
    rows: Vec<EpisodeRecord>,
    wall_clock_secs: Option<f64>,
}

impl RunLog {
    pub fn new(meta: RunMetadata) -> Self {
        Self {
            meta,
            rows: Vec::new(),
            wall_clock_secs: None,
        }
    }

    pub fn from_rows(meta: RunMetadata, rows: Vec<EpisodeRecord>) -> Result<Self> {
        let mut log = Self::new(meta);
        for r in rows {
            log.push(r)?;
        }
        Ok(log)
    }

    pub fn meta(&self) -> &RunMetadata {
        &self.meta
    }

    pub fn rows(&self) -> &[EpisodeRecord] {
        &self.rows
    }

    /// Rows must arrive in episode order.
    pub fn push(&mut self, row: EpisodeRecord) -> Result<()> {
        if let Some(last) = self.rows.last() {
            if row.episode <= last.episode {
                return Err(Error::InvalidArgument(format!(
                    "episode {} logged after episode {}",
                    row.episode, last.episode
                )));
            }
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn finish(&mut self, wall_clock_secs: f64) {
        self.wall_clock_secs = Some(wall_clock_secs);
    }

    pub fn wall_clock_secs(&self) -> Option<f64> {
        self.wall_clock_secs
    }

    pub fn rewards(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.reward).collect()
    }

    pub fn steps(&self) -> Vec<usize> {
        self.rows.iter().map(|r| r.steps).collect()
    }

    pub fn successes(&self) -> Vec<f64> {
        self.rows
            .iter()
            .map(|r| if r.outcome == Outcome::Goal { 1.0 } else { 0.0 })
            .collect()
    }

    /// Goals among the last `TRAILING_WINDOW` episodes (0–100).
    pub fn trailing_successes(&self) -> usize {
        let start = self.rows.len().saturating_sub(TRAILING_WINDOW);
        self.rows[start..].iter().filter(|r| r.outcome == Outcome::Goal).count()
    }

    /// Goals in the `TRAILING_WINDOW` episodes ending at 1-based `episode`.
    pub fn trailing_successes_at(&self, episode: usize) -> usize {
        let end = self.rows.iter().take_while(|r| r.episode <= episode).count();
        let start = end.saturating_sub(TRAILING_WINDOW);
        self.rows[start..end].iter().filter(|r| r.outcome == Outcome::Goal).count()
    }

    /// Largest raw step count of any episode.
    pub fn max_exploration(&self) -> usize {
        self.rows.iter().map(|r| r.steps).max().unwrap_or(0)
    }
}

/// Element `i` is the mean of `series[max(0, i + 1 - window) ..= i]`.
pub fn trailing_mean(series: &[f64], window: usize) -> Result<Vec<f64>> {
    if window == 0 {
        return Err(Error::InvalidArgument("trailing window must be >= 1".into()));
    }
    let mut out = Vec::with_capacity(series.len());
    let mut sum = 0.0;
    for i in 0..series.len() {
        sum += series[i];
        if i >= window {
            sum -= series[i - window];
        }
        let n = (i + 1).min(window);
        // Re-sum occasionally so the running total cannot drift.
        if i % 4096 == 4095 {
            sum = series[i + 1 - n..=i].iter().sum();
        }
        out.push(sum / n as f64);
    }
    Ok(out)
}

/// `s₀ = x₀`, `sᵢ = f·sᵢ₋₁ + (1 − f)·xᵢ`.
pub fn ema_smooth(series: &[f64], factor: f64) -> Result<Vec<f64>> {
    if !(0.0..1.0).contains(&factor) {
        return Err(Error::InvalidArgument(format!("smoothing factor {factor} outside [0, 1)")));
    }
    let mut out = Vec::with_capacity(series.len());
    let mut prev = None;
    for &x in series {
        let s = match prev {
            None => x,
            Some(p) => factor * p + (1.0 - factor) * x,
        };
        out.push(s);
        prev = Some(s);
    }
    Ok(out)
}

/// Fraction of episodes from index `convergence_start` on whose step count is below
/// `threshold`.
pub fn stability_measure(steps: &[usize], threshold: usize, convergence_start: usize) -> Result<f64> {
    if convergence_start >= steps.len() {
        return Err(Error::InvalidArgument(format!(
            "convergence start {convergence_start} beyond {} episodes",
            steps.len()
        )));
    }
    let tail = &steps[convergence_start..];
    let below = tail.iter().filter(|&&s| s < threshold).count();
    Ok(below as f64 / tail.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConvergenceKind {
    /// Every one of the last 100 episodes reached the goal.
    Discrete,
    /// Trailing-100 mean reward above −5 and trailing-100 mean steps below 30.
    Continuous,
}

/// 1-based episode at which the convergence criterion first holds over a full window.
pub fn detect_convergence(log: &RunLog, kind: ConvergenceKind) -> Option<usize> {
    let rows = log.rows();
    if rows.len() < TRAILING_WINDOW {
        return None;
    }
    let index = match kind {
        ConvergenceKind::Discrete => {
            let succ = trailing_mean(&log.successes(), TRAILING_WINDOW).ok()?;
            (TRAILING_WINDOW - 1..rows.len()).find(|&i| succ[i] >= 1.0)
        }
        ConvergenceKind::Continuous => {
            let reward = trailing_mean(&log.rewards(), TRAILING_WINDOW).ok()?;
            let steps: Vec<f64> = log.steps().into_iter().map(|s| s as f64).collect();
            let steps = trailing_mean(&steps, TRAILING_WINDOW).ok()?;
            (TRAILING_WINDOW - 1..rows.len())
                .find(|&i| reward[i] > CONTINUOUS_REWARD_THRESHOLD && steps[i] < CONTINUOUS_STEPS_THRESHOLD)
        }
    };
    index.map(|i| rows[i].episode)
}

/// Row index where convergence starts: the first full trailing window in which at least
/// half the episodes reached the goal.
pub fn convergence_onset(log: &RunLog) -> Option<usize> {
    let rows = log.rows();
    if rows.len() < TRAILING_WINDOW {
        return None;
    }
    let succ = trailing_mean(&log.successes(), TRAILING_WINDOW).ok()?;
    (TRAILING_WINDOW - 1..rows.len()).find(|&i| succ[i] >= 0.5)
}

/// Stability over the episodes from convergence onset on; a run that never starts
/// converging scores 0.
pub fn run_stability(log: &RunLog, threshold: usize) -> f64 {
    match convergence_onset(log) {
        Some(start) => stability_measure(&log.steps(), threshold, start).unwrap_or(0.0),
        None => 0.0,
    }
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    fn meta() -> RunMetadata {
        RunMetadata {
            algorithm: "dqn".into(),
            environment: "grid8".into(),
            seed: 0,
            config: String::new(),
        }
    }

    fn row(episode: usize, reward: f64, steps: usize, outcome: Outcome) -> EpisodeRecord {
        EpisodeRecord {
            episode,
            reward,
            steps,
            outcome,
            epsilon_or_noise: 0.0,
            mean_loss: None,
        }
    }

    #[test]
    fn trailing_mean_examples() {
        assert_eq!(trailing_mean(&[3.0; 5], 2).unwrap(), vec![3.0; 5]);
        let x = [0.5, -1.0, 4.0];
        assert_eq!(trailing_mean(&x, 1).unwrap(), x.to_vec());
        assert_eq!(trailing_mean(&[0.0, 1.0, 1.0, 1.0], 2).unwrap(), vec![0.0, 0.5, 1.0, 1.0]);
        assert!(trailing_mean(&[], 3).unwrap().is_empty());
        assert!(trailing_mean(&x, 0).is_err());
    }

    #[test]
    fn ema_examples() {
        let x = [1.0, -2.0, 5.0];
        assert_eq!(ema_smooth(&x, 0.0).unwrap(), x.to_vec());
        assert_eq!(ema_smooth(&[2.0; 4], 0.9).unwrap(), vec![2.0; 4]);
        let s = ema_smooth(&[0.0, 1.0], 0.99).unwrap();
        assert_eq!(s[0], 0.0);
        assert!((s[1] - 0.01).abs() < 1e-15);
        assert!(ema_smooth(&x, 1.0).is_err());
    }

    #[test]
    fn stability_examples() {
        assert_eq!(stability_measure(&[5, 6, 7], 30, 0).unwrap(), 1.0);
        let mut steps = vec![100; 20];
        steps.extend((0..100).map(|i| if i % 2 == 0 { 10 } else { 50 }));
        assert_eq!(stability_measure(&steps, 30, 20).unwrap(), 0.5);
        assert!(stability_measure(&steps, 30, 120).is_err());
    }

    #[test]
    fn discrete_convergence_on_synthetic_log() {
        let mut log = RunLog::new(meta());
        for ep in 1..=4000 {
            let outcome = if ep > 3020 || (ep % 3 == 0 && ep < 3000) {
                Outcome::Goal
            } else {
                Outcome::Collision
            };
            log.push(row(ep, if outcome == Outcome::Goal { 1.0 } else { 0.0 }, 14, outcome))
                .unwrap();
        }
        assert_eq!(detect_convergence(&log, ConvergenceKind::Discrete), Some(3120));
        assert_eq!(log.trailing_successes_at(3120), 100);
        assert_eq!(log.trailing_successes_at(3119), 99);
    }

    #[test]
    fn continuous_convergence_needs_both_conditions() {
        let never = RunLog::from_rows(meta(), (1..=300).map(|e| row(e, -20.0, 200, Outcome::Timeout)).collect())
            .unwrap();
        assert_eq!(detect_convergence(&never, ConvergenceKind::Continuous), None);

        let reward_only =
            RunLog::from_rows(meta(), (1..=300).map(|e| row(e, -3.0, 45, Outcome::Goal)).collect()).unwrap();
        assert_eq!(detect_convergence(&reward_only, ConvergenceKind::Continuous), None);

        let both = RunLog::from_rows(
            meta(),
            (1..=300)
                .map(|e| if e <= 150 { row(e, -20.0, 200, Outcome::Timeout) } else { row(e, -3.0, 8, Outcome::Goal) })
                .collect(),
        )
        .unwrap();
        let ep = detect_convergence(&both, ConvergenceKind::Continuous).unwrap();
        // 100-window mean reward: (-20 k + -3 (100 - k)) / 100 > -5 ⇔ k < 2/17·100 ⇒ k ≤ 11;
        // steps: (200 k + 8 (100 - k)) / 100 < 30 ⇔ k < 11.46 ⇒ k ≤ 11. k = 11 first at episode 239.
        assert_eq!(ep, 239);
    }

    #[test]
    fn logs_reject_out_of_order_rows() {
        let mut log = RunLog::new(meta());
        log.push(row(2, 0.0, 1, Outcome::Goal)).unwrap();
        assert!(log.push(row(2, 0.0, 1, Outcome::Goal)).is_err());
        assert_eq!(log.max_exploration(), 1);
    }

    proptest! {
        #[test]
        fn full_window_equals_cumulative_mean(xs in prop::collection::vec(-100.0f64..100.0, 1..60), extra in 0usize..10) {
            let t = trailing_mean(&xs, xs.len() + extra).unwrap();
            let mut sum = 0.0;
            for (i, x) in xs.iter().enumerate() {
                sum += x;
                prop_assert!((t[i] - sum / (i + 1) as f64).abs() < 1e-9);
            }
        }

        #[test]
        fn ema_stays_within_input_range(xs in prop::collection::vec(-50.0f64..50.0, 1..80), f in 0.0f64..0.999) {
            let lo = xs.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            for s in ema_smooth(&xs, f).unwrap() {
                prop_assert!(s >= lo - 1e-9 && s <= hi + 1e-9);
            }
        }

        #[test]
        fn stability_ignores_prepended_episodes(
            tail in prop::collection::vec(0usize..100, 1..50),
            head in prop::collection::vec(0usize..100, 0..50),
            threshold in 1usize..100,
        ) {
            let base = stability_measure(&tail, threshold, 0).unwrap();
            let mut all = head.clone();
            all.extend(&tail);
            prop_assert_eq!(stability_measure(&all, threshold, head.len()).unwrap(), base);
        }
    }
}
