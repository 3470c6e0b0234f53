//! Reference implementations the library is checked against. None of these call into
//! the code under test beyond evaluating a network or reading a map.
#![allow(dead_code)]

use std::collections::VecDeque;

use agripath::env::{Cell, GridWorld, Obstacle, Point, Scenario};
use agripath::nn::{Activation, LayerSpec, Matrix, Mlp};
use rand::Rng;

pub const FD_STEP: f64 = 1e-5;

/// Gradients below this magnitude are compared on an absolute scale.
pub const FD_FLOOR: f64 = 1e-6;

pub fn random_activation<R: Rng>(rng: &mut R) -> Activation {
    match rng.random_range(0..3) {
        0 => Activation::Relu,
        1 => Activation::Linear,
        _ => Activation::Tanh,
    }
}

/// 1 to 3 trunk layers, widths 1..=16, random activation per layer, and a dueling head
/// with probability one half.
pub fn random_mlp<R: Rng>(rng: &mut R) -> Mlp {
    let depth = rng.random_range(1..=3);
    let mut widths = vec![rng.random_range(1..=16)];
    for _ in 0..depth {
        widths.push(rng.random_range(1..=16));
    }
    let specs: Vec<LayerSpec> = widths
        .windows(2)
        .map(|w| LayerSpec::new(w[0], w[1], random_activation(rng)))
        .collect();
    let dueling = rng.random_bool(0.5).then(|| rng.random_range(1..=8));
    Mlp::new(&specs, dueling, rng).unwrap()
}

pub fn random_matrix<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> Matrix {
    Matrix::from_vec(rows, cols, (0..rows * cols).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap()
}

/// `L = Σ w ⊙ f(x)`.
pub fn weighted_output(net: &Mlp, input: &Matrix, weights: &Matrix) -> f64 {
    let out = net.predict(input).unwrap();
    out.as_slice().iter().zip(weights.as_slice()).map(|(a, b)| a * b).sum()
}

/// Sign pattern of every ReLU pre-activation; a change means a finite difference
/// straddles a kink.
fn relu_pattern(net: &Mlp, input: &Matrix) -> Vec<bool> {
    let trace = net.forward_batch(input).unwrap();
    let mut pattern = Vec::new();
    for (layer, z) in net.layers().iter().zip(trace.pre_activations()) {
        if layer.spec().activation == Activation::Relu {
            pattern.extend(z.as_slice().iter().map(|&v| v > 0.0));
        }
    }
    pattern
}

pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(FD_FLOOR)
}

#[derive(Debug, Default, Clone, Copy)]
pub struct FdReport {
    pub max_rel_error: f64,
    pub checked: usize,
    pub skipped_kinks: usize,
}

impl FdReport {
    fn record(&mut self, analytic: f64, numeric: f64) {
        self.max_rel_error = self.max_rel_error.max(relative_error(analytic, numeric));
        self.checked += 1;
    }
}

/// Central differences over every parameter and every input coordinate.
pub fn finite_difference_check(net: &Mlp, input: &Matrix, weights: &Matrix) -> FdReport {
    let trace = net.forward_batch(input).unwrap();
    let (grads, dx) = net.backward_with_input(&trace, weights).unwrap();
    let base_pattern = relu_pattern(net, input);
    let mut report = FdReport::default();

    let shapes: Vec<usize> = net.params().iter().map(|p| p.len()).collect();
    for (t, &len) in shapes.iter().enumerate() {
        for i in 0..len {
            let mut plus = net.clone();
            plus.params_mut()[t][i] += FD_STEP;
            let mut minus = net.clone();
            minus.params_mut()[t][i] -= FD_STEP;
            if relu_pattern(&plus, input) != base_pattern || relu_pattern(&minus, input) != base_pattern {
                report.skipped_kinks += 1;
                continue;
            }
            let numeric = (weighted_output(&plus, input, weights) - weighted_output(&minus, input, weights)) / (2.0 * FD_STEP);
            report.record(grads.tensors()[t][i], numeric);
        }
    }
    for i in 0..input.as_slice().len() {
        let mut plus = input.clone();
        plus.as_mut_slice()[i] += FD_STEP;
        let mut minus = input.clone();
        minus.as_mut_slice()[i] -= FD_STEP;
        if relu_pattern(net, &plus) != base_pattern || relu_pattern(net, &minus) != base_pattern {
            report.skipped_kinks += 1;
            continue;
        }
        let numeric = (weighted_output(net, &plus, weights) - weighted_output(net, &minus, weights)) / (2.0 * FD_STEP);
        report.record(dx.as_slice()[i], numeric);
    }
    report
}

/// Cell types re-read from the map text, independent of the environment's own parser.
pub fn parse_cells(map: &str) -> (usize, usize, Vec<char>) {
    let rows: Vec<&str> = map.lines().map(str::trim).filter(|l| !l.is_empty()).collect();
    let width = rows[0].len();
    (rows.len(), width, rows.concat().chars().collect())
}

/// Left, down, right, up with wall clamping.
pub fn move_cell(height: usize, width: usize, s: usize, a: usize) -> usize {
    let (r, c) = ((s / width) as isize, (s % width) as isize);
    let (dr, dc) = [(0, -1), (1, 0), (0, 1), (-1, 0)][a];
    let nr = (r + dr).clamp(0, height as isize - 1) as usize;
    let nc = (c + dc).clamp(0, width as isize - 1) as usize;
    nr * width + nc
}

fn is_terminal(ch: char) -> bool {
    ch == 'H' || ch == 'G'
}

/// Transition list `(probability, next state)` for action `a`; the slippery model moves
/// in the intended or one of the two perpendicular directions with equal probability.
pub fn transitions(height: usize, width: usize, s: usize, a: usize, slippery: bool) -> Vec<(f64, usize)> {
    if slippery {
        [(a + 3) % 4, a, (a + 1) % 4]
            .iter()
            .map(|&d| (1.0 / 3.0, move_cell(height, width, s, d)))
            .collect()
    } else {
        vec![(1.0, move_cell(height, width, s, a))]
    }
}

/// Optimal state values for reward 1 on entering the goal, 0 otherwise, with holes and
/// the goal absorbing.
pub fn value_iteration(map: &str, slippery: bool, gamma: f64) -> Vec<f64> {
    let (h, w, cells) = parse_cells(map);
    let mut v = vec![0.0; h * w];
    for _ in 0..100_000 {
        let mut delta: f64 = 0.0;
        for s in 0..h * w {
            if is_terminal(cells[s]) {
                continue;
            }
            let best = (0..4)
                .map(|a| {
                    transitions(h, w, s, a, slippery)
                        .iter()
                        .map(|&(p, n)| {
                            let r = if cells[n] == 'G' { 1.0 } else { 0.0 };
                            let cont = if is_terminal(cells[n]) { 0.0 } else { v[n] };
                            p * (r + gamma * cont)
                        })
                        .sum::<f64>()
                })
                .fold(f64::NEG_INFINITY, f64::max);
            delta = delta.max((best - v[s]).abs());
            v[s] = best;
        }
        if delta < 1e-14 {
            break;
        }
    }
    v
}

/// Moves on the shortest hole-free route from start to goal.
pub fn bfs_shortest_path(map: &str) -> Option<usize> {
    let (h, w, cells) = parse_cells(map);
    let start = cells.iter().position(|&c| c == 'S')?;
    let mut dist = vec![usize::MAX; h * w];
    dist[start] = 0;
    let mut queue = VecDeque::from([start]);
    while let Some(s) = queue.pop_front() {
        if cells[s] == 'G' {
            return Some(dist[s]);
        }
        for a in 0..4 {
            let n = move_cell(h, w, s, a);
            if cells[n] != 'H' && dist[n] == usize::MAX {
                dist[n] = dist[s] + 1;
                queue.push_back(n);
            }
        }
    }
    None
}

/// Discounted return of a greedy path that ends on the goal: `γ^(moves-1)`.
pub fn discounted_goal_return(moves: usize, gamma: f64) -> f64 {
    gamma.powi(moves as i32 - 1)
}

pub fn grid_char(cell: Cell) -> char {
    match cell {
        Cell::Start => 'S',
        Cell::Free => 'F',
        Cell::Obstacle => 'H',
        Cell::Goal => 'G',
    }
}

pub fn grid_map_text(env: &GridWorld) -> String {
    env.cells()
        .chunks(env.width())
        .map(|row| row.iter().map(|&c| grid_char(c)).collect::<String>() + "\n")
        .collect()
}

/// Membership of an inflated obstacle, written out per shape.
pub fn inside_inflated(o: &Obstacle, p: Point, margin: f64) -> bool {
    match *o {
        Obstacle::Rect { x, y, w, h } => {
            let dx = (x - p.x).max(0.0).max(p.x - (x + w));
            let dy = (y - p.y).max(0.0).max(p.y - (y + h));
            (dx * dx + dy * dy).sqrt() <= margin
        }
        Obstacle::Circle { cx, cy, r } => ((p.x - cx).powi(2) + (p.y - cy).powi(2)).sqrt() <= r + margin,
    }
}

/// Dense sampling of the segment `a → b` against inflated obstacles.
pub fn segment_hits_sampled(scenario: &Scenario, margin: f64, a: Point, b: Point, samples: usize) -> bool {
    (0..=samples).any(|i| {
        let t = i as f64 / samples as f64;
        let p = Point::new(a.x + (b.x - a.x) * t, a.y + (b.y - a.y) * t);
        scenario.obstacles.iter().any(|o| inside_inflated(o, p, margin))
    })
}

/// BFS over a lattice of spacing `cell` whose edges are checked by dense sampling; true
/// when the goal disc is reachable from the start without touching inflated obstacles.
pub fn scenario_reachable(scenario: &Scenario, margin: f64, cell: f64) -> bool {
    let b = scenario.bounds;
    let cols = (b.width() / cell).floor() as usize + 1;
    let rows = (b.height() / cell).floor() as usize + 1;
    let at = |i: usize| Point::new(b.min.x + (i % cols) as f64 * cell, b.min.y + (i / cols) as f64 * cell);
    let nearest = |p: Point| {
        (0..cols * rows)
            .filter(|&i| !segment_hits_sampled(scenario, margin, p, at(i), 50))
            .min_by(|&i, &j| at(i).distance(p).total_cmp(&at(j).distance(p)))
    };
    let Some(start) = nearest(scenario.start) else {
        return false;
    };
    let mut seen = vec![false; cols * rows];
    seen[start] = true;
    let mut queue = VecDeque::from([start]);
    while let Some(i) = queue.pop_front() {
        if at(i).distance(scenario.goal) <= scenario.goal_radius {
            return true;
        }
        let (c, r) = ((i % cols) as isize, (i / cols) as isize);
        for (dc, dr) in [(-1, 0), (1, 0), (0, -1), (0, 1), (-1, -1), (1, 1), (-1, 1), (1, -1)] {
            let (nc, nr) = (c + dc, r + dr);
            if nc < 0 || nr < 0 || nc >= cols as isize || nr >= rows as isize {
                continue;
            }
            let j = nr as usize * cols + nc as usize;
            if !seen[j] && !segment_hits_sampled(scenario, margin, at(i), at(j), 20) {
                seen[j] = true;
                queue.push_back(j);
            }
        }
    }
    false
}

/// Pearson statistic against a uniform expectation.
pub fn chi_square_uniform(counts: &[u64]) -> f64 {
    let total: u64 = counts.iter().sum();
    let expected = total as f64 / counts.len() as f64;
    counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum()
}
