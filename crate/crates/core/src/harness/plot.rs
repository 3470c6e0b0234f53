//! Minimal SVG output: line charts and path overlays.

use std::fmt::Write as _;

use crate::env::{Cell, GridWorld, Obstacle, Point, Scenario};
use crate::metrics::{ema_smooth, trailing_mean, RunLog, PLOT_SMOOTHING, TRAILING_WINDOW};
use crate::Result;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 56.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

impl Series {
    pub fn new(label: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Self {
            label: label.into(),
            points,
        }
    }

    /// `values[i]` plotted against `i + 1`.
    pub fn indexed(label: impl Into<String>, values: &[f64]) -> Self {
        Self::new(label, values.iter().enumerate().map(|(i, &v)| ((i + 1) as f64, v)).collect())
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn nice_ticks(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let span = (hi - lo).max(1e-12);
    let raw = span / n as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|&s| s >= raw).unwrap_or(10.0 * mag);
    let mut t = (lo / step).ceil() * step;
    let mut out = Vec::new();
    while t <= hi + step * 1e-9 {
        out.push(if t.abs() < step * 1e-9 { 0.0 } else { t });
        t += step;
    }
    out
}

fn fmt_tick(v: f64) -> String {
    if v.abs() >= 1e4 || (v != 0.0 && v.abs() < 1e-2) {
        format!("{v:.1e}")
    } else {
        let s = format!("{v:.2}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

/// Line chart with axes, ticks, labels and a legend.
pub fn line_chart(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let pts = series.iter().flat_map(|s| s.points.iter()).filter(|(x, y)| x.is_finite() && y.is_finite());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if x1 - x0 < 1e-12 {
        x1 = x0 + 1.0;
    }
    if y1 - y0 < 1e-12 {
        y0 -= 0.5;
        y1 += 0.5;
    }
    let (pw, ph) = (WIDTH - 2.0 * MARGIN, HEIGHT - 2.0 * MARGIN);
    let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * ph;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(svg, r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#, WIDTH / 2.0, escape(title));
    let _ = writeln!(
        svg,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    for t in nice_ticks(x0, x1, 6) {
        let x = sx(t);
        let _ = writeln!(
            svg,
            r#"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            HEIGHT - MARGIN,
            HEIGHT - MARGIN + 5.0,
            HEIGHT - MARGIN + 18.0,
            fmt_tick(t)
        );
    }
    for t in nice_ticks(y0, y1, 5) {
        let y = sy(t);
        let _ = writeln!(
            svg,
            r##"<line x1="{:.2}" y1="{y:.2}" x2="{MARGIN}" y2="{y:.2}" stroke="black"/><line x1="{MARGIN}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#ddd"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"##,
            MARGIN - 5.0,
            WIDTH - MARGIN,
            MARGIN - 8.0,
            y + 4.0,
            fmt_tick(t)
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        HEIGHT - 12.0,
        escape(x_label)
    );
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        escape(y_label)
    );
    for (i, s) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let coords: Vec<String> = s
            .points
            .iter()
            .filter(|(x, y)| x.is_finite() && y.is_finite())
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            coords.join(" ")
        );
        let ly = MARGIN + 16.0 + 16.0 * i as f64;
        let _ = writeln!(
            svg,
            r#"<line x1="{:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/><text x="{:.2}" y="{:.2}">{}</text>"#,
            MARGIN + 10.0,
            MARGIN + 30.0,
            MARGIN + 36.0,
            ly + 4.0,
            escape(&s.label)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

/// Goals in the trailing 100 episodes (0–100), raw and smoothed.
pub fn trailing_success_chart(log: &RunLog, title: &str) -> Result<String> {
    let trailing: Vec<f64> = trailing_mean(&log.successes(), TRAILING_WINDOW)?
        .into_iter()
        .map(|v| v * TRAILING_WINDOW as f64)
        .collect();
    Ok(line_chart(
        title,
        "episode",
        "goals in trailing 100 episodes",
        &[Series::indexed("trailing 100", &trailing)],
    ))
}

/// Trailing-100 mean reward, raw episode rewards smoothed with factor 0.99.
pub fn reward_chart(log: &RunLog, title: &str) -> Result<String> {
    let rewards = log.rewards();
    Ok(line_chart(
        title,
        "episode",
        "reward",
        &[
            Series::indexed("trailing 100 mean", &trailing_mean(&rewards, TRAILING_WINDOW)?),
            Series::indexed("smoothed (0.99)", &ema_smooth(&rewards, PLOT_SMOOTHING)?),
        ],
    ))
}

pub fn steps_chart(log: &RunLog, title: &str) -> Result<String> {
    let steps: Vec<f64> = log.steps().into_iter().map(|s| s as f64).collect();
    Ok(line_chart(
        title,
        "episode",
        "steps per episode",
        &[
            Series::indexed("raw", &steps),
            Series::indexed("smoothed (0.99)", &ema_smooth(&steps, PLOT_SMOOTHING)?),
        ],
    ))
}

/// Grid map with holes, start, goal and a state path drawn over it.
pub fn grid_path_svg(env: &GridWorld, path: &[usize]) -> String {
    let cell = 40.0;
    let (w, h) = (env.width() as f64 * cell, env.height() as f64 * cell);
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="14">"#
    );
    for (i, c) in env.cells().iter().enumerate() {
        let (r, col) = env.coords(i);
        let fill = match c {
            Cell::Start => "#cfe8ff",
            Cell::Free => "#f4f1e1",
            Cell::Obstacle => "#5a4632",
            Cell::Goal => "#9ad17b",
        };
        let _ = writeln!(
            svg,
            r##"<rect x="{}" y="{}" width="{cell}" height="{cell}" fill="{fill}" stroke="#999"/>"##,
            col as f64 * cell,
            r as f64 * cell
        );
    }
    let centre = |s: usize| {
        let (r, c) = env.coords(s);
        ((c as f64 + 0.5) * cell, (r as f64 + 0.5) * cell)
    };
    let coords: Vec<String> = path
        .iter()
        .map(|&s| {
            let (x, y) = centre(s);
            format!("{x:.1},{y:.1}")
        })
        .collect();
    let _ = writeln!(
        svg,
        r##"<polyline fill="none" stroke="#d62728" stroke-width="3" points="{}"/>"##,
        coords.join(" ")
    );
    for (s, label) in [(env.start(), "S"), (env.goal(), "G")] {
        let (x, y) = centre(s);
        let _ = writeln!(svg, r#"<text x="{x:.1}" y="{:.1}" text-anchor="middle">{label}</text>"#, y + 5.0);
    }
    svg.push_str("</svg>\n");
    svg
}

/// Continuous field with obstacles, goal area and a point path.
pub fn field_path_svg(scenario: &Scenario, path: &[Point]) -> String {
    let scale = 25.0;
    let b = scenario.bounds;
    let (w, h) = (b.width() * scale, b.height() * scale);
    // Flip y so the field's origin is at the bottom left.
    let tx = |x: f64| (x - b.min.x) * scale;
    let ty = |y: f64| h - (y - b.min.y) * scale;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    let _ = writeln!(svg, r##"<rect width="{w}" height="{h}" fill="#f4f1e1" stroke="black"/>"##);
    for o in &scenario.obstacles {
        match *o {
            Obstacle::Rect { x, y, w: rw, h: rh } => {
                let _ = writeln!(
                    svg,
                    r##"<rect x="{:.1}" y="{:.1}" width="{:.1}" height="{:.1}" fill="#5a4632"/>"##,
                    tx(x),
                    ty(y + rh),
                    rw * scale,
                    rh * scale
                );
            }
            Obstacle::Circle { cx, cy, r } => {
                let _ = writeln!(
                    svg,
                    r##"<circle cx="{:.1}" cy="{:.1}" r="{:.1}" fill="#5a4632"/>"##,
                    tx(cx),
                    ty(cy),
                    r * scale
                );
            }
        }
    }
    let _ = writeln!(
        svg,
        r##"<circle cx="{:.1}" cy="{:.1}" r="{:.1}" fill="#9ad17b" stroke="#2ca02c"/>"##,
        tx(scenario.goal.x),
        ty(scenario.goal.y),
        scenario.goal_radius * scale
    );
    let _ = writeln!(
        svg,
        r##"<circle cx="{:.1}" cy="{:.1}" r="5" fill="#1f77b4"/>"##,
        tx(scenario.start.x),
        ty(scenario.start.y)
    );
    let coords: Vec<String> = path.iter().map(|p| format!("{:.1},{:.1}", tx(p.x), ty(p.y))).collect();
    let _ = writeln!(
        svg,
        r##"<polyline fill="none" stroke="#d62728" stroke-width="2" points="{}"/>"##,
        coords.join(" ")
    );
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chart_has_one_polyline_per_series() {
        let svg = line_chart(
            "t <1>",
            "x",
            "y",
            &[Series::indexed("a", &[1.0, 2.0, 3.0]), Series::indexed("b", &[0.0, 0.0, 0.0])],
        );
        assert!(svg.starts_with("<svg"));
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains("t &lt;1&gt;"));
        assert!(svg.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn empty_and_flat_series_still_render() {
        let svg = line_chart("empty", "x", "y", &[Series::indexed("none", &[])]);
        assert!(svg.contains("<polyline"));
        let flat = line_chart("flat", "x", "y", &[Series::indexed("c", &[2.0; 10])]);
        assert!(!flat.contains("NaN"));
    }

    #[test]
    fn ticks_cover_range() {
        let t = nice_ticks(0.0, 100.0, 5);
        assert_eq!(t.first(), Some(&0.0));
        assert_eq!(t.last(), Some(&100.0));
        assert_eq!(fmt_tick(2.50), "2.5");
        assert_eq!(fmt_tick(20000.0), "2.0e4");
    }

    #[test]
    fn grid_overlay_draws_every_cell() {
        let env = GridWorld::small_4x4(false);
        let svg = grid_path_svg(&env, &[0, 4, 8]);
        assert_eq!(svg.matches("<rect").count(), 16);
        assert!(svg.contains("points=\"20.0,20.0 20.0,60.0 20.0,100.0\""));
    }

    #[test]
    fn field_overlay_draws_obstacles() {
        let s = Scenario::builtin(3).unwrap();
        let svg = field_path_svg(&s, &[s.start, s.goal]);
        assert_eq!(svg.matches("<circle").count() + svg.matches("<rect").count() - 1, s.obstacles.len() + 2);
    }
}
