//! Minimal hand-written SVG line plots. Output is a pure function of the input
//! points, so files are byte-stable across runs.

use std::fmt::Write;

const WIDTH: f64 = 720.0;
const PANEL_HEIGHT: f64 = 260.0;
const MARGIN_LEFT: f64 = 90.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 30.0;
const MARGIN_BOTTOM: f64 = 40.0;
/// Polylines are thinned to at most this many vertices.
const MAX_POINTS: usize = 2000;

pub struct Series<'a> {
    pub title: &'a str,
    pub y_label: &'a str,
    pub points: Vec<(f64, f64)>,
}

fn thin(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    if points.len() <= MAX_POINTS {
        return points.to_vec();
    }
    let stride = points.len().div_ceil(MAX_POINTS);
    let mut out: Vec<_> = points.iter().copied().step_by(stride).collect();
    let last = *points.last().unwrap();
    if out.last() != Some(&last) {
        out.push(last);
    }
    out
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if hi - lo <= f64::EPSILON * hi.abs().max(1.0) {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

fn panel(out: &mut String, series: &Series<'_>, top: f64) {
    let left = MARGIN_LEFT;
    let right = WIDTH - MARGIN_RIGHT;
    let y0 = top + MARGIN_TOP;
    let y1 = top + PANEL_HEIGHT - MARGIN_BOTTOM;
    let points = thin(&series.points);
    let (xmin, xmax) = range(points.iter().map(|p| p.0));
    let (ymin, ymax) = range(points.iter().map(|p| p.1));
    let sx = |x: f64| left + (x - xmin) / (xmax - xmin) * (right - left);
    let sy = |y: f64| y1 - (y - ymin) / (ymax - ymin) * (y1 - y0);

    writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" font-size="14" text-anchor="middle">{}</text>"#,
        (left + right) / 2.0,
        top + 18.0,
        series.title
    )
    .unwrap();
    writeln!(
        out,
        r#"<polyline fill="none" stroke="black" points="{left:.2},{y0:.2} {left:.2},{y1:.2} {right:.2},{y1:.2}"/>"#
    )
    .unwrap();
    for (value, y) in [(ymin, y1), (ymax, y0)] {
        writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" font-size="11" text-anchor="end">{value:.4e}</text>"#,
            left - 6.0,
            y + 4.0
        )
        .unwrap();
    }
    for (value, x) in [(xmin, left), (xmax, right)] {
        writeln!(
            out,
            r#"<text x="{x:.2}" y="{:.2}" font-size="11" text-anchor="middle">{value}</text>"#,
            y1 + 16.0
        )
        .unwrap();
    }
    writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" font-size="12" text-anchor="middle">n</text>"#,
        (left + right) / 2.0,
        y1 + 32.0
    )
    .unwrap();
    writeln!(
        out,
        r#"<text x="16" y="{:.2}" font-size="12" text-anchor="middle" transform="rotate(-90 16 {:.2})">{}</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        series.y_label
    )
    .unwrap();
    let coords: Vec<String> = points
        .iter()
        .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
        .collect();
    writeln!(
        out,
        r#"<polyline fill="none" stroke="steelblue" stroke-width="1.5" points="{}"/>"#,
        coords.join(" ")
    )
    .unwrap();
}

/// Stacks one panel per series vertically.
pub fn line_plots(series: &[Series<'_>]) -> String {
    let height = PANEL_HEIGHT * series.len() as f64;
    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" viewBox="0 0 {WIDTH} {height}">"#
    )
    .unwrap();
    writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    for (i, s) in series.iter().enumerate() {
        panel(&mut out, s, i as f64 * PANEL_HEIGHT);
    }
    out.push_str("</svg>\n");
    out
}
