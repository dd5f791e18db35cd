//! Minimal SVG figures: sup-norm history and sweep phase diagrams.

use std::fmt::Write;

use crate::solver::Trajectory;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 60.0;
const MAX_POLYLINE_POINTS: usize = 2000;

fn header(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="30" text-anchor="middle" font-family="sans-serif" font-size="16">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn axes(out: &mut String, x_label: &str, y_label: &str, x_range: (f64, f64), y_range: (f64, f64)) {
    let (x0, x1) = (MARGIN, WIDTH - MARGIN);
    let (y0, y1) = (HEIGHT - MARGIN, MARGIN);
    let _ = writeln!(
        out,
        r#"<polyline points="{x0},{y1} {x0},{y0} {x1},{y0}" fill="none" stroke="black"/>"#
    );
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="13">{}</text>"#,
        WIDTH / 2.0,
        HEIGHT - 15.0,
        escape(x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="18" y="{}" text-anchor="middle" font-family="sans-serif" font-size="13" transform="rotate(-90 18 {})">{}</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        escape(y_label)
    );
    for (v, x, anchor) in [(x_range.0, x0, "start"), (x_range.1, x1, "end")] {
        let _ = writeln!(
            out,
            r#"<text x="{x}" y="{}" text-anchor="{anchor}" font-family="sans-serif" font-size="11">{}</text>"#,
            y0 + 16.0,
            fmt_tick(v)
        );
    }
    for (v, y) in [(y_range.0, y0), (y_range.1, y1)] {
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" text-anchor="end" font-family="sans-serif" font-size="11">{}</text>"#,
            x0 - 4.0,
            y + 4.0,
            fmt_tick(v)
        );
    }
}

fn fmt_tick(v: f64) -> String {
    if v != 0.0 && (v.abs() >= 1e4 || v.abs() < 1e-2) {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

fn scale(v: f64, range: (f64, f64), lo: f64, hi: f64) -> f64 {
    let span = range.1 - range.0;
    if span > 0.0 {
        lo + (v - range.0) / span * (hi - lo)
    } else {
        0.5 * (lo + hi)
    }
}

/// `log10 sup u` against `t`, one vertex per accepted step (thinned).
pub fn sup_plot_svg(traj: &Trajectory) -> String {
    let mut pts: Vec<(f64, f64)> = std::iter::once((0.0, traj.initial_sup()))
        .chain(traj.steps.iter().map(|s| (s.t, s.sup)))
        .filter(|(_, s)| *s > 0.0 && s.is_finite())
        .map(|(t, s)| (t, s.log10()))
        .collect();
    if pts.len() > MAX_POLYLINE_POINTS {
        let stride = pts.len().div_ceil(MAX_POLYLINE_POINTS);
        let last = *pts.last().unwrap();
        pts = pts.into_iter().step_by(stride).collect();
        pts.push(last);
    }
    let mut out = String::new();
    header(&mut out, "sup-norm history");
    let t_range = (0.0, pts.last().map_or(1.0, |p| p.0).max(1e-12));
    let (lo, hi) = pts
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.1), b.max(p.1)));
    let y_range = if pts.is_empty() { (0.0, 1.0) } else { (lo, hi) };
    axes(&mut out, "t", "log10 sup u", t_range, y_range);
    let coords: Vec<String> = pts
        .iter()
        .map(|(t, s)| {
            format!(
                "{:.2},{:.2}",
                scale(*t, t_range, MARGIN, WIDTH - MARGIN),
                scale(*s, y_range, HEIGHT - MARGIN, MARGIN)
            )
        })
        .collect();
    let _ = writeln!(
        out,
        r#"<polyline points="{}" fill="none" stroke="steelblue" stroke-width="1.5"/>"#,
        coords.join(" ")
    );
    out.push_str("</svg>\n");
    out
}

/// One cell of a phase diagram.
pub struct PhaseCell {
    pub x: f64,
    pub y: f64,
    pub label: &'static str,
}

fn colour(label: &str) -> &'static str {
    match label {
        "global" => "#4daf4a",
        "blowup" => "#e41a1c",
        _ => "#999999",
    }
}

/// Heat map of verdicts on the grid `xs × ys`, with the analytic threshold
/// drawn through `threshold` (points in parameter coordinates).
pub fn phase_svg(
    x_label: &str,
    y_label: &str,
    xs: &[f64],
    ys: &[f64],
    cells: &[PhaseCell],
    threshold: &[(f64, f64)],
) -> String {
    let mut out = String::new();
    header(&mut out, "phase diagram");
    let half = |v: &[f64]| {
        if v.len() > 1 {
            0.5 * (v[1] - v[0]).abs()
        } else {
            0.5
        }
    };
    let (hx, hy) = (half(xs), half(ys));
    let min = |v: &[f64]| v.iter().copied().fold(f64::INFINITY, f64::min);
    let max = |v: &[f64]| v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let x_range = (min(xs) - hx, max(xs) + hx);
    let y_range = (min(ys) - hy, max(ys) + hy);
    axes(&mut out, x_label, y_label, x_range, y_range);
    for c in cells {
        let left = scale(c.x - hx, x_range, MARGIN, WIDTH - MARGIN);
        let right = scale(c.x + hx, x_range, MARGIN, WIDTH - MARGIN);
        let top = scale(c.y + hy, y_range, HEIGHT - MARGIN, MARGIN);
        let bottom = scale(c.y - hy, y_range, HEIGHT - MARGIN, MARGIN);
        let _ = writeln!(
            out,
            r#"<rect x="{left:.2}" y="{top:.2}" width="{:.2}" height="{:.2}" fill="{}" stroke="white" stroke-width="0.5"><title>{} = {}, {} = {}: {}</title></rect>"#,
            right - left,
            bottom - top,
            colour(c.label),
            escape(x_label),
            c.x,
            escape(y_label),
            c.y,
            c.label
        );
    }
    if threshold.len() >= 2 {
        let coords: Vec<String> = threshold
            .iter()
            .map(|(x, y)| {
                format!(
                    "{:.2},{:.2}",
                    scale(*x, x_range, MARGIN, WIDTH - MARGIN),
                    scale(*y, y_range, HEIGHT - MARGIN, MARGIN)
                )
            })
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline points="{}" fill="none" stroke="black" stroke-width="2" stroke-dasharray="6 4"/>"#,
            coords.join(" ")
        );
    }
    out.push_str("</svg>\n");
    out
}
