//! Minimal SVG emission: line plots, orthographic sphere views and the
//! Poincaré disk.

use std::fmt::Write;

const W: f64 = 640.0;
const H: f64 = 480.0;
const MARGIN: f64 = 56.0;
pub const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Style {
    Line,
    Dots,
    /// Consecutive pairs of points are separate segments.
    Segments,
}

pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub color: &'static str,
    pub style: Style,
}

impl Series {
    pub fn line(label: &str, points: Vec<(f64, f64)>, color: &'static str) -> Self {
        Self { label: label.to_string(), points, color, style: Style::Line }
    }

    pub fn dots(label: &str, points: Vec<(f64, f64)>, color: &'static str) -> Self {
        Self { label: label.to_string(), points, color, style: Style::Dots }
    }

    pub fn segments(label: &str, points: Vec<(f64, f64)>, color: &'static str) -> Self {
        Self { label: label.to_string(), points, color, style: Style::Segments }
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn header(title: &str, digest: &str) -> String {
    let mut s = String::new();
    writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#).unwrap();
    writeln!(s, "<metadata>config-sha256: {digest}</metadata>").unwrap();
    writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#).unwrap();
    writeln!(s, r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#, W / 2.0, escape(title)).unwrap();
    s
}

fn footer(mut s: String, digest: &str) -> String {
    writeln!(s, r##"<text x="{}" y="{}" text-anchor="end" font-size="9" fill="#888">config-sha256 {digest}</text>"##, W - 6.0, H - 6.0).unwrap();
    s.push_str("</svg>\n");
    s
}

fn polyline(s: &mut String, pts: &[(f64, f64)], color: &str, extra: &str) {
    if pts.len() < 2 {
        return;
    }
    let coords: Vec<String> = pts.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
    writeln!(s, r#"<polyline fill="none" stroke="{color}" stroke-width="1.2" {extra} points="{}"/>"#, coords.join(" ")).unwrap();
}

fn legend(s: &mut String, series: &[Series]) {
    for (i, se) in series.iter().filter(|s| !s.label.is_empty()).enumerate() {
        let y = 40.0 + 16.0 * i as f64;
        writeln!(s, r#"<rect x="{}" y="{}" width="10" height="10" fill="{}"/>"#, W - 170.0, y - 9.0, se.color).unwrap();
        writeln!(s, r#"<text x="{}" y="{y}">{}</text>"#, W - 155.0, escape(&se.label)).unwrap();
    }
}

fn range(vals: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = vals.filter(|v| v.is_finite()).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        return (-1.0, 1.0);
    }
    if hi - lo < 1e-300 {
        let pad = lo.abs().max(1.0) * 1e-3;
        return (lo - pad, hi + pad);
    }
    let pad = 0.04 * (hi - lo);
    (lo - pad, hi + pad)
}

/// Cartesian plot with automatic ranges.
pub fn line_plot(title: &str, x_label: &str, y_label: &str, series: &[Series], digest: &str) -> String {
    let (x0, x1) = range(series.iter().flat_map(|s| s.points.iter().map(|p| p.0)));
    let (y0, y1) = range(series.iter().flat_map(|s| s.points.iter().map(|p| p.1)));
    let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (W - 2.0 * MARGIN);
    let sy = |y: f64| H - MARGIN - (y - y0) / (y1 - y0) * (H - 2.0 * MARGIN);
    let mut s = header(title, digest);
    writeln!(s, r#"<rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}" fill="none" stroke="black"/>"#, W - 2.0 * MARGIN, H - 2.0 * MARGIN).unwrap();
    for (v, x) in [(x0, MARGIN), (x1, W - MARGIN)] {
        writeln!(s, r#"<text x="{x}" y="{}" text-anchor="middle">{v:.4}</text>"#, H - MARGIN + 16.0).unwrap();
    }
    for (v, y) in [(y0, H - MARGIN), (y1, MARGIN)] {
        writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{v:.4}</text>"#, MARGIN - 4.0, y + 4.0).unwrap();
    }
    writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, W / 2.0, H - 14.0, escape(x_label)).unwrap();
    writeln!(s, r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#, H / 2.0, H / 2.0, escape(y_label)).unwrap();
    for se in series {
        match se.style {
            Style::Dots => {
                for &(x, y) in se.points.iter().filter(|p| p.0.is_finite() && p.1.is_finite()) {
                    writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{}"/>"#, sx(x), sy(y), se.color).unwrap();
                }
            }
            Style::Segments => {
                for pair in se.points.chunks_exact(2) {
                    polyline(&mut s, &[(sx(pair[0].0), sy(pair[0].1)), (sx(pair[1].0), sy(pair[1].1))], se.color, "");
                }
            }
            Style::Line => {
                // Break the line at non-finite samples.
                for run in se.points.split(|p| !(p.0.is_finite() && p.1.is_finite())) {
                    let pts: Vec<(f64, f64)> = run.iter().map(|&(x, y)| (sx(x), sy(y))).collect();
                    polyline(&mut s, &pts, se.color, "");
                }
            }
        }
    }
    legend(&mut s, series);
    footer(s, digest)
}

/// Curves on a sphere of radius `rho`, viewed orthographically along `view`.
/// Parts on the far hemisphere are drawn dimmed and dashed.
pub fn sphere_plot(title: &str, rho: f64, curves: &[Series3], view: [f64; 3], digest: &str) -> String {
    let n = norm(view);
    let d = [view[0] / n, view[1] / n, view[2] / n];
    // Screen basis: e1 horizontal, e2 up, both orthogonal to the view.
    let up = if d[2].abs() < 0.9 { [0.0, 0.0, 1.0] } else { [0.0, 1.0, 0.0] };
    let e1 = normalize(cross(up, d));
    let e2 = cross(d, e1);
    let radius = 0.5 * (H - 2.0 * MARGIN);
    let (cx, cy) = (W / 2.0, H / 2.0 + 8.0);
    let to_screen = |q: [f64; 3]| (cx + radius * dot(q, e1) / rho, cy - radius * dot(q, e2) / rho);
    let mut s = header(title, digest);
    writeln!(s, r##"<circle cx="{cx}" cy="{cy}" r="{radius}" fill="#f7f7f7" stroke="#444"/>"##).unwrap();
    for c in curves {
        let mut run: Vec<(f64, f64)> = Vec::new();
        let mut front = None;
        for &q in &c.points {
            let vis = dot(q, d) >= 0.0;
            if front != Some(vis) && !run.is_empty() {
                // Keep the polyline continuous across the limb.
                let last = *run.last().unwrap();
                draw_run(&mut s, &run, c.color, front.unwrap());
                run = vec![last];
            }
            front = Some(vis);
            run.push(to_screen(q));
        }
        if let Some(f) = front {
            draw_run(&mut s, &run, c.color, f);
        }
    }
    let legend_series: Vec<Series> = curves.iter().map(|c| Series::line(&c.label, vec![], c.color)).collect();
    legend(&mut s, &legend_series);
    footer(s, digest)
}

fn draw_run(s: &mut String, pts: &[(f64, f64)], color: &str, front: bool) {
    if front {
        polyline(s, pts, color, "");
    } else {
        polyline(s, pts, color, r#"stroke-opacity="0.25" stroke-dasharray="3,3""#);
    }
}

/// Points on the hyperbolic plane in polar form `(φ, θ)`, drawn in the
/// Poincaré disk at radius `tanh(φ/2)`.
pub fn disk_plot(title: &str, curves: &[Series], digest: &str) -> String {
    let radius = 0.5 * (H - 2.0 * MARGIN);
    let (cx, cy) = (W / 2.0, H / 2.0 + 8.0);
    let mut s = header(title, digest);
    writeln!(s, r##"<circle cx="{cx}" cy="{cy}" r="{radius}" fill="#f7f7f7" stroke="#444"/>"##).unwrap();
    for c in curves {
        let pts: Vec<(f64, f64)> = c
            .points
            .iter()
            .map(|&(phi, theta)| {
                let r = radius * (0.5 * phi).tanh();
                (cx + r * theta.cos(), cy - r * theta.sin())
            })
            .collect();
        polyline(&mut s, &pts, c.color, "");
    }
    legend(&mut s, curves);
    footer(s, digest)
}

pub struct Series3 {
    pub label: String,
    pub points: Vec<[f64; 3]>,
    pub color: &'static str,
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn norm(a: [f64; 3]) -> f64 {
    dot(a, a).sqrt()
}

fn normalize(a: [f64; 3]) -> [f64; 3] {
    let n = norm(a);
    [a[0] / n, a[1] / n, a[2] / n]
}
