//! Minimal SVG emitters: line plots and heatmaps. No timestamps, so output is
//! byte-stable for identical input.

use std::fmt::Write;

const W: f64 = 720.0;
const H: f64 = 440.0;
const ML: f64 = 70.0;
const MR: f64 = 20.0;
const MT: f64 = 30.0;
const MB: f64 = 50.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

pub struct Series<'a> {
    pub name: &'a str,
    pub points: Vec<(f64, f64)>,
}

fn extent(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.filter(|v| v.is_finite()).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo <= f64::EPSILON * hi.abs().max(1.0) {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

fn frame(out: &mut String, title: &str, xlabel: &str, ylabel: &str, x: (f64, f64), y: (f64, f64)) {
    let _ = writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(out, r#"<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="{}" y="18" text-anchor="middle">{}</text>"#, W / 2.0, escape(title));
    let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, ML + (W - ML - MR) / 2.0, H - 10.0, escape(xlabel));
    let _ = writeln!(
        out,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
        MT + (H - MT - MB) / 2.0,
        MT + (H - MT - MB) / 2.0,
        escape(ylabel)
    );
    let _ = writeln!(out, r#"<rect x="{ML}" y="{MT}" width="{}" height="{}" fill="none" stroke="black"/>"#, W - ML - MR, H - MT - MB);
    for k in 0..=4 {
        let f = k as f64 / 4.0;
        let px = ML + f * (W - ML - MR);
        let py = H - MB - f * (H - MT - MB);
        let _ = writeln!(out, r#"<text x="{px}" y="{}" text-anchor="middle">{}</text>"#, H - MB + 16.0, tick(x.0 + f * (x.1 - x.0)));
        let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, ML - 4.0, py + 4.0, tick(y.0 + f * (y.1 - y.0)));
    }
}

fn tick(v: f64) -> String {
    if v != 0.0 && (v.abs() < 1e-2 || v.abs() >= 1e4) {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn line_plot(title: &str, xlabel: &str, ylabel: &str, series: &[Series]) -> String {
    let x = extent(series.iter().flat_map(|s| s.points.iter().map(|p| p.0)));
    let y = extent(series.iter().flat_map(|s| s.points.iter().map(|p| p.1)));
    let mut out = String::new();
    frame(&mut out, title, xlabel, ylabel, x, y);
    let px = |v: f64| ML + (v - x.0) / (x.1 - x.0) * (W - ML - MR);
    let py = |v: f64| H - MB - (v - y.0) / (y.1 - y.0) * (H - MT - MB);
    for (k, s) in series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let pts: Vec<String> = s
            .points
            .iter()
            .filter(|p| p.0.is_finite() && p.1.is_finite())
            .map(|&(a, b)| format!("{:.2},{:.2}", px(a), py(b)))
            .collect();
        let _ = writeln!(out, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, pts.join(" "));
        let _ = writeln!(out, r#"<text x="{}" y="{}" fill="{color}">{}</text>"#, ML + 8.0, MT + 16.0 + 14.0 * k as f64, escape(s.name));
    }
    out.push_str("</svg>\n");
    out
}

/// Heatmap of `values[row][col]` in [0, 1] over a regular grid. Columns are
/// max-pooled down to at most `max_cols` so file size stays bounded. `gamma`
/// only changes the colour mapping.
#[allow(clippy::too_many_arguments)]
pub fn heatmap(
    title: &str,
    xlabel: &str,
    ylabel: &str,
    x: (f64, f64),
    y: (f64, f64),
    values: &[Vec<f64>],
    max_cols: usize,
    gamma: f64,
) -> String {
    let mut out = String::new();
    frame(&mut out, title, xlabel, ylabel, x, y);
    let rows = values.len();
    let cols = values.first().map_or(0, Vec::len);
    if rows == 0 || cols == 0 {
        out.push_str("</svg>\n");
        return out;
    }
    let pool = cols.div_ceil(max_cols.max(1));
    let pcols = cols.div_ceil(pool);
    let cw = (W - ML - MR) / pcols as f64;
    let rh = (H - MT - MB) / rows as f64;
    for (r, row) in values.iter().enumerate() {
        for c in 0..pcols {
            let v = row[c * pool..((c + 1) * pool).min(cols)].iter().copied().fold(0.0, f64::max);
            if v <= 0.0 {
                continue;
            }
            let shade = 255.0 * (1.0 - v.clamp(0.0, 1.0).powf(gamma));
            let g = shade.round() as u8;
            let _ = writeln!(
                out,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="rgb({g},{g},255)"/>"#,
                ML + c as f64 * cw,
                H - MB - (r + 1) as f64 * rh,
                cw + 0.05,
                rh + 0.05
            );
        }
    }
    out.push_str("</svg>\n");
    out
}
