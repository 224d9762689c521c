//! Minimal SVG quick-looks. CSV files are the real output.

use std::fmt::Write;

const W: f64 = 640.0;
const H: f64 = 400.0;
const MARGIN: f64 = 50.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

fn extent(vals: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = vals
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if hi == lo {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

fn header(out: &mut String, title: &str) {
    let _ = write!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = write!(out, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = write!(out, r#"<text x="{}" y="20" text-anchor="middle">{}</text>"#, W / 2.0, escape(title));
}

fn axes(out: &mut String, (x0, x1): (f64, f64), (y0, y1): (f64, f64), xlabel: &str, ylabel: &str) {
    let _ = write!(
        out,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        W - 2.0 * MARGIN,
        H - 2.0 * MARGIN
    );
    let _ = write!(out, r#"<text x="{MARGIN}" y="{}">{x0:.3}</text>"#, H - MARGIN + 15.0);
    let _ = write!(
        out,
        r#"<text x="{}" y="{}" text-anchor="end">{x1:.3}</text>"#,
        W - MARGIN,
        H - MARGIN + 15.0
    );
    let _ = write!(out, r#"<text x="5" y="{}">{y0:.3}</text>"#, H - MARGIN);
    let _ = write!(out, r#"<text x="5" y="{}">{y1:.3}</text>"#, MARGIN + 10.0);
    let _ = write!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        W / 2.0,
        H - 10.0,
        escape(xlabel)
    );
    let _ = write!(
        out,
        r#"<text x="15" y="{}" transform="rotate(-90 15 {})" text-anchor="middle">{}</text>"#,
        H / 2.0,
        H / 2.0,
        escape(ylabel)
    );
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Named polylines; `None` values break a line.
pub fn line_plot(title: &str, xlabel: &str, ylabel: &str, series: &[(&str, Vec<(f64, Option<f64>)>)]) -> String {
    let xr = extent(series.iter().flat_map(|s| s.1.iter().map(|p| p.0)));
    let yr = extent(series.iter().flat_map(|s| s.1.iter().filter_map(|p| p.1)));
    let sx = |x: f64| MARGIN + (x - xr.0) / (xr.1 - xr.0) * (W - 2.0 * MARGIN);
    let sy = |y: f64| H - MARGIN - (y - yr.0) / (yr.1 - yr.0) * (H - 2.0 * MARGIN);
    let mut out = String::new();
    header(&mut out, title);
    axes(&mut out, xr, yr, xlabel, ylabel);
    for (k, (name, pts)) in series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        for run in pts.split(|p| p.1.is_none()) {
            if run.is_empty() {
                continue;
            }
            let path: Vec<String> = run
                .iter()
                .map(|p| format!("{:.2},{:.2}", sx(p.0), sy(p.1.unwrap())))
                .collect();
            let _ = write!(
                out,
                r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
                path.join(" ")
            );
        }
        let _ = write!(
            out,
            r#"<text x="{}" y="{}" fill="{color}">{}</text>"#,
            W - MARGIN - 100.0,
            MARGIN + 15.0 + 15.0 * k as f64,
            escape(name)
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Cell map of `z[row][col]` with blue below and red above the midpoint of the range.
pub fn heatmap(title: &str, xlabel: &str, ylabel: &str, xs: &[f64], ys: &[f64], z: &[Vec<Option<f64>>]) -> String {
    let zr = extent(z.iter().flatten().flatten().copied());
    let xr = extent(xs.iter().copied());
    let yr = extent(ys.iter().copied());
    let cw = (W - 2.0 * MARGIN) / xs.len().max(1) as f64;
    let ch = (H - 2.0 * MARGIN) / ys.len().max(1) as f64;
    let mut out = String::new();
    header(&mut out, title);
    for (j, row) in z.iter().enumerate() {
        for (i, v) in row.iter().enumerate() {
            let Some(v) = v else { continue };
            let t = (v - zr.0) / (zr.1 - zr.0);
            let (r, b) = if t >= 0.5 {
                (255.0, 255.0 * (2.0 - 2.0 * t))
            } else {
                (255.0 * 2.0 * t, 255.0)
            };
            let g = r.min(b);
            let _ = write!(
                out,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="rgb({:.0},{:.0},{:.0})"/>"#,
                MARGIN + i as f64 * cw,
                H - MARGIN - (j + 1) as f64 * ch,
                cw + 0.5,
                ch + 0.5,
                r,
                g,
                b
            );
        }
    }
    axes(&mut out, xr, yr, xlabel, ylabel);
    out.push_str("</svg>\n");
    out
}
