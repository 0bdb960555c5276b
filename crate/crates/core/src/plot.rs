//! Deterministic log-log SVG plots of sweep and advantage rows.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::Result;
use crate::harness::CsvRow;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 60.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

struct Axes {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Axes {
    fn px(&self, x: f64) -> f64 {
        MARGIN + (x.log10() - self.x0) / (self.x1 - self.x0) * (WIDTH - 2.0 * MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - MARGIN - (y.log10() - self.y0) / (self.y1 - self.y0) * (HEIGHT - 2.0 * MARGIN)
    }
}

/// Renders rate against `q + 1` on log-log axes, one series per `N`.
/// Rows with a non-positive rate have no log coordinate and are skipped.
/// With an envelope constant `c` and at least two rows, the line
/// `c·(q+1)³/N` is drawn dashed for each `N`. Returns `None` when there is
/// nothing to plot.
pub fn render_svg(rows: &[CsvRow], envelope: Option<f64>, title: &str) -> Option<String> {
    let pts: Vec<&CsvRow> = rows.iter().filter(|r| r.success_rate > 0.0).collect();
    if pts.is_empty() {
        return None;
    }
    let xs = pts.iter().map(|r| ((r.q + 1) as f64).log10());
    let ys = pts.iter().map(|r| r.success_rate.log10());
    let (xmin, xmax) = xs.fold((f64::MAX, f64::MIN), |(a, b), v| (a.min(v), b.max(v)));
    let (ymin, ymax) = ys.fold((f64::MAX, f64::MIN), |(a, b), v| (a.min(v), b.max(v)));
    let axes = Axes { x0: xmin.floor(), x1: xmax.ceil().max(xmin.floor() + 1.0), y0: ymin.floor(), y1: ymax.ceil().max(ymin.floor() + 1.0) };

    let mut series: BTreeMap<usize, Vec<&CsvRow>> = BTreeMap::new();
    for r in &pts {
        series.entry(r.n).or_default().push(r);
    }

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#);
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{:.1}" y="24" text-anchor="middle" font-family="sans-serif" font-size="15">{}</text>"#, WIDTH / 2.0, escape(title));
    let (left, right, top, bottom) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
    let _ = writeln!(s, r#"<path d="M{left:.1} {top:.1}V{bottom:.1}H{right:.1}" stroke="black" fill="none"/>"#);
    for d in axes.x0 as i32..=axes.x1 as i32 {
        let x = axes.px(10f64.powi(d));
        let _ = writeln!(s, r#"<text x="{x:.1}" y="{:.1}" text-anchor="middle" font-family="sans-serif" font-size="11">1e{d}</text>"#, bottom + 16.0);
    }
    for d in axes.y0 as i32..=axes.y1 as i32 {
        let y = axes.py(10f64.powi(d));
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="end" font-family="sans-serif" font-size="11">1e{d}</text>"#, left - 6.0, y + 4.0);
    }
    let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-family="sans-serif" font-size="12">q + 1</text>"#, WIDTH / 2.0, HEIGHT - 18.0);
    let _ = writeln!(s, r#"<text x="16" y="{:.1}" text-anchor="middle" font-family="sans-serif" font-size="12" transform="rotate(-90 16 {:.1})">rate</text>"#, HEIGHT / 2.0, HEIGHT / 2.0);

    for (i, (n, rs)) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let _ = writeln!(s, r#"<g class="series" data-n="{n}">"#);
        if rs.len() > 1 {
            let path: Vec<String> = rs.iter().map(|r| format!("{:.1} {:.1}", axes.px((r.q + 1) as f64), axes.py(r.success_rate))).collect();
            let _ = writeln!(s, r#"<path d="M{}" stroke="{color}" fill="none"/>"#, path.join("L"));
        }
        for r in rs {
            let _ = writeln!(s, r#"<circle cx="{:.1}" cy="{:.1}" r="3.5" fill="{color}"/>"#, axes.px((r.q + 1) as f64), axes.py(r.success_rate));
        }
        if let (Some(c), true) = (envelope, pts.len() > 1) {
            let (a, b) = (10f64.powf(axes.x0), 10f64.powf(axes.x1));
            let f = |x: f64| (c * x.powi(3) / *n as f64).clamp(10f64.powf(axes.y0), 10f64.powf(axes.y1));
            let _ = writeln!(
                s,
                r#"<path class="envelope" d="M{:.1} {:.1}L{:.1} {:.1}" stroke="{color}" stroke-dasharray="6 4" fill="none"/>"#,
                axes.px(a),
                axes.py(f(a)),
                axes.px(b),
                axes.py(f(b))
            );
        }
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="11" fill="{color}">N = {n}</text>"#, right - 70.0, top + 14.0 * (i + 1) as f64);
        let _ = writeln!(s, "</g>");
    }
    s.push_str("</svg>\n");
    Some(s)
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Writes the plot to `path`. Returns `false` and writes nothing when the
/// rows hold no plottable point.
pub fn emit_plot(rows: &[CsvRow], envelope: Option<f64>, title: &str, path: &Path) -> Result<bool> {
    match render_svg(rows, envelope, title) {
        Some(svg) => {
            std::fs::write(path, svg)?;
            Ok(true)
        }
        None => Ok(false),
    }
}
