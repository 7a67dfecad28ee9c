//! Minimal SVG rendering of a distance trace on a log axis.

use std::fmt::Write as _;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 60.0;
/// Cap on drawn points per series; longer traces are strided.
const MAX_POINTS: usize = 2000;

pub struct Series<'a> {
    pub name: &'a str,
    pub values: Vec<(usize, f64)>,
    pub dashed: bool,
}

/// Draws every series with `log10(y)` against `k`. Nonpositive and
/// non-finite values are skipped.
pub fn render(title: &str, series: &[Series<'_>]) -> String {
    let points: Vec<Vec<(f64, f64)>> = series
        .iter()
        .map(|s| {
            let stride = s.values.len().div_ceil(MAX_POINTS).max(1);
            s.values
                .iter()
                .enumerate()
                .filter(|(i, _)| i % stride == 0 || *i + 1 == s.values.len())
                .filter(|(_, (_, y))| y.is_finite() && *y > 0.0)
                .map(|(_, &(k, y))| (k as f64, y.log10()))
                .collect()
        })
        .collect();
    let all = points.iter().flatten();
    let (mut x_max, mut y_min, mut y_max) = (1.0f64, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in all {
        x_max = x_max.max(x);
        y_min = y_min.min(y);
        y_max = y_max.max(y);
    }
    if !y_min.is_finite() {
        (y_min, y_max) = (0.0, 1.0);
    }
    let (y_lo, y_hi) = (y_min.floor(), y_max.ceil().max(y_min.floor() + 1.0));
    let sx = |x: f64| MARGIN + x / x_max * (WIDTH - 2.0 * MARGIN);
    let sy = |y: f64| HEIGHT - MARGIN - (y - y_lo) / (y_hi - y_lo) * (HEIGHT - 2.0 * MARGIN);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(svg, r#"<text x="{}" y="24" text-anchor="middle">{}</text>"#, WIDTH / 2.0, escape(title));
    let _ = writeln!(
        svg,
        r#"<path d="M{m} {t} V{b} H{r}" fill="none" stroke="black"/>"#,
        m = MARGIN,
        t = MARGIN,
        b = HEIGHT - MARGIN,
        r = WIDTH - MARGIN
    );
    let step = ((y_hi - y_lo) / 8.0).ceil().max(1.0);
    let mut decade = y_lo;
    while decade <= y_hi {
        let y = sy(decade);
        let _ = writeln!(
            svg,
            r##"<line x1="{MARGIN}" x2="{r}" y1="{y:.1}" y2="{y:.1}" stroke="#ddd"/><text x="{lx}" y="{ty:.1}" text-anchor="end">1e{d}</text>"##,
            r = WIDTH - MARGIN,
            lx = MARGIN - 6.0,
            ty = y + 4.0,
            d = decade as i64
        );
        decade += step;
    }
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="end">k = {}</text>"#,
        WIDTH - MARGIN,
        HEIGHT - MARGIN + 20.0,
        x_max as u64
    );
    let colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"];
    for (i, (s, pts)) in series.iter().zip(&points).enumerate() {
        let color = colors[i % colors.len()];
        if !pts.is_empty() {
            let mut d = String::new();
            for (j, &(x, y)) in pts.iter().enumerate() {
                let _ = write!(d, "{}{:.2} {:.2}", if j == 0 { "M" } else { " L" }, sx(x), sy(y));
            }
            let dash = if s.dashed { r#" stroke-dasharray="8 3 2 3""# } else { "" };
            let _ = writeln!(svg, r#"<path d="{d}" fill="none" stroke="{color}" stroke-width="1.5"{dash}/>"#);
        }
        let ly = MARGIN + 16.0 * i as f64;
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{ly}" fill="{color}" text-anchor="end">{}</text>"#,
            WIDTH - MARGIN - 6.0,
            escape(s.name)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
