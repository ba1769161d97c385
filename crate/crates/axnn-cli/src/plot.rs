//! Minimal SVG plot writer: line charts, horizontal bar charts, histograms,
//! and heatmaps. No plotting dependency; the bar is "legible", the CSVs next
//! to each plot are the record.

use axnn::Matrix;

const WIDTH: f64 = 760.0;
const HEIGHT: f64 = 480.0;
const MARGIN_L: f64 = 170.0;
const MARGIN_R: f64 = 30.0;
const MARGIN_T: f64 = 48.0;
const MARGIN_B: f64 = 56.0;

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn header(title: &str) -> String {
    format!(
        concat!(
            "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n",
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" ",
            "viewBox=\"0 0 {w} {h}\" font-family=\"monospace\" font-size=\"12\">\n",
            "<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n",
            "<text x=\"{tx}\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">{title}</text>\n"
        ),
        w = WIDTH,
        h = HEIGHT,
        tx = WIDTH / 2.0,
        title = esc(title)
    )
}

fn finite_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in values.filter(|v| v.is_finite()) {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() || !hi.is_finite() {
        return (0.0, 1.0);
    }
    if lo == hi {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

fn axes(xlabel: &str, ylabel: &str, xr: (f64, f64), yr: (f64, f64)) -> String {
    let (x0, x1) = (MARGIN_L, WIDTH - MARGIN_R);
    let (y0, y1) = (HEIGHT - MARGIN_B, MARGIN_T);
    let mut s = String::new();
    s.push_str(&format!(
        "<line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x1}\" y2=\"{y0}\" stroke=\"black\"/>\n\
         <line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x0}\" y2=\"{y1}\" stroke=\"black\"/>\n"
    ));
    for i in 0..=4 {
        let f = i as f64 / 4.0;
        let xv = xr.0 + f * (xr.1 - xr.0);
        let yv = yr.0 + f * (yr.1 - yr.0);
        let xp = x0 + f * (x1 - x0);
        let yp = y0 + f * (y1 - y0);
        s.push_str(&format!(
            "<text x=\"{xp}\" y=\"{ty}\" text-anchor=\"middle\">{xv:.3}</text>\n",
            ty = y0 + 18.0
        ));
        s.push_str(&format!(
            "<text x=\"{tx}\" y=\"{typ}\" text-anchor=\"end\">{yv:.3}</text>\n",
            tx = x0 - 6.0,
            typ = yp + 4.0
        ));
    }
    s.push_str(&format!(
        "<text x=\"{cx}\" y=\"{by}\" text-anchor=\"middle\">{xl}</text>\n",
        cx = (x0 + x1) / 2.0,
        by = HEIGHT - 14.0,
        xl = esc(xlabel)
    ));
    s.push_str(&format!(
        "<text x=\"18\" y=\"{cy}\" text-anchor=\"middle\" transform=\"rotate(-90 18 {cy})\">{yl}</text>\n",
        cy = (y0 + y1) / 2.0,
        yl = esc(ylabel)
    ));
    s
}

/// Line chart of (x, y) pairs.
pub fn line_chart(title: &str, xlabel: &str, ylabel: &str, points: &[(f64, f64)]) -> String {
    let xr = finite_range(points.iter().map(|p| p.0));
    let yr = finite_range(points.iter().map(|p| p.1));
    let sx = |x: f64| MARGIN_L + (x - xr.0) / (xr.1 - xr.0) * (WIDTH - MARGIN_L - MARGIN_R);
    let sy = |y: f64| (HEIGHT - MARGIN_B) - (y - yr.0) / (yr.1 - yr.0) * (HEIGHT - MARGIN_T - MARGIN_B);
    let mut s = header(title);
    s.push_str(&axes(xlabel, ylabel, xr, yr));
    let path: Vec<String> = points
        .iter()
        .enumerate()
        .map(|(i, (x, y))| {
            format!("{}{:.2},{:.2}", if i == 0 { "M" } else { "L" }, sx(*x), sy(*y))
        })
        .collect();
    s.push_str(&format!(
        "<path d=\"{}\" fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.8\"/>\n",
        path.join(" ")
    ));
    s.push_str("</svg>\n");
    s
}

/// Horizontal bar chart (used for importance ranking; longest bar on top).
pub fn bar_chart(title: &str, xlabel: &str, labels: &[String], values: &[f64]) -> String {
    let vmax = values.iter().copied().fold(0.0_f64, f64::max).max(1e-12);
    let (x0, x1) = (MARGIN_L, WIDTH - MARGIN_R);
    let (y0, y1) = (HEIGHT - MARGIN_B, MARGIN_T);
    let n = labels.len().max(1);
    let band = (y0 - y1) / n as f64;
    let bar_h = (band * 0.7).min(26.0);
    let mut s = header(title);
    s.push_str(&axes(xlabel, "", (0.0, vmax), (0.0, 0.0)));
    for (i, (label, &v)) in labels.iter().zip(values).enumerate() {
        let y = y1 + i as f64 * band + (band - bar_h) / 2.0;
        let w = (v / vmax) * (x1 - x0);
        s.push_str(&format!(
            "<rect x=\"{x0}\" y=\"{y:.2}\" width=\"{w:.2}\" height=\"{bar_h:.2}\" fill=\"#1f77b4\"/>\n"
        ));
        s.push_str(&format!(
            "<text x=\"{tx}\" y=\"{ty:.2}\" text-anchor=\"end\">{lab}</text>\n",
            tx = x0 - 6.0,
            ty = y + bar_h / 2.0 + 4.0,
            lab = esc(label)
        ));
        s.push_str(&format!(
            "<text x=\"{vx:.2}\" y=\"{ty:.2}\">{v:.4}</text>\n",
            vx = x0 + w + 5.0,
            ty = y + bar_h / 2.0 + 4.0,
        ));
    }
    s.push_str("</svg>\n");
    s
}

/// Vertical-bar histogram from bin edges and counts.
pub fn histogram(title: &str, xlabel: &str, edges: &[f64], counts: &[usize]) -> String {
    let cmax = counts.iter().copied().max().unwrap_or(1).max(1) as f64;
    let xr = (edges[0], *edges.last().unwrap());
    let (x0, x1) = (MARGIN_L, WIDTH - MARGIN_R);
    let y0 = HEIGHT - MARGIN_B;
    let y1 = MARGIN_T;
    let sx = |x: f64| x0 + (x - xr.0) / (xr.1 - xr.0) * (x1 - x0);
    let mut s = header(title);
    s.push_str(&axes(xlabel, "count", xr, (0.0, cmax)));
    for (i, &c) in counts.iter().enumerate() {
        let xl = sx(edges[i]);
        let xr_ = sx(edges[i + 1]);
        let h = c as f64 / cmax * (y0 - y1);
        s.push_str(&format!(
            "<rect x=\"{xl:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{h:.2}\" fill=\"#ff7f0e\" stroke=\"white\"/>\n",
            y0 - h,
            (xr_ - xl).max(0.5)
        ));
    }
    s.push_str("</svg>\n");
    s
}

/// Contour-style heatmap of a 2-D effect surface. `values[(i, j)]` is the
/// effect at `(xs[i], ys[j])`; blue is low, red is high.
pub fn heatmap(
    title: &str,
    xlabel: &str,
    ylabel: &str,
    xs: &[f64],
    ys: &[f64],
    values: &Matrix,
) -> String {
    let (lo, hi) = finite_range(values.data().iter().copied());
    let (x0, x1) = (MARGIN_L, WIDTH - MARGIN_R);
    let (y0, y1) = (HEIGHT - MARGIN_B, MARGIN_T);
    let cw = (x1 - x0) / xs.len() as f64;
    let ch = (y0 - y1) / ys.len() as f64;
    let xr = finite_range(xs.iter().copied());
    let yr = finite_range(ys.iter().copied());
    let mut s = header(title);
    s.push_str(&axes(xlabel, ylabel, xr, yr));
    for i in 0..xs.len() {
        for j in 0..ys.len() {
            let v = values.get(i, j);
            let t = if hi > lo { (v - lo) / (hi - lo) } else { 0.5 };
            // blue (low) -> white -> red (high)
            let (r, g, b) = if t < 0.5 {
                let u = t * 2.0;
                ((255.0 * u) as u8 + ((31.0 * (1.0 - u)) as u8), (119.0 + 136.0 * u) as u8, (180.0 + 75.0 * u) as u8)
            } else {
                let u = (t - 0.5) * 2.0;
                (255, (255.0 - 128.0 * u) as u8, (255.0 - 241.0 * u) as u8)
            };
            s.push_str(&format!(
                "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"rgb({r},{g},{b})\"/>\n",
                x0 + i as f64 * cw,
                y0 - (j + 1) as f64 * ch,
                cw + 0.5,
                ch + 0.5
            ));
        }
    }
    s.push_str(&format!(
        "<text x=\"{x1}\" y=\"{ty}\" text-anchor=\"end\">range [{lo:.3}, {hi:.3}]</text>\n",
        ty = MARGIN_T - 8.0
    ));
    s.push_str("</svg>\n");
    s
}
