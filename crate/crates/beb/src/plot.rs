//! Self-contained SVG output — no plotting process, no external assets.
//! Two chart kinds cover the tool's needs: multi-series line panels for the
//! study summaries (MSE against the number of areas, one panel per true
//! hyperparameter value) and histogram panels for bootstrap hyperparameter
//! draws with the original-data estimate marked.

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

const PANEL_W: f64 = 640.0;
const PANEL_H: f64 = 400.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_T: f64 = 46.0;
const MARGIN_B: f64 = 56.0;

/// One line on a chart.
#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

/// One chart panel holding several series over a shared axis.
#[derive(Debug, Clone)]
pub struct LinePanel {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
}

/// One histogram panel; `marker` draws a labeled vertical reference line.
#[derive(Debug, Clone)]
pub struct HistPanel {
    pub title: String,
    pub values: Vec<f64>,
    pub marker: Option<f64>,
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn fmt(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let a = v.abs();
    let s = if a >= 1000.0 || a < 0.001 {
        format!("{v:.2e}")
    } else {
        format!("{v:.4}")
    };
    if s.contains('.') && !s.contains('e') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// Round tick spacing to a 1/2/5 x 10^k value.
fn nice_step(range: f64, target_ticks: usize) -> f64 {
    let raw = range / target_ticks.max(1) as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let norm = raw / mag;
    let factor = if norm <= 1.0 {
        1.0
    } else if norm <= 2.0 {
        2.0
    } else if norm <= 5.0 {
        5.0
    } else {
        10.0
    };
    factor * mag
}

fn ticks(lo: f64, hi: f64, target: usize) -> Vec<f64> {
    if !(hi > lo) {
        return vec![lo];
    }
    let step = nice_step(hi - lo, target);
    let first = (lo / step).ceil();
    let mut out = Vec::new();
    let mut k = first;
    while k * step <= hi + 1e-9 * step {
        out.push(k * step);
        k += 1.0;
    }
    out
}

fn data_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if lo > hi {
        return (0.0, 1.0);
    }
    if lo == hi {
        // degenerate span: pad so the point sits mid-axis
        let pad = if lo == 0.0 { 0.5 } else { lo.abs() * 0.1 };
        return (lo - pad, hi + pad);
    }
    let pad = (hi - lo) * 0.05;
    (lo - pad, hi + pad)
}

/// Renders stacked line-chart panels as one SVG document.
pub fn line_chart_svg(panels: &[LinePanel]) -> String {
    let legend_w = 150.0;
    let margin_r = 24.0 + legend_w;
    let plot_w = PANEL_W - MARGIN_L - margin_r;
    let plot_h = PANEL_H - MARGIN_T - MARGIN_B;
    let total_h = PANEL_H * panels.len().max(1) as f64;
    let mut svg = svg_open(PANEL_W, total_h);

    for (pi, panel) in panels.iter().enumerate() {
        let oy = pi as f64 * PANEL_H;
        let (x_lo, x_hi) =
            data_range(panel.series.iter().flat_map(|s| s.points.iter().map(|p| p.0)));
        let (y_lo, y_hi) =
            data_range(panel.series.iter().flat_map(|s| s.points.iter().map(|p| p.1)));
        let px = |x: f64| MARGIN_L + (x - x_lo) / (x_hi - x_lo) * plot_w;
        let py = |y: f64| oy + MARGIN_T + plot_h - (y - y_lo) / (y_hi - y_lo) * plot_h;

        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-size=\"15\" font-weight=\"bold\">{}</text>\n",
            MARGIN_L + plot_w / 2.0,
            oy + 22.0,
            esc(&panel.title)
        ));
        svg.push_str(&frame(MARGIN_L, oy + MARGIN_T, plot_w, plot_h));

        for tx in ticks(x_lo, x_hi, 6) {
            let x = px(tx);
            svg.push_str(&format!(
                "<line x1=\"{x:.2}\" y1=\"{:.2}\" x2=\"{x:.2}\" y2=\"{:.2}\" stroke=\"#000\"/>\n",
                oy + MARGIN_T + plot_h,
                oy + MARGIN_T + plot_h + 5.0
            ));
            svg.push_str(&format!(
                "<text x=\"{x:.2}\" y=\"{:.2}\" text-anchor=\"middle\" font-size=\"11\">{}</text>\n",
                oy + MARGIN_T + plot_h + 18.0,
                fmt(tx)
            ));
        }
        for ty in ticks(y_lo, y_hi, 6) {
            let y = py(ty);
            svg.push_str(&format!(
                "<line x1=\"{:.2}\" y1=\"{y:.2}\" x2=\"{:.2}\" y2=\"{y:.2}\" stroke=\"#000\"/>\n",
                MARGIN_L - 5.0,
                MARGIN_L
            ));
            svg.push_str(&format!(
                "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\" font-size=\"11\">{}</text>\n",
                MARGIN_L - 8.0,
                y + 4.0,
                fmt(ty)
            ));
        }
        svg.push_str(&axis_labels(&panel.x_label, &panel.y_label, oy, plot_w, plot_h));

        for (si, series) in panel.series.iter().enumerate() {
            let color = PALETTE[si % PALETTE.len()];
            let pts: Vec<String> = series
                .points
                .iter()
                .map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y)))
                .collect();
            svg.push_str(&format!(
                "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.8\" points=\"{}\"/>\n",
                pts.join(" ")
            ));
            for &(x, y) in &series.points {
                svg.push_str(&format!(
                    "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"{color}\"/>\n",
                    px(x),
                    py(y)
                ));
            }
            // legend entry
            let lx = MARGIN_L + plot_w + 16.0;
            let ly = oy + MARGIN_T + 14.0 + si as f64 * 20.0;
            svg.push_str(&format!(
                "<line x1=\"{lx:.2}\" y1=\"{ly:.2}\" x2=\"{:.2}\" y2=\"{ly:.2}\" stroke=\"{color}\" stroke-width=\"2\"/>\n",
                lx + 22.0
            ));
            svg.push_str(&format!(
                "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"12\">{}</text>\n",
                lx + 28.0,
                ly + 4.0,
                esc(&series.label)
            ));
        }
    }
    svg.push_str("</svg>\n");
    svg
}

/// Deterministic equal-width binning over [min, max]; counts always sum to the
/// number of values.  A degenerate all-equal input collapses to one bin.
pub fn histogram_bins(values: &[f64], k: usize) -> (Vec<f64>, Vec<usize>) {
    assert!(!values.is_empty() && k >= 1);
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if lo == hi {
        let half = if lo == 0.0 { 0.5 } else { lo.abs() * 0.05 };
        return (vec![lo - half, hi + half], vec![values.len()]);
    }
    let width = (hi - lo) / k as f64;
    let edges: Vec<f64> = (0..=k).map(|i| lo + i as f64 * width).collect();
    let mut counts = vec![0usize; k];
    for &v in values {
        let idx = (((v - lo) / width) as usize).min(k - 1);
        counts[idx] += 1;
    }
    (edges, counts)
}

/// Default bin count: square-root rule clamped to a readable range.
pub fn default_bin_count(n: usize) -> usize {
    ((n as f64).sqrt().ceil() as usize).clamp(8, 30)
}

/// Renders stacked histogram panels as one SVG document.
pub fn histogram_svg(panels: &[HistPanel]) -> String {
    let margin_r = 30.0;
    let plot_w = PANEL_W - MARGIN_L - margin_r;
    let plot_h = PANEL_H - MARGIN_T - MARGIN_B;
    let total_h = PANEL_H * panels.len().max(1) as f64;
    let mut svg = svg_open(PANEL_W, total_h);

    for (pi, panel) in panels.iter().enumerate() {
        let oy = pi as f64 * PANEL_H;
        let (edges, counts) = histogram_bins(&panel.values, default_bin_count(panel.values.len()));
        let (mut x_lo, mut x_hi) = (edges[0], *edges.last().unwrap());
        if let Some(mark) = panel.marker {
            x_lo = x_lo.min(mark);
            x_hi = x_hi.max(mark);
        }
        let span = (x_hi - x_lo).max(f64::MIN_POSITIVE);
        let pad = span * 0.04;
        x_lo -= pad;
        x_hi += pad;
        let y_hi = *counts.iter().max().unwrap() as f64 * 1.08;
        let px = |x: f64| MARGIN_L + (x - x_lo) / (x_hi - x_lo) * plot_w;
        let py = |y: f64| oy + MARGIN_T + plot_h - y / y_hi * plot_h;

        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-size=\"15\" font-weight=\"bold\">{}</text>\n",
            MARGIN_L + plot_w / 2.0,
            oy + 22.0,
            esc(&panel.title)
        ));
        svg.push_str(&frame(MARGIN_L, oy + MARGIN_T, plot_w, plot_h));

        for (i, &count) in counts.iter().enumerate() {
            if count == 0 {
                continue;
            }
            let x0 = px(edges[i]);
            let x1 = px(edges[i + 1]);
            let y = py(count as f64);
            svg.push_str(&format!(
                "<rect x=\"{x0:.2}\" y=\"{y:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"#9ecae1\" stroke=\"#4a708b\" stroke-width=\"0.7\"/>\n",
                x1 - x0,
                oy + MARGIN_T + plot_h - y
            ));
        }
        if let Some(mark) = panel.marker {
            let x = px(mark);
            svg.push_str(&format!(
                "<line x1=\"{x:.2}\" y1=\"{:.2}\" x2=\"{x:.2}\" y2=\"{:.2}\" stroke=\"#d62728\" stroke-width=\"1.8\" stroke-dasharray=\"5,3\"/>\n",
                oy + MARGIN_T,
                oy + MARGIN_T + plot_h
            ));
            svg.push_str(&format!(
                "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"11\" fill=\"#d62728\">ml {}</text>\n",
                x + 5.0,
                oy + MARGIN_T + 14.0,
                fmt(mark)
            ));
        }
        for tx in ticks(x_lo, x_hi, 6) {
            let x = px(tx);
            svg.push_str(&format!(
                "<line x1=\"{x:.2}\" y1=\"{:.2}\" x2=\"{x:.2}\" y2=\"{:.2}\" stroke=\"#000\"/>\n",
                oy + MARGIN_T + plot_h,
                oy + MARGIN_T + plot_h + 5.0
            ));
            svg.push_str(&format!(
                "<text x=\"{x:.2}\" y=\"{:.2}\" text-anchor=\"middle\" font-size=\"11\">{}</text>\n",
                oy + MARGIN_T + plot_h + 18.0,
                fmt(tx)
            ));
        }
        for ty in ticks(0.0, y_hi, 5) {
            if ty.fract() != 0.0 {
                continue; // counts axis: integer ticks only
            }
            let y = py(ty);
            svg.push_str(&format!(
                "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\" font-size=\"11\">{}</text>\n",
                MARGIN_L - 8.0,
                y + 4.0,
                fmt(ty)
            ));
        }
        svg.push_str(&axis_labels("value", "count", oy, plot_w, plot_h));
    }
    svg.push_str("</svg>\n");
    svg
}

fn svg_open(w: f64, h: f64) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" \
         viewBox=\"0 0 {w} {h}\" font-family=\"sans-serif\">\n\
         <rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n"
    )
}

fn frame(x: f64, y: f64, w: f64, h: f64) -> String {
    format!(
        "<rect x=\"{x}\" y=\"{y}\" width=\"{w}\" height=\"{h}\" fill=\"none\" stroke=\"#333\"/>\n"
    )
}

fn axis_labels(x_label: &str, y_label: &str, oy: f64, plot_w: f64, plot_h: f64) -> String {
    let mut out = format!(
        "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\" font-size=\"13\">{}</text>\n",
        MARGIN_L + plot_w / 2.0,
        oy + MARGIN_T + plot_h + 40.0,
        esc(x_label)
    );
    out.push_str(&format!(
        "<text x=\"18\" y=\"{:.2}\" text-anchor=\"middle\" font-size=\"13\" \
         transform=\"rotate(-90 18 {:.2})\">{}</text>\n",
        oy + MARGIN_T + plot_h / 2.0,
        oy + MARGIN_T + plot_h / 2.0,
        esc(y_label)
    ));
    out
}
