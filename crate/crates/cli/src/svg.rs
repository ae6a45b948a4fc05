//! Hand-written SVG figures: box plots, line plots and bar charts.

use std::fmt::Write;

const WIDTH: f64 = 760.0;
const HEIGHT: f64 = 440.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 24.0;
const TOP: f64 = 48.0;
const BOTTOM: f64 = 72.0;

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf",
];

/// One box: whiskers at `lo`/`hi`, box from `q1` to `q3`.
#[derive(Debug, Clone)]
pub struct BoxStats {
    pub label: String,
    pub lo: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub hi: f64,
}

#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub values: Vec<f64>,
}

pub fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

struct Frame {
    y_lo: f64,
    y_hi: f64,
    body: String,
}

impl Frame {
    fn new(values: impl Iterator<Item = f64>) -> Self {
        let (lo, hi) = values
            .filter(|v| v.is_finite())
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
        let (lo, hi) = if lo > hi { (0.0, 1.0) } else { (lo, hi) };
        let pad = if hi - lo < 1e-9 { 0.05 } else { (hi - lo) * 0.08 };
        Frame {
            y_lo: lo - pad,
            y_hi: hi + pad,
            body: String::new(),
        }
    }

    fn plot_width() -> f64 {
        WIDTH - LEFT - RIGHT
    }

    fn plot_height() -> f64 {
        HEIGHT - TOP - BOTTOM
    }

    fn y(&self, v: f64) -> f64 {
        TOP + (self.y_hi - v) / (self.y_hi - self.y_lo) * Self::plot_height()
    }

    /// Centre of category `i` out of `n`.
    fn x_band(i: usize, n: usize) -> f64 {
        LEFT + (i as f64 + 0.5) * Self::plot_width() / n as f64
    }

    fn line(&mut self, x1: f64, y1: f64, x2: f64, y2: f64, style: &str) {
        let _ = writeln!(
            self.body,
            r#"<line x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}" {style}/>"#
        );
    }

    fn text(&mut self, x: f64, y: f64, anchor: &str, extra: &str, content: &str) {
        let _ = writeln!(
            self.body,
            r#"<text x="{x:.2}" y="{y:.2}" text-anchor="{anchor}" font-size="12"{extra}>{}</text>"#,
            escape(content)
        );
    }

    fn axes(&mut self, x_label: &str, y_label: &str) {
        let (x0, x1, y0, y1) = (LEFT, WIDTH - RIGHT, TOP, HEIGHT - BOTTOM);
        self.line(x0, y1, x1, y1, r#"stroke="black""#);
        self.line(x0, y0, x0, y1, r#"stroke="black""#);
        let ticks = 5;
        let span = self.y_hi - self.y_lo;
        let decimals = (-(span / ticks as f64).log10().floor()).clamp(0.0, 6.0) as usize + 1;
        for t in 0..=ticks {
            let v = self.y_lo + span * t as f64 / ticks as f64;
            let y = self.y(v);
            self.line(x0 - 4.0, y, x0, y, r#"stroke="black""#);
            self.line(x0, y, x1, y, r##"stroke="#dddddd" stroke-width="0.5""##);
            self.text(x0 - 6.0, y + 4.0, "end", "", &format!("{v:.decimals$}"));
        }
        self.text((x0 + x1) / 2.0, HEIGHT - 16.0, "middle", "", x_label);
        let cy = (y0 + y1) / 2.0;
        self.text(
            18.0,
            cy,
            "middle",
            &format!(r#" transform="rotate(-90 18 {cy:.2})""#),
            y_label,
        );
    }

    fn x_labels(&mut self, labels: &[String]) {
        let n = labels.len();
        for (i, label) in labels.iter().enumerate() {
            let x = Self::x_band(i, n);
            let y = HEIGHT - BOTTOM;
            self.line(x, y, x, y + 4.0, r#"stroke="black""#);
            self.text(x, y + 18.0, "middle", "", label);
        }
    }

    fn finish(self, title: &str) -> String {
        let t = escape(title);
        let mut out = String::new();
        let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif">"#
        );
        let _ = writeln!(out, "<title>{t}</title>");
        let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(out, r#"<g class="plot"><title>{t}</title>"#);
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="28" text-anchor="middle" font-size="16">{t}</text>"#,
            WIDTH / 2.0
        );
        out.push_str(&self.body);
        out.push_str("</g>\n</svg>\n");
        out
    }
}

pub fn box_plot(title: &str, x_label: &str, y_label: &str, boxes: &[BoxStats]) -> String {
    let mut f = Frame::new(boxes.iter().flat_map(|b| [b.lo, b.hi]));
    f.axes(x_label, y_label);
    let n = boxes.len().max(1);
    let half = (Frame::plot_width() / n as f64 * 0.3).min(30.0);
    for (i, b) in boxes.iter().enumerate() {
        let x = Frame::x_band(i, n);
        let stroke = r#"stroke="black""#;
        f.line(x, f.y(b.lo), x, f.y(b.q1), stroke);
        f.line(x, f.y(b.q3), x, f.y(b.hi), stroke);
        f.line(x - half / 2.0, f.y(b.lo), x + half / 2.0, f.y(b.lo), stroke);
        f.line(x - half / 2.0, f.y(b.hi), x + half / 2.0, f.y(b.hi), stroke);
        let (top, bottom) = (f.y(b.q3), f.y(b.q1));
        let _ = writeln!(
            f.body,
            r##"<rect x="{:.2}" y="{top:.2}" width="{:.2}" height="{:.2}" fill="#9ecae1" stroke="black"/>"##,
            x - half,
            2.0 * half,
            (bottom - top).max(0.5)
        );
        f.line(
            x - half,
            f.y(b.median),
            x + half,
            f.y(b.median),
            r#"stroke="black" stroke-width="2""#,
        );
    }
    let labels: Vec<String> = boxes.iter().map(|b| b.label.clone()).collect();
    f.x_labels(&labels);
    f.finish(title)
}

/// One polyline per series over shared x positions.
pub fn line_plot(title: &str, x_label: &str, y_label: &str, x_ticks: &[String], series: &[Series]) -> String {
    let mut f = Frame::new(series.iter().flat_map(|s| s.values.iter().copied()));
    f.axes(x_label, y_label);
    let n = x_ticks.len().max(1);
    for (k, s) in series.iter().enumerate() {
        let colour = PALETTE[k % PALETTE.len()];
        let points: Vec<String> = s
            .values
            .iter()
            .enumerate()
            .map(|(i, &v)| format!("{:.2},{:.2}", Frame::x_band(i, n), f.y(v)))
            .collect();
        let _ = writeln!(
            f.body,
            r#"<polyline points="{}" fill="none" stroke="{colour}" stroke-width="1.5"><title>{}</title></polyline>"#,
            points.join(" "),
            escape(&s.label)
        );
    }
    // legend
    for (k, s) in series.iter().enumerate().take(15) {
        let colour = PALETTE[k % PALETTE.len()];
        let y = TOP + 6.0 + 14.0 * k as f64;
        let x = WIDTH - RIGHT - 120.0;
        f.line(x, y, x + 16.0, y, &format!(r#"stroke="{colour}" stroke-width="2""#));
        f.text(x + 20.0, y + 4.0, "start", "", &s.label);
    }
    f.x_labels(x_ticks);
    f.finish(title)
}

pub fn bar_chart(title: &str, x_label: &str, y_label: &str, bars: &[(String, f64)]) -> String {
    let mut f = Frame::new(bars.iter().map(|b| b.1).chain([0.0]));
    f.y_lo = 0.0;
    f.axes(x_label, y_label);
    let n = bars.len().max(1);
    let half = Frame::plot_width() / n as f64 * 0.35;
    for (i, (_, v)) in bars.iter().enumerate() {
        let x = Frame::x_band(i, n);
        let (top, base) = (f.y(*v), f.y(0.0));
        let _ = writeln!(
            f.body,
            r##"<rect x="{:.2}" y="{top:.2}" width="{:.2}" height="{:.2}" fill="#6baed6"/>"##,
            x - half,
            2.0 * half,
            base - top
        );
    }
    let labels: Vec<String> = bars.iter().map(|b| b.0.clone()).collect();
    f.x_labels(&labels);
    f.finish(title)
}
