//! Minimal SVG chart writer.
//!
//! Output depends only on the inputs, with coordinates printed at fixed
//! precision, so a chart regenerated from the same data is byte-identical.

use std::fmt::Write;

const FONT: &str = "font-family=\"sans-serif\"";
const PALETTE: [&str; 8] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

struct Svg {
    body: String,
    width: f64,
    height: f64,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

impl Svg {
    fn new(width: f64, height: f64) -> Self {
        Svg {
            body: String::new(),
            width,
            height,
        }
    }

    fn rect(&mut self, x: f64, y: f64, w: f64, h: f64, fill: &str) {
        let _ = writeln!(
            self.body,
            "<rect x=\"{x:.2}\" y=\"{y:.2}\" width=\"{w:.2}\" height=\"{h:.2}\" fill=\"{fill}\"/>"
        );
    }

    fn line(&mut self, x1: f64, y1: f64, x2: f64, y2: f64, stroke: &str) {
        let _ = writeln!(
            self.body,
            "<line x1=\"{x1:.2}\" y1=\"{y1:.2}\" x2=\"{x2:.2}\" y2=\"{y2:.2}\" stroke=\"{stroke}\" stroke-width=\"1\"/>"
        );
    }

    fn circle(&mut self, x: f64, y: f64, r: f64, fill: &str) {
        let _ = writeln!(
            self.body,
            "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"{r:.2}\" fill=\"{fill}\" fill-opacity=\"0.6\"/>"
        );
    }

    fn text(&mut self, x: f64, y: f64, size: f64, anchor: &str, s: &str) {
        let _ = writeln!(
            self.body,
            "<text x=\"{x:.2}\" y=\"{y:.2}\" font-size=\"{size:.0}\" text-anchor=\"{anchor}\" {FONT}>{}</text>",
            escape(s)
        );
    }

    fn finish(self) -> String {
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w:.0}\" height=\"{h:.0}\" viewBox=\"0 0 {w:.0} {h:.0}\">\n\
             <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n{}</svg>\n",
            self.body,
            w = self.width,
            h = self.height
        )
    }
}

/// One panel of a small-multiples histogram.
pub struct HistogramPanel<'a> {
    pub label: &'a str,
    pub counts: &'a [usize],
    pub mean: Option<f64>,
}

/// Histograms over the rating grid `[lo, hi]`, laid out in rows of `per_row`.
pub fn histograms(title: &str, panels: &[HistogramPanel], lo: f64, hi: f64, per_row: usize) -> String {
    let (pw, ph, gap, top) = (220.0, 140.0, 20.0, 40.0);
    let per_row = per_row.max(1);
    let rows = panels.len().div_ceil(per_row).max(1);
    let width = gap + per_row as f64 * (pw + gap);
    let height = top + rows as f64 * (ph + gap + 20.0);
    let mut svg = Svg::new(width, height);
    svg.text(width / 2.0, 24.0, 16.0, "middle", title);
    for (i, p) in panels.iter().enumerate() {
        let x0 = gap + (i % per_row) as f64 * (pw + gap);
        let y0 = top + (i / per_row) as f64 * (ph + gap + 20.0);
        let base = y0 + ph;
        svg.line(x0, base, x0 + pw, base, "#333333");
        let max = p.counts.iter().copied().max().unwrap_or(0).max(1) as f64;
        let bw = pw / p.counts.len().max(1) as f64;
        for (k, &c) in p.counts.iter().enumerate() {
            if c > 0 {
                let h = (ph - 20.0) * c as f64 / max;
                svg.rect(x0 + k as f64 * bw, base - h, bw, h, PALETTE[i % PALETTE.len()]);
            }
        }
        if let Some(m) = p.mean {
            let x = x0 + pw * (m - lo) / (hi - lo);
            svg.line(x, y0 + 14.0, x, base, "#000000");
        }
        let label = match p.mean {
            Some(m) => format!("{} (mean {m:.2})", p.label),
            None => p.label.to_string(),
        };
        svg.text(x0 + pw / 2.0, y0 + 10.0, 11.0, "middle", &label);
        svg.text(x0, base + 14.0, 10.0, "start", &format!("{lo}"));
        svg.text(x0 + pw, base + 14.0, 10.0, "end", &format!("{hi}"));
    }
    svg.finish()
}

fn diverging(v: f64) -> String {
    // white at 0, blue towards +1, red towards -1
    let t = v.clamp(-1.0, 1.0);
    let (r, g, b) = if t >= 0.0 {
        (255.0 * (1.0 - t), 255.0 * (1.0 - 0.6 * t), 255.0)
    } else {
        (255.0, 255.0 * (1.0 + 0.6 * t), 255.0 * (1.0 + t))
    };
    format!("#{:02x}{:02x}{:02x}", r.round() as u8, g.round() as u8, b.round() as u8)
}

/// Annotated heatmap of values in [-1, 1]; `None` cells are grey.
pub fn heatmap(title: &str, rows: &[String], cols: &[String], cells: &[Vec<Option<f64>>]) -> String {
    let (cw, ch, left, top) = (78.0, 30.0, 130.0, 70.0);
    let width = left + cols.len() as f64 * cw + 20.0;
    let height = top + rows.len() as f64 * ch + 20.0;
    let mut svg = Svg::new(width, height);
    svg.text(width / 2.0, 22.0, 16.0, "middle", title);
    for (j, c) in cols.iter().enumerate() {
        svg.text(left + (j as f64 + 0.5) * cw, top - 10.0, 11.0, "middle", c);
    }
    for (i, r) in rows.iter().enumerate() {
        let y = top + i as f64 * ch;
        svg.text(left - 8.0, y + ch / 2.0 + 4.0, 11.0, "end", r);
        for (j, v) in cells[i].iter().enumerate() {
            let x = left + j as f64 * cw;
            match v {
                Some(v) => {
                    svg.rect(x, y, cw - 2.0, ch - 2.0, &diverging(*v));
                    svg.text(x + cw / 2.0, y + ch / 2.0 + 4.0, 11.0, "middle", &format!("{v:.2}"));
                }
                None => {
                    svg.rect(x, y, cw - 2.0, ch - 2.0, "#dddddd");
                    svg.text(x + cw / 2.0, y + ch / 2.0 + 4.0, 11.0, "middle", "n/a");
                }
            }
        }
    }
    svg.finish()
}

/// Scatter of (x, y) points on a square `[lo, hi]` frame with the diagonal.
pub fn scatter(title: &str, x_label: &str, y_label: &str, points: &[[f64; 2]], lo: f64, hi: f64) -> String {
    let (size, pad) = (360.0, 50.0);
    let mut svg = Svg::new(size + 2.0 * pad, size + 2.0 * pad);
    svg.text(pad + size / 2.0, 24.0, 15.0, "middle", title);
    let px = |v: f64| pad + size * (v - lo) / (hi - lo);
    let py = |v: f64| pad + size - size * (v - lo) / (hi - lo);
    svg.line(pad, pad + size, pad + size, pad + size, "#333333");
    svg.line(pad, pad, pad, pad + size, "#333333");
    svg.line(px(lo), py(lo), px(hi), py(hi), "#bbbbbb");
    for p in points {
        svg.circle(px(p[0].clamp(lo, hi)), py(p[1].clamp(lo, hi)), 3.0, PALETTE[0]);
    }
    svg.text(pad + size / 2.0, pad + size + 32.0, 12.0, "middle", x_label);
    svg.text(14.0, pad + size / 2.0, 12.0, "middle", y_label);
    svg.text(pad, pad + size + 14.0, 10.0, "start", &format!("{lo}"));
    svg.text(pad + size, pad + size + 14.0, 10.0, "end", &format!("{hi}"));
    svg.finish()
}

/// Grouped bars: one group per entry of `groups`, one bar per series.
pub fn grouped_bars(title: &str, groups: &[String], series: &[(String, Vec<Option<f64>>)], lo: f64, hi: f64) -> String {
    let (gw, ph, left, top) = (30.0 + 16.0 * series.len() as f64, 240.0, 50.0, 60.0);
    let width = left + groups.len() as f64 * gw + 20.0;
    let height = top + ph + 60.0;
    let mut svg = Svg::new(width, height);
    svg.text(width / 2.0, 22.0, 16.0, "middle", title);
    let base = top + ph;
    svg.line(left, base, width - 20.0, base, "#333333");
    svg.text(left - 6.0, base, 10.0, "end", &format!("{lo}"));
    svg.text(left - 6.0, top + 4.0, 10.0, "end", &format!("{hi}"));
    let bw = (gw - 30.0) / series.len().max(1) as f64;
    for (g, name) in groups.iter().enumerate() {
        let x0 = left + g as f64 * gw + 15.0;
        for (s, (_, values)) in series.iter().enumerate() {
            if let Some(v) = values.get(g).copied().flatten() {
                let h = ph * ((v - lo) / (hi - lo)).clamp(0.0, 1.0);
                svg.rect(x0 + s as f64 * bw, base - h, bw - 1.0, h, PALETTE[s % PALETTE.len()]);
            }
        }
        svg.text(x0 + (gw - 30.0) / 2.0, base + 16.0, 11.0, "middle", name);
    }
    for (s, (label, _)) in series.iter().enumerate() {
        let x = left + s as f64 * 90.0;
        svg.rect(x, top - 24.0, 10.0, 10.0, PALETTE[s % PALETTE.len()]);
        svg.text(x + 14.0, top - 15.0, 11.0, "start", label);
    }
    svg.finish()
}
