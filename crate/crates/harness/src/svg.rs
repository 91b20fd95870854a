//! Self-contained SVG panels: scatter points, lines and histogram bars.

use std::fmt::Write;

const PANEL_W: f64 = 340.0;
const PANEL_H: f64 = 250.0;
const LEFT: f64 = 52.0;
const RIGHT: f64 = 12.0;
const TOP: f64 = 28.0;
const BOTTOM: f64 = 40.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mark {
    Points,
    Line,
    Bars,
}

#[derive(Clone, Debug)]
pub struct Series {
    pub label: String,
    pub color: String,
    pub mark: Mark,
    pub points: Vec<(f64, f64)>,
}

impl Series {
    pub fn new(label: impl Into<String>, color: &str, mark: Mark, points: Vec<(f64, f64)>) -> Self {
        Series {
            label: label.into(),
            color: color.to_string(),
            mark,
            points,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct Panel {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub series: Vec<Series>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Roughly five round tick values covering [lo, hi].
fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let span = (hi - lo).max(1e-12);
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| span / s <= 6.0)
        .unwrap_or(10.0 * mag);
    let mut out = Vec::new();
    let mut t = (lo / step).ceil() * step;
    while t <= hi + step * 1e-9 {
        out.push(if t.abs() < step * 1e-9 { 0.0 } else { t });
        t += step;
    }
    out
}

fn fmt_tick(v: f64) -> String {
    if v != 0.0 && (v.abs() >= 1e5 || v.abs() < 1e-3) {
        format!("{v:.0e}")
    } else {
        let s = format!("{v:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

impl Panel {
    fn bounds(&self) -> (f64, f64, f64, f64) {
        let mut xs = (f64::INFINITY, f64::NEG_INFINITY);
        let mut ys = (0.0f64, f64::NEG_INFINITY);
        for s in &self.series {
            for &(x, y) in &s.points {
                let x = if self.log_x { x.log10() } else { x };
                if x.is_finite() && y.is_finite() {
                    xs = (xs.0.min(x), xs.1.max(x));
                    ys = (ys.0.min(y), ys.1.max(y));
                }
            }
        }
        if !xs.0.is_finite() {
            return (0.0, 1.0, 0.0, 1.0);
        }
        let bar = self.series.iter().any(|s| s.mark == Mark::Bars);
        let pad = if bar {
            0.6
        } else {
            ((xs.1 - xs.0) * 0.04).max(1e-9)
        };
        let ypad = ((ys.1 - ys.0) * 0.08).max(1e-9);
        (xs.0 - pad, xs.1 + pad, ys.0, ys.1 + ypad)
    }

    fn render(&self, out: &mut String, ox: f64, oy: f64) {
        let (x0, x1, y0, y1) = self.bounds();
        let pw = PANEL_W - LEFT - RIGHT;
        let ph = PANEL_H - TOP - BOTTOM;
        let sx = |x: f64| {
            let x = if self.log_x { x.log10() } else { x };
            ox + LEFT + (x - x0) / (x1 - x0) * pw
        };
        let sy = |y: f64| oy + TOP + ph - (y - y0) / (y1 - y0) * ph;
        let _ = writeln!(
            out,
            r#"<g><text x="{:.1}" y="{:.1}" font-size="13" text-anchor="middle">{}</text>"#,
            ox + LEFT + pw / 2.0,
            oy + 16.0,
            escape(&self.title)
        );
        let _ = writeln!(
            out,
            r##"<rect x="{:.1}" y="{:.1}" width="{pw:.1}" height="{ph:.1}" fill="none" stroke="#444"/>"##,
            ox + LEFT,
            oy + TOP
        );
        for t in ticks(y0, y1) {
            let y = sy(t);
            let _ = writeln!(
                out,
                r##"<line x1="{:.1}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="#ddd"/><text x="{:.1}" y="{:.1}" font-size="10" text-anchor="end">{}</text>"##,
                ox + LEFT,
                ox + LEFT + pw,
                ox + LEFT - 4.0,
                y + 3.0,
                fmt_tick(t)
            );
        }
        for t in ticks(x0, x1) {
            let x = ox + LEFT + (t - x0) / (x1 - x0) * pw;
            let label = if self.log_x {
                fmt_tick(10f64.powf(t))
            } else {
                fmt_tick(t)
            };
            let _ = writeln!(
                out,
                r#"<text x="{x:.1}" y="{:.1}" font-size="10" text-anchor="middle">{label}</text>"#,
                oy + TOP + ph + 13.0
            );
        }
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" font-size="11" text-anchor="middle">{}</text>"#,
            ox + LEFT + pw / 2.0,
            oy + PANEL_H - 8.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" font-size="11" text-anchor="middle" transform="rotate(-90 {:.1} {:.1})">{}</text>"#,
            ox + 12.0,
            oy + TOP + ph / 2.0,
            ox + 12.0,
            oy + TOP + ph / 2.0,
            escape(&self.y_label)
        );
        let bars: Vec<usize> = (0..self.series.len())
            .filter(|&i| self.series[i].mark == Mark::Bars)
            .collect();
        for (si, s) in self.series.iter().enumerate() {
            match s.mark {
                Mark::Points => {
                    for &(x, y) in &s.points {
                        let _ = writeln!(
                            out,
                            r#"<circle cx="{:.1}" cy="{:.1}" r="2.2" fill="{}"/>"#,
                            sx(x),
                            sy(y),
                            s.color
                        );
                    }
                }
                Mark::Line => {
                    let pts: Vec<String> = s
                        .points
                        .iter()
                        .map(|&(x, y)| format!("{:.1},{:.1}", sx(x), sy(y)))
                        .collect();
                    let _ = writeln!(
                        out,
                        r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="1.5"/>"#,
                        pts.join(" "),
                        s.color
                    );
                }
                Mark::Bars => {
                    let slot = bars.iter().position(|&b| b == si).unwrap_or(0) as f64;
                    let unit = pw / (x1 - x0);
                    let w = 0.8 * unit / bars.len() as f64;
                    for &(x, y) in &s.points {
                        let left = sx(x) - 0.4 * unit + slot * w;
                        let top = sy(y.max(y0));
                        let _ = writeln!(
                            out,
                            r#"<rect x="{left:.1}" y="{top:.1}" width="{w:.1}" height="{:.1}" fill="{}" fill-opacity="0.75"/>"#,
                            (sy(y0) - top).max(0.0),
                            s.color
                        );
                    }
                }
            }
        }
        for (k, s) in self.series.iter().enumerate() {
            let y = oy + TOP + 12.0 + 13.0 * k as f64;
            let x = ox + PANEL_W - RIGHT - 110.0;
            let _ = writeln!(
                out,
                r#"<rect x="{x:.1}" y="{:.1}" width="9" height="9" fill="{}"/><text x="{:.1}" y="{:.1}" font-size="10">{}</text>"#,
                y - 8.0,
                s.color,
                x + 13.0,
                y,
                escape(&s.label)
            );
        }
        out.push_str("</g>\n");
    }
}

/// A grid of panels, `cols` per row, tagged with the config hash.
pub fn render(title: &str, config_hash: &str, panels: &[Panel], cols: usize) -> String {
    let cols = cols.max(1);
    let rows = panels.len().div_ceil(cols).max(1);
    let w = PANEL_W * cols as f64;
    let h = PANEL_H * rows as f64 + 30.0;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.0} {h:.0}" font-family="sans-serif">"#
    );
    let _ = writeln!(out, "<desc>config_hash={config_hash}</desc>");
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="20" font-size="15" text-anchor="middle">{}</text>"#,
        w / 2.0,
        escape(title)
    );
    for (k, p) in panels.iter().enumerate() {
        p.render(
            &mut out,
            PANEL_W * (k % cols) as f64,
            30.0 + PANEL_H * (k / cols) as f64,
        );
    }
    out.push_str("</svg>\n");
    out
}
