//! Minimal self-contained SVG line plots.

use crate::numfmt::short;
use std::fmt::Write;

const PANEL_W: f64 = 520.0;
const PANEL_H: f64 = 400.0;
const LEFT: f64 = 78.0;
const RIGHT: f64 = 24.0;
const TOP: f64 = 42.0;
const BOTTOM: f64 = 54.0;

pub const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"];

#[derive(Clone, Debug)]
pub struct Series {
    pub label: String,
    pub segments: Vec<Vec<(f64, f64)>>,
    pub color: String,
    pub dashed: bool,
}

impl Series {
    pub fn line(label: impl Into<String>, points: Vec<(f64, f64)>, color: &str) -> Self {
        Series { label: label.into(), segments: vec![points], color: color.into(), dashed: false }
    }

    pub fn dashed(mut self) -> Self {
        self.dashed = true;
        self
    }
}

#[derive(Clone, Debug, Default)]
pub struct Panel {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub x_log: bool,
    pub y_log: bool,
    pub x_range: Option<(f64, f64)>,
    pub y_range: Option<(f64, f64)>,
    pub series: Vec<Series>,
}

struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Axis {
    fn fit(values: impl Iterator<Item = f64>, log: bool, fixed: Option<(f64, f64)>) -> Axis {
        let (mut lo, mut hi) = match fixed {
            Some((a, b)) => (tr(a, log), tr(b, log)),
            None => values.filter_map(|v| usable(v, log)).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v))),
        };
        if !lo.is_finite() || !hi.is_finite() {
            (lo, hi) = (0.0, 1.0);
        }
        if hi - lo < 1e-12 * lo.abs().max(1.0) {
            lo -= 0.5;
            hi += 0.5;
        }
        Axis { lo, hi, log }
    }

    fn frac(&self, v: f64) -> Option<f64> {
        usable(v, self.log).map(|t| (t - self.lo) / (self.hi - self.lo))
    }

    /// Tick positions in transformed units with their labels.
    fn ticks(&self) -> Vec<(f64, String)> {
        if self.log {
            let (a, b) = (self.lo.ceil() as i64, self.hi.floor() as i64);
            let stride = ((b - a) / 7 + 1).max(1);
            return (a..=b).filter(|k| (k - a) % stride == 0).map(|k| (k as f64, format!("1e{k}"))).collect();
        }
        let raw = (self.hi - self.lo) / 5.0;
        let mag = 10f64.powf(raw.log10().floor());
        let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| *s >= raw).unwrap_or(10.0 * mag);
        let first = (self.lo / step).ceil() as i64;
        let last = (self.hi / step).floor() as i64;
        (first..=last)
            .map(|k| {
                let v = k as f64 * step;
                (v, short((v / step).round() * step))
            })
            .collect()
    }
}

fn tr(v: f64, log: bool) -> f64 {
    if log {
        v.log10()
    } else {
        v
    }
}

fn usable(v: f64, log: bool) -> Option<f64> {
    let t = tr(v, log);
    (v.is_finite() && (!log || v > 0.0) && t.is_finite()).then_some(t)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Panels laid out left to right. `command` is recorded in a comment (with
/// `--` split, which XML forbids there) and verbatim in `<desc>`.
pub fn render(panels: &[Panel], command: &str) -> String {
    let width = PANEL_W * panels.len().max(1) as f64;
    let mut out = String::new();
    writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#).unwrap();
    writeln!(out, "<!-- {} -->", command.replace("--", "- -")).unwrap();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{PANEL_H}" viewBox="0 0 {width} {PANEL_H}" font-family="sans-serif" font-size="12">"#
    )
    .unwrap();
    writeln!(out, "<desc>{}</desc>", escape(command)).unwrap();
    writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    for (i, panel) in panels.iter().enumerate() {
        draw_panel(&mut out, panel, i as f64 * PANEL_W);
    }
    out.push_str("</svg>\n");
    out
}

fn draw_panel(out: &mut String, p: &Panel, x0: f64) {
    let pts = || p.series.iter().flat_map(|s| s.segments.iter().flatten());
    let xa = Axis::fit(pts().map(|q| q.0), p.x_log, p.x_range);
    let ya = Axis::fit(pts().map(|q| q.1), p.y_log, p.y_range);
    let (pw, ph) = (PANEL_W - LEFT - RIGHT, PANEL_H - TOP - BOTTOM);
    let (left, top) = (x0 + LEFT, TOP);
    let px = |f: f64| left + f * pw;
    let py = |f: f64| top + (1.0 - f) * ph;

    writeln!(out, r#"<g>"#).unwrap();
    writeln!(out, r#"<text x="{:.2}" y="24" text-anchor="middle" font-size="14">{}</text>"#, left + pw / 2.0, escape(&p.title)).unwrap();
    writeln!(out, r##"<rect x="{left:.2}" y="{top:.2}" width="{pw:.2}" height="{ph:.2}" fill="none" stroke="#333"/>"##).unwrap();
    for (t, label) in xa.ticks() {
        let x = px((t - xa.lo) / (xa.hi - xa.lo));
        writeln!(out, r##"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="#333"/>"##, top + ph, top + ph + 5.0).unwrap();
        writeln!(out, r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, top + ph + 18.0, escape(&label)).unwrap();
    }
    for (t, label) in ya.ticks() {
        let y = py((t - ya.lo) / (ya.hi - ya.lo));
        writeln!(out, r##"<line x1="{:.2}" y1="{y:.2}" x2="{left:.2}" y2="{y:.2}" stroke="#333"/>"##, left - 5.0).unwrap();
        writeln!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#, left - 8.0, y + 4.0, escape(&label)).unwrap();
    }
    writeln!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, left + pw / 2.0, PANEL_H - 12.0, escape(&p.x_label)).unwrap();
    writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" transform="rotate(-90 {:.2} {:.2})">{}</text>"#,
        x0 + 16.0,
        top + ph / 2.0,
        x0 + 16.0,
        top + ph / 2.0,
        escape(&p.y_label)
    )
    .unwrap();

    for (k, s) in p.series.iter().enumerate() {
        let dash = if s.dashed { r#" stroke-dasharray="6 4""# } else { "" };
        for seg in &s.segments {
            // split at unplottable or out-of-frame points
            let mut run: Vec<(f64, f64)> = Vec::new();
            let mut flush = |run: &mut Vec<(f64, f64)>| {
                if run.len() >= 2 {
                    let coords: Vec<String> = run.iter().map(|(a, b)| format!("{a:.2},{b:.2}")).collect();
                    writeln!(out, r#"<polyline fill="none" stroke="{}" stroke-width="1.5"{dash} points="{}"/>"#, s.color, coords.join(" ")).unwrap();
                }
                run.clear();
            };
            for &(x, y) in seg {
                match (xa.frac(x), ya.frac(y)) {
                    (Some(fx), Some(fy)) if (-1e-9..=1.0 + 1e-9).contains(&fx) && (-1e-9..=1.0 + 1e-9).contains(&fy) => {
                        run.push((px(fx), py(fy)))
                    }
                    _ => flush(&mut run),
                }
            }
            flush(&mut run);
        }
        if !s.label.is_empty() {
            let ly = top + 14.0 + 16.0 * k as f64;
            let lx = left + pw - 150.0;
            writeln!(out, r#"<line x1="{lx:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{}" stroke-width="1.5"{dash}/>"#, ly - 4.0, lx + 22.0, ly - 4.0, s.color).unwrap();
            writeln!(out, r#"<text x="{:.2}" y="{ly:.2}">{}</text>"#, lx + 28.0, escape(&s.label)).unwrap();
        }
    }
    writeln!(out, "</g>").unwrap();
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn self_contained_and_commented() {
        let panel = Panel {
            title: "a < b".into(),
            x_log: true,
            series: vec![Series::line("s", vec![(0.01, 1.0), (1.0, 2.0), (100.0, 0.5)], PALETTE[0])],
            ..Panel::default()
        };
        let svg = render(&[panel], "freenormal curve --xmin 0.01");
        assert!(svg.contains("<!-- freenormal curve - -xmin 0.01 -->"));
        assert!(svg.contains("<desc>freenormal curve --xmin 0.01</desc>"));
        assert!(svg.contains("a &lt; b"));
        assert!(svg.contains("<polyline"));
        assert!(!svg.contains("href"));
        assert!(svg.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn log_axis_skips_nonpositive() {
        let panel = Panel {
            y_log: true,
            series: vec![Series::line("", vec![(0.0, 1.0), (1.0, 0.0), (2.0, 10.0), (3.0, 100.0)], PALETTE[1])],
            ..Panel::default()
        };
        let svg = render(&[panel], "x");
        assert_eq!(svg.matches("<polyline").count(), 1);
    }
}
