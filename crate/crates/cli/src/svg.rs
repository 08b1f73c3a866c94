//! Minimal deterministic SVG phase portraits.

use std::fmt::Write;

use hidden_dynamics::hidden::MultilinearCoeffs;

use crate::error::{CliError, Result};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 640.0;
const MARGIN: f64 = 60.0;
const MAX_POINTS: usize = 4000;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LineStyle {
    Solid,
    Dashed,
    Dotted,
}

#[derive(Clone, Debug)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub style: LineStyle,
    /// Index into the palette; `None` draws in grey.
    pub color: Option<usize>,
}

impl Series {
    pub fn trajectory(label: impl Into<String>, points: Vec<(f64, f64)>, color: usize) -> Self {
        Series { label: label.into(), points, style: LineStyle::Solid, color: Some(color) }
    }
}

#[derive(Clone, Debug)]
pub struct PhasePlot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    /// Draw the square [−1, 1]².
    pub unit_box: bool,
    pub series: Vec<Series>,
    pub markers: Vec<(String, (f64, f64))>,
}

impl PhasePlot {
    pub fn new(title: impl Into<String>, x_range: (f64, f64), y_range: (f64, f64)) -> Self {
        PhasePlot {
            title: title.into(),
            x_label: "u".into(),
            y_label: "v".into(),
            x_range,
            y_range,
            unit_box: true,
            series: vec![],
            markers: vec![],
        }
    }

    /// Both nullclines of a bilinear field, dotted.
    pub fn with_nullclines(mut self, coeffs: &MultilinearCoeffs<f64>) -> Self {
        for (k, form) in [&coeffs.u, &coeffs.v].into_iter().enumerate() {
            for piece in nullcline_pieces(form.a, form.b, form.c, form.d, self.x_range, self.y_range) {
                self.series.push(Series {
                    label: if k == 0 { "u-nullcline".into() } else { "v-nullcline".into() },
                    points: piece,
                    style: LineStyle::Dotted,
                    color: None,
                });
            }
        }
        self
    }

    pub fn render(&self) -> Result<String> {
        if self.series.iter().all(|s| s.points.is_empty()) && self.markers.is_empty() {
            return Err(CliError::usage(format!("plot '{}' has no data", self.title)));
        }
        let (x0, x1) = self.x_range;
        let (y0, y1) = self.y_range;
        if !(x1 > x0 && y1 > y0) {
            return Err(CliError::usage("plot ranges must be nonempty"));
        }
        let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
        let sy = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);

        let mut out = String::new();
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(out, r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#, WIDTH / 2.0, escape(&self.title));
        let _ = writeln!(
            out,
            r#"<rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}" fill="none" stroke="black"/>"#,
            WIDTH - 2.0 * MARGIN,
            HEIGHT - 2.0 * MARGIN
        );
        for k in 0..=4 {
            let x = x0 + (x1 - x0) * k as f64 / 4.0;
            let y = y0 + (y1 - y0) * k as f64 / 4.0;
            let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, sx(x), HEIGHT - MARGIN + 16.0, tick(x));
            let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#, MARGIN - 6.0, sy(y) + 4.0, tick(y));
        }
        let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, WIDTH / 2.0, HEIGHT - 18.0, escape(&self.x_label));
        let _ = writeln!(
            out,
            r#"<text x="18" y="{}" text-anchor="middle" transform="rotate(-90 18 {})">{}</text>"#,
            HEIGHT / 2.0,
            HEIGHT / 2.0,
            escape(&self.y_label)
        );
        let _ = writeln!(
            out,
            r#"<clipPath id="frame"><rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}"/></clipPath>"#,
            WIDTH - 2.0 * MARGIN,
            HEIGHT - 2.0 * MARGIN
        );
        let _ = writeln!(out, r#"<g clip-path="url(#frame)">"#);
        if self.unit_box {
            let _ = writeln!(
                out,
                r##"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="#555" stroke-width="1.2"/>"##,
                sx(-1.0),
                sy(1.0),
                sx(1.0) - sx(-1.0),
                sy(-1.0) - sy(1.0)
            );
        }
        for s in &self.series {
            if s.points.len() < 2 {
                continue;
            }
            let stride = s.points.len().div_ceil(MAX_POINTS);
            let mut path = String::new();
            for (k, (x, y)) in s.points.iter().enumerate().filter(|(k, _)| k % stride == 0 || *k == s.points.len() - 1) {
                let _ = write!(path, "{}{:.2},{:.2}", if k == 0 { "M" } else { " L" }, sx(*x), sy(*y));
            }
            let dash = match s.style {
                LineStyle::Solid => "",
                LineStyle::Dashed => r#" stroke-dasharray="8 5""#,
                LineStyle::Dotted => r#" stroke-dasharray="2 4""#,
            };
            let color = s.color.map_or("#777", |c| PALETTE[c % PALETTE.len()]);
            let _ = writeln!(
                out,
                r#"<path d="{path}" fill="none" stroke="{color}" stroke-width="1.4"{dash}><title>{}</title></path>"#,
                escape(&s.label)
            );
        }
        for (label, (x, y)) in &self.markers {
            let _ = writeln!(
                out,
                r#"<circle cx="{:.2}" cy="{:.2}" r="3.5" fill="black"><title>{}</title></circle>"#,
                sx(*x),
                sy(*y),
                escape(label)
            );
        }
        let _ = writeln!(out, "</g>");
        let mut ly = MARGIN + 14.0;
        for s in self.series.iter().filter(|s| s.color.is_some()) {
            let color = PALETTE[s.color.unwrap_or(0) % PALETTE.len()];
            let _ = writeln!(
                out,
                r#"<text x="{:.2}" y="{ly:.2}" fill="{color}">{}</text>"#,
                MARGIN + 8.0,
                escape(&s.label)
            );
            ly += 14.0;
        }
        out.push_str("</svg>\n");
        Ok(out)
    }
}

fn tick(x: f64) -> String {
    let s = format!("{x:.2}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Zero set of a·uv + b·u + c·v + d: v = −(b u + d)/(a u + c), split at the pole,
/// or the vertical line u = −c/a when that expression is degenerate.
fn nullcline_pieces(a: f64, b: f64, c: f64, d: f64, xr: (f64, f64), yr: (f64, f64)) -> Vec<Vec<(f64, f64)>> {
    let n = 800;
    let mut pieces = vec![];
    let mut cur: Vec<(f64, f64)> = vec![];
    let span = yr.1 - yr.0;
    for k in 0..=n {
        let u = xr.0 + (xr.1 - xr.0) * k as f64 / n as f64;
        let den = a * u + c;
        let v = if den.abs() < 1e-12 { f64::NAN } else { -(b * u + d) / den };
        if v.is_finite() && v > yr.0 - span && v < yr.1 + span {
            cur.push((u, v));
        } else if !cur.is_empty() {
            pieces.push(std::mem::take(&mut cur));
        }
    }
    if !cur.is_empty() {
        pieces.push(cur);
    }
    // b·u + d ≡ 0 along u = −c/a when a·d = b·c: the zero set contains a vertical line
    if a != 0.0 && (a * d - b * c).abs() < 1e-12 {
        let u = -c / a;
        pieces.push(vec![(u, yr.0), (u, yr.1)]);
    }
    pieces
}
