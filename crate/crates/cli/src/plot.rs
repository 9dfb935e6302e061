//! Static SVG line charts.

use std::fmt::Write;

const WIDTH: f64 = 760.0;
const HEIGHT: f64 = 440.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub dashed: bool,
}

impl Series {
    pub fn new(label: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Self {
            label: label.into(),
            points,
            dashed: false,
        }
    }

    pub fn dashed(mut self) -> Self {
        self.dashed = true;
        self
    }
}

#[derive(Debug, Clone, Default)]
pub struct Chart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    /// Base-10 log axis; nonpositive values are dropped.
    pub log_y: bool,
    pub series: Vec<Series>,
}

struct Axis {
    lo: f64,
    hi: f64,
}

impl Axis {
    fn span(lo: f64, hi: f64) -> Self {
        if (hi - lo).abs() < 1e-12 {
            let pad = lo.abs().max(1.0) * 0.05;
            Axis { lo: lo - pad, hi: hi + pad }
        } else {
            Axis { lo, hi }
        }
    }

    fn map(&self, v: f64, from: f64, to: f64) -> f64 {
        from + (v - self.lo) / (self.hi - self.lo) * (to - from)
    }
}

/// Round step of roughly `span / target` from {1, 2, 5}·10^k.
fn nice_step(span: f64, target: f64) -> f64 {
    let raw = span / target;
    let mag = 10f64.powf(raw.log10().floor());
    let norm = raw / mag;
    let m = if norm < 1.5 {
        1.0
    } else if norm < 3.5 {
        2.0
    } else if norm < 7.5 {
        5.0
    } else {
        10.0
    };
    m * mag
}

fn linear_ticks(axis: &Axis) -> Vec<f64> {
    let step = nice_step(axis.hi - axis.lo, 6.0);
    let mut v = (axis.lo / step).ceil() * step;
    let mut out = Vec::new();
    while v <= axis.hi + step * 1e-9 {
        out.push(if v.abs() < step * 1e-9 { 0.0 } else { v });
        v += step;
    }
    out
}

fn fmt_tick(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if v.abs() >= 1e4 || v.abs() < 1e-3 {
        format!("{v:.0e}")
    } else {
        let s = format!("{v:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

impl Chart {
    pub fn new(title: impl Into<String>, x_label: impl Into<String>, y_label: impl Into<String>) -> Self {
        Self {
            title: title.into(),
            x_label: x_label.into(),
            y_label: y_label.into(),
            ..Self::default()
        }
    }

    pub fn log_y(mut self) -> Self {
        self.log_y = true;
        self
    }

    pub fn push(&mut self, s: Series) {
        self.series.push(s);
    }

    fn transformed(&self) -> Vec<Vec<(f64, f64)>> {
        self.series
            .iter()
            .map(|s| {
                s.points
                    .iter()
                    .filter(|(x, y)| x.is_finite() && y.is_finite() && (!self.log_y || *y > 0.0))
                    .map(|&(x, y)| (x, if self.log_y { y.log10() } else { y }))
                    .collect()
            })
            .collect()
    }

    pub fn to_svg(&self) -> String {
        let data = self.transformed();
        let all = data.iter().flatten();
        let (mut x_lo, mut x_hi, mut y_lo, mut y_hi) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for &(x, y) in all {
            x_lo = x_lo.min(x);
            x_hi = x_hi.max(x);
            y_lo = y_lo.min(y);
            y_hi = y_hi.max(y);
        }
        if !x_lo.is_finite() {
            (x_lo, x_hi, y_lo, y_hi) = (0.0, 1.0, 0.0, 1.0);
        }
        if self.log_y {
            y_lo = y_lo.floor();
            y_hi = y_hi.ceil();
        }
        let xa = Axis::span(x_lo, x_hi);
        let ya = Axis::span(y_lo, y_hi);
        let (px0, px1) = (LEFT, WIDTH - RIGHT);
        let (py0, py1) = (HEIGHT - BOTTOM, TOP);

        let mut svg = String::new();
        let _ = writeln!(
            svg,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="22" text-anchor="middle" font-size="15">{}</text>"#,
            (px0 + px1) / 2.0,
            escape(&self.title)
        );

        for t in linear_ticks(&xa) {
            let x = xa.map(t, px0, px1);
            let _ = writeln!(
                svg,
                "<line x1=\"{x:.2}\" y1=\"{py0:.2}\" x2=\"{x:.2}\" y2=\"{py1:.2}\" stroke=\"#e5e5e5\"/>"
            );
            let _ = writeln!(
                svg,
                r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
                py0 + 18.0,
                fmt_tick(t)
            );
        }
        let y_ticks: Vec<f64> = if self.log_y {
            let step = ((ya.hi - ya.lo) / 8.0).ceil().max(1.0);
            let mut v = ya.lo;
            let mut out = Vec::new();
            while v <= ya.hi + 1e-9 {
                out.push(v);
                v += step;
            }
            out
        } else {
            linear_ticks(&ya)
        };
        for t in y_ticks {
            let y = ya.map(t, py0, py1);
            let label = if self.log_y { format!("1e{t:.0}") } else { fmt_tick(t) };
            let _ = writeln!(
                svg,
                "<line x1=\"{px0:.2}\" y1=\"{y:.2}\" x2=\"{px1:.2}\" y2=\"{y:.2}\" stroke=\"#e5e5e5\"/>"
            );
            let _ = writeln!(
                svg,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{label}</text>"#,
                px0 - 6.0,
                y + 4.0
            );
        }
        let _ = writeln!(
            svg,
            r#"<rect x="{px0:.2}" y="{py1:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="black"/>"#,
            px1 - px0,
            py0 - py1
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            (px0 + px1) / 2.0,
            HEIGHT - 12.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            svg,
            r#"<text transform="translate(16 {:.1}) rotate(-90)" text-anchor="middle">{}</text>"#,
            (py0 + py1) / 2.0,
            escape(&self.y_label)
        );

        for (k, (s, pts)) in self.series.iter().zip(&data).enumerate() {
            let color = PALETTE[k % PALETTE.len()];
            let dash = if s.dashed { r#" stroke-dasharray="6 4""# } else { "" };
            if !pts.is_empty() {
                let mut path = String::new();
                for (m, &(x, y)) in pts.iter().enumerate() {
                    let _ = write!(
                        path,
                        "{}{:.2},{:.2}",
                        if m == 0 { "M" } else { " L" },
                        xa.map(x, px0, px1),
                        ya.map(y, py0, py1)
                    );
                }
                let _ = writeln!(
                    svg,
                    r#"<path d="{path}" fill="none" stroke="{color}" stroke-width="1.5"{dash}/>"#
                );
            }
            let ly = TOP + 14.0 + 18.0 * k as f64;
            let lx = px1 + 12.0;
            let _ = writeln!(
                svg,
                r#"<line x1="{lx:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{color}" stroke-width="2"{dash}/>"#,
                lx + 22.0
            );
            let _ = writeln!(
                svg,
                r#"<text x="{:.1}" y="{:.1}">{}</text>"#,
                lx + 28.0,
                ly + 4.0,
                escape(&s.label)
            );
        }
        svg.push_str("</svg>\n");
        svg
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nice_steps() {
        assert_eq!(nice_step(20.0, 6.0), 2.0);
        assert_eq!(nice_step(30.0, 6.0), 5.0);
        assert_eq!(nice_step(1.0, 6.0), 0.2);
        assert_eq!(nice_step(0.9, 6.0), 0.1);
    }

    #[test]
    fn one_path_per_series() {
        let mut c = Chart::new("t", "x", "y");
        c.push(Series::new("a", vec![(0.0, 1.0), (1.0, 2.0)]));
        c.push(Series::new("b<", vec![(0.0, 3.0), (1.0, 0.5)]).dashed());
        let svg = c.to_svg();
        assert_eq!(svg.matches("<path").count(), 2);
        assert!(svg.contains("b&lt;"));
        assert!(svg.ends_with("</svg>\n"));
    }

    #[test]
    fn log_axis_drops_nonpositive() {
        let mut c = Chart::new("t", "x", "y").log_y();
        c.push(Series::new("a", vec![(0.0, 1.0), (1.0, 0.0), (2.0, 0.01)]));
        let svg = c.to_svg();
        assert!(svg.contains("1e-2"));
        assert!(svg.contains("1e0"));
        assert_eq!(svg.matches(" L").count(), 1);
    }
}
