//! Minimal self-contained SVG charts: axes, polylines and circle markers.

use std::fmt::Write;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 64.0;
const RIGHT: f64 = 16.0;
const TOP: f64 = 36.0;
const BOTTOM: f64 = 48.0;

pub const BLACK: &str = "#000000";
pub const BLUE: &str = "#1f5fbf";
pub const RED: &str = "#d62728";
pub const GRAY: &str = "#7f7f7f";

pub struct Chart {
    title: String,
    x_label: String,
    y_label: String,
    x_range: (f64, f64),
    y_range: (f64, f64),
    body: String,
}

/// Escapes text for use inside an SVG element.
fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn num(v: f64) -> String {
    format!("{v:.2}")
}

impl Chart {
    pub fn new(title: &str, x_label: &str, y_label: &str, x_range: (f64, f64), y_range: (f64, f64)) -> Self {
        let widen = |(lo, hi): (f64, f64)| if hi > lo { (lo, hi) } else { (lo - 0.5, hi + 0.5) };
        Self {
            title: title.into(),
            x_label: x_label.into(),
            y_label: y_label.into(),
            x_range: widen(x_range),
            y_range: widen(y_range),
            body: String::new(),
        }
    }

    fn px(&self, x: f64) -> f64 {
        let (lo, hi) = self.x_range;
        LEFT + (x - lo) / (hi - lo) * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        let (lo, hi) = self.y_range;
        HEIGHT - BOTTOM - (y - lo) / (hi - lo) * (HEIGHT - TOP - BOTTOM)
    }

    pub fn polyline(&mut self, xs: &[f64], ys: &[f64], color: &str, opacity: f64) {
        let mut points = String::new();
        for (x, y) in xs.iter().zip(ys) {
            let yc = y.clamp(self.y_range.0, self.y_range.1);
            let _ = write!(points, "{},{} ", num(self.px(*x)), num(self.py(yc)));
        }
        let _ = writeln!(
            self.body,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.2" stroke-opacity="{opacity}" points="{}"/>"#,
            points.trim_end()
        );
    }

    pub fn circles(&mut self, pts: &[(f64, f64)], color: &str, radius: f64, opacity: f64) {
        for &(x, y) in pts {
            let _ = writeln!(
                self.body,
                r#"<circle cx="{}" cy="{}" r="{radius}" fill="{color}" fill-opacity="{opacity}"/>"#,
                num(self.px(x)),
                num(self.py(y))
            );
        }
    }

    /// A legend entry in the top-right corner; `slot` counts down from the top.
    pub fn legend(&mut self, slot: usize, label: &str, color: &str) {
        let y = TOP + 14.0 + 16.0 * slot as f64;
        let x = WIDTH - RIGHT - 120.0;
        let _ = writeln!(
            self.body,
            r#"<rect x="{}" y="{}" width="10" height="10" fill="{color}"/><text x="{}" y="{}" font-size="12">{}</text>"#,
            num(x),
            num(y - 9.0),
            num(x + 16.0),
            num(y),
            escape(label)
        );
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif">"#
        );
        let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(
            s,
            r#"<text x="{}" y="22" font-size="14" text-anchor="middle">{}</text>"#,
            WIDTH / 2.0,
            escape(&self.title)
        );
        let (x0, x1) = (self.px(self.x_range.0), self.px(self.x_range.1));
        let (y0, y1) = (self.py(self.y_range.0), self.py(self.y_range.1));
        let _ = writeln!(
            s,
            r#"<g class="axes" stroke="black" stroke-width="1"><line x1="{}" y1="{}" x2="{}" y2="{}"/><line x1="{}" y1="{}" x2="{}" y2="{}"/></g>"#,
            num(x0), num(y0), num(x1), num(y0), num(x0), num(y0), num(x0), num(y1)
        );
        for i in 0..=4 {
            let f = i as f64 / 4.0;
            let xv = self.x_range.0 + f * (self.x_range.1 - self.x_range.0);
            let yv = self.y_range.0 + f * (self.y_range.1 - self.y_range.0);
            let _ = writeln!(
                s,
                r#"<text class="xtick" x="{}" y="{}" font-size="11" text-anchor="middle">{}</text>"#,
                num(self.px(xv)),
                num(y0 + 16.0),
                num(xv)
            );
            let _ = writeln!(
                s,
                r#"<text class="ytick" x="{}" y="{}" font-size="11" text-anchor="end">{}</text>"#,
                num(x0 - 6.0),
                num(self.py(yv) + 4.0),
                num(yv)
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-size="12" text-anchor="middle">{}</text>"#,
            num((x0 + x1) / 2.0),
            num(HEIGHT - 10.0),
            escape(&self.x_label)
        );
        let _ = writeln!(
            s,
            r#"<text x="14" y="{}" font-size="12" text-anchor="middle" transform="rotate(-90 14 {})">{}</text>"#,
            num((y0 + y1) / 2.0),
            num((y0 + y1) / 2.0),
            escape(&self.y_label)
        );
        s.push_str(&self.body);
        s.push_str("</svg>\n");
        s
    }
}
