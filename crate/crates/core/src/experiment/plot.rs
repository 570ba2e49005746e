use std::fmt::Write;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 56.0;
const COLORS: &[&str] = &["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"];

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

/// A polyline chart rendered straight to SVG.
#[derive(Debug, Clone, PartialEq)]
pub struct LinePlot {
    /// File stem.
    pub name: String,
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    /// Dashed horizontal guide, usually at ratio 1.
    pub guide: Option<f64>,
    pub series: Vec<Series>,
}

impl LinePlot {
    pub fn new(name: &str, title: &str, x_label: &str, y_label: &str) -> Self {
        Self {
            name: name.into(),
            title: title.into(),
            x_label: x_label.into(),
            y_label: y_label.into(),
            log_x: true,
            guide: Some(1.0),
            series: Vec::new(),
        }
    }

    pub fn add(&mut self, label: impl Into<String>, points: Vec<(f64, f64)>) {
        let points: Vec<(f64, f64)> = points
            .into_iter()
            .filter(|(x, y)| x.is_finite() && y.is_finite() && (!self.log_x || *x > 0.0))
            .collect();
        if !points.is_empty() {
            self.series.push(Series {
                label: label.into(),
                points,
            });
        }
    }

    fn bounds(&self) -> ((f64, f64), (f64, f64)) {
        let fx = |x: f64| if self.log_x { x.log10() } else { x };
        let pts = self.series.iter().flat_map(|s| s.points.iter());
        let mut xb = (f64::INFINITY, f64::NEG_INFINITY);
        let mut yb = self.guide.map_or((f64::INFINITY, f64::NEG_INFINITY), |g| (g, g));
        for &(x, y) in pts {
            xb = (xb.0.min(fx(x)), xb.1.max(fx(x)));
            yb = (yb.0.min(y), yb.1.max(y));
        }
        let widen = |(a, b): (f64, f64)| {
            if !a.is_finite() {
                (0.0, 1.0)
            } else if b - a < 1e-12 {
                (a - 0.5, b + 0.5)
            } else {
                (a, b)
            }
        };
        let (y0, y1) = widen(yb);
        let pad = 0.05 * (y1 - y0);
        (widen(xb), (y0 - pad, y1 + pad))
    }

    pub fn to_svg(&self) -> String {
        let ((x0, x1), (y0, y1)) = self.bounds();
        let fx = |x: f64| if self.log_x { x.log10() } else { x };
        let px = |x: f64| MARGIN + (fx(x) - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
        let py = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(
            s,
            r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#,
            WIDTH / 2.0,
            escape(&self.title)
        );
        // axes
        let (left, right, top, bottom) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
        let _ = writeln!(
            s,
            r#"<path d="M{left} {top} L{left} {bottom} L{right} {bottom}" stroke="black" fill="none"/>"#
        );
        for i in 0..=4 {
            let f = i as f64 / 4.0;
            let xv = x0 + f * (x1 - x0);
            let xpos = left + f * (right - left);
            let label = if self.log_x { 10f64.powf(xv) } else { xv };
            let _ = writeln!(
                s,
                r#"<line x1="{xpos:.1}" y1="{bottom}" x2="{xpos:.1}" y2="{:.1}" stroke="black"/><text x="{xpos:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
                bottom + 4.0,
                bottom + 18.0,
                tick(label)
            );
            let yv = y0 + f * (y1 - y0);
            let ypos = bottom - f * (bottom - top);
            let _ = writeln!(
                s,
                r#"<line x1="{:.1}" y1="{ypos:.1}" x2="{left}" y2="{ypos:.1}" stroke="black"/><text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
                left - 4.0,
                left - 6.0,
                ypos + 4.0,
                tick(yv)
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            WIDTH / 2.0,
            HEIGHT - 12.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            s,
            r#"<text x="14" y="{}" text-anchor="middle" transform="rotate(-90 14 {})">{}</text>"#,
            HEIGHT / 2.0,
            HEIGHT / 2.0,
            escape(&self.y_label)
        );
        if let Some(g) = self.guide {
            let y = py(g);
            let _ = writeln!(
                s,
                r##"<line x1="{left}" y1="{y:.1}" x2="{right}" y2="{y:.1}" stroke="#888" stroke-dasharray="4 4"/>"##
            );
        }
        for (k, series) in self.series.iter().enumerate() {
            let color = COLORS[k % COLORS.len()];
            let pts: Vec<String> = series
                .points
                .iter()
                .map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y)))
                .collect();
            let _ = writeln!(
                s,
                r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
                pts.join(" ")
            );
            for &(x, y) in &series.points {
                let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="{color}"/>"#, px(x), py(y));
            }
            let ly = top + 14.0 * k as f64;
            let _ = writeln!(
                s,
                r#"<line x1="{:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{color}" stroke-width="2"/><text x="{:.1}" y="{:.1}">{}</text>"#,
                right - 120.0,
                right - 100.0,
                right - 96.0,
                ly + 4.0,
                escape(&series.label)
            );
        }
        s.push_str("</svg>\n");
        s
    }
}

fn tick(v: f64) -> String {
    if v != 0.0 && (v.abs() >= 1e4 || v.abs() < 1e-2) {
        format!("{v:.1e}")
    } else {
        format!("{}", (v * 1000.0).round() / 1000.0)
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_one_polyline_per_series() {
        let mut p = LinePlot::new("r", "ratio <vs> x", "x", "ratio");
        p.add("a", vec![(10.0, 1.2), (100.0, 1.05), (1000.0, 1.01)]);
        p.add("b", vec![(10.0, 0.8), (100.0, f64::NAN), (1000.0, 0.97)]);
        p.add("empty", vec![(0.0, 1.0)]);
        let svg = p.to_svg();
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert_eq!(svg.matches("<circle").count(), 5);
        assert!(svg.contains("ratio &lt;vs&gt; x"));
    }

    #[test]
    fn empty_plot_is_valid() {
        let svg = LinePlot::new("e", "t", "x", "y").to_svg();
        assert!(!svg.contains("NaN") && !svg.contains("inf"));
    }
}
