//! Static SVG 1.1 line charts of sweep results.

use std::fmt::Write as _;
use std::io;
use std::path::{Path, PathBuf};

use crate::geometry::embed_angles;
use crate::sweep::{ParamSplines, SweepResult};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub dashed: bool,
    pub markers: bool,
}

impl Series {
    pub fn line(label: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Series { label: label.into(), points, dashed: false, markers: false }
    }

    pub fn dashed(mut self) -> Self {
        self.dashed = true;
        self
    }

    pub fn with_markers(mut self) -> Self {
        self.markers = true;
        self
    }
}

#[derive(Debug, Clone)]
pub struct Chart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
    /// Same scale on both axes.
    pub equal_aspect: bool,
}

impl Chart {
    pub fn new(title: &str, x_label: &str, y_label: &str) -> Self {
        Chart {
            title: title.into(),
            x_label: x_label.into(),
            y_label: y_label.into(),
            series: Vec::new(),
            equal_aspect: false,
        }
    }

    pub fn add(mut self, s: Series) -> Self {
        self.series.push(s);
        self
    }

    fn extent(&self) -> (f64, f64, f64, f64) {
        let pts = self.series.iter().flat_map(|s| s.points.iter());
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for &(x, y) in pts {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
        if !x0.is_finite() {
            return (0.0, 1.0, 0.0, 1.0);
        }
        let pad = |lo: f64, hi: f64| if hi - lo < 1e-12 { (lo - 0.5, hi + 0.5) } else { (lo, hi) };
        let (x0, x1) = pad(x0, x1);
        let (y0, y1) = pad(y0, y1);
        (x0, x1, y0, y1)
    }

    pub fn render(&self) -> String {
        let (pw, ph) = (WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM);
        let (mut x0, mut x1, mut y0, mut y1) = self.extent();
        let (xt, yt);
        if self.equal_aspect {
            let scale = ((x1 - x0) / pw).max((y1 - y0) / ph) * 1.05;
            let (cx, cy) = ((x0 + x1) / 2.0, (y0 + y1) / 2.0);
            x0 = cx - scale * pw / 2.0;
            x1 = cx + scale * pw / 2.0;
            y0 = cy - scale * ph / 2.0;
            y1 = cy + scale * ph / 2.0;
            xt = ticks(x0, x1);
            yt = ticks(y0, y1);
        } else {
            xt = ticks(x0, x1);
            yt = ticks(y0, y1);
            x0 = x0.min(xt[0]);
            x1 = x1.max(*xt.last().unwrap());
            y0 = y0.min(yt[0]);
            y1 = y1.max(*yt.last().unwrap());
        }
        let px = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
        let py = |y: f64| TOP + (y1 - y) / (y1 - y0) * ph;

        let mut s = String::new();
        let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
        let _ = writeln!(s, r#"<text x="{:.2}" y="22" text-anchor="middle" font-size="14">{}</text>"#, WIDTH / 2.0, escape(&self.title));

        for &t in xt.iter().filter(|&&t| t >= x0 && t <= x1) {
            let x = px(t);
            let _ = writeln!(s, r##"<line x1="{x:.2}" y1="{TOP:.2}" x2="{x:.2}" y2="{:.2}" stroke="#e0e0e0"/>"##, TOP + ph);
            let _ = writeln!(s, r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, TOP + ph + 16.0, label(t));
        }
        for &t in yt.iter().filter(|&&t| t >= y0 && t <= y1) {
            let y = py(t);
            let _ = writeln!(s, r##"<line x1="{LEFT:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#e0e0e0"/>"##, LEFT + pw);
            let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#, LEFT - 6.0, y + 4.0, label(t));
        }
        let _ = writeln!(s, r#"<rect x="{LEFT:.2}" y="{TOP:.2}" width="{pw:.2}" height="{ph:.2}" fill="none" stroke="black"/>"#);
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, LEFT + pw / 2.0, HEIGHT - 10.0, escape(&self.x_label));
        let _ = writeln!(
            s,
            r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">{}</text>"#,
            TOP + ph / 2.0,
            TOP + ph / 2.0,
            escape(&self.y_label)
        );

        for (i, series) in self.series.iter().enumerate() {
            let color = PALETTE[i % PALETTE.len()];
            let pts: Vec<String> = series.points.iter().map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
            let dash = if series.dashed { r#" stroke-dasharray="6 4""# } else { "" };
            let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"{dash}/>"#, pts.join(" "));
            if series.markers {
                for &(x, y) in &series.points {
                    let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="{color}"/>"#, px(x), py(y));
                }
            }
            let ly = TOP + 14.0 + 16.0 * i as f64;
            let lx = LEFT + pw - 150.0;
            let _ = writeln!(s, r#"<line x1="{lx:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{color}" stroke-width="1.5"{dash}/>"#, ly - 4.0, lx + 20.0, ly - 4.0);
            let _ = writeln!(s, r#"<text x="{:.2}" y="{ly:.2}">{}</text>"#, lx + 26.0, escape(&series.label));
        }
        s.push_str("</svg>\n");
        s
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Round tick positions covering `[lo, hi]`.
fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let raw = (hi - lo) / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| *s >= raw).unwrap_or(10.0 * mag);
    let first = (lo / step).floor() as i64;
    let last = (hi / step).ceil() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

fn label(v: f64) -> String {
    let s = format!("{:.4}", v);
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.into() }
}

fn deg(v: f64) -> f64 {
    v.to_degrees()
}

pub fn power_vs_r(sweep: &SweepResult) -> String {
    let p: Vec<(f64, f64)> = sweep.solutions.iter().map(|s| (s.r, s.p_avg)).collect();
    let mut chart = Chart::new(
        &format!("Average power, {}", sweep.shape.label()),
        "tether length r (m)",
        "power (W)",
    )
    .add(Series::line("optimal path", p).with_markers());
    if let (Some(first), Some(lo), Some(hi)) = (sweep.solutions.first(), sweep.grid.first(), sweep.grid.last()) {
        chart = chart.add(Series::line("Loyd limit", vec![(*lo, first.p_loyd), (*hi, first.p_loyd)]).dashed());
    }
    chart.render()
}

/// Optimal parameters at the knots, with the spline curves when given.
pub fn params_vs_r(sweep: &SweepResult, splines: Option<&ParamSplines>) -> String {
    let names = ["beta0", "dbeta", "dphi"];
    let mut chart = Chart::new(
        &format!("Optimal path parameters, {}", sweep.shape.label()),
        "tether length r (m)",
        "angle (deg)",
    );
    for (i, name) in names.iter().enumerate() {
        let knots: Vec<(f64, f64)> = sweep.solutions.iter().map(|s| (s.r, deg(s.params()[i]))).collect();
        let series = match splines {
            Some(sp) => {
                let spline = sp.named()[i].1;
                let (lo, hi) = spline.domain();
                let curve = (0..=200)
                    .map(|k| {
                        let r = lo + (hi - lo) * k as f64 / 200.0;
                        (r, deg(spline.eval(r).unwrap_or(f64::NAN)))
                    })
                    .collect();
                Series::line(*name, curve)
            }
            None => Series::line(*name, knots).with_markers(),
        };
        chart = chart.add(series);
    }
    chart.render()
}

/// Indices of up to `count` solutions spread over the sweep.
fn picks(n: usize, count: usize) -> Vec<usize> {
    if n <= count {
        return (0..n).collect();
    }
    let mut v: Vec<usize> = (0..count).map(|k| k * (n - 1) / (count - 1)).collect();
    v.dedup();
    v
}

/// Paths in the azimuth/elevation plane.
pub fn paths_plane(sweep: &SweepResult) -> String {
    let mut chart = Chart::new(
        &format!("Optimal paths, {}", sweep.shape.label()),
        "azimuth phi (deg)",
        "elevation beta (deg)",
    );
    for i in picks(sweep.solutions.len(), 3) {
        let sol = &sweep.solutions[i];
        let pts = sample_closed(sol, 240).into_iter().map(|(b, p)| (deg(p), deg(b))).collect();
        chart = chart.add(Series::line(format!("r = {} m", label(sol.r)), pts));
    }
    chart.render()
}

fn sample_closed(sol: &crate::optimizer::PlanSolution, n: usize) -> Vec<(f64, f64)> {
    let period = sol.path.shape.period();
    (0..=n).map(|k| sol.path.eval(period * k as f64 / n as f64)).collect()
}

/// Orthographic view of the paths on their spheres; the wind blows along +x.
pub fn paths_3d(sweep: &SweepResult) -> String {
    // camera upwind of the ground station, to its side and above
    let (az, el) = (215f64.to_radians(), 20f64.to_radians());
    let project = |v: nalgebra::Vector3<f64>| {
        let u = -az.sin() * v.x + az.cos() * v.y;
        let w = -el.sin() * (az.cos() * v.x + az.sin() * v.y) + el.cos() * v.z;
        (u, w)
    };
    let mut chart = Chart::new(
        &format!("Optimal paths in space, {}", sweep.shape.label()),
        "projected horizontal (m)",
        "projected vertical (m)",
    );
    chart.equal_aspect = true;
    for i in picks(sweep.solutions.len(), 3) {
        let sol = &sweep.solutions[i];
        let pts = sample_closed(sol, 240).into_iter().map(|(b, p)| project(embed_angles(b, p, sol.r))).collect();
        chart = chart.add(Series::line(format!("r = {} m", label(sol.r)), pts));
    }
    if let Some(sol) = sweep.solutions.last() {
        let tip = project(embed_angles(sol.path.beta0, 0.0, sol.r));
        chart = chart.add(Series::line("tether", vec![(0.0, 0.0), tip]).dashed());
    }
    chart.render()
}

/// Writes the four sweep plots into `dir` and returns their paths.
pub fn write_plots(dir: &Path, sweep: &SweepResult, splines: Option<&ParamSplines>) -> io::Result<Vec<PathBuf>> {
    let files = [
        ("power_vs_r.svg", power_vs_r(sweep)),
        ("params_vs_r.svg", params_vs_r(sweep, splines)),
        ("paths_plane.svg", paths_plane(sweep)),
        ("paths_3d.svg", paths_3d(sweep)),
    ];
    let mut written = Vec::new();
    for (name, body) in files {
        let path = dir.join(name);
        std::fs::write(&path, body)?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ticks_are_round_and_cover() {
        let t = ticks(100.0, 200.0);
        assert_eq!(t.first(), Some(&100.0));
        assert_eq!(t.last(), Some(&200.0));
        assert!(t.windows(2).all(|w| (w[1] - w[0] - 20.0).abs() < 1e-9));
        let t = ticks(0.013, 0.087);
        assert!(t[0] <= 0.013 && *t.last().unwrap() >= 0.087);
    }

    #[test]
    fn chart_is_well_formed() {
        let svg = Chart::new("a < b", "x", "y")
            .add(Series::line("one", vec![(0.0, 1.0), (1.0, 2.0)]).with_markers())
            .add(Series::line("two", vec![(0.0, 2.0), (1.0, 2.0)]).dashed())
            .render();
        assert!(svg.starts_with("<?xml"));
        assert!(svg.ends_with("</svg>\n"));
        assert!(svg.contains("a &lt; b"));
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert_eq!(svg.matches("<circle").count(), 2);
    }
}
