//! Minimal SVG scatter and line plots. CSV tables are always written next to
//! them; the plots are only a convenience.

use std::fmt::Write;

const W: f64 = 640.0;
const H: f64 = 480.0;
const PAD: f64 = 60.0;

pub struct Series {
    pub label: String,
    pub color: &'static str,
    pub points: Vec<(f64, f64)>,
}

pub struct Axes {
    pub title: String,
    pub xlabel: String,
    pub ylabel: String,
    pub log_x: bool,
    pub log_y: bool,
}

fn bounds(series: &[Series], log_x: bool, log_y: bool) -> Option<(f64, f64, f64, f64)> {
    let tx = |v: f64| if log_x { v.log10() } else { v };
    let ty = |v: f64| if log_y { v.log10() } else { v };
    let pts: Vec<(f64, f64)> = series
        .iter()
        .flat_map(|s| s.points.iter().map(|&(x, y)| (tx(x), ty(y))))
        .filter(|(x, y)| x.is_finite() && y.is_finite())
        .collect();
    if pts.is_empty() {
        return None;
    }
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for (x, y) in pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if x1 - x0 < 1e-12 {
        (x0, x1) = (x0 - 0.5, x1 + 0.5);
    }
    if y1 - y0 < 1e-12 {
        (y0, y1) = (y0 - 0.5, y1 + 0.5);
    }
    Some((x0, x1, y0, y1))
}

fn render(axes: &Axes, series: &[Series], lines: bool) -> String {
    let mut out = String::new();
    let _ = writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(out, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#, W / 2.0, escape(&axes.title));
    let Some((x0, x1, y0, y1)) = bounds(series, axes.log_x, axes.log_y) else {
        let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle">no data</text></svg>"#, W / 2.0, H / 2.0);
        return out;
    };
    let sx = |x: f64| PAD + (x - x0) / (x1 - x0) * (W - 2.0 * PAD);
    let sy = |y: f64| H - PAD - (y - y0) / (y1 - y0) * (H - 2.0 * PAD);
    let _ = writeln!(
        out,
        r#"<rect x="{PAD}" y="{PAD}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        W - 2.0 * PAD,
        H - 2.0 * PAD
    );
    for i in 0..=4 {
        let fx = x0 + (x1 - x0) * i as f64 / 4.0;
        let fy = y0 + (y1 - y0) * i as f64 / 4.0;
        let lx = if axes.log_x { format!("1e{fx:.2}") } else { format!("{fx:.3}") };
        let ly = if axes.log_y { format!("1e{fy:.2}") } else { format!("{fy:.3}") };
        let _ = writeln!(out, r#"<text x="{:.2}" y="{}" text-anchor="middle">{lx}</text>"#, sx(fx), H - PAD + 16.0);
        let _ = writeln!(out, r#"<text x="{}" y="{:.2}" text-anchor="end">{ly}</text>"#, PAD - 4.0, sy(fy) + 4.0);
    }
    let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, W / 2.0, H - 15.0, escape(&axes.xlabel));
    let _ = writeln!(
        out,
        r#"<text x="15" y="{}" text-anchor="middle" transform="rotate(-90 15 {})">{}</text>"#,
        H / 2.0,
        H / 2.0,
        escape(&axes.ylabel)
    );
    let tx = |v: f64| if axes.log_x { v.log10() } else { v };
    let ty = |v: f64| if axes.log_y { v.log10() } else { v };
    for (i, s) in series.iter().enumerate() {
        let pts: Vec<(f64, f64)> = s
            .points
            .iter()
            .map(|&(x, y)| (sx(tx(x)), sy(ty(y))))
            .filter(|(x, y)| x.is_finite() && y.is_finite())
            .collect();
        if lines {
            let path: Vec<String> = pts.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
            let _ = writeln!(out, r#"<polyline fill="none" stroke="{}" points="{}"/>"#, s.color, path.join(" "));
        }
        for (x, y) in &pts {
            let _ = writeln!(out, r#"<circle cx="{x:.2}" cy="{y:.2}" r="{}" fill="{}"/>"#, if lines { 2.5 } else { 1.8 }, s.color);
        }
        let ly = PAD + 14.0 * (i as f64 + 1.0);
        let _ = writeln!(out, r#"<text x="{}" y="{ly}" fill="{}">{}</text>"#, W - PAD - 4.0 - 0.0, s.color, escape(&s.label));
    }
    out.push_str("</svg>\n");
    out
}

pub fn scatter(axes: &Axes, series: &[Series]) -> String {
    render(axes, series, false)
}

pub fn lines(axes: &Axes, series: &[Series]) -> String {
    render(axes, series, true)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn axes() -> Axes {
        Axes { title: "t <1>".into(), xlabel: "x".into(), ylabel: "y".into(), log_x: false, log_y: true }
    }

    #[test]
    fn empty_plot_says_so() {
        let s = scatter(&axes(), &[]);
        assert!(s.contains("no data") && s.ends_with("</svg>\n"));
    }

    #[test]
    fn points_inside_frame_and_text_escaped() {
        let series = [Series { label: "a".into(), color: "red", points: vec![(0.0, 1.0), (1.0, 100.0), (0.5, -1.0)] }];
        let s = lines(&axes(), &series);
        assert!(s.contains("t &lt;1&gt;"));
        // the negative value is dropped on a log axis
        assert_eq!(s.matches("<circle").count(), 2);
        assert!(s.contains(r#"cx="60.00" cy="420.00""#));
        assert!(s.contains(r#"cx="580.00" cy="60.00""#));
    }
}
