//! Minimal SVG scatter plots.

use std::fmt::Write as _;

pub struct Series<'a> {
    pub label: &'a str,
    pub color: &'a str,
    pub points: Vec<(f64, f64)>,
}

const W: f64 = 640.0;
const H: f64 = 480.0;
const PAD: f64 = 56.0;

fn bounds(series: &[Series]) -> (f64, f64, f64, f64) {
    let mut it = series.iter().flat_map(|s| s.points.iter()).filter(|(x, y)| x.is_finite() && y.is_finite());
    let Some(&(x0, y0)) = it.next() else {
        return (0.0, 1.0, 0.0, 1.0);
    };
    let (mut a, mut b, mut c, mut d) = (x0, x0, y0, y0);
    for &(x, y) in it {
        a = a.min(x);
        b = b.max(x);
        c = c.min(y);
        d = d.max(y);
    }
    let widen = |lo: f64, hi: f64| if hi - lo < 1e-12 { (lo - 0.5, hi + 0.5) } else { (lo, hi) };
    let (a, b) = widen(a, b);
    let (c, d) = widen(c, d);
    (a, b, c, d)
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Axes with min/max tick labels, one colour per series and a legend.
/// Non-finite points are skipped.
pub fn scatter(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let (x0, x1, y0, y1) = bounds(series);
    let sx = |x: f64| PAD + (x - x0) / (x1 - x0) * (W - 2.0 * PAD);
    let sy = |y: f64| H - PAD - (y - y0) / (y1 - y0) * (H - 2.0 * PAD);
    let mut s = String::new();
    writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#).unwrap();
    writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#).unwrap();
    writeln!(s, r#"<text x="{}" y="24" font-size="16" text-anchor="middle">{}</text>"#, W / 2.0, esc(title)).unwrap();
    writeln!(
        s,
        r#"<line x1="{PAD}" y1="{b}" x2="{r}" y2="{b}" stroke="black"/><line x1="{PAD}" y1="{PAD}" x2="{PAD}" y2="{b}" stroke="black"/>"#,
        b = H - PAD,
        r = W - PAD
    )
    .unwrap();
    writeln!(s, r#"<text x="{}" y="{}" font-size="12" text-anchor="middle">{}</text>"#, W / 2.0, H - 12.0, esc(x_label)).unwrap();
    writeln!(
        s,
        r#"<text x="16" y="{}" font-size="12" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
        H / 2.0,
        H / 2.0,
        esc(y_label)
    )
    .unwrap();
    for (v, x) in [(x0, PAD), (x1, W - PAD)] {
        writeln!(s, r#"<text x="{x}" y="{}" font-size="10" text-anchor="middle">{v:.3}</text>"#, H - PAD + 14.0).unwrap();
    }
    for (v, y) in [(y0, H - PAD), (y1, PAD)] {
        writeln!(s, r#"<text x="{}" y="{y}" font-size="10" text-anchor="end">{v:.3}</text>"#, PAD - 4.0).unwrap();
    }
    for (i, ser) in series.iter().enumerate() {
        writeln!(s, r#"<g fill="{}" fill-opacity="0.6">"#, esc(ser.color)).unwrap();
        for &(x, y) in ser.points.iter().filter(|(x, y)| x.is_finite() && y.is_finite()) {
            writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="2"/>"#, sx(x), sy(y)).unwrap();
        }
        writeln!(s, "</g>").unwrap();
        let ly = PAD + 14.0 * i as f64;
        writeln!(
            s,
            r#"<circle cx="{}" cy="{}" r="4" fill="{}"/><text x="{}" y="{}" font-size="11">{}</text>"#,
            W - PAD - 80.0,
            ly,
            esc(ser.color),
            W - PAD - 72.0,
            ly + 4.0,
            esc(ser.label)
        )
        .unwrap();
    }
    s.push_str("</svg>\n");
    s
}
