//! Deterministic SVG rendering: growth curves and colony snapshots.

use std::fmt::Write;

use crate::analysis::RegressionFit;
use crate::colony::Bacterium;
use crate::genome::Fluorescence;

const W: f64 = 640.0;
const H: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;

fn px(v: f64) -> String {
    format!("{v:.2}")
}

/// Tick label: integers without a fraction, everything else to 3 significant digits.
fn tick_label(v: f64) -> String {
    if v == v.round() && v.abs() < 1e9 {
        format!("{}", v as i64)
    } else {
        let s = format!("{:.2e}", v);
        let r: f64 = s.parse().unwrap_or(v);
        format!("{r}")
    }
}

fn header(out: &mut String, w: f64, h: f64, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
        px(w / 2.0),
        escape(title)
    );
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Growth plot of `(t, y)` points with an optional fitted curve.
///
/// With `log` the y axis shows `ln y` and non-positive counts are dropped.
pub fn growth_svg(points: &[(f64, f64)], fit: Option<&RegressionFit>, log: bool, title: &str) -> String {
    let mut out = String::new();
    header(&mut out, W, H, title);
    let x0 = LEFT;
    let x1 = W - RIGHT;
    let y0 = H - BOTTOM;
    let y1 = TOP;

    let tf = |y: f64| if log { y.ln() } else { y };
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(_, y)| !log || *y > 0.0)
        .map(|&(t, y)| (t, tf(y)))
        .collect();

    let _ = writeln!(
        out,
        r#"<line class="axis" x1="{}" y1="{}" x2="{}" y2="{}" stroke="black"/>"#,
        px(x0),
        px(y0),
        px(x1),
        px(y0)
    );
    let _ = writeln!(
        out,
        r#"<line class="axis" x1="{}" y1="{}" x2="{}" y2="{}" stroke="black"/>"#,
        px(x0),
        px(y0),
        px(x0),
        px(y1)
    );
    let _ = writeln!(
        out,
        r#"<text class="axis-label" x="{}" y="{}" text-anchor="middle">time</text>"#,
        px((x0 + x1) / 2.0),
        px(H - 12.0)
    );
    let ylabel = if log {
        "ln(optimal bacteria)"
    } else {
        "optimal bacteria"
    };
    let _ = writeln!(
        out,
        r#"<text class="axis-label" x="18" y="{}" text-anchor="middle" transform="rotate(-90 18 {})">{ylabel}</text>"#,
        px((y0 + y1) / 2.0),
        px((y0 + y1) / 2.0)
    );

    if pts.is_empty() {
        let _ = writeln!(
            out,
            r#"<text class="note" x="{}" y="{}" text-anchor="middle">no occurrences</text>"#,
            px((x0 + x1) / 2.0),
            px((y0 + y1) / 2.0)
        );
        out.push_str("</svg>\n");
        return out;
    }

    let (mut tmin, mut tmax) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut vmin, mut vmax) = (f64::INFINITY, f64::NEG_INFINITY);
    for &(t, v) in &pts {
        tmin = tmin.min(t);
        tmax = tmax.max(t);
        vmin = vmin.min(v);
        vmax = vmax.max(v);
    }
    if !log {
        vmin = vmin.min(0.0);
    }
    tmin = tmin.min(0.0);
    if tmax <= tmin {
        tmax = tmin + 1.0;
    }
    if vmax <= vmin {
        vmax = vmin + 1.0;
    }
    let pad = 0.05 * (vmax - vmin);
    let vmax = vmax + pad;
    let vmin = if log { vmin - pad } else { vmin };

    let sx = |t: f64| x0 + (t - tmin) / (tmax - tmin) * (x1 - x0);
    let sy = |v: f64| y0 - (v.clamp(vmin, vmax) - vmin) / (vmax - vmin) * (y0 - y1);

    for i in 0..=4 {
        let t = tmin + (tmax - tmin) * i as f64 / 4.0;
        let v = vmin + (vmax - vmin) * i as f64 / 4.0;
        let _ = writeln!(
            out,
            r#"<text class="tick" x="{}" y="{}" text-anchor="middle">{}</text>"#,
            px(sx(t)),
            px(y0 + 16.0),
            tick_label(t)
        );
        let _ = writeln!(
            out,
            r#"<text class="tick" x="{}" y="{}" text-anchor="end">{}</text>"#,
            px(x0 - 6.0),
            px(sy(v) + 4.0),
            tick_label(v)
        );
    }

    for &(t, v) in &pts {
        let _ = writeln!(
            out,
            r#"<circle class="point" cx="{}" cy="{}" r="2.5" fill="steelblue"/>"#,
            px(sx(t)),
            px(sy(v))
        );
    }

    if let Some(f) = fit {
        let steps = 100;
        let coords: Vec<String> = (0..=steps)
            .map(|i| {
                let t = tmin + (tmax - tmin) * i as f64 / steps as f64;
                let v = if log { -f.a + f.b * t } else { f.predict(t) };
                format!("{},{}", px(sx(t)), px(sy(v)))
            })
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline class="fit" fill="none" stroke="crimson" stroke-width="1.5" points="{}"/>"#,
            coords.join(" ")
        );
        let _ = writeln!(
            out,
            r#"<text class="legend" x="{}" y="{}" text-anchor="end">y = exp(-{} + {} t)</text>"#,
            px(x1 - 4.0),
            px(y1 + 14.0),
            tick_label(f.a),
            tick_label(f.b)
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Fill colour of one cell: fluorescence when known, otherwise a green
/// channel proportional to `gfp / m`.
pub fn cell_fill(b: &Bacterium, m: f64) -> (&'static str, String) {
    match b.fluorescence {
        Some(Fluorescence::Yellow) => ("yellow", "#ffd700".into()),
        Some(Fluorescence::Red) => ("red", "#d62728".into()),
        Some(Fluorescence::Green) => ("green", "#2ca02c".into()),
        Some(Fluorescence::None) => ("dark", "#bdbdbd".into()),
        None => {
            let g = (255.0 * (b.gfp / m).clamp(0.0, 1.0)).round() as u8;
            ("gfp", format!("rgb(0,{g},0)"))
        }
    }
}

/// Colony snapshot: living cells on a sunflower spiral in birth order.
pub fn colony_svg(cells: &[Bacterium], m: f64, time: f64, title: &str) -> String {
    let size = 600.0;
    let mut out = String::new();
    header(&mut out, size, size + 30.0, title);
    let mut living: Vec<&Bacterium> = cells.iter().filter(|b| b.alive).collect();
    living.sort_by_key(|b| b.id);
    let n = living.len();
    let _ = writeln!(
        out,
        r#"<text class="note" x="{}" y="{}" text-anchor="middle">{n} cells at t = {}</text>"#,
        px(size / 2.0),
        px(size + 20.0),
        tick_label((time * 100.0).round() / 100.0)
    );
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    let spacing = (270.0 / (n.max(1) as f64).sqrt()).min(12.0);
    let r = spacing * 0.5;
    let c = size / 2.0 + 10.0;
    for (i, b) in living.iter().enumerate() {
        let rad = spacing * (i as f64 + 0.5).sqrt();
        let ang = i as f64 * golden;
        let (class, fill) = cell_fill(b, m);
        let _ = writeln!(
            out,
            r#"<circle class="cell {class}" cx="{}" cy="{}" r="{}" fill="{fill}"/>"#,
            px(c + rad * ang.cos()),
            px(c + rad * ang.sin()),
            px(r)
        );
    }
    out.push_str("</svg>\n");
    out
}
