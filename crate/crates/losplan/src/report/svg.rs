//! Terrain-profile renderings, one standalone SVG per assessed link.
//!
//! Series follow the familiar profile-plot scheme: terrain stacked on the
//! earth-curvature bulge in green, the brown curvature zone underneath,
//! the straight line of sight in blue, and in red the ray lowered by the
//! required Fresnel clearance. A Clear link is exactly one whose red curve
//! never dips below the green one.

use crate::analysis::{ClearanceTrace, LinkAssessment, TerrainProfile};

const WIDTH: f64 = 960.0;
const HEIGHT: f64 = 440.0;
const MARGIN_LEFT: f64 = 62.0;
const MARGIN_RIGHT: f64 = 18.0;
const MARGIN_TOP: f64 = 34.0;
const MARGIN_BOTTOM: f64 = 48.0;

const COLOR_TERRAIN: &str = "#2e8b57";
const COLOR_LOS: &str = "#1f6fd6";
const COLOR_FRESNEL: &str = "#d62728";
const COLOR_BULGE: &str = "#a9825f";
const COLOR_OBSTACLE: &str = "#7a0000";

pub fn render_profile_svg(
    profile: &TerrainProfile,
    trace: &ClearanceTrace,
    assessment: &LinkAssessment,
) -> String {
    let n = profile.n_samples();
    assert_eq!(trace.los_height_m.len(), n, "trace/profile length mismatch");

    let xs_km: Vec<f64> = profile.distances_m.iter().map(|d| d / 1000.0).collect();
    let green: Vec<f64> = (0..n)
        .map(|i| profile.elevations_m[i] + trace.bulge_m[i])
        .collect();
    let red: Vec<f64> = (0..n)
        .map(|i| trace.los_height_m[i] - trace.required_m[i])
        .collect();
    let blue = &trace.los_height_m;
    let brown = &trace.bulge_m;

    let mut y_min = f64::INFINITY;
    let mut y_max = f64::NEG_INFINITY;
    for series in [&green, &red, brown] {
        for &v in series.iter() {
            y_min = y_min.min(v);
            y_max = y_max.max(v);
        }
    }
    for &v in blue {
        y_min = y_min.min(v);
        y_max = y_max.max(v);
    }
    let pad = ((y_max - y_min) * 0.06).max(1.0);
    y_min -= pad;
    y_max += pad;
    let x_max = *xs_km.last().expect("profile has samples");

    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let sx = move |km: f64| MARGIN_LEFT + km / x_max * plot_w;
    let sy = move |m: f64| MARGIN_TOP + (y_max - m) / (y_max - y_min) * plot_h;

    let mut out = String::with_capacity(32 * 1024);
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    out.push_str(&format!(
        "<rect x=\"0\" y=\"0\" width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n"
    ));

    // Curvature zone, filled down to the plot floor.
    let mut zone = String::new();
    for (i, &km) in xs_km.iter().enumerate() {
        zone.push_str(&format!("{:.2},{:.2} ", sx(km), sy(brown[i])));
    }
    zone.push_str(&format!(
        "{:.2},{:.2} {:.2},{:.2}",
        sx(x_max),
        sy(y_min),
        sx(0.0),
        sy(y_min)
    ));
    out.push_str(&format!(
        "<polygon points=\"{zone}\" fill=\"{COLOR_BULGE}\" fill-opacity=\"0.55\" stroke=\"none\"/>\n"
    ));

    for (series, color, width) in [
        (&green, COLOR_TERRAIN, 1.6),
        (&red, COLOR_FRESNEL, 1.4),
    ] {
        out.push_str(&polyline(&xs_km, series, &sx, &sy, color, width));
    }
    // The direct ray is straight; two points suffice.
    out.push_str(&format!(
        "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"{COLOR_LOS}\" stroke-width=\"1.6\"/>\n",
        sx(0.0),
        sy(blue[0]),
        sx(x_max),
        sy(blue[n - 1]),
    ));

    for o in &assessment.obstacles {
        let km = xs_km[o.peak_index];
        out.push_str(&format!(
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"4\" fill=\"{COLOR_OBSTACLE}\" stroke=\"white\" stroke-width=\"1\">\
             <title>obstacle: +{} m over {} samples</title></circle>\n",
            sx(km),
            sy(green[o.peak_index]),
            super::fixed(o.intrusion_m, 2),
            o.end_index - o.start_index + 1,
        ));
    }

    axes(&mut out, x_max, y_min, y_max, &sx, &sy);
    legend(&mut out);

    let title = format!(
        "{} to {}: {}, {} km",
        assessment.school_id,
        assessment.tower_id,
        assessment.classification.label(),
        super::fixed(assessment.path.total_distance_m / 1000.0, 3),
    );
    out.push_str(&format!(
        "<text x=\"{MARGIN_LEFT}\" y=\"22\" font-family=\"sans-serif\" font-size=\"15\" \
         font-weight=\"bold\" fill=\"#222\">{}</text>\n",
        xml_escape(&title)
    ));
    out.push_str("</svg>\n");
    out
}

fn polyline(
    xs: &[f64],
    ys: &[f64],
    sx: &impl Fn(f64) -> f64,
    sy: &impl Fn(f64) -> f64,
    color: &str,
    width: f64,
) -> String {
    let mut points = String::with_capacity(xs.len() * 14);
    for (x, y) in xs.iter().zip(ys) {
        points.push_str(&format!("{:.2},{:.2} ", sx(*x), sy(*y)));
    }
    format!(
        "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"{width}\"/>\n",
        points.trim_end()
    )
}

fn axes(
    out: &mut String,
    x_max: f64,
    y_min: f64,
    y_max: f64,
    sx: &impl Fn(f64) -> f64,
    sy: &impl Fn(f64) -> f64,
) {
    let x0 = MARGIN_LEFT;
    let x1 = WIDTH - MARGIN_RIGHT;
    let y0 = HEIGHT - MARGIN_BOTTOM;
    let y1 = MARGIN_TOP;
    out.push_str(&format!(
        "<rect x=\"{x0}\" y=\"{y1}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"none\" stroke=\"#444\"/>\n",
        x1 - x0,
        y0 - y1
    ));
    for tick in nice_ticks(0.0, x_max, 8) {
        let x = sx(tick);
        out.push_str(&format!(
            "<line x1=\"{x:.2}\" y1=\"{y0}\" x2=\"{x:.2}\" y2=\"{:.2}\" stroke=\"#444\"/>\n",
            y0 + 5.0
        ));
        out.push_str(&format!(
            "<text x=\"{x:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"11\" \
             text-anchor=\"middle\" fill=\"#333\">{}</text>\n",
            y0 + 18.0,
            trim_tick(tick)
        ));
    }
    for tick in nice_ticks(y_min, y_max, 7) {
        let y = sy(tick);
        out.push_str(&format!(
            "<line x1=\"{:.2}\" y1=\"{y:.2}\" x2=\"{x0}\" y2=\"{y:.2}\" stroke=\"#444\"/>\n",
            x0 - 5.0
        ));
        out.push_str(&format!(
            "<line x1=\"{x0}\" y1=\"{y:.2}\" x2=\"{x1}\" y2=\"{y:.2}\" stroke=\"#ddd\" stroke-dasharray=\"2,4\"/>\n"
        ));
        out.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"11\" \
             text-anchor=\"end\" fill=\"#333\">{}</text>\n",
            x0 - 8.0,
            y + 4.0,
            trim_tick(tick)
        ));
    }
    out.push_str(&format!(
        "<text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"12\" \
         text-anchor=\"middle\" fill=\"#222\">distance (km)</text>\n",
        (x0 + x1) / 2.0,
        HEIGHT - 10.0
    ));
    out.push_str(&format!(
        "<text x=\"16\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"12\" \
         text-anchor=\"middle\" fill=\"#222\" transform=\"rotate(-90 16 {:.2})\">height AMSL (m)</text>\n",
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0
    ));
}

fn legend(out: &mut String) {
    let entries = [
        (COLOR_TERRAIN, "terrain + curvature"),
        (COLOR_LOS, "line of sight"),
        (COLOR_FRESNEL, "ray - Fresnel clearance"),
        (COLOR_BULGE, "earth curvature"),
    ];
    let x = WIDTH - MARGIN_RIGHT - 190.0;
    for (i, (color, label)) in entries.iter().enumerate() {
        let y = MARGIN_TOP + 14.0 + 16.0 * i as f64;
        out.push_str(&format!(
            "<line x1=\"{x}\" y1=\"{y}\" x2=\"{:.2}\" y2=\"{y}\" stroke=\"{color}\" stroke-width=\"3\"/>\n",
            x + 22.0
        ));
        out.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#333\">{label}</text>\n",
            x + 28.0,
            y + 4.0
        ));
    }
}

/// Tick positions with a 1/2/5 step covering [lo, hi].
fn nice_ticks(lo: f64, hi: f64, target: usize) -> Vec<f64> {
    let span = (hi - lo).max(1e-9);
    let raw = span / target as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|&s| span / s <= target as f64)
        .unwrap_or(10.0 * mag);
    let mut t = (lo / step).ceil() * step;
    let mut ticks = Vec::new();
    while t <= hi + step * 1e-9 {
        // avoid "-0"
        ticks.push(if t == 0.0 { 0.0 } else { t });
        t += step;
    }
    ticks
}

fn trim_tick(v: f64) -> String {
    let s = format!("{v:.2}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s.is_empty() || s == "-" {
        "0".to_string()
    } else {
        s.to_string()
    }
}

fn xml_escape(s: &str) -> String {
    s.chars()
        .map(|c| match c {
            '&' => "&amp;".to_string(),
            '<' => "&lt;".to_string(),
            '>' => "&gt;".to_string(),
            '"' => "&quot;".to_string(),
            _ => c.to_string(),
        })
        .collect()
}
