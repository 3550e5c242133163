//! Report rendering: CSV tables and self-contained SVG charts.
//!
//! Charts are hand-rolled SVG with no scripting, so they open anywhere and
//! diff cleanly. All text inputs here are internally generated labels
//! (waves, tie types, series names); nothing user-controlled is embedded.

use std::collections::BTreeMap;

use crate::ingest::TieType;
use crate::networks::{network_similarity, SimilarityMode, TieNetwork, WeekProfile};

const PALETTE: [&str; 5] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"];

/// Pairwise similarity over all survey networks, in (wave, tie type) order.
/// Labels are `w{wave} {tie}`; cells may be NaN where the pair shares fewer
/// than two respondents.
pub fn similarity_grid(
    networks: &BTreeMap<(u8, TieType), TieNetwork>,
    mode: SimilarityMode,
) -> (Vec<String>, Vec<Vec<f64>>) {
    let entries: Vec<_> = networks.iter().collect();
    let labels: Vec<String> = entries
        .iter()
        .map(|((wave, tie), _)| format!("w{wave} {}", tie.label()))
        .collect();
    let matrix = entries
        .iter()
        .map(|(_, a)| entries.iter().map(|(_, b)| network_similarity(a, b, mode)).collect())
        .collect();
    (labels, matrix)
}

pub fn similarity_csv(labels: &[String], matrix: &[Vec<f64>]) -> String {
    let mut out = String::from("network");
    for l in labels {
        out.push(',');
        out.push_str(l);
    }
    out.push('\n');
    for (row_label, row) in labels.iter().zip(matrix) {
        out.push_str(row_label);
        for &v in row {
            out.push(',');
            if !v.is_nan() {
                out.push_str(&v.to_string());
            }
        }
        out.push('\n');
    }
    out
}

fn mix_channel(a: u8, b: u8, t: f64) -> u8 {
    (a as f64 + (b as f64 - a as f64) * t).round() as u8
}

/// White at 0 to a saturated blue at the matrix maximum; NaN cells grey.
fn heat_color(v: f64, vmax: f64) -> String {
    if v.is_nan() {
        return "#dddddd".to_string();
    }
    let t = if vmax > 0.0 { (v / vmax).clamp(0.0, 1.0) } else { 0.0 };
    format!(
        "#{:02x}{:02x}{:02x}",
        mix_channel(255, 31, t),
        mix_channel(255, 119, t),
        mix_channel(255, 180, t)
    )
}

fn fmt(v: f64) -> String {
    if v.is_nan() {
        "n/a".to_string()
    } else if v == 0.0 {
        "0".to_string()
    } else if v.abs() >= 100.0 {
        format!("{v:.0}")
    } else if v.abs() >= 1.0 {
        format!("{v:.1}")
    } else {
        format!("{v:.3}")
    }
}

pub fn heatmap_svg(title: &str, labels: &[String], matrix: &[Vec<f64>]) -> String {
    let n = labels.len();
    let cell = 26.0;
    let left = 130.0;
    let top = 140.0;
    let width = left + n as f64 * cell + 20.0;
    let height = top + n as f64 * cell + 20.0;
    let vmax = matrix
        .iter()
        .flatten()
        .copied()
        .filter(|v| !v.is_nan())
        .fold(0.0, f64::max);
    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width:.0}\" height=\"{height:.0}\" \
         viewBox=\"0 0 {width:.0} {height:.0}\" font-family=\"sans-serif\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
         <text x=\"{:.0}\" y=\"24\" font-size=\"15\" text-anchor=\"middle\">{title}</text>\n\
         <text x=\"{:.0}\" y=\"44\" font-size=\"11\" text-anchor=\"middle\" fill=\"#555\">\
         white = 0, blue = {}</text>\n",
        width / 2.0,
        width / 2.0,
        fmt(vmax)
    );
    for (j, l) in labels.iter().enumerate() {
        let x = left + (j as f64 + 0.5) * cell;
        svg.push_str(&format!(
            "<text x=\"{x:.1}\" y=\"{:.1}\" font-size=\"10\" text-anchor=\"start\" \
             transform=\"rotate(-60 {x:.1} {:.1})\">{l}</text>\n",
            top - 6.0,
            top - 6.0
        ));
    }
    for (i, l) in labels.iter().enumerate() {
        svg.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"10\" text-anchor=\"end\">{l}</text>\n",
            left - 6.0,
            top + (i as f64 + 0.5) * cell + 3.5
        ));
    }
    for (i, row) in matrix.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            let x = left + j as f64 * cell;
            let y = top + i as f64 * cell;
            svg.push_str(&format!(
                "<rect x=\"{x:.1}\" y=\"{y:.1}\" width=\"{cell}\" height=\"{cell}\" \
                 fill=\"{}\" stroke=\"#fff\"><title>{} vs {}: {}</title></rect>\n",
                heat_color(v, vmax),
                labels[i],
                labels[j],
                fmt(v)
            ));
        }
    }
    svg.push_str("</svg>\n");
    svg
}

pub struct ChartSeries {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

/// Simple line chart. With `log_x` the x axis is log10-scaled and
/// non-positive x values are dropped.
pub fn line_chart_svg(
    title: &str,
    x_label: &str,
    y_label: &str,
    series: &[ChartSeries],
    log_x: bool,
) -> String {
    let (w, h) = (760.0, 440.0);
    let (ml, mr, mt, mb) = (78.0, 24.0, 48.0, 60.0);
    let (pw, ph) = (w - ml - mr, h - mt - mb);
    let tx = |x: f64| if log_x { x.log10() } else { x };
    let mut xs: Vec<f64> = Vec::new();
    let mut ys: Vec<f64> = Vec::new();
    for s in series {
        for &(x, y) in &s.points {
            if !x.is_finite() || !y.is_finite() || (log_x && x <= 0.0) {
                continue;
            }
            xs.push(tx(x));
            ys.push(y);
        }
    }
    let (mut x0, mut x1) = bounds(&xs);
    let (mut y0, mut y1) = bounds(&ys);
    if x1 - x0 < 1e-12 {
        x0 -= 0.5;
        x1 += 0.5;
    }
    if y1 - y0 < 1e-12 {
        y0 -= 0.5;
        y1 += 0.5;
    }
    let px = |x: f64| ml + (x - x0) / (x1 - x0) * pw;
    let py = |y: f64| mt + ph - (y - y0) / (y1 - y0) * ph;
    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w:.0}\" height=\"{h:.0}\" \
         viewBox=\"0 0 {w:.0} {h:.0}\" font-family=\"sans-serif\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
         <text x=\"{:.0}\" y=\"26\" font-size=\"15\" text-anchor=\"middle\">{title}</text>\n",
        w / 2.0
    );
    for k in 0..=4 {
        let fx = x0 + (x1 - x0) * k as f64 / 4.0;
        let label = if log_x { fmt(10f64.powf(fx)) } else { fmt(fx) };
        svg.push_str(&format!(
            "<line x1=\"{0:.1}\" y1=\"{1:.1}\" x2=\"{0:.1}\" y2=\"{2:.1}\" stroke=\"#eee\"/>\n\
             <text x=\"{0:.1}\" y=\"{3:.1}\" font-size=\"11\" text-anchor=\"middle\">{label}</text>\n",
            px(fx),
            mt,
            mt + ph,
            mt + ph + 18.0
        ));
        let fy = y0 + (y1 - y0) * k as f64 / 4.0;
        svg.push_str(&format!(
            "<line x1=\"{1:.1}\" y1=\"{0:.1}\" x2=\"{2:.1}\" y2=\"{0:.1}\" stroke=\"#eee\"/>\n\
             <text x=\"{3:.1}\" y=\"{4:.1}\" font-size=\"11\" text-anchor=\"end\">{5}</text>\n",
            py(fy),
            ml,
            ml + pw,
            ml - 8.0,
            py(fy) + 4.0,
            fmt(fy)
        ));
    }
    svg.push_str(&format!(
        "<rect x=\"{ml:.1}\" y=\"{mt:.1}\" width=\"{pw:.1}\" height=\"{ph:.1}\" \
         fill=\"none\" stroke=\"#999\"/>\n\
         <text x=\"{:.0}\" y=\"{:.0}\" font-size=\"12\" text-anchor=\"middle\">{x_label}</text>\n\
         <text x=\"20\" y=\"{:.0}\" font-size=\"12\" text-anchor=\"middle\" \
         transform=\"rotate(-90 20 {:.0})\">{y_label}</text>\n",
        ml + pw / 2.0,
        h - 14.0,
        mt + ph / 2.0,
        mt + ph / 2.0
    ));
    for (si, s) in series.iter().enumerate() {
        let color = PALETTE[si % PALETTE.len()];
        let pts: Vec<String> = s
            .points
            .iter()
            .filter(|&&(x, y)| x.is_finite() && y.is_finite() && !(log_x && x <= 0.0))
            .map(|&(x, y)| format!("{:.1},{:.1}", px(tx(x)), py(y)))
            .collect();
        if pts.len() > 1 {
            svg.push_str(&format!(
                "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.8\"/>\n",
                pts.join(" ")
            ));
        } else if pts.len() == 1 {
            let xy: Vec<&str> = pts[0].split(',').collect();
            svg.push_str(&format!(
                "<circle cx=\"{}\" cy=\"{}\" r=\"3\" fill=\"{color}\"/>\n",
                xy[0], xy[1]
            ));
        }
        if series.len() > 1 {
            let ly = mt + 14.0 + si as f64 * 16.0;
            svg.push_str(&format!(
                "<rect x=\"{:.1}\" y=\"{:.1}\" width=\"12\" height=\"4\" fill=\"{color}\"/>\n\
                 <text x=\"{:.1}\" y=\"{:.1}\" font-size=\"11\">{}</text>\n",
                ml + pw - 150.0,
                ly - 2.0,
                ml + pw - 132.0,
                ly + 3.0,
                s.name
            ));
        }
    }
    svg.push_str("</svg>\n");
    svg
}

fn bounds(values: &[f64]) -> (f64, f64) {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if lo.is_finite() && hi.is_finite() {
        (lo, hi)
    } else {
        (0.0, 1.0)
    }
}

pub fn profile_csv(profile: &[WeekProfile]) -> String {
    let mut out = String::from("week,mutual_m,one_sided_m,unconnected_m\n");
    for p in profile {
        out.push_str(&(p.week + 1).to_string());
        for m in p.median_m {
            out.push(',');
            if let Some(v) = m {
                out.push_str(&v.to_string());
            }
        }
        out.push('\n');
    }
    out
}

pub fn profile_svg(profile: &[WeekProfile]) -> String {
    let names = ["mutual", "one-sided", "unconnected"];
    let series: Vec<ChartSeries> = (0..3)
        .map(|cat| ChartSeries {
            name: names[cat].to_string(),
            points: profile
                .iter()
                .filter_map(|p| p.median_m[cat].map(|m| ((p.week + 1) as f64, m)))
                .collect(),
        })
        .collect();
    line_chart_svg(
        "Median on-campus pair distance by week and tie category",
        "study week",
        "median distance (m)",
        &series,
        false,
    )
}
