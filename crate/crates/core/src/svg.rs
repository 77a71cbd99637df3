//! Median relative-profile plot as a standalone SVG.
//!
//! Output depends only on the inputs: coordinates are printed with two
//! decimals and elements are emitted in category order.

use std::collections::BTreeMap;
use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::metrics::Category;

/// Median and interquartile band of one category's relative integration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfilePoint {
    pub category: Category,
    pub median: f64,
    pub q25: f64,
    pub q75: f64,
    /// Plans contributing a value.
    pub n: usize,
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 360.0;
const LEFT: f64 = 56.0;
const RIGHT: f64 = 24.0;
const TOP: f64 = 28.0;
const BOTTOM: f64 = 56.0;

fn fmt(v: f64) -> String {
    let s = format!("{v:.2}");
    if s == "-0.00" {
        "0.00".into()
    } else {
        s
    }
}

/// Draws the profile in the given category order with its IQR band, and the
/// reference profile (dashed) on the categories it shares with `points`.
pub fn emit_profile_svg(points: &[ProfilePoint], reference: Option<&BTreeMap<Category, f64>>) -> String {
    assert!(!points.is_empty(), "profile has no categories");
    let n = points.len();
    let refs: Vec<Option<f64>> = points
        .iter()
        .map(|p| reference.and_then(|r| r.get(&p.category).copied()))
        .collect();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (p, r) in points.iter().zip(&refs) {
        for v in [p.q25, p.median, p.q75].into_iter().chain(*r) {
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    let pad = ((hi - lo) * 0.1).max(0.05);
    let (lo, hi) = (lo - pad, hi + pad);
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let x = |i: usize| {
        if n == 1 {
            LEFT + plot_w / 2.0
        } else {
            LEFT + plot_w * i as f64 / (n - 1) as f64
        }
    };
    let y = |v: f64| TOP + plot_h * (hi - v) / (hi - lo);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#,
        w = WIDTH,
        h = HEIGHT
    );
    let _ = writeln!(
        s,
        r##"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="#ffffff"/>"##
    );
    let _ = writeln!(
        s,
        r##"<line x1="{l}" y1="{b}" x2="{r}" y2="{b}" stroke="#444444"/>"##,
        l = fmt(LEFT),
        r = fmt(WIDTH - RIGHT),
        b = fmt(TOP + plot_h)
    );
    let _ = writeln!(
        s,
        r##"<line x1="{l}" y1="{t}" x2="{l}" y2="{b}" stroke="#444444"/>"##,
        l = fmt(LEFT),
        t = fmt(TOP),
        b = fmt(TOP + plot_h)
    );
    for k in 0..=4 {
        let v = lo + (hi - lo) * k as f64 / 4.0;
        let _ = writeln!(
            s,
            r##"<text x="{}" y="{}" font-size="11" text-anchor="end" fill="#444444">{}</text>"##,
            fmt(LEFT - 6.0),
            fmt(y(v) + 4.0),
            fmt(v)
        );
    }
    if (lo..=hi).contains(&1.0) {
        let _ = writeln!(
            s,
            r##"<line x1="{}" y1="{y1}" x2="{}" y2="{y1}" stroke="#bbbbbb" stroke-dasharray="2 3"/>"##,
            fmt(LEFT),
            fmt(WIDTH - RIGHT),
            y1 = fmt(y(1.0))
        );
    }

    // IQR band
    if n == 1 {
        let _ = writeln!(
            s,
            r##"<rect class="band" x="{}" y="{}" width="12.00" height="{}" fill="#4a78b5" fill-opacity="0.25"/>"##,
            fmt(x(0) - 6.0),
            fmt(y(points[0].q75)),
            fmt(y(points[0].q25) - y(points[0].q75))
        );
    } else {
        let upper = (0..n).map(|i| format!("{},{}", fmt(x(i)), fmt(y(points[i].q75))));
        let lower = (0..n).rev().map(|i| format!("{},{}", fmt(x(i)), fmt(y(points[i].q25))));
        let pts: Vec<String> = upper.chain(lower).collect();
        let _ = writeln!(
            s,
            r##"<polygon class="band" points="{}" fill="#4a78b5" fill-opacity="0.25"/>"##,
            pts.join(" ")
        );
    }

    let median_pts: Vec<String> = (0..n)
        .map(|i| format!("{},{}", fmt(x(i)), fmt(y(points[i].median))))
        .collect();
    let _ = writeln!(
        s,
        r##"<polyline class="median" points="{}" fill="none" stroke="#1f4e8c" stroke-width="2"/>"##,
        median_pts.join(" ")
    );
    for (i, p) in points.iter().enumerate() {
        let _ = writeln!(
            s,
            r##"<circle cx="{}" cy="{}" r="3" fill="#1f4e8c"/>"##,
            fmt(x(i)),
            fmt(y(p.median))
        );
    }

    let ref_pts: Vec<String> = (0..n)
        .filter_map(|i| refs[i].map(|v| format!("{},{}", fmt(x(i)), fmt(y(v)))))
        .collect();
    if !ref_pts.is_empty() {
        let _ = writeln!(
            s,
            r##"<polyline class="reference" points="{}" fill="none" stroke="#c0392b" stroke-width="2" stroke-dasharray="6 4"/>"##,
            ref_pts.join(" ")
        );
    }

    for (i, p) in points.iter().enumerate() {
        let _ = writeln!(
            s,
            r##"<text x="{}" y="{}" font-size="11" text-anchor="middle" fill="#222222">{}</text>"##,
            fmt(x(i)),
            fmt(TOP + plot_h + 18.0),
            p.category.name()
        );
    }
    let _ = writeln!(
        s,
        r##"<text x="{}" y="{}" font-size="12" fill="#1f4e8c">median (IQR band)</text>"##,
        fmt(LEFT + 8.0),
        fmt(TOP - 10.0)
    );
    if !ref_pts.is_empty() {
        let _ = writeln!(
            s,
            r##"<text x="{}" y="{}" font-size="12" fill="#c0392b">reference</text>"##,
            fmt(LEFT + 150.0),
            fmt(TOP - 10.0)
        );
    }
    s.push_str("</svg>\n");
    s
}
