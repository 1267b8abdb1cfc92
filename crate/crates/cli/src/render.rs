//! CSV and SVG rendering of the power-loss curve.

use std::fmt::Write as _;

use lehmann_core::{power_loss_closed, Result};

/// `steps` evenly spaced points from `lambda_min` to `lambda_max`, both
/// included, paired with the power loss at each.
pub fn power_loss_curve(lambda_min: f64, lambda_max: f64, steps: usize) -> Result<Vec<(f64, f64)>> {
    let width = lambda_max - lambda_min;
    (0..steps)
        .map(|i| {
            // pin the last point so rounding never overshoots the range
            let lambda = if i + 1 == steps {
                lambda_max
            } else {
                lambda_min + width * i as f64 / (steps - 1) as f64
            };
            Ok((lambda, power_loss_closed(lambda)?))
        })
        .collect()
}

pub fn curve_csv(points: &[(f64, f64)]) -> String {
    let mut out = String::from("lambda,power_loss\n");
    for (x, y) in points {
        writeln!(out, "{x},{y}").unwrap();
    }
    out
}

/// `v` rounded to three significant figures, trailing zeros kept.
pub fn three_sig(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return if v == 0.0 { "0".to_owned() } else { v.to_string() };
    }
    // rounding can carry into the next decade (9.996 -> 10.0), so take the
    // magnitude of the rounded value
    let rough = v.abs().log10().floor() as i32;
    let step = 10f64.powi(rough - 2);
    let rounded = (v / step).round() * step;
    let decimals = 2 - rounded.abs().log10().floor() as i32;
    if decimals >= 0 {
        format!("{:.*}", decimals as usize, v)
    } else {
        let unit = 10f64.powi(-decimals);
        format!("{:.0}", (v / unit).round() * unit)
    }
}

pub const WIDTH: f64 = 800.0;
pub const HEIGHT: f64 = 600.0;
const LEFT: f64 = 90.0;
const RIGHT: f64 = 30.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 70.0;
pub const TICKS: usize = 5;

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if hi > lo {
        (lo, hi)
    } else {
        (lo - 0.5, hi + 0.5)
    }
}

/// Standalone SVG with linear axes, five labelled ticks per axis and the
/// curve as a single `<path>`.
pub fn curve_svg(points: &[(f64, f64)]) -> String {
    let (x0, x1) = range(points.iter().map(|p| p.0));
    let (y0, y1) = range(points.iter().map(|p| p.1));
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * plot_w;
    let sy = |y: f64| TOP + plot_h - (y - y0) / (y1 - y0) * plot_h;
    let base_y = TOP + plot_h;

    let mut svg = String::new();
    writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    )
    .unwrap();
    writeln!(svg, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#).unwrap();
    writeln!(
        svg,
        r#"<g stroke="black" stroke-width="1"><line x1="{LEFT}" y1="{base_y}" x2="{}" y2="{base_y}"/><line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{base_y}"/></g>"#,
        LEFT + plot_w
    )
    .unwrap();

    let mut ticks = String::from(r#"<g stroke="black" stroke-width="1">"#);
    let mut labels = String::from(r#"<g font-family="sans-serif" font-size="12" fill="black">"#);
    for i in 0..TICKS {
        let f = i as f64 / (TICKS - 1) as f64;
        let (xv, yv) = (x0 + f * (x1 - x0), y0 + f * (y1 - y0));
        let (px, py) = (sx(xv), sy(yv));
        write!(ticks, r#"<line class="xtick" x1="{px:.2}" y1="{base_y}" x2="{px:.2}" y2="{}"/>"#, base_y + 6.0).unwrap();
        write!(ticks, r#"<line class="ytick" x1="{}" y1="{py:.2}" x2="{LEFT}" y2="{py:.2}"/>"#, LEFT - 6.0).unwrap();
        write!(
            labels,
            r#"<text class="xlabel" x="{px:.2}" y="{}" text-anchor="middle">{}</text>"#,
            base_y + 22.0,
            three_sig(xv)
        )
        .unwrap();
        write!(
            labels,
            r#"<text class="ylabel" x="{}" y="{:.2}" text-anchor="end">{}</text>"#,
            LEFT - 10.0,
            py + 4.0,
            three_sig(yv)
        )
        .unwrap();
    }
    ticks.push_str("</g>");
    labels.push_str("</g>");
    writeln!(svg, "{ticks}").unwrap();
    writeln!(svg, "{labels}").unwrap();
    writeln!(
        svg,
        r#"<text class="axis-title" x="{:.2}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="14">lambda</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 20.0
    )
    .unwrap();
    writeln!(
        svg,
        r#"<text class="axis-title" x="25" y="{0:.2}" text-anchor="middle" font-family="sans-serif" font-size="14" transform="rotate(-90 25 {0:.2})">power loss (nats)</text>"#,
        TOP + plot_h / 2.0
    )
    .unwrap();

    let mut d = String::new();
    for (i, (x, y)) in points.iter().enumerate() {
        write!(d, "{}{:.3},{:.3}", if i == 0 { "M" } else { " L" }, sx(*x), sy(*y)).unwrap();
    }
    writeln!(svg, r#"<path d="{d}" fill="none" stroke="steelblue" stroke-width="2"/>"#).unwrap();
    svg.push_str("</svg>\n");
    svg
}
