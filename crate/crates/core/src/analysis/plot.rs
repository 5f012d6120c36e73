use std::collections::BTreeMap;
use std::fmt::Write;

use super::{pareto_indices, ErrorAxis, ParetoPoint};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 56.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

/// Static SVG: every circuit as a faint dot, one Pareto line per config,
/// error on x and relative power on y.
pub fn pareto_svg(points: &[ParetoPoint], axis: ErrorAxis) -> String {
    let (mut xmax, mut ymax) = (0.0f64, 0.0f64);
    for p in points {
        xmax = xmax.max(axis.of(p));
        ymax = ymax.max(p.relative_power);
    }
    let xmax = if xmax > 0.0 { xmax * 1.05 } else { 1.0 };
    let ymax = if ymax > 0.0 { ymax * 1.05 } else { 1.0 };
    let sx = |v: f64| MARGIN + v / xmax * (WIDTH - 2.0 * MARGIN);
    let sy = |v: f64| HEIGHT - MARGIN - v / ymax * (HEIGHT - 2.0 * MARGIN);

    let mut by_config: BTreeMap<&str, Vec<ParetoPoint>> = BTreeMap::new();
    for p in points {
        by_config.entry(p.config.as_str()).or_default().push(p.clone());
    }

    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="11">"#
    )
    .unwrap();
    writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    let (x0, y0, x1, y1) = (sx(0.0), sy(0.0), sx(xmax), sy(ymax));
    writeln!(s, r#"<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black"/>"#).unwrap();
    writeln!(s, r#"<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black"/>"#).unwrap();
    for t in 0..=4 {
        let fx = xmax * t as f64 / 4.0;
        let fy = ymax * t as f64 / 4.0;
        writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{fx:.3}</text>"#, sx(fx), y0 + 16.0).unwrap();
        writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{fy:.2}</text>"#, x0 - 6.0, sy(fy) + 4.0).unwrap();
    }
    let xlabel = if axis == ErrorAxis::Stddev { "stddev".to_string() } else { format!("{axis} [%]") };
    writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{xlabel}</text>"#, WIDTH / 2.0, HEIGHT - 12.0).unwrap();
    writeln!(
        s,
        r#"<text x="14" y="{:.1}" text-anchor="middle" transform="rotate(-90 14 {:.1})">relative power</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0
    )
    .unwrap();

    for (k, (config, pts)) in by_config.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        for p in pts {
            writeln!(
                s,
                r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="{color}" fill-opacity="0.25"/>"#,
                sx(axis.of(p)),
                sy(p.relative_power)
            )
            .unwrap();
        }
        let mut front: Vec<&ParetoPoint> = pareto_indices(pts, axis).into_iter().map(|i| &pts[i]).collect();
        front.sort_by(|a, b| axis.of(a).total_cmp(&axis.of(b)));
        let path: Vec<String> = front
            .iter()
            .map(|p| format!("{:.2},{:.2}", sx(axis.of(p)), sy(p.relative_power)))
            .collect();
        writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
            path.join(" ")
        )
        .unwrap();
        writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" fill="{color}">{}</text>"#,
            WIDTH - MARGIN - 110.0,
            MARGIN + 14.0 * k as f64,
            escape(config)
        )
        .unwrap();
    }
    s.push_str("</svg>\n");
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_one_polyline_per_config() {
        let mk = |config: &str, power: f64, wce: f64| ParetoPoint {
            id: "x".into(),
            config: config.into(),
            relative_power: power,
            wce_pct: wce,
            mae_pct: 0.0,
            er_pct: 0.0,
            mre_pct: 0.0,
            avg_pct: 0.0,
            stddev: 0.0,
        };
        let pts = vec![mk("a", 0.5, 1.0), mk("a", 0.4, 2.0), mk("b<&>", 0.7, 0.5)];
        let svg = pareto_svg(&pts, ErrorAxis::Wce);
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert_eq!(svg.matches("<circle").count(), 3);
        assert!(svg.contains("b&lt;&amp;&gt;"));
    }
}
