//! Deterministic SVG overlay of scaled samples on the limit parabola.

use std::fmt::Write;

use convex_lines::geometry::limit_shape_u;
use convex_lines::sampler::SampleRecord;

const SIZE: f64 = 480.0;
const MARGIN: f64 = 40.0;
const CURVE_POINTS: usize = 512;

fn px(p: [f64; 2]) -> (f64, f64) {
    (MARGIN + p[0] * SIZE, MARGIN + (1.0 - p[1]) * SIZE)
}

fn point_list(points: impl Iterator<Item = [f64; 2]>) -> String {
    let mut s = String::new();
    for (i, p) in points.enumerate() {
        let (x, y) = px(p);
        if i > 0 {
            s.push(' ');
        }
        let _ = write!(s, "{x:.3},{y:.3}");
    }
    s
}

/// Unit-square plot of `samples` scaled by `n`; `caption` is appended to the
/// `(n, count)` legend.
pub fn render_svg(samples: &[SampleRecord], n: (u32, u32), caption: &str) -> String {
    let w = SIZE + 2.0 * MARGIN;
    let mut out = String::new();
    let _ = writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{w}" viewBox="0 0 {w} {w}">"#);
    let _ = writeln!(out, r#"<rect x="0" y="0" width="{w}" height="{w}" fill="white"/>"#);
    let (x0, y0) = px([0.0, 0.0]);
    let (x1, y1) = px([1.0, 1.0]);
    let _ = writeln!(
        out,
        r##"<rect x="{x0:.3}" y="{y1:.3}" width="{SIZE:.3}" height="{SIZE:.3}" fill="none" stroke="#bbbbbb"/>"##
    );
    let _ = writeln!(out, r#"<line x1="{x0:.3}" y1="{y0:.3}" x2="{x1:.3}" y2="{y0:.3}" stroke="black"/>"#);
    let _ = writeln!(out, r#"<line x1="{x0:.3}" y1="{y0:.3}" x2="{x0:.3}" y2="{y1:.3}" stroke="black"/>"#);
    let _ = writeln!(out, r#"<g fill="none" stroke="steelblue" stroke-opacity="0.35" stroke-width="1">"#);
    let (s1, s2) = (n.0 as f64, n.1 as f64);
    for rec in samples {
        if rec.edges.is_empty() {
            let _ = writeln!(out, r#"<circle cx="{x0:.3}" cy="{y0:.3}" r="2" fill="steelblue"/>"#);
            continue;
        }
        let mut acc = [0.0f64; 2];
        let mut verts = vec![acc];
        for e in &rec.edges {
            acc[0] += (e[0] * e[2]) as f64 / s1;
            acc[1] += (e[1] * e[2]) as f64 / s2;
            verts.push(acc);
        }
        let _ = writeln!(out, r#"<polyline points="{}"/>"#, point_list(verts.into_iter()));
    }
    let _ = writeln!(out, "</g>");
    let curve = (0..CURVE_POINTS).map(|i| limit_shape_u(i as f64 / (CURVE_POINTS - 1) as f64));
    let _ =
        writeln!(out, r#"<polyline points="{}" fill="none" stroke="crimson" stroke-width="2"/>"#, point_list(curve));
    let mut text = format!("n = ({}, {}), count = {}", n.0, n.1, samples.len());
    if !caption.is_empty() {
        text.push_str(", ");
        text.push_str(caption);
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.3}" y="{:.3}" font-family="sans-serif" font-size="14">{}</text>"#,
        MARGIN,
        MARGIN * 0.6,
        escape(&text)
    );
    out.push_str("</svg>\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(edges: Vec<[u64; 3]>) -> SampleRecord {
        let e1 = edges.iter().map(|e| e[0] * e[2]).sum();
        let e2 = edges.iter().map(|e| e[1] * e[2]).sum();
        SampleRecord { edges, endpoint: [e1, e2], tries: 1, stream: 0 }
    }

    #[test]
    fn empty_sample_list_draws_only_the_curve() {
        let svg = render_svg(&[], (4, 4), "");
        assert_eq!(svg.matches("<polyline").count(), 1);
        assert!(svg.contains("count = 0"));
        let curve = svg.lines().find(|l| l.contains("crimson")).unwrap();
        let pts = curve.split('"').nth(1).unwrap().split(' ').count();
        assert_eq!(pts, CURVE_POINTS);
    }

    #[test]
    fn trivial_line_is_a_point() {
        let svg = render_svg(&[rec(vec![])], (4, 4), "r = 1");
        assert!(svg.contains("<circle cx=\"40.000\" cy=\"520.000\""));
        assert!(svg.contains("r = 1"));
    }

    #[test]
    fn vertices_are_scaled() {
        let svg = render_svg(&[rec(vec![[1, 0, 2], [0, 1, 4]])], (2, 4), "");
        assert!(svg.contains(r#"points="40.000,520.000 520.000,520.000 520.000,40.000""#));
        assert_eq!(svg, render_svg(&[rec(vec![[1, 0, 2], [0, 1, 4]])], (2, 4), ""));
    }
}
