use std::fmt::Write as _;
use std::path::Path as FsPath;

use super::trial::Trace;
use crate::error::BenchError;
use crate::geom2d::{Point2, Rect};

fn rect_el(out: &mut String, r: &Rect, attrs: &str) {
    let _ = writeln!(
        out,
        r#"    <rect x="{}" y="{}" width="{}" height="{}" {attrs}/>"#,
        r.min.x,
        r.min.y,
        r.width(),
        r.height()
    );
}

fn points_attr(pts: &[Point2]) -> String {
    pts.iter()
        .map(|p| format!("{},{}", p.x, p.y))
        .collect::<Vec<_>>()
        .join(" ")
}

/// SVG 1.1 document of a traced trial. World y points up.
pub fn render_svg(trace: &Trace) -> String {
    let b = trace.bounds;
    let stroke = (b.width().max(b.height()) / 400.0).max(1e-3);
    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" viewBox="{} {} {} {}" width="800" height="{}">"#,
        b.min.x,
        b.min.y,
        b.width(),
        b.height(),
        (800.0 * b.height() / b.width()).round()
    );
    let _ = writeln!(s, r#"  <g transform="matrix(1 0 0 -1 0 {})">"#, b.min.y + b.max.y);
    rect_el(
        &mut s,
        &b,
        &format!(r#"id="bounds" fill="white" stroke="black" stroke-width="{stroke}""#),
    );
    if !trace.walls.is_empty() {
        let _ = writeln!(s, r#"  <g id="walls" fill="dimgray">"#);
        for w in &trace.walls {
            rect_el(&mut s, w, "");
        }
        let _ = writeln!(s, "  </g>");
    }
    if trace.obstacles.iter().any(|(_, rs)| !rs.is_empty()) {
        let _ = writeln!(s, r#"  <g id="obstacles" fill="tomato" fill-opacity="0.25">"#);
        for (tick, rects) in &trace.obstacles {
            let _ = writeln!(s, r#"   <g class="tick" data-tick="{tick}">"#);
            for r in rects {
                rect_el(&mut s, r, "");
            }
            let _ = writeln!(s, "   </g>");
        }
        let _ = writeln!(s, "  </g>");
    }
    let _ = writeln!(
        s,
        r#"  <polyline id="trajectory" fill="none" stroke="royalblue" stroke-width="{}" points="{}"/>"#,
        2.0 * stroke,
        points_attr(&trace.trajectory)
    );
    if let Some(p) = &trace.final_path {
        let _ = writeln!(
            s,
            r#"  <polyline id="final-path" fill="none" stroke="seagreen" stroke-dasharray="{} {}" stroke-width="{}" points="{}"/>"#,
            4.0 * stroke,
            2.0 * stroke,
            stroke,
            points_attr(p.points())
        );
    }
    let _ = writeln!(s, "  </g>\n</svg>");
    s
}

pub fn write_svg(trace: &Trace, dest: &FsPath) -> Result<(), BenchError> {
    std::fs::write(dest, render_svg(trace)).map_err(|e| BenchError::io(dest, e))
}
