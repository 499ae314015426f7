//! Hand-written SVG of the boundary arcs.

use std::fmt::Write;

use karc_core::arc_tracer::{KArc, Status};
use karc_core::io::downsample_indices;
use num_complex::Complex64;

const SCALE: f64 = 360.0;
const MARGIN: f64 = 0.22;
const ARC_COLOR: &str = "#1d3f7a";
const MIRROR_COLOR: &str = "#8a9bbb";
const FILL: &str = "#e3eaf6";

struct Frame {
    y_top: f64,
}

impl Frame {
    fn x(&self, z: Complex64) -> f64 {
        (z.re + 1.0 + MARGIN) * SCALE
    }

    fn y(&self, z: Complex64) -> f64 {
        (self.y_top - z.im) * SCALE
    }

    fn points(&self, pts: &[Complex64]) -> String {
        let mut s = String::new();
        for (k, z) in pts.iter().enumerate() {
            if k > 0 {
                s.push(' ');
            }
            write!(s, "{:.2},{:.2}", self.x(*z), self.y(*z)).unwrap();
        }
        s
    }
}

/// Downsampled points running from the lower Farey endpoint to the upper.
fn thinned(arc: &KArc, budget: usize) -> Vec<Complex64> {
    let pts: Vec<Complex64> = arc.points().collect();
    let mut out: Vec<Complex64> = downsample_indices(&pts, budget)
        .into_iter()
        .map(|i| pts[i])
        .collect();
    let lo = arc.pair().lo.root_of_unity();
    if (out[0] - lo).norm() > (out[out.len() - 1] - lo).norm() {
        out.reverse();
    }
    out
}

/// Upper arcs in Farey order, optionally with their mirror images below
/// the real axis.
pub fn render(n: u64, arcs: &[KArc], full: bool, budget: usize) -> String {
    let half = 1.0 + MARGIN;
    let y_bottom = if full { -half } else { -0.12 };
    let frame = Frame { y_top: half };
    let width = 2.0 * half * SCALE;
    let height = (half - y_bottom) * SCALE;
    let origin = Complex64::new(0.0, 0.0);

    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}" font-family="serif" font-size="15">"#
    )
    .unwrap();
    writeln!(s, r#"<title>Region boundary, n = {n}</title>"#).unwrap();
    writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();

    let upper: Vec<Vec<Complex64>> = arcs.iter().map(|a| thinned(a, budget)).collect();

    // region fill: upper arcs forward, mirrored arcs back
    let mut outline: Vec<Complex64> = upper.iter().flatten().copied().collect();
    if full {
        outline.extend(upper.iter().rev().flat_map(|p| p.iter().rev().map(|z| z.conj())));
    } else {
        outline.push(Complex64::new(1.0, 0.0));
    }
    writeln!(
        s,
        r#"<polygon points="{}" fill="{FILL}" stroke="none"/>"#,
        frame.points(&outline)
    )
    .unwrap();

    // unit circle and axes
    writeln!(
        s,
        r##"<circle cx="{:.2}" cy="{:.2}" r="{SCALE:.2}" fill="none" stroke="#b0b0b0" stroke-width="1"/>"##,
        frame.x(origin),
        frame.y(origin)
    )
    .unwrap();
    let axis = |a: Complex64, b: Complex64| {
        format!(
            r##"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#d0d0d0" stroke-width="1"/>"##,
            frame.x(a),
            frame.y(a),
            frame.x(b),
            frame.y(b)
        )
    };
    writeln!(s, "{}", axis(Complex64::new(-half, 0.0), Complex64::new(half, 0.0))).unwrap();
    writeln!(s, "{}", axis(Complex64::new(0.0, y_bottom), Complex64::new(0.0, half))).unwrap();

    for (arc, pts) in arcs.iter().zip(&upper) {
        let dash = if arc.status == Status::Heuristic {
            r#" stroke-dasharray="3 3""#
        } else {
            ""
        };
        if full {
            let mirrored: Vec<Complex64> = pts.iter().map(|z| z.conj()).collect();
            writeln!(
                s,
                r#"<polyline points="{}" fill="none" stroke="{MIRROR_COLOR}" stroke-width="1.5"{dash}/>"#,
                frame.points(&mirrored)
            )
            .unwrap();
        }
        writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="{ARC_COLOR}" stroke-width="2"{dash}><title>{} {}</title></polyline>"#,
            frame.points(pts),
            arc.pair().lo,
            arc.pair().hi
        )
        .unwrap();
    }

    let mut ends = Vec::new();
    for arc in arcs {
        for f in [arc.pair().lo, arc.pair().hi] {
            if !ends.contains(&f) {
                ends.push(f);
            }
        }
    }
    for f in ends {
        let w = f.root_of_unity();
        writeln!(
            s,
            r#"<circle cx="{:.2}" cy="{:.2}" r="3.5" fill="{ARC_COLOR}"/>"#,
            frame.x(w),
            frame.y(w)
        )
        .unwrap();
        let at = w * 1.09;
        let anchor = if w.re > 0.2 {
            "start"
        } else if w.re < -0.2 {
            "end"
        } else {
            "middle"
        };
        writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="{anchor}" dominant-baseline="middle">{f}</text>"#,
            frame.x(at),
            frame.y(at)
        )
        .unwrap();
    }
    s.push_str("</svg>\n");
    s
}
