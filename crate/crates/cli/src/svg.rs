//! Deterministic SVG emission: fixed precision, fixed element order, fixed
//! viewbox, so golden-file comparisons are byte-stable.

use std::fmt::Write as _;

use mi_ellipse::{BodyF64, EllipseF64};

const VIEW: f64 = 2.2;
const BODY_SAMPLES: usize = 512;
const PALETTE: [&str; 4] = ["#888888", "#2ca02c", "#1f77b4", "#d62728"];

/// Render the body outline plus a list of labelled ellipses.
pub fn render(body: &BodyF64, ellipses: &[(String, EllipseF64)]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{:.6} {:.6} {:.6} {:.6}" width="600" height="600">"#,
        -VIEW,
        -VIEW,
        2.0 * VIEW,
        2.0 * VIEW
    );
    let _ = writeln!(out, r#"<g transform="scale(1,-1)" fill="none">"#);

    let mut path = String::new();
    for k in 0..BODY_SAMPLES {
        let th = 2.0 * std::f64::consts::PI * k as f64 / BODY_SAMPLES as f64;
        let p = body.boundary_point(th);
        let cmd = if k == 0 { 'M' } else { 'L' };
        let _ = write!(path, "{}{:.6} {:.6}", cmd, p.x, p.y);
    }
    path.push('Z');
    let _ = writeln!(
        out,
        r##"<path d="{path}" stroke="#222222" stroke-width="0.015"/>"##
    );

    for (k, (label, e)) in ellipses.iter().enumerate() {
        let (a, b) = e.semi_axes();
        let deg = e.phi().to_degrees();
        let color = PALETTE[k % PALETTE.len()];
        let _ = writeln!(
            out,
            r#"<ellipse rx="{:.6}" ry="{:.6}" transform="rotate({:.6})" stroke="{}" stroke-width="0.01" data-label="{}"/>"#,
            a, b, deg, color, label
        );
    }
    let _ = writeln!(out, "</g>");
    let _ = writeln!(out, "</svg>");
    out
}
