//! Deterministic SVG rendering of layouts: strip frame, dotted length
//! marker, and one filled polygon per convex part.
//!
//! Output bytes depend only on the instance and the layout (fixed-precision
//! number formatting, palette derived from piece index), so identical runs
//! produce identical files.

use std::fmt::Write as _;

use thiserror::Error;

use crate::geometry::{transform, Placement};
use crate::instance::NestingInstance;
use crate::report::{LayoutError, LayoutFile};

#[derive(Debug, Error)]
pub enum SvgError {
    #[error("layout has no placements to draw")]
    EmptyLayout,
    #[error(transparent)]
    Layout(#[from] LayoutError),
}

/// Fixed six-decimal formatting; normalizes negative zero so coordinates
/// that differ only in sign bit render identically.
fn num(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.6}")
}

/// Opaque fill for piece `i` of `n`: hues spread around the wheel at fixed
/// saturation and value, emitted as hex so no renderer-side color parsing
/// variance creeps in.
fn fill_color(i: usize, n: usize) -> String {
    let hue = (i * 360 / n.max(1) + 20) % 360;
    let (s, v) = (0.55, 0.85);
    let c = v * s;
    let hf = hue as f64 / 60.0;
    let x = c * (1.0 - (hf % 2.0 - 1.0).abs());
    let (r, g, b) = match hue / 60 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    let m = v - c;
    let byte = |f: f64| ((f + m) * 255.0).round() as u8;
    format!("#{:02x}{:02x}{:02x}", byte(r), byte(g), byte(b))
}

/// Render `layout` over `instance` to an SVG document.
///
/// The strip occupies world `y` in `[0, width]`; SVG's y axis points down,
/// so world points map through `y -> width - y`. The frame extends to the
/// larger of the claimed length and the furthest placed vertex, so layouts
/// that fail verification still draw completely.
pub fn render_svg(instance: &NestingInstance, layout: &LayoutFile) -> Result<String, SvgError> {
    layout.decision_vector(instance)?;
    if layout.placements.is_empty() {
        return Err(SvgError::EmptyLayout);
    }

    let e = instance.strip_width;
    let mut max_x = layout.length;
    let mut min_x = 0.0f64;
    let placed: Vec<(usize, Placement)> = layout
        .placements
        .iter()
        .enumerate()
        .map(|(i, p)| (i, Placement::new(p.tx, p.ty, p.theta)))
        .collect();
    for (i, pl) in &placed {
        for part in &instance.pieces[*i].parts {
            for &v in &part.vertices {
                let w = transform(v, *pl);
                max_x = max_x.max(w.x);
                min_x = min_x.min(w.x);
            }
        }
    }
    let frame_len = max_x;
    let margin = (0.05 * frame_len.max(e)).max(0.25);
    let view_x = min_x - margin;
    let view_w = frame_len - min_x + 2.0 * margin;
    let view_h = e + 2.0 * margin;
    let stroke = num(frame_len.max(e) / 400.0);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="960" height="{:.0}" viewBox="{} {} {} {}">"#,
        (960.0 * view_h / view_w).round(),
        num(view_x),
        num(-margin),
        num(view_w),
        num(view_h),
    );
    let _ = writeln!(
        svg,
        "  <title>{}: length {}</title>",
        layout.instance,
        num(layout.length)
    );
    let _ = writeln!(
        svg,
        r##"  <rect x="0" y="0" width="{}" height="{}" fill="none" stroke="#333" stroke-width="{stroke}"/>"##,
        num(frame_len),
        num(e),
    );

    let n = placed.len();
    for (i, pl) in &placed {
        let piece = &instance.pieces[*i];
        let fill = fill_color(*i, n);
        let _ = writeln!(svg, r#"  <g id="piece-{}">"#, piece.id);
        for part in &piece.parts {
            let points: Vec<String> = part
                .vertices
                .iter()
                .map(|&v| {
                    let w = transform(v, *pl);
                    format!("{},{}", num(w.x), num(e - w.y))
                })
                .collect();
            let _ = writeln!(
                svg,
                r##"    <polygon points="{}" fill="{fill}" fill-opacity="0.85" stroke="#222" stroke-width="{stroke}"/>"##,
                points.join(" "),
            );
        }
        let _ = writeln!(svg, "  </g>");
    }

    let _ = writeln!(
        svg,
        r##"  <line x1="{z}" y1="0" x2="{z}" y2="{}" stroke="#c22" stroke-width="{w}" stroke-dasharray="{d}"/>"##,
        num(e),
        z = num(layout.length),
        w = num(frame_len.max(e) / 250.0),
        d = num(frame_len.max(e) / 60.0),
    );
    svg.push_str("</svg>\n");
    Ok(svg)
}
