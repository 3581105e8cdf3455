//! Separating lines between convex polygons via the separating axis test.

use super::{edges, Point};

/// Find a line separating two convex counterclockwise polygons, if one exists.
///
/// Returns `(anchor, angle)`: a point on the line and the direction angle of
/// the line (radians in `(-pi, pi]`). The direction is the gap axis rotated a
/// quarter turn counterclockwise, so `a` lies where the signed residual
/// `(y - anchor.y) cos(angle) - (x - anchor.x) sin(angle)` is non-negative and
/// `b` where it is non-positive; touching polygons (zero gap) count as
/// separated. Returns `None` when the interiors overlap.
///
/// Among all edge-normal axes the one with the largest gap wins, and the
/// anchor sits at the middle of that gap, which gives well-centered starting
/// lines for the optimizer.
///
/// A zero gap along a diagonal axis does not evaluate to exactly zero once
/// the axis is normalized (the two projections round differently), so gaps
/// down to a small coordinate-relative tolerance still count as touching.
/// Residuals against the returned line are then trustworthy to the same
/// tolerance, far inside any feasibility threshold.
pub fn separating_axis(a: &[Point], b: &[Point]) -> Option<(Point, f64)> {
    let mut best_gap = f64::NEG_INFINITY;
    let mut best_axis = Point::new(0.0, 0.0);
    let mut best_mid = 0.0;
    let extent = a
        .iter()
        .chain(b)
        .fold(0.0f64, |m, p| m.max(p.x.abs()).max(p.y.abs()));
    let touch_tol = -1e-9 * extent.max(1.0);
    let mut consider = |axis: Point| {
        let len = axis.norm();
        if len <= 0.0 {
            return;
        }
        let m = axis.scale(1.0 / len);
        let (min_a, max_a) = project(a, m);
        let (min_b, max_b) = project(b, m);
        // gap with a below b along m, and the flipped orientation
        let gap_ab = min_b - max_a;
        if gap_ab > best_gap {
            best_gap = gap_ab;
            best_axis = m;
            best_mid = 0.5 * (max_a + min_b);
        }
        let gap_ba = min_a - max_b;
        if gap_ba > best_gap {
            best_gap = gap_ba;
            best_axis = m.scale(-1.0);
            best_mid = -0.5 * (min_a + max_b);
        }
    };
    for (p, q) in edges(a) {
        consider((q - p).rot90());
    }
    for (p, q) in edges(b) {
        consider((q - p).rot90());
    }
    if best_gap < touch_tol {
        return None;
    }
    let anchor = best_axis.scale(best_mid);
    let dir = best_axis.rot90();
    Some((anchor, dir.y.atan2(dir.x)))
}

fn project(poly: &[Point], m: Point) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for p in poly {
        let t = p.dot(m);
        lo = lo.min(t);
        hi = hi.max(t);
    }
    (lo, hi)
}
