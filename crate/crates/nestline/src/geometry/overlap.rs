//! Overlap area of two convex polygons via half-plane clipping.

use super::{edges, signed_area, Point};

/// Area of the intersection of two convex counterclockwise polygons.
///
/// Exact up to floating-point rounding; returns 0 for disjoint or touching
/// inputs. Used as the ground-truth overlap oracle in feasibility checks.
pub fn overlap_area(a: &[Point], b: &[Point]) -> f64 {
    if a.len() < 3 || b.len() < 3 {
        return 0.0;
    }
    let mut clipped: Vec<Point> = a.to_vec();
    let mut next: Vec<Point> = Vec::with_capacity(a.len() + b.len());
    for (p, q) in edges(b) {
        if clipped.is_empty() {
            return 0.0;
        }
        let dir = q - p;
        next.clear();
        let m = clipped.len();
        for i in 0..m {
            let cur = clipped[i];
            let nxt = clipped[(i + 1) % m];
            let dc = dir.cross(cur - p);
            let dn = dir.cross(nxt - p);
            if dc >= 0.0 {
                next.push(cur);
            }
            if (dc > 0.0 && dn < 0.0) || (dc < 0.0 && dn > 0.0) {
                let t = dc / (dc - dn);
                next.push(cur.add((nxt - cur).scale(t)));
            }
        }
        std::mem::swap(&mut clipped, &mut next);
    }
    if clipped.len() < 3 {
        return 0.0;
    }
    signed_area(&clipped).max(0.0)
}
