//! Convex decomposition: ear-clipping triangulation followed by
//! Hertel-Mehlhorn greedy merging of triangles across inessential diagonals.

use super::{ConvexPart, GeometryError, Point, COLLINEAR_EPS};

/// Decompose a simple counterclockwise polygon into convex parts.
///
/// Produces at most `v - 2` parts (the triangulation bound); merging usually
/// gives far fewer. Vertices of the parts are vertices of the outline.
pub fn decompose(outline: &[Point]) -> Result<Vec<ConvexPart>, GeometryError> {
    let n = outline.len();
    if n < 3 {
        return Err(GeometryError::TooFewVertices(n));
    }
    let tol = COLLINEAR_EPS * super::diameter_sq(outline);
    if super::is_convex(outline) {
        return Ok(vec![ConvexPart {
            vertices: outline.to_vec(),
        }]);
    }
    let triangles = ear_clip(outline, tol)?;
    let polys = hertel_mehlhorn(outline, triangles, tol);
    Ok(polys
        .into_iter()
        .map(|idx| ConvexPart {
            vertices: idx.iter().map(|&i| outline[i]).collect(),
        })
        .collect())
}

/// Triangulate by ear clipping; returns index triples into `outline`.
fn ear_clip(outline: &[Point], tol: f64) -> Result<Vec<[usize; 3]>, GeometryError> {
    let n = outline.len();
    let mut ring: Vec<usize> = (0..n).collect();
    let mut tris = Vec::with_capacity(n - 2);
    let mut guard = 0usize;
    while ring.len() > 3 {
        let m = ring.len();
        let mut clipped = false;
        for k in 0..m {
            let (ia, ib, ic) = (ring[(k + m - 1) % m], ring[k], ring[(k + 1) % m]);
            let (a, b, c) = (outline[ia], outline[ib], outline[ic]);
            let turn = (b - a).cross(c - b);
            if turn < -tol {
                continue; // reflex corner
            }
            if turn.abs() <= tol {
                // collinear corner: drop the middle vertex, no triangle
                ring.remove(k);
                clipped = true;
                break;
            }
            let blocked = ring.iter().any(|&j| {
                j != ia && j != ib && j != ic && point_in_triangle(outline[j], a, b, c, tol)
            });
            if blocked {
                continue;
            }
            tris.push([ia, ib, ic]);
            ring.remove(k);
            clipped = true;
            break;
        }
        if !clipped {
            return Err(GeometryError::SelfIntersecting(ring[0]));
        }
        guard += 1;
        if guard > 2 * n {
            return Err(GeometryError::SelfIntersecting(ring[0]));
        }
    }
    let t = [ring[0], ring[1], ring[2]];
    let (a, b, c) = (outline[t[0]], outline[t[1]], outline[t[2]]);
    if (b - a).cross(c - b) > tol {
        tris.push(t);
    }
    Ok(tris)
}

/// Closed-triangle containment: points on the boundary count as inside, so a
/// reflex vertex sitting exactly on a candidate ear's diagonal still blocks
/// the ear (clipping it would cut across the notch behind that vertex).
fn point_in_triangle(p: Point, a: Point, b: Point, c: Point, tol: f64) -> bool {
    let d1 = (b - a).cross(p - a);
    let d2 = (c - b).cross(p - b);
    let d3 = (a - c).cross(p - c);
    d1 >= -tol && d2 >= -tol && d3 >= -tol
}

/// Greedily merge triangles across diagonals whose removal keeps both
/// junction corners convex. Polygons are kept as index loops.
fn hertel_mehlhorn(outline: &[Point], tris: Vec<[usize; 3]>, tol: f64) -> Vec<Vec<usize>> {
    let mut polys: Vec<Vec<usize>> = tris.into_iter().map(|t| t.to_vec()).collect();
    'restart: loop {
        for i in 0..polys.len() {
            for j in i + 1..polys.len() {
                if let Some(merged) = try_merge(outline, &polys[i], &polys[j], tol) {
                    polys[i] = merged;
                    polys.swap_remove(j);
                    continue 'restart;
                }
            }
        }
        return polys;
    }
}

/// Merge two convex index loops sharing a full edge if the result is convex.
fn try_merge(outline: &[Point], p: &[usize], q: &[usize], tol: f64) -> Option<Vec<usize>> {
    let (np, nq) = (p.len(), q.len());
    for ip in 0..np {
        let (a, b) = (p[ip], p[(ip + 1) % np]);
        for iq in 0..nq {
            // shared edge appears reversed in the neighbor
            if q[iq] == b && q[(iq + 1) % nq] == a {
                let mut merged = Vec::with_capacity(np + nq - 2);
                // walk p from the edge end, then q from the edge end
                for k in 0..np - 1 {
                    merged.push(p[(ip + 1 + k) % np]);
                }
                for k in 0..nq - 1 {
                    merged.push(q[(iq + 1 + k) % nq]);
                }
                if loop_is_convex(outline, &merged, tol) {
                    return Some(merged);
                }
                return None;
            }
        }
    }
    None
}

fn loop_is_convex(outline: &[Point], idx: &[usize], tol: f64) -> bool {
    let n = idx.len();
    (0..n).all(|i| {
        let a = outline[idx[i]];
        let b = outline[idx[(i + 1) % n]];
        let c = outline[idx[(i + 2) % n]];
        (b - a).cross(c - b) >= -tol
    })
}

#[cfg(test)]
mod tests {
    use super::super::{normalize_polygon, signed_area};
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn assert_valid_decomposition(outline: &[Point], parts: &[ConvexPart]) {
        let total: f64 = parts.iter().map(|p| p.area()).sum();
        let want = signed_area(outline);
        assert!(
            (total - want).abs() <= 1e-9 * want.max(1.0),
            "areas disagree: parts {total} vs outline {want}"
        );
        assert!(parts.len() <= outline.len() - 2);
        for part in parts {
            assert!(part.vertices.len() >= 3);
            assert!(part.area() > 0.0);
            assert!(super::super::is_convex(&part.vertices));
        }
        for i in 0..parts.len() {
            for j in i + 1..parts.len() {
                let ov = super::super::overlap_area(&parts[i].vertices, &parts[j].vertices);
                assert!(ov <= 1e-12, "parts {i} and {j} overlap by {ov}");
            }
        }
    }

    #[test]
    fn square_stays_single_part() {
        let sq = vec![
            Point::new(0.0, 0.0),
            Point::new(2.0, 0.0),
            Point::new(2.0, 2.0),
            Point::new(0.0, 2.0),
        ];
        let parts = decompose(&sq).unwrap();
        assert_eq!(parts.len(), 1);
        assert_eq!(parts[0].vertices.len(), 4);
    }

    #[test]
    fn l_shape_splits_into_two_rectangles_worth() {
        let l = vec![
            Point::new(0.0, 0.0),
            Point::new(3.0, 0.0),
            Point::new(3.0, 1.0),
            Point::new(1.0, 1.0),
            Point::new(1.0, 2.0),
            Point::new(0.0, 2.0),
        ];
        let parts = decompose(&l).unwrap();
        assert_valid_decomposition(&l, &parts);
        assert!(parts.len() >= 2 && parts.len() <= 4);
    }

    #[test]
    fn star_polygons_decompose_cleanly() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..500 {
            let n = rng.gen_range(3..=12);
            let mut angles: Vec<f64> = (0..n)
                .map(|_| rng.gen_range(0.0..std::f64::consts::TAU))
                .collect();
            angles.sort_by(|a, b| a.partial_cmp(b).unwrap());
            angles.dedup_by(|a, b| (*a - *b).abs() < 1e-3);
            if angles.len() < 3 {
                continue;
            }
            let raw: Vec<Point> = angles
                .iter()
                .map(|&t| {
                    let r = rng.gen_range(0.5..2.0);
                    Point::new(r * t.cos(), r * t.sin())
                })
                .collect();
            let Ok(outline) = normalize_polygon(&raw) else {
                continue;
            };
            let parts = decompose(&outline).unwrap();
            assert_valid_decomposition(&outline, &parts);
        }
    }
}
