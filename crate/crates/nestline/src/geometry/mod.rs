//! Polygon primitives for strip packing: pieces, convex parts, rigid
//! placements, convex decomposition, overlap measurement, and separating
//! lines.
//!
//! All polygons are simple, counterclockwise vertex loops without repeated
//! endpoints. Pieces live in a local frame; a [`Placement`] maps local to
//! strip coordinates.

mod decompose;
mod overlap;
mod separate;

pub use decompose::decompose;
pub use overlap::overlap_area;
pub use separate::separating_axis;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Relative tolerance for collinearity and convexity tests, scaled by the
/// squared polygon diameter.
pub const COLLINEAR_EPS: f64 = 1e-9;

/// Relative tolerance below which consecutive vertices count as coincident,
/// scaled by the polygon diameter.
pub const COINCIDENT_EPS: f64 = 1e-12;

/// Relative tolerance below which a polygon area counts as zero, scaled by
/// the squared polygon diameter.
pub const DEGENERATE_EPS: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum GeometryError {
    #[error("polygon needs at least 3 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("polygon has zero or near-zero area")]
    DegenerateArea,
    #[error("polygon edges self-intersect near vertex {0}")]
    SelfIntersecting(usize),
    #[error("supplied part is not convex")]
    NotConvex,
    #[error("supplied parts do not tile the outline")]
    PartsDisagree,
}

/// A point or vector in the plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn dot(self, o: Point) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the cross product `self x o`.
    pub fn cross(self, o: Point) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }

    pub fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }

    pub fn scale(self, k: f64) -> Point {
        Point::new(self.x * k, self.y * k)
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    /// Rotate 90 degrees counterclockwise.
    pub fn rot90(self) -> Point {
        Point::new(-self.y, self.x)
    }
}

/// A rigid motion: rotate by `theta` (counterclockwise, radians) about the
/// local origin, then translate by `(tx, ty)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Placement {
    pub tx: f64,
    pub ty: f64,
    pub theta: f64,
}

impl Placement {
    pub const fn new(tx: f64, ty: f64, theta: f64) -> Self {
        Placement { tx, ty, theta }
    }
}

/// Cosine and sine of `theta`, exact at the four axis-aligned angles.
///
/// Seed layouts place pieces at multiples of a quarter turn; returning exact
/// unit components there keeps integer seed coordinates exact in floating
/// point, so zero-overlap invariants hold without slack.
pub fn rot_cos_sin(theta: f64) -> (f64, f64) {
    use std::f64::consts::{FRAC_PI_2, PI};
    if theta == 0.0 {
        (1.0, 0.0)
    } else if theta == FRAC_PI_2 {
        (0.0, 1.0)
    } else if theta == PI {
        (-1.0, 0.0)
    } else if theta == 3.0 * FRAC_PI_2 {
        (0.0, -1.0)
    } else {
        (theta.cos(), theta.sin())
    }
}

/// Apply a placement to a local point.
pub fn transform(p: Point, pl: Placement) -> Point {
    let (c, s) = rot_cos_sin(pl.theta);
    Point::new(p.x * c - p.y * s + pl.tx, p.x * s + p.y * c + pl.ty)
}

/// Signed area of a vertex loop (positive for counterclockwise).
pub fn signed_area(poly: &[Point]) -> f64 {
    let mut s = 0.0;
    for (a, b) in edges(poly) {
        s += a.cross(b);
    }
    0.5 * s
}

/// Iterator over the closed edge loop `(v[i], v[i+1])`.
pub fn edges(poly: &[Point]) -> impl Iterator<Item = (Point, Point)> + '_ {
    (0..poly.len()).map(|i| (poly[i], poly[(i + 1) % poly.len()]))
}

/// Axis-aligned bounding box as `(min, max)` corners.
pub fn bounding_box(poly: &[Point]) -> (Point, Point) {
    let mut lo = Point::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in poly {
        lo.x = lo.x.min(p.x);
        lo.y = lo.y.min(p.y);
        hi.x = hi.x.max(p.x);
        hi.y = hi.y.max(p.y);
    }
    (lo, hi)
}

pub(crate) fn diameter_sq(poly: &[Point]) -> f64 {
    let (lo, hi) = bounding_box(poly);
    let d = hi - lo;
    d.dot(d)
}

/// A convex vertex loop, counterclockwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexPart {
    pub vertices: Vec<Point>,
}

impl ConvexPart {
    pub fn area(&self) -> f64 {
        signed_area(&self.vertices)
    }
}

/// A piece to place: simple polygon outline with its convex decomposition,
/// both in the same local frame. After [`normalize_piece`] the reference
/// vertex (the outline vertex nearest the input origin) sits at (0,0), so a
/// placement's translation is the strip position of that vertex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Piece {
    pub id: String,
    pub outline: Vec<Point>,
    pub parts: Vec<ConvexPart>,
}

impl Piece {
    pub fn area(&self) -> f64 {
        signed_area(&self.outline)
    }

    pub fn vertex_count(&self) -> usize {
        self.parts.iter().map(|p| p.vertices.len()).sum()
    }
}

/// Validate and canonicalize a polygon outline: drop repeated vertices,
/// orient counterclockwise, reject degenerate or self-intersecting input.
///
/// Collinear vertices are kept; benchmark decompositions subdivide edges and
/// those extra vertices carry separation constraints of their own.
pub fn normalize_polygon(raw: &[Point]) -> Result<Vec<Point>, GeometryError> {
    if raw.len() < 3 {
        return Err(GeometryError::TooFewVertices(raw.len()));
    }
    let diam_sq = diameter_sq(raw);
    let coincident_sq = COINCIDENT_EPS * COINCIDENT_EPS * diam_sq;
    // drop consecutive duplicates (closing duplicate included)
    let mut verts: Vec<Point> = Vec::with_capacity(raw.len());
    for &p in raw {
        if verts
            .last()
            .map_or(true, |q| (q - p).dot(q - p) > coincident_sq)
        {
            verts.push(p);
        }
    }
    while verts.len() > 1 {
        let first = verts[0];
        let last = *verts.last().unwrap();
        if (last - first).dot(last - first) > coincident_sq {
            break;
        }
        verts.pop();
    }
    if verts.len() < 3 {
        return Err(GeometryError::TooFewVertices(verts.len()));
    }
    let area = signed_area(&verts);
    if area.abs() <= DEGENERATE_EPS * diam_sq {
        return Err(GeometryError::DegenerateArea);
    }
    if area < 0.0 {
        verts.reverse();
    }
    if let Some(i) = find_self_intersection(&verts, COLLINEAR_EPS * diam_sq) {
        return Err(GeometryError::SelfIntersecting(i));
    }
    Ok(verts)
}

/// Index of the first edge that properly crosses a non-adjacent edge, if any.
fn find_self_intersection(poly: &[Point], tol: f64) -> Option<usize> {
    let n = poly.len();
    for i in 0..n {
        let (a1, a2) = (poly[i], poly[(i + 1) % n]);
        for j in i + 1..n {
            // skip adjacent edges (they share an endpoint)
            if j == i || (j + 1) % n == i || (i + 1) % n == j {
                continue;
            }
            let (b1, b2) = (poly[j], poly[(j + 1) % n]);
            if segments_cross(a1, a2, b1, b2, tol) {
                return Some(i);
            }
        }
    }
    None
}

fn segments_cross(a1: Point, a2: Point, b1: Point, b2: Point, tol: f64) -> bool {
    let d1 = (a2 - a1).cross(b1 - a1);
    let d2 = (a2 - a1).cross(b2 - a1);
    let d3 = (b2 - b1).cross(a1 - b1);
    let d4 = (b2 - b1).cross(a2 - b1);
    d1 * d2 < -tol && d3 * d4 < -tol
}

/// Build a piece from an outline and optional pre-supplied convex parts.
///
/// The outline is validated, oriented counterclockwise, and translated so the
/// vertex nearest the input origin (ties broken by lowest input index) lands
/// at (0,0). Without parts, the outline is decomposed. Supplied parts are
/// validated instead: each convex and counterclockwise, pairwise
/// interior-disjoint, areas summing to the outline area.
pub fn normalize_piece(
    id: &str,
    outline_raw: &[Point],
    parts_raw: Option<&[Vec<Point>]>,
) -> Result<Piece, GeometryError> {
    let mut outline = normalize_polygon(outline_raw)?;
    let mut reference = outline_raw[0];
    for &p in &outline_raw[1..] {
        if p.dot(p) < reference.dot(reference) {
            reference = p;
        }
    }
    for p in &mut outline {
        *p = p - reference;
    }
    let outline_area = signed_area(&outline);
    let parts = match parts_raw {
        None => decompose(&outline)?,
        Some(lists) => {
            let mut parts = Vec::with_capacity(lists.len());
            for list in lists {
                let mut verts = normalize_polygon(list)?;
                if !is_convex(&verts) {
                    return Err(GeometryError::NotConvex);
                }
                for p in &mut verts {
                    *p = p - reference;
                }
                parts.push(ConvexPart { vertices: verts });
            }
            let sum: f64 = parts.iter().map(|p| p.area()).sum();
            if (sum - outline_area).abs() > 1e-9 * outline_area {
                return Err(GeometryError::PartsDisagree);
            }
            for i in 0..parts.len() {
                for j in i + 1..parts.len() {
                    let ov = overlap_area(&parts[i].vertices, &parts[j].vertices);
                    if ov > 1e-9 * outline_area {
                        return Err(GeometryError::PartsDisagree);
                    }
                }
            }
            parts
        }
    };
    Ok(Piece {
        id: id.to_string(),
        outline,
        parts,
    })
}

/// Whether a counterclockwise vertex loop is convex (collinear runs allowed).
pub fn is_convex(poly: &[Point]) -> bool {
    let tol = COLLINEAR_EPS * diameter_sq(poly);
    let n = poly.len();
    (0..n).all(|i| {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        let c = poly[(i + 2) % n];
        (b - a).cross(c - b) >= -tol
    })
}
