//! The nonlinear program: one length variable `z`, a rigid placement per
//! piece, and a movable separation line per cross-piece convex-part pair.
//!
//! Decision vector layout: `v[0] = z`; piece `i` owns `v[1+3i..1+3i+3]` as
//! `(tx, ty, theta)`; line `l` owns `v[1+3n+3l..+3]` as `(x_bar, y_bar,
//! alpha)`. Minimizing `z` subject to containment (every placed part vertex
//! inside `[0,z] x [0,e]`) and separation (for every pair, one side of its
//! line per piece) reproduces the strip-packing objective.

mod problem;

pub use problem::{build_problem, check_feasibility, FeasibilityReport, NlpProblem};

use serde::{Deserialize, Serialize};

use crate::geometry::{rot_cos_sin, Piece, Placement, Point};

/// A separation line: reference point and direction angle, all free
/// variables during optimization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeparationLineVar {
    pub x_bar: f64,
    pub y_bar: f64,
    pub alpha: f64,
}

/// One cross-piece convex-part pair `(piece_i, part_j)` vs `(piece_r,
/// part_s)` with `piece_i < piece_r`. Parts of the same piece move rigidly
/// together and never get a line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairIndex {
    pub piece_i: usize,
    pub part_j: usize,
    pub piece_r: usize,
    pub part_s: usize,
}

/// All cross-piece part pairs in lexicographic `(i, j, r, s)` order.
///
/// The count equals `sum_i p_i * (N - p_1 - ... - p_i)` over pieces in
/// order, the closed form for the number of separation lines.
pub fn enumerate_pairs(pieces: &[Piece]) -> Vec<PairIndex> {
    let mut pairs = Vec::new();
    for (i, pi) in pieces.iter().enumerate() {
        for j in 0..pi.parts.len() {
            for (r, pr) in pieces.iter().enumerate().skip(i + 1) {
                for s in 0..pr.parts.len() {
                    pairs.push(PairIndex {
                        piece_i: i,
                        part_j: j,
                        piece_r: r,
                        part_s: s,
                    });
                }
            }
        }
    }
    pairs
}

/// Index of piece `i`'s `(tx, ty, theta)` block in the decision vector.
pub fn piece_var(i: usize) -> usize {
    1 + 3 * i
}

/// Index of line `l`'s `(x_bar, y_bar, alpha)` block for an `n`-piece
/// instance.
pub fn line_var(n_pieces: usize, l: usize) -> usize {
    1 + 3 * n_pieces + 3 * l
}

/// A part vertex mapped to strip coordinates, with the partials needed by
/// every constraint touching it. `d/dtx` and `d/dty` are the unit vectors
/// and not stored.
#[derive(Debug, Clone, Copy)]
pub struct PlacedVertex {
    pub x: f64,
    pub y: f64,
    /// d(x, y)/d(theta)
    pub dx_dtheta: f64,
    pub dy_dtheta: f64,
}

/// Apply a placement to a local vertex and differentiate through it.
pub fn placed_vertex(local: Point, pl: Placement) -> PlacedVertex {
    let (c, s) = rot_cos_sin(pl.theta);
    PlacedVertex {
        x: local.x * c - local.y * s + pl.tx,
        y: local.x * s + local.y * c + pl.ty,
        dx_dtheta: -local.x * s - local.y * c,
        dy_dtheta: local.x * c - local.y * s,
    }
}

/// Signed separation residual of a placed vertex against a line, with its
/// gradient in the six owning variables.
///
/// `r = (y - y_bar) cos(alpha) - (x - x_bar) sin(alpha)`: zero on the line,
/// positive on the side the line's direction keeps to its left. The pair's
/// first piece is constrained to `r <= 0`, the second to `-r <= 0`. Unlike
/// the slope-intercept form `y - c x - d` with `c = tan(alpha)`, this
/// residual stays smooth for vertical lines; the two agree up to the factor
/// `cos(alpha)` wherever the slope exists.
pub fn separation_residual(v: &PlacedVertex, line: &SeparationLineVar) -> Residual {
    let (sa, ca) = line.alpha.sin_cos();
    let dx = v.x - line.x_bar;
    let dy = v.y - line.y_bar;
    Residual {
        value: dy * ca - dx * sa,
        d_tx: -sa,
        d_ty: ca,
        d_theta: v.dy_dtheta * ca - v.dx_dtheta * sa,
        d_x_bar: sa,
        d_y_bar: -ca,
        d_alpha: -dy * sa - dx * ca,
    }
}

/// Separation residual value and gradient. Placement partials belong to the
/// vertex's piece, line partials to the pair's line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residual {
    pub value: f64,
    pub d_tx: f64,
    pub d_ty: f64,
    pub d_theta: f64,
    pub d_x_bar: f64,
    pub d_y_bar: f64,
    pub d_alpha: f64,
}
