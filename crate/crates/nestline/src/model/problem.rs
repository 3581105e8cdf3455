//! Assembly of the packing NLP and its feasibility checker.

use thiserror::Error;

use super::{enumerate_pairs, line_var, piece_var, SeparationLineVar};
use crate::geometry::{overlap_area, rot_cos_sin, Placement, Point};
use crate::instance::NestingInstance;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("instance has no pieces")]
    EmptyInstance,
    #[error("decision vector has dimension {got}, problem needs {want}")]
    DimensionMismatch { got: usize, want: usize },
}

/// The assembled program. Immutable; evaluation methods are pure.
///
/// Constraint rows are ordered containment first, separation second.
/// Each placed part vertex `k` owns four containment rows `4k..4k+4`:
/// `-y <= 0`, `y - e <= 0`, `-x <= 0`, `x - z <= 0`. Separation rows follow
/// in pair order: for pair `l` all vertices of the first part with residual
/// `r <= 0`, then all vertices of the second with `-r <= 0`.
pub struct NlpProblem {
    strip_width: f64,
    n_pieces: usize,
    /// all part vertices, piece-major, local frame
    pts: Vec<Point>,
    /// owning piece of each vertex in `pts`
    pt_piece: Vec<usize>,
    /// global part list: (piece, start, end) ranges into `pts`
    parts: Vec<(usize, usize, usize)>,
    /// separation pairs as global part indices (first part belongs to the
    /// lower-numbered piece)
    pairs: Vec<(usize, usize)>,
    /// row offset of each pair's constraint block; one extra final entry
    pair_rows: Vec<usize>,
    dim: usize,
    n_rows: usize,
    lower: Vec<f64>,
    upper: Vec<f64>,
    min_part_area: f64,
    piece_ids: Vec<String>,
}

/// Build the program for an instance. `z_upper` bounds the length variable
/// from above; pass the seed layout's length, or infinity without one.
pub fn build_problem(instance: &NestingInstance, z_upper: f64) -> Result<NlpProblem, ModelError> {
    if instance.pieces.is_empty() {
        return Err(ModelError::EmptyInstance);
    }
    let n = instance.pieces.len();
    let mut pts = Vec::new();
    let mut pt_piece = Vec::new();
    let mut parts = Vec::new();
    let mut part_index = Vec::new(); // (piece, part) -> global part
    for (i, piece) in instance.pieces.iter().enumerate() {
        let mut per_piece = Vec::new();
        for part in &piece.parts {
            let start = pts.len();
            pts.extend_from_slice(&part.vertices);
            pt_piece.resize(pts.len(), i);
            per_piece.push(parts.len());
            parts.push((i, start, pts.len()));
        }
        part_index.push(per_piece);
    }
    let pairs: Vec<(usize, usize)> = enumerate_pairs(&instance.pieces)
        .iter()
        .map(|p| {
            (
                part_index[p.piece_i][p.part_j],
                part_index[p.piece_r][p.part_s],
            )
        })
        .collect();
    let mut pair_rows = Vec::with_capacity(pairs.len() + 1);
    let mut row = 4 * pts.len();
    for &(a, b) in &pairs {
        pair_rows.push(row);
        row += (parts[a].2 - parts[a].1) + (parts[b].2 - parts[b].1);
    }
    pair_rows.push(row);
    let dim = 1 + 3 * n + 3 * pairs.len();
    let z_lower = instance.total_area() / instance.strip_width;
    let mut lower = vec![f64::NEG_INFINITY; dim];
    let mut upper = vec![f64::INFINITY; dim];
    lower[0] = z_lower;
    upper[0] = z_upper;
    Ok(NlpProblem {
        strip_width: instance.strip_width,
        n_pieces: n,
        pts,
        pt_piece,
        parts,
        pairs,
        pair_rows,
        dim,
        n_rows: row,
        lower,
        upper,
        min_part_area: instance.min_part_area(),
        piece_ids: instance.pieces.iter().map(|p| p.id.clone()).collect(),
    })
}

impl NlpProblem {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_constraints(&self) -> usize {
        self.n_rows
    }

    pub fn n_pieces(&self) -> usize {
        self.n_pieces
    }

    pub fn n_lines(&self) -> usize {
        self.pairs.len()
    }

    pub fn strip_width(&self) -> f64 {
        self.strip_width
    }

    pub fn min_part_area(&self) -> f64 {
        self.min_part_area
    }

    pub fn bounds(&self) -> (&[f64], &[f64]) {
        (&self.lower, &self.upper)
    }

    /// Pairs as global part indices; parts expose their owning piece via
    /// [`NlpProblem::part_piece`].
    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn part_piece(&self, part: usize) -> usize {
        self.parts[part].0
    }

    pub fn piece_id(&self, piece: usize) -> &str {
        &self.piece_ids[piece]
    }

    pub fn objective(&self, v: &[f64]) -> f64 {
        v[0]
    }

    pub fn objective_grad(&self, _v: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        out[0] = 1.0;
    }

    fn placed(&self, v: &[f64]) -> Vec<super::PlacedVertex> {
        let mut placed = Vec::with_capacity(self.pts.len());
        for (k, &p) in self.pts.iter().enumerate() {
            let i = self.pt_piece[k];
            let b = piece_var(i);
            let pl = Placement::new(v[b], v[b + 1], v[b + 2]);
            placed.push(super::placed_vertex(p, pl));
        }
        placed
    }

    /// Evaluate every constraint row into `out` (length `num_constraints`).
    pub fn constraints(&self, v: &[f64], out: &mut [f64]) {
        let z = v[0];
        let e = self.strip_width;
        let placed = self.placed(v);
        for (k, pv) in placed.iter().enumerate() {
            out[4 * k] = -pv.y;
            out[4 * k + 1] = pv.y - e;
            out[4 * k + 2] = -pv.x;
            out[4 * k + 3] = pv.x - z;
        }
        for (l, &(a, b)) in self.pairs.iter().enumerate() {
            let lb = line_var(self.n_pieces, l);
            let line = SeparationLineVar {
                x_bar: v[lb],
                y_bar: v[lb + 1],
                alpha: v[lb + 2],
            };
            let (sa, ca) = line.alpha.sin_cos();
            let mut row = self.pair_rows[l];
            let (_, a0, a1) = self.parts[a];
            for pv in &placed[a0..a1] {
                out[row] = (pv.y - line.y_bar) * ca - (pv.x - line.x_bar) * sa;
                row += 1;
            }
            let (_, b0, b1) = self.parts[b];
            for pv in &placed[b0..b1] {
                out[row] = -((pv.y - line.y_bar) * ca - (pv.x - line.x_bar) * sa);
                row += 1;
            }
        }
    }

    /// Add `sum_k w[k] * grad g_k(v)` into `out`. Rows with zero weight are
    /// skipped, which makes the augmented-Lagrangian gradient cheap when few
    /// constraints are active.
    pub fn add_weighted_constraint_grad(&self, v: &[f64], w: &[f64], out: &mut [f64]) {
        let placed = self.placed(v);
        for (k, pv) in placed.iter().enumerate() {
            let i = self.pt_piece[k];
            let b = piece_var(i);
            let (w0, w1, w2, w3) = (w[4 * k], w[4 * k + 1], w[4 * k + 2], w[4 * k + 3]);
            if w0 != 0.0 {
                out[b + 1] -= w0;
                out[b + 2] -= w0 * pv.dy_dtheta;
            }
            if w1 != 0.0 {
                out[b + 1] += w1;
                out[b + 2] += w1 * pv.dy_dtheta;
            }
            if w2 != 0.0 {
                out[b] -= w2;
                out[b + 2] -= w2 * pv.dx_dtheta;
            }
            if w3 != 0.0 {
                out[b] += w3;
                out[b + 2] += w3 * pv.dx_dtheta;
                out[0] -= w3;
            }
        }
        for (l, &(a, b)) in self.pairs.iter().enumerate() {
            let lb = line_var(self.n_pieces, l);
            let (x_bar, y_bar, alpha) = (v[lb], v[lb + 1], v[lb + 2]);
            let (sa, ca) = alpha.sin_cos();
            let mut row = self.pair_rows[l];
            for (part, sign) in [(a, 1.0), (b, -1.0)] {
                let (piece, p0, p1) = self.parts[part];
                let pb = piece_var(piece);
                for pv in &placed[p0..p1] {
                    let wk = w[row] * sign;
                    row += 1;
                    if wk == 0.0 {
                        continue;
                    }
                    out[pb] -= wk * sa;
                    out[pb + 1] += wk * ca;
                    out[pb + 2] += wk * (pv.dy_dtheta * ca - pv.dx_dtheta * sa);
                    out[lb] += wk * sa;
                    out[lb + 1] -= wk * ca;
                    out[lb + 2] += wk * (-(pv.y - y_bar) * sa - (pv.x - x_bar) * ca);
                }
            }
        }
    }

    /// Dense gradient of a single constraint row, for the KKT checker and
    /// derivative tests. Slow path; evaluation sweeps use the weighted form.
    pub fn constraint_grad(&self, row: usize, v: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        let mut w = vec![0.0; self.n_rows];
        w[row] = 1.0;
        self.add_weighted_constraint_grad(v, &w, out);
    }

    /// Decode the per-piece placements from a decision vector.
    pub fn placements(&self, v: &[f64]) -> Vec<Placement> {
        (0..self.n_pieces)
            .map(|i| {
                let b = piece_var(i);
                Placement::new(v[b], v[b + 1], v[b + 2])
            })
            .collect()
    }

    /// Decode the separation-line variables from a decision vector.
    pub fn lines(&self, v: &[f64]) -> Vec<SeparationLineVar> {
        (0..self.pairs.len())
            .map(|l| {
                let b = line_var(self.n_pieces, l);
                SeparationLineVar {
                    x_bar: v[b],
                    y_bar: v[b + 1],
                    alpha: v[b + 2],
                }
            })
            .collect()
    }

    /// Placed vertex loops of a global part under a decision vector.
    pub fn placed_part(&self, part: usize, v: &[f64]) -> Vec<Point> {
        let (piece, p0, p1) = self.parts[part];
        let b = piece_var(piece);
        let (c, s) = rot_cos_sin(v[b + 2]);
        self.pts[p0..p1]
            .iter()
            .map(|p| Point::new(p.x * c - p.y * s + v[b], p.x * s + p.y * c + v[b + 1]))
            .collect()
    }
}

/// Worst constraint violations by family, plus the exact-geometry overlap
/// cross-check that does not trust the separation lines.
#[derive(Debug, Clone)]
pub struct FeasibilityReport {
    pub containment_x: f64,
    pub containment_y: f64,
    pub separation: f64,
    pub max_violation: f64,
    pub max_overlap: f64,
    pub worst_overlap: Option<(String, String)>,
}

impl FeasibilityReport {
    pub fn feasible(&self, tol: f64, overlap_tol: f64) -> bool {
        self.max_violation <= tol && self.max_overlap <= overlap_tol
    }
}

/// Evaluate all constraint families at `v` and cross-check every pair with
/// the exact overlap oracle.
pub fn check_feasibility(problem: &NlpProblem, v: &[f64]) -> Result<FeasibilityReport, ModelError> {
    if v.len() != problem.dim {
        return Err(ModelError::DimensionMismatch {
            got: v.len(),
            want: problem.dim,
        });
    }
    let mut g = vec![0.0; problem.n_rows];
    problem.constraints(v, &mut g);
    let mut report = FeasibilityReport {
        containment_x: f64::NEG_INFINITY,
        containment_y: f64::NEG_INFINITY,
        separation: f64::NEG_INFINITY,
        max_violation: f64::NEG_INFINITY,
        max_overlap: 0.0,
        worst_overlap: None,
    };
    let np = problem.pts.len();
    for k in 0..np {
        report.containment_y = report.containment_y.max(g[4 * k]).max(g[4 * k + 1]);
        report.containment_x = report.containment_x.max(g[4 * k + 2]).max(g[4 * k + 3]);
    }
    for &r in &g[4 * np..] {
        report.separation = report.separation.max(r);
    }
    report.max_violation = report
        .containment_x
        .max(report.containment_y)
        .max(report.separation);
    let mut placed: Vec<Option<Vec<Point>>> = vec![None; problem.parts.len()];
    for &(a, b) in &problem.pairs {
        for part in [a, b] {
            if placed[part].is_none() {
                placed[part] = Some(problem.placed_part(part, v));
            }
        }
        let (pa, pb) = (placed[a].as_ref().unwrap(), placed[b].as_ref().unwrap());
        if bbox_disjoint(pa, pb) {
            continue;
        }
        let ov = overlap_area(pa, pb);
        if ov > report.max_overlap {
            report.max_overlap = ov;
            report.worst_overlap = Some((
                problem.piece_ids[problem.parts[a].0].clone(),
                problem.piece_ids[problem.parts[b].0].clone(),
            ));
        }
    }
    Ok(report)
}

fn bbox_disjoint(a: &[Point], b: &[Point]) -> bool {
    let (alo, ahi) = crate::geometry::bounding_box(a);
    let (blo, bhi) = crate::geometry::bounding_box(b);
    ahi.x <= blo.x || bhi.x <= alo.x || ahi.y <= blo.y || bhi.y <= alo.y
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::instance_from_json;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::path::PathBuf;

    fn two_squares(width: f64) -> NestingInstance {
        instance_from_json(&format!(
            r#"{{ "name": "two", "strip_width": {width},
                 "pieces": [ {{ "id": "sq", "count": 2, "vertices": [[0,0],[1,0],[1,1],[0,1]] }} ] }}"#
        ))
        .unwrap()
    }

    #[test]
    fn two_convex_pieces_need_ten_variables() {
        let inst = instance_from_json(
            r#"{ "name": "quads", "strip_width": 4.0,
                 "pieces": [
                   { "id": "a", "vertices": [[0,0],[2,0],[3,1],[0,1]] },
                   { "id": "b", "vertices": [[0,0],[2,0],[2,2],[1,2]] } ] }"#,
        )
        .unwrap();
        let p = build_problem(&inst, f64::INFINITY).unwrap();
        assert_eq!(p.dim(), 10);
        assert_eq!(p.n_lines(), 1);
        assert_eq!(p.num_constraints(), 4 * 8 + 8);
    }

    #[test]
    fn poly1a_dimension_consistency() {
        let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/poly1a.json");
        let inst = crate::instance::parse_instance(&path).unwrap();
        let p = build_problem(&inst, f64::INFINITY).unwrap();
        assert_eq!(p.n_lines(), 222);
        assert_eq!(p.dim(), 712);
    }

    #[test]
    fn z_bounds_are_area_over_width_and_seed_length() {
        let inst = two_squares(1.0);
        let p = build_problem(&inst, 3.5).unwrap();
        let (lo, hi) = p.bounds();
        assert_eq!(lo[0], 2.0);
        assert_eq!(hi[0], 3.5);
        assert!(lo[1..].iter().all(|&x| x == f64::NEG_INFINITY));
        assert!(hi[1..].iter().all(|&x| x == f64::INFINITY));
    }

    /// Decision vector for two unit squares side by side plus the line
    /// between them. The first piece must sit where the residual is
    /// non-positive, so the vertical line points downward (alpha = -pi/2).
    fn side_by_side_vector(gap: f64) -> Vec<f64> {
        let mid = 1.0 + gap / 2.0;
        vec![
            2.0 + gap, // z
            0.0,
            0.0,
            0.0, // first square at origin
            1.0 + gap,
            0.0,
            0.0, // second square
            mid,
            0.0,
            -std::f64::consts::FRAC_PI_2, // vertical line between
        ]
    }

    #[test]
    fn feasibility_families_on_hand_layouts() {
        let inst = two_squares(1.0);
        let p = build_problem(&inst, f64::INFINITY).unwrap();
        let rep = check_feasibility(&p, &side_by_side_vector(0.5)).unwrap();
        assert!(rep.max_violation <= 0.0, "{rep:?}");
        assert_eq!(rep.max_overlap, 0.0);
        // touching squares sit exactly on every boundary: residuals 0
        let rep = check_feasibility(&p, &side_by_side_vector(0.0)).unwrap();
        assert!(rep.max_violation.abs() < 1e-12);
        assert_eq!(rep.containment_y, 0.0, "vertex at y = e exactly");
        assert_eq!(rep.max_overlap, 0.0);
        // overlapped squares violate separation and the exact oracle agrees
        let mut v = side_by_side_vector(0.0);
        v[4] = 0.5; // slide second square into the first
        let rep = check_feasibility(&p, &v).unwrap();
        assert!(rep.separation > 0.0);
        assert!(rep.max_overlap > 0.4);
        assert_eq!(rep.worst_overlap, Some(("sq".into(), "sq#2".into())));
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let inst = two_squares(1.0);
        let p = build_problem(&inst, f64::INFINITY).unwrap();
        assert!(matches!(
            check_feasibility(&p, &[0.0; 3]),
            Err(ModelError::DimensionMismatch { got: 3, want: 10 })
        ));
    }

    fn random_instance(rng: &mut ChaCha8Rng) -> NestingInstance {
        // mix of convex and nonconvex pieces so pairs span part counts
        let ell = r#"{ "id": "ell", "vertices": [[0,0],[2,0],[2,1],[1,1],[1,2],[0,2]] }"#;
        let tri = r#"{ "id": "tri", "vertices": [[0,0],[2,0],[1,1]] }"#;
        let quad = r#"{ "id": "quad", "vertices": [[0,0],[1,0],[1.5,1],[0,1]] }"#;
        let all = [ell, tri, quad];
        let n = rng.gen_range(2..4);
        let chosen: Vec<&str> = (0..n).map(|_| all[rng.gen_range(0..all.len())]).collect();
        instance_from_json(&format!(
            r#"{{ "name": "rand", "strip_width": 4.0, "pieces": [{}] }}"#,
            chosen.join(",")
        ))
        .unwrap()
    }

    #[test]
    fn constraint_gradients_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let h = 1e-6;
        for _ in 0..40 {
            let inst = random_instance(&mut rng);
            let p = build_problem(&inst, f64::INFINITY).unwrap();
            let v: Vec<f64> = (0..p.dim()).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let m = p.num_constraints();
            let mut jac = vec![vec![0.0; p.dim()]; m];
            for (row, grad) in jac.iter_mut().enumerate() {
                p.constraint_grad(row, &v, grad);
            }
            let mut gp = vec![0.0; m];
            let mut gm = vec![0.0; m];
            for d in 0..p.dim() {
                let mut vp = v.clone();
                vp[d] += h;
                let mut vm = v.clone();
                vm[d] -= h;
                p.constraints(&vp, &mut gp);
                p.constraints(&vm, &mut gm);
                for row in 0..m {
                    let numeric = (gp[row] - gm[row]) / (2.0 * h);
                    let analytic = jac[row][d];
                    let scale = numeric.abs().max(analytic.abs()).max(1.0);
                    assert!(
                        (numeric - analytic).abs() <= 1e-5 * scale,
                        "row {row} var {d}: {analytic} vs {numeric}"
                    );
                }
            }
        }
    }

    #[test]
    fn weighted_gradient_matches_row_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(100);
        let inst = random_instance(&mut rng);
        let p = build_problem(&inst, f64::INFINITY).unwrap();
        let v: Vec<f64> = (0..p.dim()).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let w: Vec<f64> = (0..p.num_constraints())
            .map(|_| {
                if rng.gen_bool(0.5) {
                    rng.gen_range(0.0..2.0)
                } else {
                    0.0
                }
            })
            .collect();
        let mut fast = vec![0.0; p.dim()];
        p.add_weighted_constraint_grad(&v, &w, &mut fast);
        let mut slow = vec![0.0; p.dim()];
        let mut row_grad = vec![0.0; p.dim()];
        for (k, &wk) in w.iter().enumerate() {
            p.constraint_grad(k, &v, &mut row_grad);
            for d in 0..p.dim() {
                slow[d] += wk * row_grad[d];
            }
        }
        for d in 0..p.dim() {
            assert!((fast[d] - slow[d]).abs() <= 1e-9 * (1.0 + slow[d].abs()));
        }
    }

    #[test]
    fn perturbing_one_piece_touches_only_its_constraints() {
        let inst = instance_from_json(
            r#"{ "name": "three", "strip_width": 4.0,
                 "pieces": [
                   { "id": "a", "vertices": [[0,0],[2,0],[2,1],[1,1],[1,2],[0,2]] },
                   { "id": "b", "vertices": [[0,0],[1,0],[1,1],[0,1]] },
                   { "id": "c", "vertices": [[0,0],[2,0],[1,1]] } ] }"#,
        )
        .unwrap();
        let p = build_problem(&inst, f64::INFINITY).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(101);
        let v: Vec<f64> = (0..p.dim()).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let mut base = vec![0.0; p.num_constraints()];
        p.constraints(&v, &mut base);
        let target = 1; // piece "b"
        let mut vp = v.clone();
        vp[piece_var(target)] += 0.25;
        vp[piece_var(target) + 1] += 0.5;
        vp[piece_var(target) + 2] -= 0.125;
        let mut bumped = vec![0.0; p.num_constraints()];
        p.constraints(&vp, &mut bumped);
        for (row, (&g0, &g1)) in base.iter().zip(&bumped).enumerate() {
            // a separation row references the piece owning its vertex (and
            // the line variables), not the pair's other piece
            let touched = if row < 4 * p.pts.len() {
                p.pt_piece[row / 4] == target
            } else {
                let l = match p.pair_rows.binary_search(&row) {
                    Ok(l) => l,
                    Err(next) => next - 1,
                };
                let (a, b) = p.pairs[l];
                let side_a = row - p.pair_rows[l] < p.parts[a].2 - p.parts[a].1;
                let part = if side_a { a } else { b };
                p.parts[part].0 == target
            };
            assert_eq!(g0 != g1, touched, "row {row}");
        }
    }
}
