//! Starting layouts: a bottom-left heuristic over a conservative raster of
//! the strip, randomized over piece order and axis-aligned rotations, plus
//! initialization of the separation-line variables from the chosen layout.
//!
//! The raster marks every cell whose square meets a piece's interior, so two
//! pieces with disjoint cell sets have exactly zero overlap area; seeds are
//! feasible in exact geometry, not just on the grid.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::geometry::{
    bounding_box, overlap_area, separating_axis, transform, Piece, Placement, Point,
};
use crate::instance::NestingInstance;
use crate::model::{enumerate_pairs, SeparationLineVar};

#[derive(Debug, Error)]
pub enum SeedError {
    #[error("piece {id} does not fit the strip at any axis-aligned rotation")]
    DoesNotFit { id: String },
    #[error("no separator between pieces {a} and {b}; rasterization let them overlap")]
    NoSeparator { a: String, b: String },
}

/// Quarter-turn angles in radians, exact under [`rot_cos_sin`].
pub const ROTATIONS: [f64; 4] = [
    0.0,
    std::f64::consts::FRAC_PI_2,
    std::f64::consts::PI,
    3.0 * std::f64::consts::FRAC_PI_2,
];

/// Occupancy raster of the strip: `width_cells` rows per column, columns
/// growing along the length, one bit per cell.
pub struct RasterGrid {
    pub scale: f64,
    pub width_cells: usize,
    words_per_col: usize,
    cols: Vec<u64>,
    used_cols: usize,
}

impl RasterGrid {
    pub fn new(strip_width: f64, scale: f64) -> Self {
        assert!(scale > 0.0 && strip_width > 0.0);
        let width_cells = (strip_width / scale).ceil().max(1.0) as usize;
        RasterGrid {
            scale,
            width_cells,
            words_per_col: width_cells.div_ceil(64),
            cols: Vec::new(),
            used_cols: 0,
        }
    }

    /// Drop all occupancy, keeping the allocation.
    pub fn clear(&mut self) {
        self.cols.fill(0);
        self.used_cols = 0;
    }

    /// Number of columns any piece currently reaches.
    pub fn used_cols(&self) -> usize {
        self.used_cols
    }

    fn ensure_cols(&mut self, n: usize) {
        if n * self.words_per_col > self.cols.len() {
            self.cols.resize(n * self.words_per_col, 0);
        }
    }

    /// Would `mask` collide with occupied cells at cell position `(col, row)`?
    /// The caller keeps `row + mask.h <= width_cells`.
    fn collides(&self, mask: &PieceMask, col: usize, row: usize) -> bool {
        let (word_off, bit_off) = (row / 64, (row % 64) as u32);
        for j in 0..mask.w {
            let grid_base = (col + j) * self.words_per_col;
            let mask_base = j * mask.words_per_col;
            for k in 0..mask.words_per_col {
                let m = mask.cols[mask_base + k];
                if m == 0 {
                    continue;
                }
                if self.cols[grid_base + word_off + k] & (m << bit_off) != 0 {
                    return true;
                }
                if bit_off > 0 {
                    let spill = m >> (64 - bit_off);
                    if spill != 0 && self.cols[grid_base + word_off + k + 1] & spill != 0 {
                        return true;
                    }
                }
            }
        }
        false
    }

    fn place(&mut self, mask: &PieceMask, col: usize, row: usize) {
        let (word_off, bit_off) = (row / 64, (row % 64) as u32);
        for j in 0..mask.w {
            let grid_base = (col + j) * self.words_per_col;
            let mask_base = j * mask.words_per_col;
            for k in 0..mask.words_per_col {
                let m = mask.cols[mask_base + k];
                if m == 0 {
                    continue;
                }
                self.cols[grid_base + word_off + k] |= m << bit_off;
                if bit_off > 0 {
                    let spill = m >> (64 - bit_off);
                    if spill != 0 {
                        self.cols[grid_base + word_off + k + 1] |= spill;
                    }
                }
            }
        }
        self.used_cols = self.used_cols.max(col + mask.w);
    }
}

/// Conservative cell cover of a piece at one of the four rotations.
pub struct PieceMask {
    pub rotation: usize,
    /// cells across (length direction) and up (width direction)
    pub w: usize,
    pub h: usize,
    /// rotated-frame bounding-box corner the cell (0,0) corresponds to
    pub anchor: Point,
    /// the piece is thinner than one cell in some direction; the cover is
    /// still conservative, just wasteful
    pub coarse: bool,
    words_per_col: usize,
    cols: Vec<u64>,
}

impl PieceMask {
    pub fn cell_count(&self) -> usize {
        self.cols.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_set(&self, cx: usize, cy: usize) -> bool {
        self.cols[cx * self.words_per_col + cy / 64] & (1 << (cy % 64)) != 0
    }
}

/// Rasterize a piece rotated by `ROTATIONS[rotation]`: a cell is set exactly
/// when its closed square meets the open interior of some convex part.
pub fn rasterize(piece: &Piece, rotation: usize, scale: f64) -> PieceMask {
    let theta = ROTATIONS[rotation];
    let rotated: Vec<Vec<Point>> = piece
        .parts
        .iter()
        .map(|part| {
            part.vertices
                .iter()
                .map(|&p| transform(p, Placement::new(0.0, 0.0, theta)))
                .collect()
        })
        .collect();
    let mut lo = Point::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for part in &rotated {
        let (plo, phi) = bounding_box(part);
        lo = Point::new(lo.x.min(plo.x), lo.y.min(plo.y));
        hi = Point::new(hi.x.max(phi.x), hi.y.max(phi.y));
    }
    let extent = hi - lo;
    let w = ((extent.x / scale).ceil() as usize).max(1);
    let h = ((extent.y / scale).ceil() as usize).max(1);
    let words_per_col = h.div_ceil(64);
    let mut cols = vec![0u64; w * words_per_col];
    for part in &rotated {
        let (plo, phi) = bounding_box(part);
        let cx0 = ((plo.x - lo.x) / scale).floor().max(0.0) as usize;
        let cy0 = ((plo.y - lo.y) / scale).floor().max(0.0) as usize;
        let cx1 = (((phi.x - lo.x) / scale).ceil() as usize).min(w);
        let cy1 = (((phi.y - lo.y) / scale).ceil() as usize).min(h);
        for cx in cx0..cx1 {
            for cy in cy0..cy1 {
                let cell = [
                    Point::new(lo.x + cx as f64 * scale, lo.y + cy as f64 * scale),
                    Point::new(lo.x + (cx + 1) as f64 * scale, lo.y + cy as f64 * scale),
                    Point::new(
                        lo.x + (cx + 1) as f64 * scale,
                        lo.y + (cy + 1) as f64 * scale,
                    ),
                    Point::new(lo.x + cx as f64 * scale, lo.y + (cy + 1) as f64 * scale),
                ];
                if overlap_area(part, &cell) > 0.0 {
                    cols[cx * words_per_col + cy / 64] |= 1 << (cy % 64);
                }
            }
        }
    }
    PieceMask {
        rotation,
        w,
        h,
        anchor: lo,
        coarse: extent.x < scale || extent.y < scale,
        words_per_col,
        cols,
    }
}

/// Leftmost-then-lowest placement of each mask in order. Returns the chosen
/// `(col, row)` cells. The grid keeps earlier content, so repeated calls
/// stack layouts; callers normally [`RasterGrid::clear`] first.
pub fn bottom_left_place(
    masks: &[&PieceMask],
    grid: &mut RasterGrid,
) -> Result<Vec<(usize, usize)>, SeedError> {
    let mut cells = Vec::with_capacity(masks.len());
    for mask in masks {
        if mask.h > grid.width_cells {
            return Err(SeedError::DoesNotFit { id: String::new() });
        }
        // a fit always exists at the first empty column
        let limit = grid.used_cols();
        grid.ensure_cols(limit + mask.w + 1);
        let mut chosen = None;
        'cols: for col in 0..=limit {
            for row in 0..=grid.width_cells - mask.h {
                if !grid.collides(mask, col, row) {
                    chosen = Some((col, row));
                    break 'cols;
                }
            }
        }
        let (col, row) = chosen.expect("empty column fits");
        grid.place(mask, col, row);
        cells.push((col, row));
    }
    Ok(cells)
}

/// A feasible starting layout plus the line variables seeded from it.
#[derive(Debug, Clone)]
pub struct SeedLayout {
    pub placements: Vec<Placement>,
    pub length: f64,
    pub lines: Vec<SeparationLineVar>,
    /// ids of pieces thinner than one raster cell (conservative but wasteful)
    pub coarse_pieces: Vec<String>,
}

impl SeedLayout {
    /// Flat decision vector `(z, placements, lines)` in the model's layout.
    pub fn decision_vector(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(1 + 3 * self.placements.len() + 3 * self.lines.len());
        v.push(self.length);
        for p in &self.placements {
            v.extend_from_slice(&[p.tx, p.ty, p.theta]);
        }
        for l in &self.lines {
            v.extend_from_slice(&[l.x_bar, l.y_bar, l.alpha]);
        }
        v
    }
}

/// Exact strip length of a layout: the largest placed outline vertex x.
pub fn layout_length(pieces: &[Piece], placements: &[Placement]) -> f64 {
    let mut z = 0.0f64;
    for (piece, &pl) in pieces.iter().zip(placements) {
        for &v in &piece.outline {
            z = z.max(transform(v, pl).x);
        }
    }
    z
}

/// Best-of-`iterations` bottom-left construction with uniformly random piece
/// orders and rotations, deterministic in `rng_seed`.
///
/// Each iteration draws from its own RNG stream, so results do not depend on
/// scheduling; ties in length keep the earliest iteration. A drawn rotation
/// that does not fit the strip width falls forward to the next quarter turn
/// that does.
pub fn generate_start(
    instance: &NestingInstance,
    iterations: u64,
    rng_seed: u64,
) -> Result<SeedLayout, SeedError> {
    let scale = instance.raster_scale.unwrap_or(1.0);
    let n = instance.pieces.len();
    let mut grid = RasterGrid::new(instance.strip_width, scale);
    let masks: Vec<[PieceMask; 4]> = instance
        .pieces
        .iter()
        .map(|p| std::array::from_fn(|r| rasterize(p, r, scale)))
        .collect();
    for (piece, rots) in instance.pieces.iter().zip(&masks) {
        if rots.iter().all(|m| m.h > grid.width_cells) {
            return Err(SeedError::DoesNotFit {
                id: piece.id.clone(),
            });
        }
    }
    let coarse_pieces: Vec<String> = instance
        .pieces
        .iter()
        .zip(&masks)
        .filter(|(_, rots)| rots[0].coarse)
        .map(|(p, _)| p.id.clone())
        .collect();

    let mut best: Option<(f64, Vec<Placement>)> = None;
    let mut order: Vec<usize> = (0..n).collect();
    for iter in 0..iterations.max(1) {
        let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
        rng.set_stream(iter);
        order.sort_unstable();
        order.shuffle(&mut rng);
        let chosen: Vec<&PieceMask> = order
            .iter()
            .map(|&i| {
                let drawn = rng.gen_range(0..4usize);
                let rot = (0..4)
                    .map(|d| (drawn + d) % 4)
                    .find(|&r| masks[i][r].h <= grid.width_cells)
                    .expect("checked above");
                &masks[i][rot]
            })
            .collect();
        grid.clear();
        let cells = bottom_left_place(&chosen, &mut grid)?;
        let mut placements = vec![Placement::new(0.0, 0.0, 0.0); n];
        for (k, &piece_idx) in order.iter().enumerate() {
            let mask = chosen[k];
            let (col, row) = cells[k];
            placements[piece_idx] = Placement::new(
                col as f64 * scale - mask.anchor.x,
                row as f64 * scale - mask.anchor.y,
                ROTATIONS[mask.rotation],
            );
        }
        let length = layout_length(&instance.pieces, &placements);
        if best.as_ref().map_or(true, |(bl, _)| length < *bl) {
            best = Some((length, placements));
        }
    }
    let (length, placements) = best.expect("at least one iteration");
    let lines = init_lines(&instance.pieces, &placements)?;
    Ok(SeedLayout {
        placements,
        length,
        lines,
        coarse_pieces,
    })
}

/// Initialize one separation line per cross-piece part pair from a layout
/// with zero exact overlap, in [`enumerate_pairs`] order.
///
/// The separating axis is queried with the pair's second part first, which
/// orients the returned line so the first piece sits on the non-positive
/// residual side, the convention the constraints expect.
pub fn init_lines(
    pieces: &[Piece],
    placements: &[Placement],
) -> Result<Vec<SeparationLineVar>, SeedError> {
    let placed_part = |piece: usize, part: usize| -> Vec<Point> {
        pieces[piece].parts[part]
            .vertices
            .iter()
            .map(|&v| transform(v, placements[piece]))
            .collect()
    };
    enumerate_pairs(pieces)
        .iter()
        .map(|pair| {
            let a = placed_part(pair.piece_i, pair.part_j);
            let b = placed_part(pair.piece_r, pair.part_s);
            match separating_axis(&b, &a) {
                Some((anchor, angle)) => Ok(SeparationLineVar {
                    x_bar: anchor.x,
                    y_bar: anchor.y,
                    alpha: angle,
                }),
                None => Err(SeedError::NoSeparator {
                    a: pieces[pair.piece_i].id.clone(),
                    b: pieces[pair.piece_r].id.clone(),
                }),
            }
        })
        .collect()
}
