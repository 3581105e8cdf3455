//! Instance files: JSON parsing, validation, multiplicity expansion, and
//! writing.
//!
//! The on-disk format is a single JSON document:
//!
//! ```json
//! {
//!   "name": "two-squares",
//!   "strip_width": 2.0,
//!   "raster_scale": 1.0,
//!   "pieces": [
//!     { "id": "sq", "count": 2, "vertices": [[0,0],[1,0],[1,1],[0,1]] }
//!   ]
//! }
//! ```
//!
//! `raster_scale` and per-piece `count` are optional, as is a per-piece
//! `parts` list of pre-supplied convex decompositions (list of vertex loops
//! in the same coordinates as `vertices`). Unknown keys are ignored.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{bounding_box, normalize_piece, GeometryError, Piece, Point};

/// A validated packing instance: strip width plus expanded pieces.
///
/// Pieces with `count > 1` in the file appear here as copies with `#2`,
/// `#3`, ... appended to their id.
#[derive(Debug, Clone, PartialEq)]
pub struct NestingInstance {
    pub name: String,
    pub strip_width: f64,
    pub raster_scale: Option<f64>,
    pub pieces: Vec<Piece>,
}

impl NestingInstance {
    /// Total area of all pieces; `total_area / strip_width` is a lower bound
    /// on the strip length.
    pub fn total_area(&self) -> f64 {
        self.pieces.iter().map(|p| p.area()).sum()
    }

    /// Number of convex parts over all pieces.
    pub fn part_count(&self) -> usize {
        self.pieces.iter().map(|p| p.parts.len()).sum()
    }

    /// Number of part vertices over all pieces.
    pub fn part_vertex_count(&self) -> usize {
        self.pieces.iter().map(|p| p.vertex_count()).sum()
    }

    pub fn min_part_area(&self) -> f64 {
        self.pieces
            .iter()
            .flat_map(|p| p.parts.iter().map(|c| c.area()))
            .fold(f64::INFINITY, f64::min)
    }
}

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed instance JSON: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("strip width must be positive, got {0}")]
    BadWidth(f64),
    #[error("raster scale must be positive, got {0}")]
    BadScale(f64),
    #[error("instance has no pieces")]
    Empty,
    #[error("piece {id}: count must be at least 1")]
    BadCount { id: String },
    #[error("piece {id}: {source}")]
    BadPiece { id: String, source: GeometryError },
    #[error("piece {id} does not fit the strip width at any axis-aligned rotation")]
    TooWide { id: String },
}

#[derive(Serialize, Deserialize)]
struct RawInstance {
    name: String,
    strip_width: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    raster_scale: Option<f64>,
    pieces: Vec<RawPiece>,
}

#[derive(Serialize, Deserialize)]
struct RawPiece {
    id: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    count: Option<u64>,
    vertices: Vec<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    parts: Option<Vec<Vec<[f64; 2]>>>,
}

fn to_points(list: &[[f64; 2]]) -> Vec<Point> {
    list.iter().map(|&[x, y]| Point::new(x, y)).collect()
}

/// Read and validate an instance file.
pub fn parse_instance(path: &Path) -> Result<NestingInstance, InstanceError> {
    let text = fs::read_to_string(path).map_err(|source| InstanceError::Io {
        path: path.display().to_string(),
        source,
    })?;
    instance_from_json(&text)
}

/// Parse an instance from JSON text.
pub fn instance_from_json(text: &str) -> Result<NestingInstance, InstanceError> {
    let raw: RawInstance = serde_json::from_str(text)?;
    if !(raw.strip_width > 0.0) {
        return Err(InstanceError::BadWidth(raw.strip_width));
    }
    if let Some(s) = raw.raster_scale {
        if !(s > 0.0) {
            return Err(InstanceError::BadScale(s));
        }
    }
    if raw.pieces.is_empty() {
        return Err(InstanceError::Empty);
    }
    let mut pieces = Vec::new();
    for rp in &raw.pieces {
        let count = rp.count.unwrap_or(1);
        if count < 1 {
            return Err(InstanceError::BadCount { id: rp.id.clone() });
        }
        let outline = to_points(&rp.vertices);
        let part_loops: Option<Vec<Vec<Point>>> = rp
            .parts
            .as_ref()
            .map(|ps| ps.iter().map(|p| to_points(p)).collect());
        let piece = normalize_piece(&rp.id, &outline, part_loops.as_deref()).map_err(|source| {
            InstanceError::BadPiece {
                id: rp.id.clone(),
                source,
            }
        })?;
        let (lo, hi) = bounding_box(&piece.outline);
        let extent = hi - lo;
        if extent.x.min(extent.y) > raw.strip_width {
            return Err(InstanceError::TooWide { id: rp.id.clone() });
        }
        for k in 0..count {
            let mut copy = piece.clone();
            if k > 0 {
                copy.id = format!("{}#{}", rp.id, k + 1);
            }
            pieces.push(copy);
        }
    }
    Ok(NestingInstance {
        name: raw.name,
        strip_width: raw.strip_width,
        raster_scale: raw.raster_scale,
        pieces,
    })
}

/// Serialize an instance back to the file format (pieces fully expanded,
/// geometry as normalized). Parsing the result reproduces the instance.
pub fn write_instance(inst: &NestingInstance) -> String {
    let raw = RawInstance {
        name: inst.name.clone(),
        strip_width: inst.strip_width,
        raster_scale: inst.raster_scale,
        pieces: inst
            .pieces
            .iter()
            .map(|p| RawPiece {
                id: p.id.clone(),
                count: None,
                vertices: p.outline.iter().map(|v| [v.x, v.y]).collect(),
                parts: Some(
                    p.parts
                        .iter()
                        .map(|c| c.vertices.iter().map(|v| [v.x, v.y]).collect())
                        .collect(),
                ),
            })
            .collect(),
    };
    let mut out = serde_json::to_string_pretty(&raw).expect("instance serializes");
    out.push('\n');
    out
}
