//! Run reports (per-start records plus min/avg/max summaries) and the
//! on-disk layout document shared by `solve`, `seed`, `verify`, and
//! `render`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::instance::NestingInstance;
use crate::model::{enumerate_pairs, line_var, piece_var, SeparationLineVar};
use crate::solver::{MultiStartConfig, MultiStartOutcome, SolverOptions, StartRecord};

pub const CODE_VERSION: &str = concat!("nestline ", env!("CARGO_PKG_VERSION"));

/// One placed piece in a layout document.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct PlacementRecord {
    pub id: String,
    pub tx: f64,
    pub ty: f64,
    pub theta: f64,
}

/// A complete layout: strip length, placements in instance piece order, and
/// the separation-line certificate in pair order.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct LayoutFile {
    pub instance: String,
    pub strip_width: f64,
    pub length: f64,
    pub placements: Vec<PlacementRecord>,
    pub lines: Vec<SeparationLineVar>,
}

#[derive(Debug, Error)]
pub enum LayoutError {
    #[error("layout is for instance {got:?}, expected {want:?}")]
    InstanceName { got: String, want: String },
    #[error("layout strip width {got} does not match instance width {want}")]
    StripWidth { got: f64, want: f64 },
    #[error("layout has {got} placements, instance has {want} pieces")]
    PieceCount { got: usize, want: usize },
    #[error("placement {index} is for piece {got:?}, expected {want:?}")]
    PieceMismatch {
        index: usize,
        got: String,
        want: String,
    },
    #[error("layout has {got} separation lines, instance needs {want}")]
    LineCount { got: usize, want: usize },
}

impl LayoutFile {
    /// Capture a layout from a decision vector in the model's layout.
    pub fn from_decision_vector(instance: &NestingInstance, v: &[f64]) -> Self {
        let n = instance.pieces.len();
        let q = enumerate_pairs(&instance.pieces).len();
        assert_eq!(v.len(), 1 + 3 * n + 3 * q, "decision vector length");
        let placements = instance
            .pieces
            .iter()
            .enumerate()
            .map(|(i, piece)| {
                let b = piece_var(i);
                PlacementRecord {
                    id: piece.id.clone(),
                    tx: v[b],
                    ty: v[b + 1],
                    theta: v[b + 2],
                }
            })
            .collect();
        let lines = (0..q)
            .map(|l| {
                let b = line_var(n, l);
                SeparationLineVar {
                    x_bar: v[b],
                    y_bar: v[b + 1],
                    alpha: v[b + 2],
                }
            })
            .collect();
        LayoutFile {
            instance: instance.name.clone(),
            strip_width: instance.strip_width,
            length: v[0],
            placements,
            lines,
        }
    }

    /// Rebuild the decision vector, validating that the layout belongs to
    /// `instance` (name, width, piece ids in order, line count).
    pub fn decision_vector(&self, instance: &NestingInstance) -> Result<Vec<f64>, LayoutError> {
        if self.instance != instance.name {
            return Err(LayoutError::InstanceName {
                got: self.instance.clone(),
                want: instance.name.clone(),
            });
        }
        if self.strip_width != instance.strip_width {
            return Err(LayoutError::StripWidth {
                got: self.strip_width,
                want: instance.strip_width,
            });
        }
        let n = instance.pieces.len();
        if self.placements.len() != n {
            return Err(LayoutError::PieceCount {
                got: self.placements.len(),
                want: n,
            });
        }
        for (index, (rec, piece)) in self.placements.iter().zip(&instance.pieces).enumerate() {
            if rec.id != piece.id {
                return Err(LayoutError::PieceMismatch {
                    index,
                    got: rec.id.clone(),
                    want: piece.id.clone(),
                });
            }
        }
        let q = enumerate_pairs(&instance.pieces).len();
        if self.lines.len() != q {
            return Err(LayoutError::LineCount {
                got: self.lines.len(),
                want: q,
            });
        }
        let mut v = Vec::with_capacity(1 + 3 * n + 3 * q);
        v.push(self.length);
        for rec in &self.placements {
            v.extend_from_slice(&[rec.tx, rec.ty, rec.theta]);
        }
        for line in &self.lines {
            v.extend_from_slice(&[line.x_bar, line.y_bar, line.alpha]);
        }
        Ok(v)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("layout serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// Echo of the solver configuration, embedded in reports.
#[derive(Debug, Clone, Serialize)]
pub struct OptionsEcho {
    pub feasibility_tol: f64,
    pub stationarity_tol: f64,
    pub max_time_seconds: f64,
    pub max_outer_iterations: usize,
    pub penalty_init: f64,
    pub penalty_growth: f64,
    pub inner_memory: usize,
}

impl From<&SolverOptions> for OptionsEcho {
    fn from(o: &SolverOptions) -> Self {
        OptionsEcho {
            feasibility_tol: o.feasibility_tol,
            stationarity_tol: o.stationarity_tol,
            max_time_seconds: o.max_time_seconds,
            max_outer_iterations: o.max_outer_iterations,
            penalty_init: o.penalty_init,
            penalty_growth: o.penalty_growth,
            inner_memory: o.inner_memory,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ReportSummary {
    pub feasible_starts: usize,
    pub min_length: f64,
    pub avg_length: f64,
    pub max_length: f64,
    pub avg_seed_time: f64,
    pub avg_solve_time: f64,
}

/// Everything one multi-start run produced, ready for serialization.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub instance: String,
    pub k_starts: usize,
    pub rng_seed: u64,
    pub bl_iterations: u64,
    pub raster_scale: f64,
    pub code_version: String,
    pub options: OptionsEcho,
    pub starts: Vec<StartRecord>,
    pub summary: ReportSummary,
    pub best: LayoutFile,
}

fn round2(t: f64) -> f64 {
    (t * 100.0).round() / 100.0
}

impl RunReport {
    /// Assemble a report. Wall-clock fields carry two decimals; with
    /// `redact_times` they are zeroed instead, making reports byte-stable
    /// across reruns of the same configuration.
    pub fn new(
        instance: &NestingInstance,
        cfg: &MultiStartConfig,
        opts: &SolverOptions,
        outcome: &MultiStartOutcome,
        redact_times: bool,
    ) -> Self {
        let clock = |t: f64| if redact_times { 0.0 } else { round2(t) };
        let starts: Vec<StartRecord> = outcome
            .records
            .iter()
            .map(|r| StartRecord {
                seed_time: clock(r.seed_time),
                solve_time: clock(r.solve_time),
                ..r.clone()
            })
            .collect();
        let lengths: Vec<f64> = outcome
            .records
            .iter()
            .filter(|r| r.is_feasible())
            .filter_map(|r| r.final_length)
            .collect();
        let k = outcome.records.len();
        let summary = ReportSummary {
            feasible_starts: lengths.len(),
            min_length: lengths.iter().cloned().fold(f64::INFINITY, f64::min),
            avg_length: lengths.iter().sum::<f64>() / lengths.len() as f64,
            max_length: lengths.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
            avg_seed_time: clock(
                outcome.records.iter().map(|r| r.seed_time).sum::<f64>() / k as f64,
            ),
            avg_solve_time: clock(
                outcome.records.iter().map(|r| r.solve_time).sum::<f64>() / k as f64,
            ),
        };
        RunReport {
            instance: instance.name.clone(),
            k_starts: cfg.k_starts,
            rng_seed: cfg.rng_seed,
            bl_iterations: cfg.bl_iterations,
            raster_scale: instance.raster_scale.unwrap_or(1.0),
            code_version: CODE_VERSION.to_string(),
            options: opts.into(),
            starts,
            summary,
            best: LayoutFile::from_decision_vector(instance, &outcome.best_point),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Aligned text table over one row per report, sorted by instance name.
/// Starts that did not end feasible are excluded from the length columns and
/// flagged in footnote rows.
pub fn report_table(reports: &[RunReport]) -> String {
    let mut rows: Vec<&RunReport> = reports.iter().collect();
    rows.sort_by(|a, b| a.instance.cmp(&b.instance));
    let name_w = rows
        .iter()
        .map(|r| r.instance.len())
        .chain([8])
        .max()
        .unwrap();
    let mut out = format!(
        "{:<name_w$} {:>7} {:>9} {:>9} {:>9} {:>9} {:>10}\n",
        "instance", "starts", "min", "avg", "max", "seed t(s)", "solve t(s)"
    );
    let mut footnotes = Vec::new();
    for r in rows {
        out.push_str(&format!(
            "{:<name_w$} {:>7} {:>9.2} {:>9.2} {:>9.2} {:>9.2} {:>10.2}\n",
            r.instance,
            r.k_starts,
            r.summary.min_length,
            r.summary.avg_length,
            r.summary.max_length,
            r.summary.avg_seed_time,
            r.summary.avg_solve_time,
        ));
        let excluded: Vec<String> = r
            .starts
            .iter()
            .filter(|s| !s.is_feasible())
            .map(|s| format!("{} ({})", s.start, s.status))
            .collect();
        if !excluded.is_empty() {
            footnotes.push(format!(
                "* {}: starts excluded from min/avg/max: {}\n",
                r.instance,
                excluded.join(", ")
            ));
        }
    }
    for f in footnotes {
        out.push_str(&f);
    }
    out
}
