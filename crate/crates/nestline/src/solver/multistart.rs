//! Multi-start driver: independent bottom-left seeds, one local solve each,
//! deterministic merge.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

use super::{solve, SolveStatus, SolverOptions};
use crate::instance::NestingInstance;
use crate::model::build_problem;
use crate::seeding::generate_start;

#[derive(Debug, Clone)]
pub struct MultiStartConfig {
    pub k_starts: usize,
    pub bl_iterations: u64,
    pub rng_seed: u64,
    /// Worker threads for the solves; results are merged by start index, so
    /// the outcome does not depend on scheduling.
    pub threads: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct StartRecord {
    pub start: usize,
    pub status: SolveStatus,
    pub seed_length: Option<f64>,
    pub final_length: Option<f64>,
    pub max_violation: Option<f64>,
    pub seed_time: f64,
    pub solve_time: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl StartRecord {
    pub fn is_feasible(&self) -> bool {
        matches!(self.status, SolveStatus::Optimal | SolveStatus::Feasible)
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct LengthSummary {
    pub min: f64,
    pub avg: f64,
    pub max: f64,
}

#[derive(Debug, Clone)]
pub struct MultiStartOutcome {
    pub records: Vec<StartRecord>,
    /// Start index of the best feasible final length.
    pub best_start: usize,
    pub best_point: Vec<f64>,
}

impl MultiStartOutcome {
    /// Min/avg/max over the feasible final lengths.
    pub fn summary(&self) -> LengthSummary {
        let lengths: Vec<f64> = self
            .records
            .iter()
            .filter(|r| r.is_feasible())
            .filter_map(|r| r.final_length)
            .collect();
        let min = lengths.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = lengths.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let avg = lengths.iter().sum::<f64>() / lengths.len() as f64;
        LengthSummary { min, avg, max }
    }
}

#[derive(Debug, Error)]
pub enum MultiStartError {
    #[error("none of the {} starts produced a feasible layout", records.len())]
    AllStartsFailed { records: Vec<StartRecord> },
}

/// RNG seed for one start: decorrelates starts while keeping the whole run a
/// pure function of the user seed.
pub fn start_stream(rng_seed: u64, start: usize) -> u64 {
    rng_seed ^ (start as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

fn run_start(
    instance: &NestingInstance,
    s: usize,
    cfg: &MultiStartConfig,
    opts: &SolverOptions,
) -> (StartRecord, Option<Vec<f64>>) {
    let mut record = StartRecord {
        start: s,
        status: SolveStatus::Error,
        seed_length: None,
        final_length: None,
        max_violation: None,
        seed_time: 0.0,
        solve_time: 0.0,
        error: None,
    };
    let t0 = Instant::now();
    let seed = match generate_start(instance, cfg.bl_iterations, start_stream(cfg.rng_seed, s)) {
        Ok(seed) => seed,
        Err(e) => {
            record.seed_time = t0.elapsed().as_secs_f64();
            record.error = Some(e.to_string());
            return (record, None);
        }
    };
    record.seed_time = t0.elapsed().as_secs_f64();
    record.seed_length = Some(seed.length);
    let problem = match build_problem(instance, seed.length) {
        Ok(p) => p,
        Err(e) => {
            record.error = Some(e.to_string());
            return (record, None);
        }
    };
    let t1 = Instant::now();
    match solve(&problem, &seed.decision_vector(), opts) {
        Ok(res) => {
            record.solve_time = t1.elapsed().as_secs_f64();
            record.status = res.status;
            record.final_length = Some(res.objective);
            record.max_violation = Some(res.max_violation);
            let point = record.is_feasible().then_some(res.point);
            (record, point)
        }
        Err(e) => {
            record.solve_time = t1.elapsed().as_secs_f64();
            record.error = Some(e.to_string());
            (record, None)
        }
    }
}

/// Generate `k_starts` seeds on independent RNG streams, solve each, and
/// keep the best feasible result. Identical configuration yields identical
/// records and best point regardless of the thread count.
pub fn multi_start(
    instance: &NestingInstance,
    cfg: &MultiStartConfig,
    opts: &SolverOptions,
) -> Result<MultiStartOutcome, MultiStartError> {
    assert!(cfg.k_starts >= 1);
    let k = cfg.k_starts;
    let workers = cfg.threads.max(1).min(k);
    let mut slots: Vec<Option<(StartRecord, Option<Vec<f64>>)>> = (0..k).map(|_| None).collect();
    if workers == 1 {
        for (s, slot) in slots.iter_mut().enumerate() {
            *slot = Some(run_start(instance, s, cfg, opts));
        }
    } else {
        let next = AtomicUsize::new(0);
        let shared = Mutex::new(&mut slots);
        std::thread::scope(|scope| {
            for _ in 0..workers {
                scope.spawn(|| loop {
                    let s = next.fetch_add(1, Ordering::Relaxed);
                    if s >= k {
                        break;
                    }
                    let out = run_start(instance, s, cfg, opts);
                    shared.lock().unwrap()[s] = Some(out);
                });
            }
        });
    }
    let mut records = Vec::with_capacity(k);
    let mut best: Option<(f64, usize, Vec<f64>)> = None;
    for slot in slots {
        let (record, point) = slot.expect("every start ran");
        if let (Some(len), Some(point)) = (record.final_length, point) {
            if best.as_ref().map_or(true, |(bl, _, _)| len < *bl) {
                best = Some((len, record.start, point));
            }
        }
        records.push(record);
    }
    match best {
        Some((_, best_start, best_point)) => Ok(MultiStartOutcome {
            records,
            best_start,
            best_point,
        }),
        None => Err(MultiStartError::AllStartsFailed { records }),
    }
}
