//! C ABI over the nestline solver.
//!
//! Handles are opaque; every function that can fail returns a
//! [`NestlineStatus`] and records a message retrievable through
//! [`nestline_last_error`]. Panics are caught at the boundary and surface as
//! `NESTLINE_STATUS_INTERNAL` instead of unwinding into C.
//!
//! The generated header lives in `include/nestline.h` and is refreshed on
//! every build of this crate.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use nestline::instance::instance_from_json;
use nestline::report::{LayoutFile, RunReport};
use nestline::solver::{multi_start, MultiStartConfig, SolverOptions};
use nestline::NestingInstance;

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NestlineStatus {
    Ok = 0,
    /// A required pointer was null or an index was out of range.
    InvalidArgument = 1,
    /// The instance JSON could not be parsed or validated.
    ParseError = 2,
    /// No start produced a feasible layout.
    SolveFailed = 3,
    /// An internal invariant failed; see `nestline_last_error`.
    Internal = 4,
}

/// A parsed, validated instance.
pub struct NestlineInstance {
    inner: NestingInstance,
}

/// The best layout found by a solve, plus per-piece access.
pub struct NestlineSolution {
    layout: LayoutFile,
    ids: Vec<CString>,
    feasible_starts: usize,
    layout_json: CString,
}

/// Multi-start and solver settings. Obtain defaults from
/// `nestline_options_default`, then override fields as needed.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct NestlineOptions {
    /// Random starts to run.
    pub starts: u64,
    /// Bottom-left insertion orders tried per start.
    pub bl_iterations: u64,
    /// Base RNG seed; each start derives its own stream.
    pub rng_seed: u64,
    /// Wall-clock budget per start, in seconds.
    pub max_time_seconds: f64,
    /// Worker threads; 0 means 1.
    pub threads: u64,
    /// Constraint violation accepted as feasible.
    pub feasibility_tol: f64,
    /// Projected-gradient norm accepted as stationary.
    pub stationarity_tol: f64,
    /// Outer (multiplier update) iterations per start.
    pub max_outer_iterations: u64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl std::fmt::Display) {
    let text = msg.to_string().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).unwrap_or_default());
}

fn guard<F: FnOnce() -> NestlineStatus>(body: F) -> NestlineStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            NestlineStatus::Internal
        }
    }
}

/// Message for the most recent failure on this thread. The pointer stays
/// valid until the next nestline call on the same thread.
#[no_mangle]
pub extern "C" fn nestline_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Fill `out` with default options (10 starts, 1000 orders, seed 42,
/// one hour per start, single thread, tolerances 1e-6).
#[no_mangle]
pub extern "C" fn nestline_options_default(out: *mut NestlineOptions) -> NestlineStatus {
    if out.is_null() {
        set_error("options pointer is null");
        return NestlineStatus::InvalidArgument;
    }
    let d = SolverOptions::default();
    let opts = NestlineOptions {
        starts: 10,
        bl_iterations: 1000,
        rng_seed: 42,
        max_time_seconds: d.max_time_seconds,
        threads: 1,
        feasibility_tol: d.feasibility_tol,
        stationarity_tol: d.stationarity_tol,
        max_outer_iterations: d.max_outer_iterations as u64,
    };
    unsafe { out.write(opts) };
    NestlineStatus::Ok
}

/// Parse an instance from a UTF-8 JSON string into a new handle. On success
/// `*out` owns the instance; release it with `nestline_instance_free`.
#[no_mangle]
pub extern "C" fn nestline_instance_parse_json(
    json: *const c_char,
    out: *mut *mut NestlineInstance,
) -> NestlineStatus {
    guard(|| {
        if json.is_null() || out.is_null() {
            set_error("json or out pointer is null");
            return NestlineStatus::InvalidArgument;
        }
        let text = match unsafe { CStr::from_ptr(json) }.to_str() {
            Ok(t) => t,
            Err(e) => {
                set_error(format!("instance JSON is not UTF-8: {e}"));
                return NestlineStatus::ParseError;
            }
        };
        match instance_from_json(text) {
            Ok(inner) => {
                let handle = Box::new(NestlineInstance { inner });
                unsafe { out.write(Box::into_raw(handle)) };
                NestlineStatus::Ok
            }
            Err(e) => {
                set_error(e);
                NestlineStatus::ParseError
            }
        }
    })
}

/// Release an instance handle. Null is a no-op.
#[no_mangle]
pub extern "C" fn nestline_instance_free(inst: *mut NestlineInstance) {
    if !inst.is_null() {
        drop(unsafe { Box::from_raw(inst) });
    }
}

/// Number of pieces after `count` expansion; 0 for a null handle.
#[no_mangle]
pub extern "C" fn nestline_instance_piece_count(inst: *const NestlineInstance) -> usize {
    if inst.is_null() {
        return 0;
    }
    unsafe { &*inst }.inner.pieces.len()
}

/// Strip width of the instance; NaN for a null handle.
#[no_mangle]
pub extern "C" fn nestline_instance_strip_width(inst: *const NestlineInstance) -> f64 {
    if inst.is_null() {
        return f64::NAN;
    }
    unsafe { &*inst }.inner.strip_width
}

/// Solve an instance. `opts` may be null for defaults. On success `*out`
/// owns the solution; release it with `nestline_solution_free`.
#[no_mangle]
pub extern "C" fn nestline_solve(
    inst: *const NestlineInstance,
    opts: *const NestlineOptions,
    out: *mut *mut NestlineSolution,
) -> NestlineStatus {
    guard(|| {
        if inst.is_null() || out.is_null() {
            set_error("instance or out pointer is null");
            return NestlineStatus::InvalidArgument;
        }
        let mut defaults = NestlineOptions {
            starts: 0,
            bl_iterations: 0,
            rng_seed: 0,
            max_time_seconds: 0.0,
            threads: 0,
            feasibility_tol: 0.0,
            stationarity_tol: 0.0,
            max_outer_iterations: 0,
        };
        nestline_options_default(&mut defaults);
        let o = if opts.is_null() {
            defaults
        } else {
            unsafe { *opts }
        };
        if !(o.starts >= 1
            && o.bl_iterations >= 1
            && o.max_time_seconds > 0.0
            && o.max_time_seconds.is_finite()
            && o.feasibility_tol > 0.0
            && o.stationarity_tol > 0.0
            && o.max_outer_iterations >= 1)
        {
            set_error("options out of range (counts >= 1, times and tolerances positive)");
            return NestlineStatus::InvalidArgument;
        }
        let instance = &unsafe { &*inst }.inner;
        let cfg = MultiStartConfig {
            k_starts: o.starts as usize,
            bl_iterations: o.bl_iterations,
            rng_seed: o.rng_seed,
            threads: (o.threads as usize).max(1),
        };
        let solver_opts = SolverOptions {
            feasibility_tol: o.feasibility_tol,
            stationarity_tol: o.stationarity_tol,
            max_time_seconds: o.max_time_seconds,
            max_outer_iterations: o.max_outer_iterations as usize,
            ..SolverOptions::default()
        };
        match multi_start(instance, &cfg, &solver_opts) {
            Ok(outcome) => {
                let report = RunReport::new(instance, &cfg, &solver_opts, &outcome, false);
                let ids = report
                    .best
                    .placements
                    .iter()
                    .map(|p| CString::new(p.id.as_str()).unwrap_or_default())
                    .collect();
                let layout_json = CString::new(report.best.to_json()).unwrap_or_default();
                let solution = Box::new(NestlineSolution {
                    layout: report.best.clone(),
                    ids,
                    feasible_starts: report.summary.feasible_starts,
                    layout_json,
                });
                unsafe { out.write(Box::into_raw(solution)) };
                NestlineStatus::Ok
            }
            Err(e) => {
                set_error(e);
                NestlineStatus::SolveFailed
            }
        }
    })
}

/// Release a solution handle. Null is a no-op.
#[no_mangle]
pub extern "C" fn nestline_solution_free(sol: *mut NestlineSolution) {
    if !sol.is_null() {
        drop(unsafe { Box::from_raw(sol) });
    }
}

/// Strip length of the best layout; NaN for a null handle.
#[no_mangle]
pub extern "C" fn nestline_solution_length(sol: *const NestlineSolution) -> f64 {
    if sol.is_null() {
        return f64::NAN;
    }
    unsafe { &*sol }.layout.length
}

/// How many of the starts ended feasible; 0 for a null handle.
#[no_mangle]
pub extern "C" fn nestline_solution_feasible_starts(sol: *const NestlineSolution) -> usize {
    if sol.is_null() {
        return 0;
    }
    unsafe { &*sol }.feasible_starts
}

/// Number of placements in the layout; 0 for a null handle.
#[no_mangle]
pub extern "C" fn nestline_solution_piece_count(sol: *const NestlineSolution) -> usize {
    if sol.is_null() {
        return 0;
    }
    unsafe { &*sol }.layout.placements.len()
}

/// Copy placement `index` (translation and rotation in radians) into the
/// given pointers; any of them may be null to skip that field.
#[no_mangle]
pub extern "C" fn nestline_solution_placement(
    sol: *const NestlineSolution,
    index: usize,
    tx: *mut f64,
    ty: *mut f64,
    theta: *mut f64,
) -> NestlineStatus {
    if sol.is_null() {
        set_error("solution pointer is null");
        return NestlineStatus::InvalidArgument;
    }
    let layout = &unsafe { &*sol }.layout;
    let Some(p) = layout.placements.get(index) else {
        set_error(format!(
            "placement index {index} out of range ({} placements)",
            layout.placements.len()
        ));
        return NestlineStatus::InvalidArgument;
    };
    unsafe {
        if !tx.is_null() {
            tx.write(p.tx);
        }
        if !ty.is_null() {
            ty.write(p.ty);
        }
        if !theta.is_null() {
            theta.write(p.theta);
        }
    }
    NestlineStatus::Ok
}

/// Piece id of placement `index`. The pointer is owned by the solution and
/// stays valid until `nestline_solution_free`; null if out of range.
#[no_mangle]
pub extern "C" fn nestline_solution_piece_id(
    sol: *const NestlineSolution,
    index: usize,
) -> *const c_char {
    if sol.is_null() {
        return ptr::null();
    }
    match unsafe { &*sol }.ids.get(index) {
        Some(id) => id.as_ptr(),
        None => ptr::null(),
    }
}

/// The best layout as a JSON document (same schema the CLI writes). The
/// pointer is owned by the solution and stays valid until
/// `nestline_solution_free`; null for a null handle.
#[no_mangle]
pub extern "C" fn nestline_solution_layout_json(sol: *const NestlineSolution) -> *const c_char {
    if sol.is_null() {
        return ptr::null();
    }
    unsafe { &*sol }.layout_json.as_ptr()
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO_SQUARES: &str = r#"{ "name": "two", "strip_width": 1.0,
        "pieces": [ { "id": "sq", "count": 2, "vertices": [[0,0],[1,0],[1,1],[0,1]] } ] }"#;

    fn parse(json: &str) -> *mut NestlineInstance {
        let c = CString::new(json).unwrap();
        let mut inst = ptr::null_mut();
        assert_eq!(
            nestline_instance_parse_json(c.as_ptr(), &mut inst),
            NestlineStatus::Ok
        );
        inst
    }

    #[test]
    fn parse_solve_and_inspect_through_the_c_surface() {
        let inst = parse(TWO_SQUARES);
        assert_eq!(nestline_instance_piece_count(inst), 2);
        assert_eq!(nestline_instance_strip_width(inst), 1.0);

        let mut opts = NestlineOptions {
            starts: 0,
            bl_iterations: 0,
            rng_seed: 0,
            max_time_seconds: 0.0,
            threads: 0,
            feasibility_tol: 0.0,
            stationarity_tol: 0.0,
            max_outer_iterations: 0,
        };
        assert_eq!(nestline_options_default(&mut opts), NestlineStatus::Ok);
        opts.starts = 2;
        opts.bl_iterations = 20;
        opts.max_time_seconds = 30.0;

        let mut sol = ptr::null_mut();
        assert_eq!(nestline_solve(inst, &opts, &mut sol), NestlineStatus::Ok);
        let len = nestline_solution_length(sol);
        assert!((len - 2.0).abs() < 1e-3, "length {len}");
        assert_eq!(nestline_solution_piece_count(sol), 2);
        assert!(nestline_solution_feasible_starts(sol) >= 1);

        let (mut tx, mut ty, mut theta) = (0.0, 0.0, 0.0);
        assert_eq!(
            nestline_solution_placement(sol, 1, &mut tx, &mut ty, &mut theta),
            NestlineStatus::Ok
        );
        assert_eq!(
            nestline_solution_placement(sol, 2, &mut tx, &mut ty, &mut theta),
            NestlineStatus::InvalidArgument
        );

        let id = unsafe { CStr::from_ptr(nestline_solution_piece_id(sol, 1)) };
        assert_eq!(id.to_str().unwrap(), "sq#2");
        let json = unsafe { CStr::from_ptr(nestline_solution_layout_json(sol)) };
        let layout = LayoutFile::from_json(json.to_str().unwrap()).unwrap();
        assert_eq!(layout.placements.len(), 2);

        nestline_solution_free(sol);
        nestline_instance_free(inst);
    }

    #[test]
    fn errors_set_messages_and_never_unwind() {
        let bad = CString::new("not json").unwrap();
        let mut inst = ptr::null_mut();
        assert_eq!(
            nestline_instance_parse_json(bad.as_ptr(), &mut inst),
            NestlineStatus::ParseError
        );
        let msg = unsafe { CStr::from_ptr(nestline_last_error()) };
        assert!(!msg.to_bytes().is_empty());

        assert_eq!(
            nestline_instance_parse_json(ptr::null(), &mut inst),
            NestlineStatus::InvalidArgument
        );
        let mut sol = ptr::null_mut();
        assert_eq!(
            nestline_solve(ptr::null(), ptr::null(), &mut sol),
            NestlineStatus::InvalidArgument
        );
        assert!(nestline_solution_length(ptr::null()).is_nan());
        assert!(nestline_solution_piece_id(ptr::null(), 0).is_null());
        nestline_instance_free(ptr::null_mut());
        nestline_solution_free(ptr::null_mut());
    }

    #[test]
    fn oversize_pieces_are_rejected_at_parse_time() {
        // a 3x3 square cannot fit a width-2 strip at any rotation
        let c = CString::new(
            r#"{ "name": "big", "strip_width": 2.0,
                 "pieces": [ { "id": "sq", "vertices": [[0,0],[3,0],[3,3],[0,3]] } ] }"#,
        )
        .unwrap();
        let mut inst = ptr::null_mut();
        assert_eq!(
            nestline_instance_parse_json(c.as_ptr(), &mut inst),
            NestlineStatus::ParseError
        );
        let msg = unsafe { CStr::from_ptr(nestline_last_error()) };
        assert!(msg.to_str().unwrap().contains("does not fit"));
    }

    #[test]
    fn out_of_range_options_are_rejected() {
        let inst = parse(TWO_SQUARES);
        let mut opts = NestlineOptions {
            starts: 0,
            bl_iterations: 0,
            rng_seed: 0,
            max_time_seconds: 0.0,
            threads: 0,
            feasibility_tol: 0.0,
            stationarity_tol: 0.0,
            max_outer_iterations: 0,
        };
        nestline_options_default(&mut opts);
        opts.starts = 0;
        let mut sol = ptr::null_mut();
        assert_eq!(
            nestline_solve(inst, &opts, &mut sol),
            NestlineStatus::InvalidArgument
        );
        nestline_instance_free(inst);
    }
}
