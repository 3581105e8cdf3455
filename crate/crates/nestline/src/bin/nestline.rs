//! Command-line front end: solve, seed, verify, render, bench.
//!
//! Exit codes: 0 success (verify: layout passed), 1 verify found the layout
//! infeasible, 2 bad input (missing file, malformed JSON, layout/instance
//! mismatch), 3 the solver or seeder failed to produce a layout.

use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use nestline::instance::parse_instance;
use nestline::model::{build_problem, check_feasibility, enumerate_pairs};
use nestline::report::{report_table, LayoutFile, RunReport};
use nestline::seeding::generate_start;
use nestline::solver::{
    multi_start, start_stream, MultiStartConfig, SolverOptions, OVERLAP_FRACTION,
};
use nestline::svg::render_svg;
use nestline::NestingInstance;

const EXIT_VERIFY_FAIL: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_SOLVER: u8 = 3;

#[derive(Parser)]
#[command(
    name = "nestline",
    version,
    about = "Strip packing of irregular polygons"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Pack an instance: bottom-left seeds refined by the nonlinear solver
    Solve(SolveArgs),
    /// Run only the bottom-left seeding stage
    Seed(SeedArgs),
    /// Check a layout file against its instance
    Verify(VerifyArgs),
    /// Draw a layout file as an SVG
    Render(RenderArgs),
    /// Solve several instances and print a combined results table
    Bench(BenchArgs),
}

#[derive(Args)]
struct InstanceArg {
    /// Instance JSON file
    #[arg(long)]
    instance: PathBuf,
    /// Override the instance's raster cell size for seeding
    #[arg(long, value_parser = positive)]
    raster_scale: Option<f64>,
}

#[derive(Args)]
struct SolverArgs {
    /// Random starts to run
    #[arg(long, default_value_t = 10)]
    starts: usize,
    /// Bottom-left insertion orders tried per start
    #[arg(long, default_value_t = 1000)]
    bl_iters: u64,
    /// Base RNG seed; each start derives its own stream from it
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Wall-clock budget per start, seconds
    #[arg(long, default_value_t = 3600.0, value_parser = positive)]
    max_time: f64,
    /// Worker threads (default: NESTLINE_THREADS or 1)
    #[arg(long)]
    threads: Option<usize>,
    /// Constraint violation accepted as feasible
    #[arg(long, default_value_t = 1e-6, value_parser = positive)]
    feas_tol: f64,
    /// Projected-gradient norm accepted as stationary
    #[arg(long, default_value_t = 1e-6, value_parser = positive)]
    stat_tol: f64,
    /// Outer (multiplier update) iterations per start
    #[arg(long, default_value_t = 50, value_parser = clap::value_parser!(u64).range(1..))]
    max_outer: u64,
    /// Initial penalty weight
    #[arg(long, default_value_t = 10.0, value_parser = positive)]
    penalty_init: f64,
    /// Penalty growth factor on slow progress
    #[arg(long, default_value_t = 10.0, value_parser = greater_than_one)]
    penalty_growth: f64,
    /// Write wall-clock fields as 0.00 so reruns produce identical reports
    #[arg(long)]
    redact_times: bool,
}

impl SolverArgs {
    fn config(&self) -> MultiStartConfig {
        MultiStartConfig {
            k_starts: self.starts,
            bl_iterations: self.bl_iters,
            rng_seed: self.seed,
            threads: resolve_threads(self.threads),
        }
    }

    fn options(&self) -> SolverOptions {
        SolverOptions {
            feasibility_tol: self.feas_tol,
            stationarity_tol: self.stat_tol,
            max_time_seconds: self.max_time,
            max_outer_iterations: self.max_outer as usize,
            penalty_init: self.penalty_init,
            penalty_growth: self.penalty_growth,
            ..SolverOptions::default()
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    instance: InstanceArg,
    #[command(flatten)]
    solver: SolverArgs,
    /// Write the full run report here
    #[arg(long)]
    out_json: Option<PathBuf>,
    /// Write the best layout here
    #[arg(long)]
    out_layout: Option<PathBuf>,
    /// Render the best layout here
    #[arg(long)]
    out_svg: Option<PathBuf>,
}

#[derive(Args)]
struct SeedArgs {
    #[command(flatten)]
    instance: InstanceArg,
    /// Bottom-left insertion orders tried
    #[arg(long, default_value_t = 1000)]
    bl_iters: u64,
    /// Base RNG seed, matching `solve --seed`
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Which start's RNG stream to reproduce
    #[arg(long, default_value_t = 0)]
    start: usize,
    /// Write the seed layout here
    #[arg(long)]
    out_layout: Option<PathBuf>,
    /// Render the seed layout here
    #[arg(long)]
    out_svg: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    instance: InstanceArg,
    /// Layout JSON file to check
    layout: PathBuf,
    /// Constraint violation accepted as feasible
    #[arg(long, default_value_t = 1e-6, value_parser = positive)]
    tol: f64,
}

#[derive(Args)]
struct RenderArgs {
    #[command(flatten)]
    instance: InstanceArg,
    /// Layout JSON file to draw
    layout: PathBuf,
    /// Output SVG path
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    /// Instance JSON files
    #[arg(required = true)]
    instances: Vec<PathBuf>,
    #[command(flatten)]
    solver: SolverArgs,
    /// Write all run reports here as a JSON array
    #[arg(long)]
    out_json: Option<PathBuf>,
}

fn positive(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err("must be a positive number".into())
    }
}

fn greater_than_one(s: &str) -> Result<f64, String> {
    let v = positive(s)?;
    if v > 1.0 {
        Ok(v)
    } else {
        Err("must be greater than 1".into())
    }
}

fn resolve_threads(flag: Option<usize>) -> usize {
    flag.or_else(|| {
        std::env::var("NESTLINE_THREADS")
            .ok()
            .and_then(|v| v.parse().ok())
    })
    .unwrap_or(1)
    .max(1)
}

fn fail(code: u8, msg: impl Display) -> u8 {
    eprintln!("error: {msg}");
    code
}

fn load_instance(arg: &InstanceArg) -> Result<NestingInstance, String> {
    let mut inst = parse_instance(&arg.instance).map_err(|e| match e {
        // the Io variant already names the path
        nestline::instance::InstanceError::Io { .. } => format!("{e}"),
        other => format!("{}: {other}", arg.instance.display()),
    })?;
    if arg.raster_scale.is_some() {
        inst.raster_scale = arg.raster_scale;
    }
    Ok(inst)
}

fn load_layout(path: &Path) -> Result<LayoutFile, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    LayoutFile::from_json(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn write_file(path: &Path, contents: &str) -> Result<(), String> {
    fs::write(path, contents).map_err(|e| format!("{}: {e}", path.display()))
}

fn print_starts(report: &RunReport) {
    for r in &report.starts {
        let seed_len = r.seed_length.map_or("-".into(), |l| format!("{l:.4}"));
        let final_len = r.final_length.map_or("-".into(), |l| format!("{l:.4}"));
        print!(
            "start {}: seed {} -> {} {} (seed {:.2}s, solve {:.2}s)",
            r.start, seed_len, final_len, r.status, r.seed_time, r.solve_time
        );
        match &r.error {
            Some(e) => println!(" [{e}]"),
            None => println!(),
        }
    }
}

fn run_and_report(inst: &NestingInstance, solver: &SolverArgs) -> Result<RunReport, (u8, String)> {
    let cfg = solver.config();
    let opts = solver.options();
    match multi_start(inst, &cfg, &opts) {
        Ok(outcome) => Ok(RunReport::new(
            inst,
            &cfg,
            &opts,
            &outcome,
            solver.redact_times,
        )),
        Err(err) => {
            let nestline::solver::MultiStartError::AllStartsFailed { records } = &err;
            for r in records {
                eprintln!(
                    "  start {}: {}{}",
                    r.start,
                    r.status,
                    r.error
                        .as_deref()
                        .map(|e| format!(" ({e})"))
                        .unwrap_or_default()
                );
            }
            Err((EXIT_SOLVER, format!("{}: {err}", inst.name)))
        }
    }
}

fn cmd_solve(args: SolveArgs) -> u8 {
    let inst = match load_instance(&args.instance) {
        Ok(i) => i,
        Err(e) => return fail(EXIT_INPUT, e),
    };
    let report = match run_and_report(&inst, &args.solver) {
        Ok(r) => r,
        Err((code, e)) => return fail(code, e),
    };
    print_starts(&report);
    print!("{}", report_table(std::slice::from_ref(&report)));
    println!(
        "best: length {:.4} over {} feasible starts",
        report.best.length, report.summary.feasible_starts
    );
    if let Some(path) = &args.out_json {
        if let Err(e) = write_file(path, &report.to_json()) {
            return fail(EXIT_INPUT, e);
        }
    }
    if let Some(path) = &args.out_layout {
        if let Err(e) = write_file(path, &report.best.to_json()) {
            return fail(EXIT_INPUT, e);
        }
    }
    if let Some(path) = &args.out_svg {
        let svg = match render_svg(&inst, &report.best) {
            Ok(s) => s,
            Err(e) => return fail(EXIT_SOLVER, e),
        };
        if let Err(e) = write_file(path, &svg) {
            return fail(EXIT_INPUT, e);
        }
    }
    0
}

fn cmd_seed(args: SeedArgs) -> u8 {
    let inst = match load_instance(&args.instance) {
        Ok(i) => i,
        Err(e) => return fail(EXIT_INPUT, e),
    };
    let stream = start_stream(args.seed, args.start);
    let seed = match generate_start(&inst, args.bl_iters, stream) {
        Ok(s) => s,
        Err(e) => return fail(EXIT_SOLVER, format!("{}: {e}", inst.name)),
    };
    if !seed.coarse_pieces.is_empty() {
        eprintln!(
            "note: pieces thinner than one raster cell, cover is loose: {}",
            seed.coarse_pieces.join(", ")
        );
    }
    println!(
        "seed length {:.4} ({} orders, start {})",
        seed.length, args.bl_iters, args.start
    );
    let layout = LayoutFile::from_decision_vector(&inst, &seed.decision_vector());
    if let Some(path) = &args.out_layout {
        if let Err(e) = write_file(path, &layout.to_json()) {
            return fail(EXIT_INPUT, e);
        }
    }
    if let Some(path) = &args.out_svg {
        let svg = match render_svg(&inst, &layout) {
            Ok(s) => s,
            Err(e) => return fail(EXIT_SOLVER, e),
        };
        if let Err(e) = write_file(path, &svg) {
            return fail(EXIT_INPUT, e);
        }
    }
    0
}

fn cmd_verify(args: VerifyArgs) -> u8 {
    let inst = match load_instance(&args.instance) {
        Ok(i) => i,
        Err(e) => return fail(EXIT_INPUT, e),
    };
    let layout = match load_layout(&args.layout) {
        Ok(l) => l,
        Err(e) => return fail(EXIT_INPUT, e),
    };
    let v = match layout.decision_vector(&inst) {
        Ok(v) => v,
        Err(e) => return fail(EXIT_INPUT, e),
    };
    let problem = match build_problem(&inst, f64::INFINITY) {
        Ok(p) => p,
        Err(e) => return fail(EXIT_INPUT, e),
    };
    let rep = match check_feasibility(&problem, &v) {
        Ok(r) => r,
        Err(e) => return fail(EXIT_INPUT, e),
    };
    let overlap_cap = OVERLAP_FRACTION * problem.min_part_area();
    println!("instance      {}", inst.name);
    println!("length        {:.6}", layout.length);
    println!(
        "violation     {:.3e} (containment x {:.3e}, y {:.3e}, separation {:.3e})",
        rep.max_violation, rep.containment_x, rep.containment_y, rep.separation
    );
    match &rep.worst_overlap {
        Some((a, b)) => println!(
            "overlap       {:.3e} (worst pair {a} / {b})",
            rep.max_overlap
        ),
        None => println!("overlap       {:.3e}", rep.max_overlap),
    }
    let pass = rep.max_violation <= args.tol && rep.max_overlap <= overlap_cap;
    if pass {
        println!(
            "verdict       PASS (tolerance {:.0e}, overlap cap {:.3e})",
            args.tol, overlap_cap
        );
        0
    } else {
        println!(
            "verdict       FAIL (tolerance {:.0e}, overlap cap {:.3e})",
            args.tol, overlap_cap
        );
        EXIT_VERIFY_FAIL
    }
}

fn cmd_render(args: RenderArgs) -> u8 {
    let inst = match load_instance(&args.instance) {
        Ok(i) => i,
        Err(e) => return fail(EXIT_INPUT, e),
    };
    let layout = match load_layout(&args.layout) {
        Ok(l) => l,
        Err(e) => return fail(EXIT_INPUT, e),
    };
    let svg = match render_svg(&inst, &layout) {
        Ok(s) => s,
        Err(e) => return fail(EXIT_INPUT, e),
    };
    match write_file(&args.out, &svg) {
        Ok(()) => 0,
        Err(e) => fail(EXIT_INPUT, e),
    }
}

fn cmd_bench(args: BenchArgs) -> u8 {
    let mut reports = Vec::new();
    let mut failures = 0u8;
    for path in &args.instances {
        let arg = InstanceArg {
            instance: path.clone(),
            raster_scale: None,
        };
        let inst = match load_instance(&arg) {
            Ok(i) => i,
            Err(e) => return fail(EXIT_INPUT, e),
        };
        let pairs = enumerate_pairs(&inst.pieces).len();
        let (dim, rows) = match build_problem(&inst, f64::INFINITY) {
            Ok(p) => (p.dim(), p.num_constraints()),
            Err(e) => return fail(EXIT_INPUT, format!("{}: {e}", inst.name)),
        };
        println!(
            "{}: {} pieces, {} parts, {} vertices, {} pairs, {} variables, {} constraints",
            inst.name,
            inst.pieces.len(),
            inst.part_count(),
            inst.part_vertex_count(),
            pairs,
            dim,
            rows
        );
        match run_and_report(&inst, &args.solver) {
            Ok(r) => reports.push(r),
            Err((_, e)) => {
                eprintln!("error: {e}");
                failures += 1;
            }
        }
    }
    println!();
    print!("{}", report_table(&reports));
    if let Some(path) = &args.out_json {
        let mut json = serde_json::to_string_pretty(&reports).expect("reports serialize");
        json.push('\n');
        if let Err(e) = write_file(path, &json) {
            return fail(EXIT_INPUT, e);
        }
    }
    if failures > 0 {
        EXIT_SOLVER
    } else {
        0
    }
}

fn main() -> ExitCode {
    let code = match Cli::parse().cmd {
        Command::Solve(a) => cmd_solve(a),
        Command::Seed(a) => cmd_seed(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Render(a) => cmd_render(a),
        Command::Bench(a) => cmd_bench(a),
    };
    ExitCode::from(code)
}
