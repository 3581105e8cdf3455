//! End-to-end checks of the command-line surface: exit codes, file outputs,
//! and the seed -> verify -> render pipeline on a small instance.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_nestline")
}

fn run(args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn workdir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("nestline-cli-{tag}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_instance(dir: &Path) -> PathBuf {
    let path = dir.join("squares.json");
    std::fs::write(
        &path,
        r#"{ "name": "squares", "strip_width": 2.0, "pieces": [
            { "id": "sq", "count": 3, "vertices": [[0,0],[1,0],[1,1],[0,1]] } ] }"#,
    )
    .unwrap();
    path
}

#[test]
fn seed_verify_render_pipeline() {
    let dir = workdir("pipeline");
    let inst = write_instance(&dir);
    let layout = dir.join("layout.json");
    let svg = dir.join("layout.svg");

    let out = run(&[
        "seed",
        "--instance",
        inst.to_str().unwrap(),
        "--bl-iters",
        "20",
        "--seed",
        "1",
        "--out-layout",
        layout.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "seed failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(layout.is_file());

    let out = run(&[
        "verify",
        "--instance",
        inst.to_str().unwrap(),
        layout.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "verify rejected a fresh seed");
    assert!(stdout(&out).contains("PASS"));

    let out = run(&[
        "render",
        "--instance",
        inst.to_str().unwrap(),
        layout.to_str().unwrap(),
        "--out",
        svg.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let body = std::fs::read_to_string(&svg).unwrap();
    assert!(body.starts_with("<svg"), "render must emit an SVG document");
    assert_eq!(
        body.matches("<polygon").count(),
        3,
        "one polygon per placed part"
    );

    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn verify_fails_with_exit_code_1_on_overlap() {
    let dir = workdir("overlap");
    let inst = write_instance(&dir);
    let layout = dir.join("layout.json");
    run(&[
        "seed",
        "--instance",
        inst.to_str().unwrap(),
        "--out-layout",
        layout.to_str().unwrap(),
    ]);

    // stack every piece on the first one's spot
    let mut doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&layout).unwrap()).unwrap();
    let placements = doc["placements"].as_array_mut().unwrap();
    let first = placements[0].clone();
    for p in placements.iter_mut() {
        p["tx"] = first["tx"].clone();
        p["ty"] = first["ty"].clone();
    }
    let broken = dir.join("broken.json");
    std::fs::write(&broken, serde_json::to_string(&doc).unwrap()).unwrap();

    let out = run(&[
        "verify",
        "--instance",
        inst.to_str().unwrap(),
        broken.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("FAIL"));

    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn input_errors_exit_with_code_2() {
    let dir = workdir("input");
    let inst = write_instance(&dir);

    let out = run(&[
        "verify",
        "--instance",
        inst.to_str().unwrap(),
        "no-such-layout.json",
    ]);
    assert_eq!(out.status.code(), Some(2), "missing layout file");

    let other = dir.join("other.json");
    std::fs::write(
        &other,
        r#"{ "name": "other", "strip_width": 2.0, "pieces": [
            { "id": "sq", "vertices": [[0,0],[1,0],[1,1],[0,1]] } ] }"#,
    )
    .unwrap();
    let layout = dir.join("layout.json");
    run(&[
        "seed",
        "--instance",
        inst.to_str().unwrap(),
        "--out-layout",
        layout.to_str().unwrap(),
    ]);
    let out = run(&[
        "verify",
        "--instance",
        other.to_str().unwrap(),
        layout.to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(2),
        "layout for a different instance"
    );
    assert!(String::from_utf8_lossy(&out.stderr).contains("other"));

    let out = run(&[
        "solve",
        "--instance",
        dir.join("absent.json").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2), "missing instance file");

    let _ = std::fs::remove_dir_all(&dir);
}
