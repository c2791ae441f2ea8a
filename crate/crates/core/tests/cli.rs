use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use forced_osc::io::read_report;
use forced_osc::types::Verdict;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_forced-osc"))
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/data").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

const AMBIENT: &str = r#"
seed = 5
[model]
kind = "preset"
name = "ten-machine-two-area"
sigma_load = 0.01
"#;

fn simulate(dir: &Path, scenario: &str, name: &str) -> PathBuf {
    let path = match scenario {
        "ambient" => {
            let path = dir.join("ambient.toml");
            std::fs::write(&path, AMBIENT).unwrap();
            path
        }
        _ => data(scenario),
    };
    let csv = dir.join(format!("{name}.csv"));
    let out = run(&["simulate", "--scenario", s(&path), "--output", s(&csv)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    csv
}

#[test]
fn simulate_then_locate() {
    let dir = tempfile::tempdir().unwrap();
    let csv = simulate(dir.path(), "resonant.toml", "forced");
    let report = dir.path().join("report.json");
    let out = run(&[
        "locate",
        "--input",
        s(&csv),
        "--config",
        s(&data("locate.toml")),
        "--output",
        s(&report),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let record = read_report(&report).unwrap();
    assert_eq!(record.verdict, Verdict::SourceLocated);
    assert_eq!(record.detections[0].machine, "G3");
    assert!((record.detections[0].frequency_hz - 0.375).abs() < 0.026);
    assert_eq!(record.config_echo.lambda, 0.1);
}

#[test]
fn reports_are_deterministic_apart_from_timing() {
    let dir = tempfile::tempdir().unwrap();
    let csv = simulate(dir.path(), "resonant.toml", "forced");
    let read = |name: &str| {
        let path = dir.path().join(name);
        let out = run(&[
            "locate",
            "--input",
            s(&csv),
            "--config",
            s(&data("locate.toml")),
            "--output",
            s(&path),
        ]);
        assert_eq!(out.status.code(), Some(0));
        let mut record = read_report(&path).unwrap();
        record.elapsed_s = 0.0;
        record
    };
    assert_eq!(read("a.json"), read("b.json"));
}

#[test]
fn ambient_window_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let csv = simulate(dir.path(), "ambient", "ambient");
    let out = run(&["locate", "--input", s(&csv), "--config", s(&data("locate.toml"))]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(json["detections"].as_array().unwrap().len(), 0);
}

#[test]
fn errors_exit_1() {
    assert_eq!(
        run(&["locate", "--input", "/nonexistent/window.csv"]).status.code(),
        Some(1)
    );
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["modes"]).status.code(), Some(1));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "lambda = -1\n").unwrap();
    let csv = simulate(dir.path(), "resonant.toml", "forced");
    assert_eq!(
        run(&["locate", "--input", s(&csv), "--config", s(&bad)]).status.code(),
        Some(1)
    );
}

#[test]
fn help_exits_0() {
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn modes_lists_the_inter_area_mode_first() {
    let out = run(&["modes", "--scenario", s(&data("resonant.toml"))]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("frequency_hz,damping_ratio"));
    let first: f64 = lines.next().unwrap().split(',').next().unwrap().parse().unwrap();
    assert!((first - 0.375).abs() < 1e-3);
}

#[test]
fn spectrum_writes_every_channel() {
    let dir = tempfile::tempdir().unwrap();
    let csv = simulate(dir.path(), "resonant.toml", "forced");
    let spectra = dir.path().join("spectra.csv");
    assert!(run(&["spectrum", "--input", s(&csv), "--output", s(&spectra)])
        .status
        .success());
    let text = std::fs::read_to_string(&spectra).unwrap();
    // 601 bins for each of 20 channels, plus the header.
    assert_eq!(text.lines().count(), 1 + 601 * 20);
}
