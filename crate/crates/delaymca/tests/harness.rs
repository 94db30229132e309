use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use delaymca::config::{brownian_config, DiffusionConfig, DriftConfig};
use delaymca::error::{
    EXIT_CHECK_FAILED, EXIT_CONFIG, EXIT_INFEASIBLE, EXIT_IO, EXIT_RESOURCE_CAP,
};
use delaymca::report::{
    BENCHMARK_HEADER, CONSISTENCY_HEADER, POLICY_HEADER, QV_HEADER, STUDY_HEADER,
};
use delaymca::{emit_reports, load_config, run_study, ProblemConfig, Reports};
use delaymca_core::solver::solve_dp;
use tempfile::TempDir;

fn config_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name)
}

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_delaymca"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, config: &ProblemConfig) -> PathBuf {
    let path = dir.join("config.json");
    fs::write(&path, config.to_json()).unwrap();
    path
}

#[test]
fn empty_reports_are_header_only() {
    let dir = TempDir::new().unwrap();
    let written = emit_reports(&Reports::default(), dir.path()).unwrap();
    assert_eq!(written.len(), 5);
    let expected = [
        ("study.csv", &STUDY_HEADER[..]),
        ("consistency.csv", &CONSISTENCY_HEADER[..]),
        ("qv.csv", &QV_HEADER[..]),
        ("policy.csv", &POLICY_HEADER[..]),
        ("benchmark.csv", &BENCHMARK_HEADER[..]),
    ];
    for (name, header) in expected {
        let text = fs::read_to_string(dir.path().join(name)).unwrap();
        assert_eq!(text, format!("{}\n", header.join(",")), "{name}");
    }
}

#[test]
fn study_rows_match_independent_solves() {
    let config = load_config(&config_path("delayed_drift.json")).unwrap();
    let r = run_study(&config).unwrap();
    let mut previous = None;
    for row in &r.rows {
        let (solved, _) = solve_dp(&config.problem(row.degree).unwrap()).unwrap();
        assert_eq!(row.value, Some(solved.value));
        assert_eq!(
            row.states,
            Some(solved.layer_counts.iter().map(|&c| c as u64).sum())
        );
        assert_eq!(
            row.abs_diff,
            previous.map(|v: f64| (solved.value - v).abs())
        );
        previous = Some(solved.value);
    }
}

#[test]
fn study_output_is_byte_identical_across_runs_and_workers() {
    let dir = TempDir::new().unwrap();
    let config = config_path("delayed_drift.json");
    let mut outputs = Vec::new();
    for workers in ["1", "4", "4"] {
        let out = dir.path().join(format!("run{}", outputs.len()));
        let o = cli(&[
            "--workers",
            workers,
            "study",
            config.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        outputs.push(fs::read(out.join("study.csv")).unwrap());
    }
    assert!(outputs.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn simulation_does_not_depend_on_worker_count() {
    let dir = TempDir::new().unwrap();
    let config = config_path("delayed_drift.json");
    let mut outputs = Vec::new();
    for workers in ["1", "3"] {
        let out = dir.path().join(workers);
        let o = cli(&[
            "--workers",
            workers,
            "--seed",
            "9",
            "simulate",
            config.to_str().unwrap(),
            "--degree",
            "4",
            "--paths",
            "500",
            "--control",
            "up",
            "--policy",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let stdout = String::from_utf8(o.stdout).unwrap();
        let results: Vec<String> = stdout
            .lines()
            .filter(|l| !l.starts_with("wrote "))
            .map(String::from)
            .collect();
        outputs.push((
            results,
            fs::read(out.join("qv.csv")).unwrap(),
            fs::read(out.join("consistency.csv")).unwrap(),
        ));
    }
    assert_eq!(outputs[0].0, outputs[1].0);
    assert_eq!(outputs[0].1, outputs[1].1);
    assert_eq!(outputs[0].2, outputs[1].2);
}

#[test]
fn config_errors_exit_with_code_one() {
    let dir = TempDir::new().unwrap();
    let missing = cli(&["solve", dir.path().join("absent.json").to_str().unwrap()]);
    assert_eq!(missing.status.code(), Some(EXIT_CONFIG));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("config-read"));

    let schema = dir.path().join("schema.json");
    fs::write(&schema, r#"{"schema_version": 1, "delay": 1.0}"#).unwrap();
    let o = cli(&["solve", schema.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(EXIT_CONFIG));
    assert!(String::from_utf8_lossy(&o.stderr).contains("schema"));

    let syntax = dir.path().join("syntax.json");
    fs::write(&syntax, "{ not json").unwrap();
    let o = cli(&["solve", syntax.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(EXIT_CONFIG));
    assert!(String::from_utf8_lossy(&o.stderr).contains("parse"));
}

#[test]
fn infeasible_kernel_exits_with_code_two() {
    let dir = TempDir::new().unwrap();
    let mut c = brownian_config(&[1]);
    c.drift = DriftConfig::Constant { value: 1.0 };
    c.diffusion = DiffusionConfig::Constant { value: 0.5 };
    c.output_dir = dir.path().join("out");
    let path = write_config(dir.path(), &c);
    let o = cli(&["solve", path.to_str().unwrap()]);
    assert_eq!(
        o.status.code(),
        Some(EXIT_INFEASIBLE),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    assert!(String::from_utf8_lossy(&o.stderr).contains("warning"));
    let o = cli(&["check", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(EXIT_INFEASIBLE));
}

#[test]
fn state_budget_exits_with_code_three() {
    let dir = TempDir::new().unwrap();
    let mut c = brownian_config(&[16]);
    c.state_budget = 50;
    c.output_dir = dir.path().join("out");
    let path = write_config(dir.path(), &c);
    let o = cli(&["solve", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(EXIT_RESOURCE_CAP));
    assert!(String::from_utf8_lossy(&o.stderr).contains("resource-cap"));
}

#[test]
fn unwritable_output_exits_with_code_four() {
    let dir = TempDir::new().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "").unwrap();
    let o = cli(&[
        "bench-brownian",
        "--degrees",
        "4",
        "--out",
        blocker.join("sub").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(EXIT_IO));
}

#[test]
fn benchmark_and_demo_succeed() {
    let dir = TempDir::new().unwrap();
    let o = cli(&[
        "bench-brownian",
        "--degrees",
        "4,9",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let text = fs::read_to_string(dir.path().join("benchmark.csv")).unwrap();
    let first = text.lines().nth(1).unwrap();
    assert!(
        first.starts_with("4,2.5000000000000000e-01,2.5000000000000000e-01,"),
        "{first}"
    );

    let o = cli(&["demo-pathological"]);
    assert!(o.status.success());
    let o = cli(&["demo-pathological", "--degrees", "4,8"]);
    assert_eq!(o.status.code(), Some(EXIT_CHECK_FAILED));
}

#[test]
fn shipped_configs_load() {
    let brownian = load_config(&config_path("brownian.json")).unwrap();
    let mut expected = brownian_config(&[4, 9, 16, 25, 36]);
    expected.output_dir = brownian.output_dir.clone();
    assert_eq!(brownian, expected);
    for name in ["bang_bang.json", "delayed_drift.json"] {
        let c = load_config(&config_path(name)).unwrap();
        assert!(c.feasibility_warnings().is_empty(), "{name}");
    }
}
