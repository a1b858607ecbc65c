use std::path::Path;
use std::process::{Command, Output};

use infodist::dataset::{load_joint, read_summary, BRANCH_COLUMNS, CURVE_COLUMNS};

fn infodist(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_infodist"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = infodist(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn small_joint(dir: &Path) -> String {
    let path = dir.join("joint.csv");
    let p = path.to_str().unwrap();
    ok(&[
        "gen-data",
        "--components",
        "2",
        "--grid",
        "12",
        "10",
        "--out",
        p,
    ]);
    p.to_string()
}

#[test]
fn gen_data_writes_requested_grid() {
    let dir = tempfile::tempdir().unwrap();
    let p = load_joint(small_joint(dir.path())).unwrap();
    assert_eq!(p.matrix().shape(), (12, 10));
    assert!((p.matrix().sum() - 1.0).abs() < 1e-12);
}

#[test]
fn anneal_writes_branches_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let data = small_joint(dir.path());
    let out = dir.path().join("run");
    let stdout = ok(&[
        "anneal",
        "--data",
        &data,
        "--classes",
        "2",
        "--beta-max",
        "3",
        "--unit",
        "bits",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(stdout.contains("PitchforkLike"));
    let csv = std::fs::read_to_string(out.join("branches.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), BRANCH_COLUMNS.join(","));
    let summary = read_summary(out.join("anneal.json")).unwrap();
    assert_eq!(summary.command, "anneal");
    assert_eq!(summary.classes, Some(2));
    assert_eq!(summary.bifurcations.len(), 1);
}

#[test]
fn curve_writes_points_and_derivative_report() {
    let dir = tempfile::tempdir().unwrap();
    let data = small_joint(dir.path());
    let out = dir.path().join("curve");
    ok(&[
        "curve",
        "--data",
        &data,
        "--classes",
        "2",
        "--i0-min",
        "0.01",
        "--i0-max",
        "0.1",
        "--points",
        "10",
        "--beta-max",
        "0",
        "--out",
        out.to_str().unwrap(),
    ]);
    let csv = std::fs::read_to_string(out.join("curve.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), CURVE_COLUMNS.join(","));
    assert_eq!(csv.lines().count(), 11);
    let summary = read_summary(out.join("curve.json")).unwrap();
    let report = summary.theorem3.expect("derivative report");
    assert!(report.max_rel_err < 1e-2);
}

#[test]
fn verify_prints_a_table_and_writes_a_report() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("verify.json");
    let stdout = ok(&[
        "verify",
        "--suite",
        "euler",
        "--instances",
        "50",
        "--report",
        report.to_str().unwrap(),
    ]);
    assert!(stdout.contains("q.gradI - I"));
    let summary = read_summary(&report).unwrap();
    assert_eq!(summary.checks.len(), 3);
    assert!(summary.checks.iter().all(|c| c.passed));
}

#[test]
fn verify_spectral_suites_on_small_data() {
    let dir = tempfile::tempdir().unwrap();
    let data = small_joint(dir.path());
    for suite in ["theorem1", "theorem3", "gradients"] {
        ok(&[
            "verify",
            "--suite",
            suite,
            "--data",
            &data,
            "--classes",
            "2",
            "--instances",
            "40",
        ]);
    }
}

#[test]
fn config_file_supplies_defaults_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let data = small_joint(dir.path());
    let cfg = dir.path().join("run.cfg");
    std::fs::write(
        &cfg,
        format!("# defaults\ndata = {data}\nclasses = 3\nbeta_max = 1.5\n"),
    )
    .unwrap();
    let out = dir.path().join("cfg");
    ok(&[
        "anneal",
        "--config",
        cfg.to_str().unwrap(),
        "--classes",
        "2",
        "--out",
        out.to_str().unwrap(),
    ]);
    let summary = read_summary(out.join("anneal.json")).unwrap();
    assert_eq!(summary.classes, Some(2));
}

#[test]
fn failures_map_to_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "2,2\n0.5,0.25\n0.5,-0.25\n").unwrap();
    let out = infodist(&["anneal", "--data", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("row 1, column 1"));

    let data = small_joint(dir.path());
    let out = infodist(&["curve", "--data", &data, "--i0-max", "5", "--beta-max", "0"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not achievable"));

    assert_eq!(
        infodist(&["anneal", "--classes", "many"]).status.code(),
        Some(2)
    );
    assert_eq!(infodist(&["no-such-command"]).status.code(), Some(2));
}

#[test]
fn identical_seeds_give_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let data = small_joint(dir.path());
    let run = |name: &str| {
        let a = dir.path().join(format!("{name}-a"));
        let c = dir.path().join(format!("{name}-c"));
        ok(&[
            "anneal",
            "--data",
            &data,
            "--classes",
            "2",
            "--seed",
            "3",
            "--beta-max",
            "2.5",
            "--out",
            a.to_str().unwrap(),
        ]);
        ok(&[
            "curve",
            "--data",
            &data,
            "--classes",
            "2",
            "--seed",
            "3",
            "--i0-min",
            "0.01",
            "--i0-max",
            "0.08",
            "--points",
            "8",
            "--jobs",
            "3",
            "--out",
            c.to_str().unwrap(),
        ]);
        (
            std::fs::read(a.join("branches.csv")).unwrap(),
            std::fs::read(c.join("curve.csv")).unwrap(),
        )
    };
    assert_eq!(run("first"), run("second"));
}

#[test]
fn gen_data_edge_cases() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("tiny.csv");
    ok(&[
        "gen-data",
        "--components",
        "1",
        "--grid",
        "2",
        "2",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(load_joint(&path).unwrap().matrix().shape(), (2, 2));
    let out = infodist(&[
        "gen-data",
        "--components",
        "0",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn single_class_anneal_is_trivial() {
    let dir = tempfile::tempdir().unwrap();
    let data = small_joint(dir.path());
    let out = dir.path().join("one");
    ok(&[
        "anneal",
        "--data",
        &data,
        "--classes",
        "1",
        "--out",
        out.to_str().unwrap(),
    ]);
    let summary = read_summary(out.join("anneal.json")).unwrap();
    assert!(summary.bifurcations.is_empty());
    let csv = std::fs::read_to_string(out.join("branches.csv")).unwrap();
    assert!(csv
        .lines()
        .skip(1)
        .all(|l| l.split(',').nth(1) == Some("0")));
}

#[test]
fn curve_needs_two_points() {
    let out = infodist(&["curve", "--points", "1", "--beta-max", "0"]);
    assert_eq!(out.status.code(), Some(2));
}

fn binary_channel(dir: &Path) -> String {
    let path = dir.join("bsc.csv");
    infodist::dataset::save_joint(&infodist::dataset::binary_symmetric(0.1).unwrap(), &path)
        .unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn concave_toy_curve_has_no_sign_changes() {
    let dir = tempfile::tempdir().unwrap();
    let data = binary_channel(dir.path());
    let out = dir.path().join("bsc");
    ok(&[
        "curve",
        "--data",
        &data,
        "--classes",
        "2",
        "--i0-min",
        "0.005",
        "--i0-max",
        "0.25",
        "--points",
        "50",
        "--out",
        out.to_str().unwrap(),
    ]);
    let report = read_summary(out.join("curve.json"))
        .unwrap()
        .theorem3
        .unwrap();
    assert!(report.sign_changes.is_empty());

    let verify = dir.path().join("verify.json");
    ok(&[
        "verify",
        "--suite",
        "theorem3",
        "--data",
        &data,
        "--classes",
        "2",
        "--report",
        verify.to_str().unwrap(),
    ]);
    let checks = read_summary(&verify).unwrap().checks;
    let flags = checks
        .iter()
        .find(|c| c.name.contains("sign changes"))
        .unwrap();
    assert_eq!(flags.value, 0.0);
    assert!(checks.iter().all(|c| c.passed));
}
