use std::path::Path;
use std::process::{Command, Output};

fn jungck(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_jungck-fp"))
        .args(args)
        .env_remove("JUNGCK_FP_SEED")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("structured output is JSON")
}

fn write_variant(dir: &Path, name: &str, edit: impl Fn(String) -> String) -> String {
    let src = stdout(&jungck(&["catalog", "example1_corrected"]));
    let path = dir.join(name);
    std::fs::write(&path, edit(src)).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn oversized_gauges_exit_two() {
    let out = jungck(&["check", "example1_as_printed"]);
    assert_eq!(code(&out), 2);
    assert!(stdout(&out).contains("1.25"));
}

#[test]
fn example_two_checks_and_certifies() {
    assert_eq!(code(&jungck(&["check", "example2"])), 0);
    let a = jungck(&["certify", "example2", "--n-pairs", "10000", "--seed", "42", "--format", "structured"]);
    let b = jungck(&["certify", "--scenario", "example2", "--n-pairs", "10000", "--seed", "42", "--format", "structured"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(json(&a)["certify"]["plain"]["verdict"], "certified");
}

#[test]
fn gamma_one_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_variant(dir.path(), "g.toml", |s| s.replace("gamma = \"1/8\"", "gamma = \"1\""));
    let out = jungck(&["check", &path]);
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("gamma"));
}

#[test]
fn identity_pair_fails_certification() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_variant(dir.path(), "id.toml", |s| {
        s.replace("expr = \"x/16\"", "expr = \"x\"").replace("expr = \"x/2\"", "expr = \"x\"")
    });
    let out = jungck(&["certify", &path]);
    assert_eq!(code(&out), 2);
    assert!(stdout(&out).contains("Violated"));
}

#[test]
fn failed_check_blocks_certify_unless_forced() {
    let out = jungck(&["certify", "example1_as_printed"]);
    assert_eq!(code(&out), 2);
    assert!(stdout(&out).contains("--force"));
    let out = jungck(&["certify", "example1_as_printed", "--force", "--format", "structured"]);
    assert!(json(&out)["certify"].is_object());
}

#[test]
fn solve_writes_report_and_trace() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("ex1.json");
    let out = jungck(&["solve", "example1_corrected", "--x0", "1", "--output", report.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let saved: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(saved["solve"]["cfp"], 0.0);
    let csv = std::fs::read_to_string(dir.path().join("ex1.trace.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("n,x_n,y_n,step_dist"));
    assert_eq!(lines.next(), Some("0,1,0.0625,0.0546875"));
}

#[test]
fn solve_example_three() {
    let out = jungck(&["solve", "example3", "--format", "structured"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    let cfp = v["solve"]["cfp"].as_f64().unwrap();
    assert!((cfp - 2.0 / 3.0).abs() <= 1e-9);
    assert_eq!(v["solve"]["owc"]["verdict"], "holds");
    assert_eq!(v["solve"]["ea"]["holds"], true);
}

#[test]
fn identical_runs_are_bit_identical() {
    for cmd in ["check", "certify", "solve", "report"] {
        let a = jungck(&[cmd, "example2_integral", "--format", "structured"]);
        let b = jungck(&[cmd, "example2_integral", "--format", "structured"]);
        assert_eq!(code(&a), 0, "{cmd}");
        assert_eq!(a.stdout, b.stdout, "{cmd}");
        assert_eq!(json(&a)["schema_version"], 1);
    }
}

#[test]
fn seed_comes_from_the_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_jungck-fp"))
        .args(["certify", "example2", "--format", "structured"])
        .env("JUNGCK_FP_SEED", "7")
        .output()
        .unwrap();
    assert_eq!(json(&out)["settings"]["seed"], 7);
    assert_eq!(json(&jungck(&["certify", "example2", "--format", "structured"]))["settings"]["seed"], 42);
}

#[test]
fn bad_input_exits_three() {
    assert_eq!(code(&jungck(&["check", "example2", "--bogus"])), 3);
    assert_eq!(code(&jungck(&["check", "example2", "--tol", "-1"])), 3);
    assert_eq!(code(&jungck(&["check", "example2", "--n-pairs", "0"])), 3);
    assert_eq!(code(&jungck(&["check", "no_such_scenario"])), 3);
    assert_eq!(code(&jungck(&["solve", "example2", "--x0", "7"])), 3);
    assert_eq!(code(&jungck(&["catalog", "no_such_scenario"])), 3);
    assert_eq!(code(&jungck(&["--help"])), 0);
}

#[test]
fn catalog_lists_and_prints() {
    let out = stdout(&jungck(&["catalog"]));
    assert_eq!(out.lines().count(), 5);
    let v = json(&jungck(&["catalog", "--format", "structured"]));
    assert_eq!(v.as_array().unwrap().len(), 5);
    let src = stdout(&jungck(&["catalog", "example3"]));
    assert!(src.contains("2/3 + 1/n"));
}
