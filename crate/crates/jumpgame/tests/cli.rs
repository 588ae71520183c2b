//! End-to-end checks of the binary: exit-code contract, output files, and
//! certification against a deliberately bad policy.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_jumpgame"))
}

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(format!("{name}.json"))
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

#[test]
fn help_exits_zero() {
    let out = bin().arg("--help").output().unwrap();
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    for sub in ["validate", "solve", "certify", "simulate", "matrix"] {
        assert!(text.contains(sub), "--help misses {sub}");
    }
}

#[test]
fn validate_good_model_exits_zero() {
    let out = bin()
        .args(["validate", "--model"])
        .arg(fixture("repair"))
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn validate_nonconservative_model_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    // Row sums to 0.1, not 0.
    std::fs::write(
        &bad,
        r#"{
  "horizon": 1.0,
  "states": ["s", "t"],
  "dynamics": [{
    "s": {"actions_max": ["a"], "actions_min": ["b"], "q": [[[-0.4, 0.5]]], "r": [[0.0]]},
    "t": {"actions_max": ["a"], "actions_min": ["b"], "q": [[[0.0, 0.0]]], "r": [[0.0]]}
  }],
  "terminal": {"s": 0.0, "t": 0.0}
}"#,
    )
    .unwrap();
    let out = bin().args(["validate", "--model"]).arg(&bad).output().unwrap();
    assert_eq!(code(&out), 1);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("conservative"), "report: {text}");
}

#[test]
fn malformed_json_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{ not json").unwrap();
    for sub in ["validate", "solve", "certify", "simulate"] {
        let out = bin().args([sub, "--model"]).arg(&bad).output().unwrap();
        assert_eq!(code(&out), 2, "{sub} on malformed input");
    }
}

#[test]
fn missing_file_exits_two() {
    let out = bin()
        .args(["solve", "--model", "/nonexistent/model.json"])
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);
}

#[test]
fn solve_writes_all_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let values = dir.path().join("values.csv");
    let pmax = dir.path().join("pmax.csv");
    let pmin = dir.path().join("pmin.csv");
    let diag = dir.path().join("diag.txt");
    let out = bin()
        .args(["solve", "--model"])
        .arg(fixture("stage22"))
        .args(["--grid", "100", "--out-values"])
        .arg(&values)
        .arg("--out-policy-max")
        .arg(&pmax)
        .arg("--out-policy-min")
        .arg(&pmin)
        .arg("--out-diagnostics")
        .arg(&diag)
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("u(0,s)"), "stdout: {stdout}");

    let values = std::fs::read_to_string(&values).unwrap();
    assert_eq!(values.lines().next(), Some("t,state,value"));
    assert_eq!(values.lines().count(), 1 + 101);
    let first_value: f64 = values
        .lines()
        .nth(1)
        .unwrap()
        .rsplit(',')
        .next()
        .unwrap()
        .parse()
        .unwrap();
    assert!((first_value - 1.5).abs() < 1e-4);

    for p in [&pmax, &pmin] {
        let text = std::fs::read_to_string(p).unwrap();
        assert_eq!(text.lines().next(), Some("index,time,state,action,prob"));
        assert_eq!(text.lines().count(), 1 + 100 * 2);
    }
    let diag = std::fs::read_to_string(&diag).unwrap();
    assert!(diag.contains("iterations"), "diagnostics: {diag}");
    assert!(diag.contains("solver_agreement_gap"), "diagnostics: {diag}");
}

#[test]
fn certify_accepts_extracted_policies() {
    let out = bin()
        .args(["certify", "--model"])
        .arg(fixture("twocell"))
        .args(["--grid", "400"])
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn certify_rejects_bad_policy() {
    let dir = tempfile::tempdir().unwrap();
    let pmax = dir.path().join("pmax.csv");
    let pmin = dir.path().join("pmin.csv");
    let out = bin()
        .args(["solve", "--model"])
        .arg(fixture("stage22"))
        .args(["--grid", "200"])
        .arg("--out-policy-max")
        .arg(&pmax)
        .arg("--out-policy-min")
        .arg(&pmin)
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);

    // Force the maximizer onto the pure first action. Against it the
    // minimizer can hold the rate to 1 instead of the saddle value 1.5.
    let text = std::fs::read_to_string(&pmax).unwrap();
    let bad: String = text
        .lines()
        .map(|line| {
            if line.starts_with("index") {
                line.to_string()
            } else {
                let mut parts: Vec<&str> = line.split(',').collect();
                let p = if parts[3] == "a0" { "1" } else { "0" };
                parts[4] = p;
                parts.join(",")
            }
        })
        .collect::<Vec<_>>()
        .join("\n")
        + "\n";
    std::fs::write(&pmax, bad).unwrap();

    let out = bin()
        .args(["certify", "--model"])
        .arg(fixture("stage22"))
        .args(["--grid", "200"])
        .arg("--policy-max")
        .arg(&pmax)
        .arg("--policy-min")
        .arg(&pmin)
        .output()
        .unwrap();
    assert_eq!(code(&out), 1, "{}", String::from_utf8_lossy(&out.stdout));
    let stdout = String::from_utf8(out.stdout).unwrap();
    // Gap per state: lower value drops to ~1.0 while the upper stays ~1.5.
    assert!(stdout.contains("gap"), "stdout: {stdout}");
}

#[test]
fn simulate_writes_trajectories_and_reports() {
    let dir = tempfile::tempdir().unwrap();
    let traj = dir.path().join("paths.csv");
    let out = bin()
        .args(["simulate", "--model"])
        .arg(fixture("pure_death"))
        .args(["--grid", "100", "--paths", "500", "--seed", "3", "--x0", "up"])
        .arg("--out-trajectories")
        .arg(&traj)
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("mean"), "stdout: {stdout}");
    let text = std::fs::read_to_string(&traj).unwrap();
    assert_eq!(text.lines().next(), Some("path_id,jump_index,time,state"));
    assert!(text.lines().count() > 500);
}

#[test]
fn simulate_unknown_x0_exits_two() {
    let out = bin()
        .args(["simulate", "--model"])
        .arg(fixture("pure_death"))
        .args(["--paths", "10", "--x0", "sideways"])
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);
}

#[test]
fn matrix_solves_csv_input() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("m.csv");
    std::fs::write(&csv, "3,1\n0,2\n").unwrap();
    let out = bin()
        .args(["matrix", "--in"])
        .arg(&csv)
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("value = 1.5"), "stdout: {stdout}");
}

#[test]
fn matrix_bad_entry_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("m.csv");
    std::fs::write(&csv, "3,zebra\n0,2\n").unwrap();
    let out = bin().args(["matrix", "--in"]).arg(&csv).output().unwrap();
    assert_eq!(code(&out), 2);
}
