use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tanbundle"))
        .args(args)
        .env_remove("TANBUNDLE_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn check_passes_on_sphere_with_cheeger_gromoll() {
    let o = run(&["check", "--base", "sphere", "--c", "1", "--dim", "2", "--weight", "cheeger_gromoll", "--points", "5"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn check_reports_failure_with_exit_one() {
    let o = run(&[
        "check", "--base", "hyperbolic", "--c", "-1", "--dim", "3", "--weight", "almost_kaehler", "--points", "5",
        "--output", "json",
    ]);
    assert_eq!(o.status.code(), Some(1));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(doc["verdict"], "fail");
    let failing: Vec<_> = doc["comparisons"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["gating"] == true && c["verdict"] == "fail")
        .map(|c| c["subject"].as_str().unwrap().to_string())
        .collect();
    assert_eq!(failing, vec!["almost_kaehler".to_string()]);
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        vec!["check", "--base", "sphere", "--c", "-1"],
        vec!["sweep", "--steps", "1"],
        vec!["sectional", "--y", "0,0"],
        vec!["check", "--no-such-flag"],
        vec!["frobnicate"],
    ] {
        assert_eq!(run(&args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn sectional_csv_columns() {
    let o = run(&["sectional", "--base", "sphere", "--c", "1", "--dim", "3", "--output", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = rdr.headers().unwrap().iter().map(str::to_string).collect();
    assert_eq!(header, ["pair_class", "A", "B", "closed_form", "oracle", "abs_err"]);
    let rows: Vec<_> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 15);
    for r in &rows {
        let err: f64 = r[5].parse().unwrap();
        assert!(err < 1e-3);
    }
}

#[test]
fn sweep_rows_and_header() {
    let o = run(&["sweep", "--weight", "flat", "--steps", "2", "--output", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    assert_eq!(rdr.headers().unwrap().len(), 12);
    let rows: Vec<_> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 2);
    assert_eq!(&rows[0][0], "0");
    assert_eq!(&rows[1][0], "5");
}

#[test]
fn json_is_identical_across_worker_counts() {
    let base = ["check", "--base", "sphere", "--c", "1", "--dim", "3", "--weight", "constant", "--weight-k", "1",
        "--points", "4", "--output", "json"];
    let mut one = base.to_vec();
    one.extend(["--workers", "1"]);
    let mut four = base.to_vec();
    four.extend(["--workers", "4"]);
    let (a, b) = (run(&one), run(&four));
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn output_file_and_seed_env() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let o = run(&["check", "--points", "3", "--output", "json", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(doc["config"]["seed"], 42);
    let o = Command::new(env!("CARGO_BIN_EXE_tanbundle"))
        .args(["check", "--points", "3", "--output", "json"])
        .env("TANBUNDLE_SEED", "7")
        .output()
        .unwrap();
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["config"]["seed"], 7);
}
