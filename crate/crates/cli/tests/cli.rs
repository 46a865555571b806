use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_synalloc"));
    c.env_remove("SYNALLOC_DATASET");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures").join(name)
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn run_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let o = run(&["run", "--scenario", "1", "--partitions", "5", "--vectors", "10000", "--seed", "42", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let parts = report["per_partition"].as_array().unwrap();
    assert_eq!(parts.len(), 5);
    let total: u64 = parts.iter().map(|p| p["count"].as_u64().unwrap()).sum();
    assert_eq!(total, 5 * 200 + 10_000);
    assert_eq!(report["seed"], 42);
    assert!((1..=5).contains(&report["majority_partition"].as_u64().unwrap()));
    assert!(report["messages_disseminated"].as_u64().unwrap() > 0);
    assert!(report.get("config").is_some());
    // only the report, no stray temporaries
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
}

#[test]
fn all_scenarios_give_three_rows() {
    let o = run(&["run", "--scenario", "all", "--seed", "42", "--vectors", "2000"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "scenario,gen_mu,gen_sigma,majority_count,mean_min,mean_max,std_min,std_max");
    assert_eq!(lines.len(), 4);
    assert!(lines[1].starts_with("1,25.0,10.0,"));
    assert!(lines[3].starts_with("3,50.0,50.0,"));
}

#[test]
fn identical_invocations_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let mut bodies = Vec::new();
    for name in ["a.json", "b.json"] {
        let path = dir.path().join(name);
        let recs = dir.path().join(format!("{name}.jsonl"));
        let o = run(&[
            "run", "--scenario", "2", "--vectors", "3000", "--seed", "7",
            "--out", path.to_str().unwrap(), "--records", recs.to_str().unwrap(),
        ]);
        assert!(o.status.success());
        bodies.push((std::fs::read(&path).unwrap(), std::fs::read(&recs).unwrap()));
    }
    assert_eq!(bodies[0], bodies[1]);
    let records = String::from_utf8(bodies[0].1.clone()).unwrap();
    assert_eq!(records.lines().count(), 3000);
    let first: serde_json::Value = serde_json::from_str(records.lines().next().unwrap()).unwrap();
    assert_eq!(first["t"], 0);
    assert_eq!(first["similarities"].as_array().unwrap().len(), 5);
}

#[test]
fn csv_format_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.csv");
    let o = run(&["run", "--vectors", "500", "--format", "csv", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(std::fs::read_to_string(&out).unwrap(), stdout(&o));
}

#[test]
fn bad_theta_is_config_error() {
    let o = run(&["validate", "--theta", "0.5"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("theta"));
    let o = run(&["run", "--theta", "0.5", "--vectors", "10"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn unknown_flag_and_incomplete_custom_are_config_errors() {
    assert_eq!(run(&["run", "--bogus"]).status.code(), Some(1));
    assert_eq!(run(&["run", "--scenario", "custom", "--mu", "5"]).status.code(), Some(1));
    let o = run(&["run", "--scenario", "custom", "--mu", "5", "--sigma", "2", "--vectors", "300"]);
    assert!(o.status.success());
    assert!(stdout(&o).lines().nth(1).unwrap().starts_with("custom,5.0,2.0,"));
}

#[test]
fn strict_nan_row_is_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    std::fs::write(&path, "CO_GT,NMHC_GT,C6H6_GT,NOX_GT,NO2_GT\n1,2,3,4,5\nNaN,2,3,4,5\n").unwrap();
    let o = run(&["stats", "--strict", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));
    let o = run(&["run", "--strict", "--dataset", path.to_str().unwrap(), "--partitions", "1"]);
    assert_eq!(o.status.code(), Some(2));
    // lenient mode skips the row
    assert!(run(&["stats", path.to_str().unwrap()]).status.success());
}

#[test]
fn stats_on_fixture() {
    let o = run(&["stats", fixture("air_quality_3rows.csv").to_str().unwrap()]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("rows: 3\n"));
    let names: Vec<&str> = text.lines().skip(2).map(|l| l.split_whitespace().next().unwrap()).collect();
    assert_eq!(names, ["CO_GT", "NMHC_GT", "C6H6_GT", "NOX_GT", "NO2_GT"]);
    let nmhc: Vec<&str> = text.lines().nth(3).unwrap().split_whitespace().collect();
    assert_eq!(nmhc, ["NMHC_GT", "116.666667", "25.525586", "88.0000", "150.0000"]);
}

#[test]
fn stats_reads_env_dataset() {
    let o = bin().arg("stats").env("SYNALLOC_DATASET", fixture("air_quality_uci_sample.csv")).output().unwrap();
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("rows: 52\n"));
}

#[test]
fn empty_after_cleaning_is_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.csv");
    std::fs::write(&path, "CO_GT,NMHC_GT,C6H6_GT,NOX_GT,NO2_GT\n-200,1,1,1,1\n").unwrap();
    let o = run(&["stats", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn failed_run_leaves_no_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let o = run(&["run", "--dataset", "/nonexistent.csv", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn validate_passes_on_defaults() {
    let o = run(&["validate", "--vectors", "3000"]);
    assert!(o.status.success(), "{}", stdout(&o));
    let text = stdout(&o);
    assert!(text.lines().filter(|l| l.starts_with("PASS ")).count() >= 10);
    assert!(!text.contains("FAIL"));
}
