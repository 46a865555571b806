use std::io::Write;
use std::path::PathBuf;

use synalloc::stats::summarize_dataset;
use synalloc::{
    load_air_quality, run_scenario, run_scenario_with, Error, ErrorKind, InitialData, LoadOptions, RunConfig,
    Scenario,
};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

#[test]
fn three_row_fixture_loads_exactly() {
    let ds = load_air_quality(fixture("air_quality_3rows.csv"), LoadOptions { strict: true }).unwrap();
    assert_eq!(ds.dimension_names, ["CO_GT", "NMHC_GT", "C6H6_GT", "NOX_GT", "NO2_GT"]);
    assert_eq!(
        ds.rows,
        vec![
            vec![2.6, 150.0, 11.9, 166.0, 113.0],
            vec![2.0, 112.0, 9.4, 103.0, 92.0],
            vec![2.2, 88.0, 9.0, 131.0, 114.0],
        ]
    );

    let summary = summarize_dataset(&ds).unwrap();
    assert_eq!(summary.rows, 3);
    let nmhc = &summary.dimensions[1];
    assert!((nmhc.mean - 350.0 / 3.0).abs() < 1e-12);
    // deviations 100/3, -14/3, -86/3
    let var = (100.0f64.powi(2) + 14.0f64.powi(2) + 86.0f64.powi(2)) / 27.0;
    assert!((nmhc.std - var.sqrt()).abs() < 1e-12);
    assert_eq!((nmhc.min, nmhc.max), (88.0, 150.0));
}

#[test]
fn published_layout_drops_sentinel_rows() {
    let ds = load_air_quality(fixture("air_quality_uci_sample.csv"), LoadOptions::default()).unwrap();
    assert_eq!(ds.len(), 52);
    assert!(ds.rows.iter().flatten().all(|v| *v >= 0.0));
    // first data row: 18:00 on 10/03
    assert_eq!(ds.rows[0].len(), 5);
}

#[test]
fn missing_file_is_a_data_error() {
    let err = load_air_quality(fixture("nope.csv"), LoadOptions::default()).unwrap_err();
    assert!(matches!(err, Error::Io { .. }));
    assert_eq!(err.kind(), ErrorKind::Data);
}

#[test]
fn file_empty_after_cleaning() {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    writeln!(f, "CO_GT,NMHC_GT,C6H6_GT,NOX_GT,NO2_GT\n-200,1,1,1,1\n1,-200,1,1,1").unwrap();
    assert!(matches!(load_air_quality(f.path(), LoadOptions::default()), Err(Error::NoRows)));
}

#[test]
fn dataset_initialised_run() {
    let cfg = RunConfig {
        vectors: 2_000,
        initial: InitialData::Dataset {
            path: fixture("air_quality_uci_sample.csv"),
            strict: false,
        },
        ..RunConfig::default().with_scenario(Scenario::Two)
    };
    let run = run_scenario_with(&cfg, |_| {}).unwrap();
    let report = &run.report;
    let initial: usize = report.per_partition.iter().map(|p| p.initial_count).sum();
    let total: usize = report.per_partition.iter().map(|p| p.count).sum();
    assert_eq!(initial, 52);
    assert_eq!(total, 52 + 2_000);
    assert!(run.engine.audit().all_passed());
    assert_eq!(run_scenario(&cfg).unwrap(), run_scenario(&cfg).unwrap());
}

#[test]
fn too_many_partitions_for_dataset() {
    let mut cfg = RunConfig {
        vectors: 10,
        initial: InitialData::Dataset {
            path: fixture("air_quality_3rows.csv"),
            strict: true,
        },
        ..RunConfig::default()
    };
    cfg.engine.partitions = 4;
    assert!(run_scenario(&cfg).is_err());
}
