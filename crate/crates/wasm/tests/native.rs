use synalloc_wasm::{allocation_map, score_pair, simulate};

#[test]
fn score_pair_reports_three_metrics() {
    let v: serde_json::Value = serde_json::from_str(&score_pair(&[3.0, 1.0], &[1.0, 3.0], 0.1, 3.0).unwrap()).unwrap();
    let d: Vec<f64> = v["metrics"].as_array().unwrap().iter().map(|m| m["dissimilarity"].as_f64().unwrap()).collect();
    assert!((d[0] - 2.0 / 3.0).abs() < 1e-12);
    assert!((d[1] - 0.5).abs() < 1e-12);
    assert!((d[2] - 0.5).abs() < 1e-12);
    // uniform weights: pooled = (2/3 + 1/2 + 1/2) / 3
    assert!((v["similarity"].as_f64().unwrap() - (1.0 - 5.0 / 9.0)).abs() < 1e-12);
}

#[test]
fn score_pair_rejects_bad_input() {
    assert!(score_pair(&[1.0], &[1.0, 2.0], 0.1, 3.0).is_err());
    assert!(score_pair(&[-1.0], &[1.0], 0.1, 3.0).is_err());
    assert!(score_pair(&[1.0], &[1.0], 0.5, 3.0).is_err());
}

#[test]
fn simulate_returns_report_and_summary() {
    let v: serde_json::Value = serde_json::from_str(&simulate(25.0, 10.0, 5, 1_000, 1).unwrap()).unwrap();
    assert_eq!(v["report"]["per_partition"].as_array().unwrap().len(), 5);
    assert_eq!(v["summary"]["scenario"], "1");
    assert_eq!(simulate(25.0, 10.0, 5, 1_000, 1).unwrap(), simulate(25.0, 10.0, 5, 1_000, 1).unwrap());
    assert!(simulate(25.0, -1.0, 5, 10, 1).is_err());
}

#[test]
fn allocation_map_orientation() {
    // partitions at (4, 0) and (0, 4) on a 5 x 5 grid over [0, 4]^2; row 0 is y = 4
    let grid = allocation_map(&[4.0, 0.0, 0.0, 4.0], 5, 5, 4.0, 4.0, 0.1, 3.0).unwrap();
    assert_eq!(grid.len(), 25);
    assert_eq!(grid[4 * 5 + 4], 0); // (4, 0)
    assert_eq!(grid[0], 1); // (0, 4)
    assert_eq!(grid[3 * 5 + 4], 0); // (4, 1)
    assert_eq!(grid[5 + 1], 1); // (1, 3)
    assert!(allocation_map(&[1.0], 2, 2, 1.0, 1.0, 0.1, 3.0).is_err());
}
