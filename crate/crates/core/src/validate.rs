//! Invariant probe suite: a randomized run followed by the engine audit
//! and independent checks of the metric, weighting and CF algebra.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::audit::{AuditReport, CheckResult};
use crate::cf::ClusterFeature;
use crate::data::derived_rng;
use crate::ensemble::compute_weights;
use crate::error::Result;
use crate::harness::{run_scenario_with, RunConfig, ScenarioRun};
use crate::metrics::Metric;
use crate::stats::partition_stats;

const STREAM_PROBES: u64 = 77;

/// `|a - b| <= tol * max(|a|, |b|)`, with a tiny absolute floor for zeros.
pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-12)
}

pub fn validate(config: &RunConfig) -> Result<AuditReport> {
    config.engine.validate()?;
    let run = run_scenario_with(config, |_| {})?;
    let mut report = run.engine.audit();
    let mut rng = derived_rng(config.seed, STREAM_PROBES);

    report.checks.push(conservation(&run));
    report.checks.push(cf_raw_moments(&run));
    report.checks.push(metric_properties(&mut rng, 2_000));
    report.checks.push(three_metric_weights(&mut rng, 10_000));
    report.checks.push(cf_additivity(&mut rng, 200));

    let rerun = run_scenario_with(config, |_| {})?;
    let same = run.report.to_json()? == rerun.report.to_json()?;
    report.checks.push(CheckResult::new(
        "determinism",
        if same { vec![] } else { vec!["reports differ between identical runs".into()] },
        "identical report on replay",
    ));
    Ok(report)
}

fn conservation(run: &ScenarioRun) -> CheckResult {
    let resident: usize = run.report.per_partition.iter().map(|p| p.count).sum();
    let initial: usize = run.initial.iter().map(Vec::len).sum();
    let expected = initial + run.engine.accepted() as usize;
    let problems = if resident == expected {
        vec![]
    } else {
        vec![format!("{resident} resident vectors, expected {expected}")]
    };
    CheckResult::new("resident_conservation", problems, format!("{resident} vectors"))
}

/// Root-CF moments against raw-vector moments, 1e-6 relative.
pub fn cf_raw_moments(run: &ScenarioRun) -> CheckResult {
    let mut problems = Vec::new();
    let mut worst = 0.0f64;
    for (i, p) in run.engine.partitions().iter().enumerate() {
        let root = p.tree.root_cf();
        let (Ok(cf_mean), Ok(cf_std)) = (root.centroid(), root.std_dev()) else {
            problems.push(format!("partition {i}: empty tree"));
            continue;
        };
        let raw = match partition_stats(&run.residents(i)) {
            Ok(m) => m,
            Err(e) => {
                problems.push(format!("partition {i}: {e}"));
                continue;
            }
        };
        for (a, b) in cf_mean.iter().chain(&cf_std).zip(raw.mean.iter().chain(&raw.std)) {
            let rel = (a - b).abs() / a.abs().max(b.abs()).max(1e-12);
            worst = worst.max(rel);
            if !rel_close(*a, *b, 1e-6) {
                problems.push(format!("partition {i}: CF {a} vs raw {b}"));
            }
        }
    }
    CheckResult::new("cf_raw_moments", problems, format!("max relative gap {worst:.2e}"))
}

fn random_abundance(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    (0..dim)
        .map(|_| if rng.random_bool(0.1) { 0.0 } else { rng.random_range(0.0..100.0) })
        .collect()
}

pub fn metric_properties(rng: &mut ChaCha8Rng, trials: usize) -> CheckResult {
    let mut problems = Vec::new();
    for _ in 0..trials {
        let dim = rng.random_range(1..8);
        let x = random_abundance(rng, dim);
        let s = random_abundance(rng, dim);
        let c = rng.random_range(0.01..100.0);
        let xs: Vec<f64> = x.iter().map(|v| v * c).collect();
        let ss: Vec<f64> = s.iter().map(|v| v * c).collect();
        let mut values = [0.0; 3];
        for (slot, m) in values.iter_mut().zip(Metric::ALL) {
            let (Ok(a), Ok(b), Ok(scaled)) = (m.dissimilarity(&x, &s), m.dissimilarity(&s, &x), m.dissimilarity(&xs, &ss)) else {
                problems.push(format!("{}: domain error on valid input", m.name()));
                continue;
            };
            if !(0.0..=1.0).contains(&a) {
                problems.push(format!("{}: {a} out of [0,1]", m.name()));
            }
            if (a - b).abs() > 1e-12 {
                problems.push(format!("{}: asymmetric {a} vs {b}", m.name()));
            }
            if (a - scaled).abs() > 1e-12 {
                problems.push(format!("{}: not scale covariant {a} vs {scaled}", m.name()));
            }
            *slot = a;
        }
        let [j, s2, _] = values;
        if (j - 2.0 * s2 / (1.0 + s2)).abs() > 1e-12 {
            problems.push(format!("jaccard {j} vs 2s/(1+s) with s = {s2}"));
        }
        if problems.len() > 10 {
            break;
        }
    }
    CheckResult::new("metric_properties", problems, format!("{trials} random pairs"))
}

pub fn three_metric_weights(rng: &mut ChaCha8Rng, trials: usize) -> CheckResult {
    let mut problems = Vec::new();
    for _ in 0..trials {
        let o: [f64; 3] = std::array::from_fn(|_| rng.random_range(0.0..=1.0));
        match compute_weights(&o, 0.1, 3.0) {
            Ok(w) if w.as_slice() == [1.0 / 3.0; 3] => {}
            Ok(w) => problems.push(format!("{o:?} gave {:?}", w.as_slice())),
            Err(e) => problems.push(e.to_string()),
        }
        if problems.len() > 10 {
            break;
        }
    }
    CheckResult::new("three_metric_uniform_weights", problems, format!("{trials} random outcome triples"))
}

/// Splits random point sets in two and compares the merged features with
/// sums recomputed directly over the points.
pub fn cf_additivity(rng: &mut ChaCha8Rng, trials: usize) -> CheckResult {
    let mut problems = Vec::new();
    for _ in 0..trials {
        let dim = rng.random_range(1..6);
        let n = rng.random_range(2..60);
        let points: Vec<Vec<f64>> = (0..n).map(|_| random_abundance(rng, dim)).collect();
        let cut = rng.random_range(1..n);
        let left = ClusterFeature::from_points(dim, points[..cut].iter().map(Vec::as_slice));
        let right = ClusterFeature::from_points(dim, points[cut..].iter().map(Vec::as_slice));
        let merged = match (left, right) {
            (Ok(l), Ok(r)) => l.merge(&r),
            (Err(e), _) | (_, Err(e)) => Err(e),
        };
        let merged = match merged {
            Ok(m) => m,
            Err(e) => {
                problems.push(e.to_string());
                continue;
            }
        };
        if merged.count() != n as u64 {
            problems.push(format!("L = {} for {n} points", merged.count()));
        }
        for j in 0..dim {
            let ls: f64 = points.iter().map(|p| p[j]).sum();
            let ss: f64 = points.iter().map(|p| p[j] * p[j]).sum();
            if !rel_close(merged.linear_sum()[j], ls, 1e-9) || !rel_close(merged.square_sum()[j], ss, 1e-9) {
                problems.push(format!("dimension {j} sums disagree"));
            }
        }
    }
    CheckResult::new("cf_additivity", problems, format!("{trials} random splits"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::RunConfig;

    #[test]
    fn short_default_run_validates() {
        let cfg = RunConfig {
            vectors: 500,
            ..RunConfig::default()
        };
        let report = validate(&cfg).unwrap();
        assert!(report.all_passed(), "{report}");
    }

    #[test]
    fn rejects_bad_theta() {
        let mut cfg = RunConfig::default();
        cfg.engine.theta = 0.5;
        assert!(matches!(validate(&cfg), Err(crate::error::Error::Config(_))));
    }
}
