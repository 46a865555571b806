//! Report-only consistency checks over a live engine.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::engine::Engine;
use crate::ensemble::ensemble_similarity;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckResult {
    pub fn new(name: impl Into<String>, problems: Vec<String>, ok_detail: impl Into<String>) -> Self {
        let passed = problems.is_empty();
        Self {
            name: name.into(),
            passed,
            detail: if passed { ok_detail.into() } else { problems.join("; ") },
        }
    }
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{tag} {}: {}", self.name, self.detail)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub checks: Vec<CheckResult>,
}

impl AuditReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failed(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }
}

impl fmt::Display for AuditReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{c}")?;
        }
        Ok(())
    }
}

impl Engine {
    pub fn audit(&self) -> AuditReport {
        let cfg = self.config();
        let parts = self.partitions();
        let mut checks = Vec::new();

        let mut problems = Vec::new();
        let expected = self.initial_mass() + self.accepted();
        if self.total_mass() != expected {
            problems.push(format!("trees hold {} points, expected {expected}", self.total_mass()));
        }
        for p in parts {
            let leaf: u64 = p.tree.leaf_entries().map(|e| e.cf.count()).sum();
            if leaf != p.tree.len() {
                problems.push(format!("partition {}: leaf mass {leaf} vs {} inserted", p.partition_id, p.tree.len()));
            }
        }
        checks.push(CheckResult::new("mass_conservation", problems, format!("{expected} points")));

        let problems: Vec<String> = parts
            .iter()
            .flat_map(|p| p.tree.audit().into_iter().map(move |m| format!("partition {}: {m}", p.partition_id)))
            .collect();
        checks.push(CheckResult::new("cf_tree_consistency", problems, format!("{} trees", parts.len())));

        let mut problems = Vec::new();
        for p in parts {
            if p.synopsis.partition_id() != p.partition_id {
                problems.push(format!("partition {} carries synopsis of {}", p.partition_id, p.synopsis.partition_id()));
            }
            if let Err(m) = p.synopsis.check(cfg.alpha) {
                problems.push(format!("partition {}: {m}", p.partition_id));
            }
            if p.pending >= cfg.refresh_interval {
                problems.push(format!("partition {}: {} insertions pending", p.partition_id, p.pending));
            }
        }
        checks.push(CheckResult::new("synopsis_alpha_compliance", problems, format!("alpha = {}", cfg.alpha)));

        let mut problems = Vec::new();
        let probe = probe_vector(self);
        let params = cfg.ensemble_params();
        for p in parts {
            match ensemble_similarity(&probe, &p.synopsis, &params) {
                Ok(score) => {
                    if !score.weights.is_convex() {
                        problems.push(format!("partition {}: weights {:?}", p.partition_id, score.weights.as_slice()));
                    }
                    let pooled: f64 = score
                        .per_metric
                        .iter()
                        .zip(score.weights.as_slice())
                        .map(|(o, w)| o.dissimilarity * w)
                        .sum();
                    if (pooled - score.pooled_dissimilarity).abs() > 1e-12
                        || (score.similarity - (1.0 - score.pooled_dissimilarity)).abs() > 1e-12
                    {
                        problems.push(format!("partition {}: pooled score inconsistent", p.partition_id));
                    }
                }
                Err(e) => problems.push(format!("partition {}: {e}", p.partition_id)),
            }
        }
        checks.push(CheckResult::new("weight_convexity", problems, "probe at mean of leading centroids"));

        AuditReport { checks }
    }
}

/// Average of each partition's leading centroid.
fn probe_vector(engine: &Engine) -> Vec<f64> {
    let dim = engine.config().dimension;
    let parts = engine.partitions();
    let mut probe = vec![0.0; dim];
    for p in parts {
        if let Some(c) = p.synopsis.centroids().first() {
            for (a, b) in probe.iter_mut().zip(c) {
                *a += b / parts.len() as f64;
            }
        }
    }
    probe
}

#[cfg(test)]
mod tests {
    use crate::engine::{Engine, EngineConfig, ThresholdPolicy};

    fn engine() -> Engine {
        let config = EngineConfig {
            partitions: 2,
            dimension: 2,
            alpha: 3,
            branching: 3,
            threshold: ThresholdPolicy::Fixed(0.5),
            ..EngineConfig::default()
        };
        let a: Vec<Vec<f64>> = (0..30).map(|i| vec![f64::from(i), 1.0]).collect();
        let b: Vec<Vec<f64>> = (0..30).map(|i| vec![1.0, f64::from(i) + 50.0]).collect();
        Engine::new(config, &[a, b]).unwrap()
    }

    #[test]
    fn fresh_engine_passes() {
        let report = engine().audit();
        assert!(report.all_passed(), "{report}");
        assert_eq!(report.checks.len(), 4);
    }

    #[test]
    fn corrupted_leaf_fails_consistency() {
        let mut e = engine();
        e.partition_tree_mut(0).perturb_leaf_linear_sum(1, 3.0);
        let report = e.audit();
        assert!(!report.get("cf_tree_consistency").unwrap().passed);
        assert!(report.get("mass_conservation").unwrap().passed);
    }
}
