//! The allocation engine: routes each incoming vector to the partition
//! whose synopsis it resembles most, then folds it into that partition's
//! CF-tree.
//!
//! Peers are simulated in-process. A synopsis refresh stands in for a
//! broadcast to the other nodes and is counted as one disseminated message.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::ensemble::{ensemble_similarity, EnsembleParams, EnsembleScore, DEFAULT_K, DEFAULT_THETA};
use crate::error::{check_abundance, check_dim, Error, Result};
use crate::metrics::Metric;
use crate::synopsis::{Synopsis, DEFAULT_ALPHA};
use crate::tree::{CfTree, DEFAULT_BRANCHING};

/// How each partition's leaf radius threshold is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "value")]
pub enum ThresholdPolicy {
    /// The same threshold for every partition.
    Fixed(f64),
    /// `factor` times the RMS per-dimension standard deviation of the
    /// partition's initial data.
    DataScaled(f64),
}

impl ThresholdPolicy {
    /// Threshold floor used when the data-scaled rule sees zero spread.
    pub const MIN_THRESHOLD: f64 = 1e-9;

    pub fn resolve(&self, initial: &[Vec<f64>]) -> f64 {
        match *self {
            ThresholdPolicy::Fixed(t) => t,
            ThresholdPolicy::DataScaled(factor) => {
                let Some(first) = initial.first() else {
                    return Self::MIN_THRESHOLD;
                };
                let dim = first.len();
                let n = initial.len() as f64;
                let mut mean = vec![0.0; dim];
                for row in initial {
                    for (m, v) in mean.iter_mut().zip(row) {
                        *m += v / n;
                    }
                }
                let mut var_sum = 0.0;
                for row in initial {
                    for (m, v) in mean.iter().zip(row) {
                        var_sum += (v - m) * (v - m) / n;
                    }
                }
                let rms_std = (var_sum / dim as f64).sqrt();
                (factor * rms_std).max(Self::MIN_THRESHOLD)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EngineConfig {
    pub partitions: usize,
    pub dimension: usize,
    pub alpha: u64,
    pub branching: usize,
    pub threshold: ThresholdPolicy,
    pub theta: f64,
    pub k: f64,
    /// Number of insertions into a partition between synopsis refreshes.
    pub refresh_interval: u64,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            partitions: 5,
            dimension: 5,
            alpha: DEFAULT_ALPHA,
            branching: DEFAULT_BRANCHING,
            threshold: ThresholdPolicy::DataScaled(0.5),
            theta: DEFAULT_THETA,
            k: DEFAULT_K,
            refresh_interval: 1,
        }
    }
}

impl EngineConfig {
    pub fn ensemble_params(&self) -> EnsembleParams {
        EnsembleParams {
            theta: self.theta,
            k: self.k,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("partitions", self.partitions as u64),
            ("dimension", self.dimension as u64),
            ("alpha", self.alpha),
            ("refresh_interval", self.refresh_interval),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(Error::Config(format!("{name} must be positive")));
            }
        }
        if self.branching < 2 {
            return Err(Error::Config("branching factor must be at least 2".into()));
        }
        match self.threshold {
            ThresholdPolicy::Fixed(t) | ThresholdPolicy::DataScaled(t) if !(t.is_finite() && t > 0.0) => {
                return Err(Error::Config(format!("threshold parameter must be positive, got {t}")));
            }
            _ => {}
        }
        self.ensemble_params().validate(Metric::ALL.len())
    }
}

#[derive(Debug, Clone)]
pub struct PartitionState {
    pub partition_id: usize,
    pub tree: CfTree,
    pub synopsis: Synopsis,
    pub pending: u64,
}

/// Outcome of routing one vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AllocationRecord {
    pub t: u64,
    pub vector: Vec<f64>,
    /// Zero-based index of the chosen partition.
    pub chosen: usize,
    pub scores: Vec<EnsembleScore>,
}

impl AllocationRecord {
    /// One JSON object on a single line: `t`, the one-based chosen
    /// partition and every partition's similarity to 12 significant digits.
    pub fn to_json_line(&self) -> String {
        let mut line = format!("{{\"t\":{},\"chosen\":{},\"similarities\":[", self.t, self.chosen + 1);
        for (i, s) in self.scores.iter().enumerate() {
            if i > 0 {
                line.push(',');
            }
            let _ = write!(line, "{:.11e}", s.similarity);
        }
        line.push_str("]}");
        line
    }
}

/// Scores `x` against every synopsis and returns the zero-based argmax
/// (lowest index on ties) together with all scores. Does not mutate.
pub fn allocate(x: &[f64], synopses: &[Synopsis], params: &EnsembleParams) -> Result<(usize, Vec<EnsembleScore>)> {
    allocate_over(x, synopses.iter(), params)
}

fn allocate_over<'a>(
    x: &[f64],
    synopses: impl Iterator<Item = &'a Synopsis>,
    params: &EnsembleParams,
) -> Result<(usize, Vec<EnsembleScore>)> {
    let scores = synopses
        .map(|s| {
            check_dim(s.dim(), x.len())?;
            ensemble_similarity(x, s, params)
        })
        .collect::<Result<Vec<_>>>()?;
    if scores.is_empty() {
        return Err(Error::EmptySet);
    }
    let mut chosen = 0;
    for (i, s) in scores.iter().enumerate().skip(1) {
        if s.similarity > scores[chosen].similarity {
            chosen = i;
        }
    }
    Ok((chosen, scores))
}

#[derive(Debug, Clone)]
pub struct Engine {
    config: EngineConfig,
    partitions: Vec<PartitionState>,
    initial_mass: u64,
    next_t: u64,
    accepted: u64,
    rejected: u64,
    messages: u64,
}

impl Engine {
    /// Builds one CF-tree per partition from its initial rows and extracts
    /// the first synopses (version 0). Every partition needs at least one row.
    pub fn new(config: EngineConfig, initial: &[Vec<Vec<f64>>]) -> Result<Self> {
        config.validate()?;
        if initial.len() != config.partitions {
            return Err(Error::Config(format!(
                "{} initial partitions supplied for N = {}",
                initial.len(),
                config.partitions
            )));
        }
        let mut partitions = Vec::with_capacity(initial.len());
        let mut initial_mass = 0;
        for (id, rows) in initial.iter().enumerate() {
            if rows.is_empty() {
                return Err(Error::EmptyTree);
            }
            let threshold = config.threshold.resolve(rows);
            let mut tree = CfTree::new(config.dimension, config.branching, threshold)?;
            for row in rows {
                tree.insert(row)?;
            }
            initial_mass += tree.len();
            let synopsis = Synopsis::extract(&tree, config.alpha, id, 0)?;
            partitions.push(PartitionState {
                partition_id: id,
                tree,
                synopsis,
                pending: 0,
            });
        }
        Ok(Self {
            config,
            partitions,
            initial_mass,
            next_t: 0,
            accepted: 0,
            rejected: 0,
            messages: 0,
        })
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    pub fn partitions(&self) -> &[PartitionState] {
        &self.partitions
    }

    pub fn synopses(&self) -> Vec<Synopsis> {
        self.partitions.iter().map(|p| p.synopsis.clone()).collect()
    }

    pub fn initial_mass(&self) -> u64 {
        self.initial_mass
    }

    pub fn accepted(&self) -> u64 {
        self.accepted
    }

    pub fn rejected(&self) -> u64 {
        self.rejected
    }

    pub fn messages_disseminated(&self) -> u64 {
        self.messages
    }

    /// Scores `x` against the current synopses without changing anything.
    pub fn allocate(&self, x: &[f64]) -> Result<(usize, Vec<EnsembleScore>)> {
        allocate_over(x, self.partitions.iter().map(|p| &p.synopsis), &self.config.ensemble_params())
    }

    /// Routes `x`, inserts it into the chosen partition and refreshes that
    /// partition's synopsis once `refresh_interval` insertions have piled
    /// up. An invalid vector is counted and leaves the state untouched.
    pub fn ingest(&mut self, x: &[f64]) -> Result<AllocationRecord> {
        if let Err(e) = check_dim(self.config.dimension, x.len()).and_then(|_| check_abundance(x)) {
            self.rejected += 1;
            return Err(e);
        }
        let (chosen, scores) = self.allocate(x)?;
        let alpha = self.config.alpha;
        let interval = self.config.refresh_interval;
        let part = &mut self.partitions[chosen];
        part.tree.insert(x)?;
        part.pending += 1;
        if part.pending >= interval {
            let version = part.synopsis.version() + 1;
            part.synopsis = Synopsis::extract(&part.tree, alpha, chosen, version)?;
            part.pending = 0;
            self.messages += 1;
        }
        let t = self.next_t;
        self.next_t += 1;
        self.accepted += 1;
        Ok(AllocationRecord {
            t,
            vector: x.to_vec(),
            chosen,
            scores,
        })
    }

    /// Total points held across all partition trees.
    pub fn total_mass(&self) -> u64 {
        self.partitions.iter().map(|p| p.tree.len()).sum()
    }

    #[doc(hidden)]
    pub fn partition_tree_mut(&mut self, id: usize) -> &mut CfTree {
        &mut self.partitions[id].tree
    }
}
