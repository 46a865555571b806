//! End-to-end scenario runs and their reports.
//!
//! A run seeds N partitions (from the air-quality file or synthetically),
//! streams Gaussian vectors through the [`Engine`] and reports exact
//! per-partition statistics over every resident vector.

use std::fmt;
use std::path::PathBuf;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::data::{derived_rng, load_air_quality, random_split, synth_stream, GaussianVectors, LoadOptions, ScenarioSpec};
use crate::engine::{AllocationRecord, Engine, EngineConfig};
use crate::error::{Error, Result};
use crate::stats::{partition_stats, Moments};

const STREAM_SPLIT: u64 = 1;
const STREAM_SYNTH: u64 = 2;
const STREAM_INIT_BASE: u64 = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    /// μ = 25, σ = 10
    One,
    /// μ = 25, σ = 20
    Two,
    /// μ = 50, σ = 50
    Three,
    Custom { mu: f64, sigma: f64 },
}

impl Scenario {
    pub const PRESETS: [Scenario; 3] = [Scenario::One, Scenario::Two, Scenario::Three];

    pub fn mu(&self) -> f64 {
        match *self {
            Scenario::One | Scenario::Two => 25.0,
            Scenario::Three => 50.0,
            Scenario::Custom { mu, .. } => mu,
        }
    }

    pub fn sigma(&self) -> f64 {
        match *self {
            Scenario::One => 10.0,
            Scenario::Two => 20.0,
            Scenario::Three => 50.0,
            Scenario::Custom { sigma, .. } => sigma,
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scenario::One => f.write_str("1"),
            Scenario::Two => f.write_str("2"),
            Scenario::Three => f.write_str("3"),
            Scenario::Custom { .. } => f.write_str("custom"),
        }
    }
}

/// Synthetic seeding of the initial partitions, used when no dataset file
/// is given. Each partition draws `per_partition` vectors with independent
/// components of standard deviation `sigma_frac * sigma` (clamped at zero)
/// around a mean that is the scenario's `mu` displaced by `spread * sigma`
/// along a partition-specific zero-sum pattern (partition 1 is undisplaced).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyntheticInit {
    pub per_partition: usize,
    pub spread: f64,
    pub sigma_frac: f64,
}

impl Default for SyntheticInit {
    fn default() -> Self {
        Self {
            per_partition: 200,
            spread: 2.0,
            sigma_frac: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialData {
    Synthetic(SyntheticInit),
    Dataset { path: PathBuf, strict: bool },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub engine: EngineConfig,
    pub scenario: Scenario,
    pub vectors: usize,
    pub initial: InitialData,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            engine: EngineConfig::default(),
            scenario: Scenario::One,
            vectors: 10_000,
            initial: InitialData::Synthetic(SyntheticInit::default()),
            seed: 42,
        }
    }
}

impl RunConfig {
    pub fn with_scenario(mut self, scenario: Scenario) -> Self {
        self.scenario = scenario;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// The synthetic stream spec with its seed derived from the master seed.
    pub fn stream_spec(&self) -> ScenarioSpec {
        ScenarioSpec {
            mu: self.scenario.mu(),
            sigma: self.scenario.sigma(),
            count: self.vectors,
            seed: derived_rng(self.seed, STREAM_SYNTH).random(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionReport {
    /// One-based.
    pub partition_id: usize,
    pub count: usize,
    pub initial_count: usize,
    pub synthetic_count: usize,
    /// Over every resident vector.
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    pub initial: Moments,
    /// `None` when the partition received no synthetic vector.
    pub synthetic: Option<Moments>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub scenario: String,
    pub gen_mu: f64,
    pub gen_sigma: f64,
    pub config: RunConfig,
    pub seed: u64,
    pub per_partition: Vec<PartitionReport>,
    /// One-based id of the partition that received the most synthetic vectors.
    pub majority_partition: usize,
    pub messages_disseminated: u64,
    pub rejected: u64,
}

impl RunReport {
    pub fn majority(&self) -> &PartitionReport {
        &self.per_partition[self.majority_partition - 1]
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// A finished run with everything needed for cross-checks.
#[derive(Debug, Clone)]
pub struct ScenarioRun {
    pub report: RunReport,
    pub engine: Engine,
    pub initial: Vec<Vec<Vec<f64>>>,
    pub synthetic: Vec<Vec<Vec<f64>>>,
}

impl ScenarioRun {
    pub fn residents(&self, partition: usize) -> Vec<Vec<f64>> {
        self.initial[partition]
            .iter()
            .chain(&self.synthetic[partition])
            .cloned()
            .collect()
    }
}

pub fn run_scenario(config: &RunConfig) -> Result<RunReport> {
    Ok(run_scenario_with(config, |_| {})?.report)
}

/// Runs the full protocol, handing every allocation record to `on_record`.
pub fn run_scenario_with(config: &RunConfig, mut on_record: impl FnMut(&AllocationRecord)) -> Result<ScenarioRun> {
    let mut engine_config = config.engine.clone();
    let initial = initial_partitions(config, &mut engine_config)?;
    let stream = if config.vectors == 0 {
        Vec::new()
    } else {
        synth_stream(&config.stream_spec(), engine_config.dimension)?
    };
    let mut engine = Engine::new(engine_config, &initial)?;
    let mut synthetic = vec![Vec::new(); initial.len()];
    for x in stream {
        let record = engine.ingest(&x)?;
        on_record(&record);
        synthetic[record.chosen].push(x);
    }

    let mut per_partition = Vec::with_capacity(initial.len());
    for (i, (init, synth)) in initial.iter().zip(&synthetic).enumerate() {
        let residents: Vec<Vec<f64>> = init.iter().chain(synth).cloned().collect();
        let all = partition_stats(&residents)?;
        per_partition.push(PartitionReport {
            partition_id: i + 1,
            count: residents.len(),
            initial_count: init.len(),
            synthetic_count: synth.len(),
            mean: all.mean,
            std: all.std,
            initial: partition_stats(init)?,
            synthetic: if synth.is_empty() { None } else { Some(partition_stats(synth)?) },
        });
    }
    let mut majority = 0;
    for (i, p) in per_partition.iter().enumerate() {
        if p.synthetic_count > per_partition[majority].synthetic_count {
            majority = i;
        }
    }
    let report = RunReport {
        scenario: config.scenario.to_string(),
        gen_mu: config.scenario.mu(),
        gen_sigma: config.scenario.sigma(),
        config: config.clone(),
        seed: config.seed,
        per_partition,
        majority_partition: majority + 1,
        messages_disseminated: engine.messages_disseminated(),
        rejected: engine.rejected(),
    };
    Ok(ScenarioRun {
        report,
        engine,
        initial,
        synthetic,
    })
}

fn initial_partitions(config: &RunConfig, engine: &mut EngineConfig) -> Result<Vec<Vec<Vec<f64>>>> {
    let n = engine.partitions;
    if n == 0 {
        return Err(Error::Config("partitions must be positive".into()));
    }
    match &config.initial {
        InitialData::Dataset { path, strict } => {
            let ds = load_air_quality(path, LoadOptions { strict: *strict })?;
            engine.dimension = ds.dim();
            let split_seed = derived_rng(config.seed, STREAM_SPLIT).random();
            let parts = random_split(ds.len(), n, split_seed)?;
            Ok(parts
                .into_iter()
                .map(|idx| idx.into_iter().map(|i| ds.rows[i].clone()).collect())
                .collect())
        }
        InitialData::Synthetic(init) => {
            if init.per_partition == 0 {
                return Err(Error::Config("init_per_partition must be positive".into()));
            }
            if !(init.sigma_frac > 0.0 && init.spread.is_finite()) {
                return Err(Error::Config("synthetic init needs sigma_frac > 0 and a finite spread".into()));
            }
            let (mu, sigma) = (config.scenario.mu(), config.scenario.sigma());
            (0..n)
                .map(|i| {
                    let means = init_means(i, engine.dimension, mu, init.spread * sigma);
                    let rng = derived_rng(config.seed, STREAM_INIT_BASE + i as u64);
                    let gen = GaussianVectors::new(&means, init.sigma_frac * sigma, rng)?;
                    Ok(gen.take(init.per_partition).collect())
                })
                .collect()
        }
    }
}

/// Mean vector of synthetic initial partition `i`. Partition 0 sits at the
/// generation mean; partitions `2q+1` and `2q+2` are displaced in opposite
/// directions along the `q`-th zero-sum sign pattern, so every initial
/// centroid has the same component total.
fn init_means(i: usize, dim: usize, mu: f64, offset: f64) -> Vec<f64> {
    if i == 0 {
        return vec![mu; dim];
    }
    let q = (i - 1) / 2;
    let sign = if i % 2 == 1 { 1.0 } else { -1.0 };
    if dim == 1 {
        return vec![mu + sign * (1 + q) as f64 * offset];
    }
    // bit patterns over the dimension index; cycle with growing magnitude
    // once they run out
    let bits = (usize::BITS - (dim - 1).leading_zeros()) as usize;
    let bit = q % bits;
    let scale = (1 + q / bits) as f64;
    let raw: Vec<f64> = (0..dim)
        .map(|j| if (j >> bit) & 1 == 0 { 1.0 } else { -1.0 })
        .collect();
    let shift = raw.iter().sum::<f64>() / dim as f64;
    raw.iter().map(|r| mu + sign * scale * (r - shift) * offset).collect()
}

/// One row of the cross-scenario summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub scenario: String,
    pub gen_mu: f64,
    pub gen_sigma: f64,
    /// Synthetic vectors allocated to the majority partition.
    pub majority_count: usize,
    pub mean_min: f64,
    pub mean_max: f64,
    pub std_min: f64,
    pub std_max: f64,
}

pub fn summary_table(reports: &[RunReport]) -> Vec<SummaryRow> {
    reports
        .iter()
        .map(|r| {
            let m = r.majority();
            let (mean_min, mean_max) = min_max(&m.mean);
            let (std_min, std_max) = min_max(&m.std);
            SummaryRow {
                scenario: r.scenario.clone(),
                gen_mu: r.gen_mu,
                gen_sigma: r.gen_sigma,
                majority_count: m.synthetic_count,
                mean_min,
                mean_max,
                std_min,
                std_max,
            }
        })
        .collect()
}

pub fn summary_csv(rows: &[SummaryRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row)?;
    }
    if rows.is_empty() {
        w.write_record(["scenario", "gen_mu", "gen_sigma", "majority_count", "mean_min", "mean_max", "std_min", "std_max"])?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Config(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn min_max(v: &[f64]) -> (f64, f64) {
    v.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(*x), hi.max(*x)))
}
