//! Proactive placement of streaming data vectors onto distributed
//! partitions.
//!
//! Each partition keeps a CF-tree of micro-clusters over the vectors it
//! hosts. Its synopsis (the micro-clusters holding at least α points) is
//! what the other nodes see. An incoming vector is compared with every
//! synopsis by three abundance dissimilarities (quantitative Jaccard,
//! Sørensen/Bray–Curtis and Kulczynski), the outcomes are fused by a linear
//! opinion pool with outlier-aware weights, and the vector goes to the
//! partition with the highest pooled similarity.
//!
//! ```
//! use synalloc::{allocate, EnsembleParams, Synopsis};
//!
//! let synopses = [
//!     Synopsis::from_mean(0, &[0.15, 0.0]).unwrap(),
//!     Synopsis::from_mean(1, &[1.9, 1.8]).unwrap(),
//! ];
//! let (chosen, _) = allocate(&[1.7, 2.0], &synopses, &EnsembleParams::default()).unwrap();
//! assert_eq!(chosen, 1);
//! ```

pub mod audit;
pub mod cf;
pub mod data;
pub mod engine;
pub mod ensemble;
pub mod error;
pub mod harness;
pub mod metrics;
pub mod stats;
pub mod synopsis;
pub mod tree;
pub mod validate;

pub use audit::{AuditReport, CheckResult};
pub use cf::ClusterFeature;
pub use data::{clamp_non_negative, load_air_quality, random_split, synth_stream, Dataset, LoadOptions, ScenarioSpec};
pub use engine::{allocate, AllocationRecord, Engine, EngineConfig, PartitionState, ThresholdPolicy};
pub use ensemble::{compute_weights, ensemble_similarity, opinion_pool, EnsembleParams, EnsembleScore, WeightVector};
pub use error::{Error, ErrorKind, Result};
pub use harness::{
    run_scenario, run_scenario_with, summary_csv, summary_table, InitialData, RunConfig, RunReport, Scenario,
    ScenarioRun, SummaryRow, SyntheticInit,
};
pub use metrics::{jaccard_dissim, kulczynski_dissim, sorensen_dissim, Metric, MetricOutcome};
pub use stats::{partition_stats, Moments};
pub use synopsis::Synopsis;
pub use tree::{CfTree, InsertOutcome};
